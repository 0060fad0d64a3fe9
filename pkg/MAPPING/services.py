import logging
from typing import Any, Dict, Iterable, Optional

from TaskMapper.exceptions import MappingError, ValidationError
from TaskMapper.schema import check_keys, dump_document, get_list, get_str, load_document

from APPMODEL.entities import ApplicationModel
from APPMODEL.escience import ms2_runnable_ids
from PLATFORMS.entities import PlatformModel

from .entities import Mapping

logger = logging.getLogger(__name__)


class MappingService:
    """
    Lectura, escritura y validación de archivos de mapeo
    """

    def parse(self, path, app: Optional[ApplicationModel] = None, platform: Optional[PlatformModel] = None) -> Mapping:
        mapping = self.from_document(load_document(path))
        if app is not None and platform is not None:
            self.validate(mapping, app, platform)
        logger.info("Mapeo leído de %s: %s", path, mapping)
        return mapping

    def from_document(self, document: Dict[str, Any]) -> Mapping:
        check_keys(document, 'mapeo', optional=('runnables', 'labels'))
        return Mapping(
            runnable_to_host=self._entries(document, 'runnables', 'runnable'),
            label_to_host=self._entries(document, 'labels', 'etiqueta'),
        )

    def _entries(self, document, key, what) -> Dict[str, str]:
        entries = {}
        for item in get_list(document, key, 'mapeo'):
            check_keys(item, what, required=('id', 'host'))
            entity = get_str(item, 'id', what)
            if entity in entries:
                raise ValidationError(f"El {what} '{entity}' aparece más de una vez en el mapeo", entity=entity)
            entries[entity] = get_str(item, 'host', what)
        return entries

    def validate(self, mapping: Mapping, app: ApplicationModel, platform: PlatformModel) -> None:
        """
        El mapeo debe ser total sobre la aplicación y referenciar sólo hosts
        existentes; los errores nombran la entidad culpable
        """
        self._check_total('runnable', mapping.runnable_to_host, sorted(app.runnable_by_id))
        self._check_total('etiqueta', mapping.label_to_host, sorted(app.label_by_name))

        for entity, host in list(mapping.runnable_to_host.items()) + list(mapping.label_to_host.items()):
            if host not in platform.host_by_id:
                raise MappingError(f"'{entity}' está mapeado al host inexistente '{host}'", entity=host)

    def _check_total(self, what, assignment: Dict[str, str], expected: Iterable[str]) -> None:
        expected = list(expected)
        for entity in expected:
            if entity not in assignment:
                raise MappingError(f"El {what} '{entity}' no está mapeado", entity=entity)
        known = set(expected)
        for entity in sorted(assignment):
            if entity not in known:
                raise MappingError(f"El mapeo asigna el {what} desconocido '{entity}'", entity=entity)

    def to_document(self, mapping: Mapping) -> Dict[str, Any]:
        return {
            'runnables': [{'id': rid, 'host': host} for rid, host in sorted(mapping.runnable_to_host.items())],
            'labels': [{'id': name, 'host': host} for name, host in sorted(mapping.label_to_host.items())],
        }

    def serialize(self, mapping: Mapping, path) -> None:
        dump_document(self.to_document(mapping), path)
        logger.info("Mapeo escrito en %s", path)

    def ms2_distribution(self, app: ApplicationModel, mapping: Mapping, hosts: Iterable[str] = ()) -> Dict[str, float]:
        """
        Fracción de runnables MS2 por host; `hosts` fija el orden y añade los
        hosts sin runnables MS2 con fracción cero
        """
        ms2 = ms2_runnable_ids(app)
        distribution = {host: 0.0 for host in hosts}
        if not ms2:
            return distribution
        for rid in ms2:
            host = mapping.runnable_to_host[rid]
            distribution[host] = distribution.get(host, 0.0) + 1.0
        return {host: count / len(ms2) for host, count in distribution.items()}


# Instancia global del servicio
mapping_service = MappingService()


def parse_mapping(path, app: Optional[ApplicationModel] = None, platform: Optional[PlatformModel] = None) -> Mapping:
    return mapping_service.parse(path, app=app, platform=platform)


def serialize_mapping(mapping: Mapping, path) -> None:
    mapping_service.serialize(mapping, path)


def validate_mapping(mapping: Mapping, app: ApplicationModel, platform: PlatformModel) -> None:
    mapping_service.validate(mapping, app, platform)


def ms2_distribution(app: ApplicationModel, mapping: Mapping, hosts: Iterable[str] = ()) -> Dict[str, float]:
    return mapping_service.ms2_distribution(app, mapping, hosts)
