import logging
from typing import Any, Dict

from TaskMapper.exceptions import DomainError, NoRouteError, ValidationError
from TaskMapper.schema import (
    check_keys, dump_document, get_bool, get_list, get_number, get_str, load_document,
)

from .entities import Host, Link, PlatformModel, Route

logger = logging.getLogger(__name__)


class PlatformParserService:
    """
    Servicio para leer, validar y escribir descripciones de plataforma
    """

    def parse(self, path) -> PlatformModel:
        document = load_document(path)
        platform = self.from_document(document)
        self.validate(platform)
        logger.info("Plataforma leída de %s: %s", path, platform)
        return platform

    def from_document(self, document: Dict[str, Any]) -> PlatformModel:
        check_keys(document, 'plataforma', optional=('hosts', 'links', 'routes'))

        hosts = []
        for item in get_list(document, 'hosts', 'plataforma'):
            check_keys(item, 'host', required=('id', 'node', 'speed', 'p_idle', 'p_full'), optional=('frontend',))
            hosts.append(Host(
                id=get_str(item, 'id', 'host'),
                node=str(item['node']),
                speed=get_number(item, 'speed', 'host'),
                p_idle=get_number(item, 'p_idle', 'host'),
                p_full=get_number(item, 'p_full', 'host'),
                is_frontend=get_bool(item, 'frontend', 'host'),
            ))

        links = []
        for item in get_list(document, 'links', 'plataforma'):
            check_keys(item, 'enlace', required=('id', 'bandwidth', 'latency'))
            links.append(Link(
                id=get_str(item, 'id', 'enlace'),
                bandwidth=get_number(item, 'bandwidth', 'enlace'),
                latency=get_number(item, 'latency', 'enlace'),
            ))

        # Las rutas simétricas se materializan justo después de la declarada
        routes = []
        for item in get_list(document, 'routes', 'plataforma'):
            check_keys(item, 'ruta', required=('src', 'dst', 'links'), optional=('symmetric',))
            src = get_str(item, 'src', 'ruta')
            dst = get_str(item, 'dst', 'ruta')
            link_ids = tuple(str(link_id) for link_id in get_list(item, 'links', 'ruta'))
            routes.append(Route(src=src, dst=dst, links=link_ids))
            if get_bool(item, 'symmetric', 'ruta') and src != dst:
                routes.append(Route(src=dst, dst=src, links=tuple(reversed(link_ids))))

        return PlatformModel(hosts=tuple(hosts), links=tuple(links), routes=tuple(routes))

    def validate(self, platform: PlatformModel) -> None:
        """
        Verifica identificadores únicos, parámetros físicos, un único frontend
        y que todas las rutas referencien hosts y enlaces existentes
        """
        seen = set()
        for host in platform.hosts:
            if host.id in seen:
                raise ValidationError(f"Host duplicado: '{host.id}'", entity=host.id)
            seen.add(host.id)
            if not host.speed > 0:
                raise ValidationError(f"El host '{host.id}' debe tener velocidad positiva", entity=host.id)
            if not host.p_idle >= 0:
                raise ValidationError(f"El host '{host.id}' tiene potencia en reposo negativa", entity=host.id)
            if not host.p_full >= host.p_idle:
                raise ValidationError(
                    f"El host '{host.id}' tiene p_full ({host.p_full}) menor que p_idle ({host.p_idle})",
                    entity=host.id,
                )

        frontends = [host.id for host in platform.hosts if host.is_frontend]
        if len(frontends) != 1:
            detail = 'ninguno' if not frontends else ', '.join(frontends)
            raise ValidationError(f"La plataforma debe declarar exactamente un host frontend (declarados: {detail})")

        seen = set()
        for link in platform.links:
            if link.id in seen:
                raise ValidationError(f"Enlace duplicado: '{link.id}'", entity=link.id)
            seen.add(link.id)
            if not link.bandwidth > 0:
                raise ValidationError(f"El enlace '{link.id}' debe tener ancho de banda positivo", entity=link.id)
            if not link.latency >= 0:
                raise ValidationError(f"El enlace '{link.id}' tiene latencia negativa", entity=link.id)

        pairs = set()
        for route in platform.routes:
            for endpoint in (route.src, route.dst):
                if endpoint not in platform.host_by_id:
                    raise ValidationError(
                        f"La ruta {route.src} -> {route.dst} referencia el host inexistente '{endpoint}'",
                        entity=endpoint,
                    )
            # route(h, h) es siempre la ruta vacía
            if route.src == route.dst and route.links:
                raise ValidationError(
                    f"La ruta de '{route.src}' hacia sí mismo es implícita (acceso local) y no puede tener enlaces",
                    entity=route.src,
                )
            for link_id in route.links:
                if link_id not in platform.link_by_id:
                    raise ValidationError(
                        f"La ruta {route.src} -> {route.dst} referencia el enlace inexistente '{link_id}'",
                        entity=link_id,
                    )
            if (route.src, route.dst) in pairs:
                raise ValidationError(f"Ruta duplicada: {route.src} -> {route.dst}", entity=f"{route.src}->{route.dst}")
            pairs.add((route.src, route.dst))

    def route_between(self, platform: PlatformModel, src: str, dst: str) -> Route:
        if src == dst and src in platform.host_by_id:
            return Route(src=src, dst=dst)
        try:
            return platform.route_table[(src, dst)]
        except KeyError:
            raise NoRouteError(f"No hay ruta declarada de '{src}' a '{dst}'") from None

    def power_at(self, host: Host, utilization: float) -> float:
        if not 0.0 <= utilization <= 1.0:
            raise DomainError(f"Utilización fuera de [0, 1] para el host '{host.id}': {utilization}")
        if utilization == 1.0:
            return host.p_full
        return host.p_idle + (host.p_full - host.p_idle) * utilization

    def to_document(self, platform: PlatformModel) -> Dict[str, Any]:
        return {
            'hosts': [
                {
                    'id': host.id,
                    'node': host.node,
                    'speed': host.speed,
                    'p_idle': host.p_idle,
                    'p_full': host.p_full,
                    'frontend': host.is_frontend,
                }
                for host in platform.hosts
            ],
            'links': [{'id': link.id, 'bandwidth': link.bandwidth, 'latency': link.latency} for link in platform.links],
            'routes': [
                {'src': route.src, 'dst': route.dst, 'links': list(route.links), 'symmetric': False}
                for route in platform.routes
            ],
        }

    def serialize(self, platform: PlatformModel, path) -> None:
        dump_document(self.to_document(platform), path)
        logger.info("Plataforma escrita en %s", path)


# Instancia global del servicio
platform_parser = PlatformParserService()


def parse_platform(path) -> PlatformModel:
    return platform_parser.parse(path)


def serialize_platform(platform: PlatformModel, path) -> None:
    platform_parser.serialize(platform, path)


def route_between(platform: PlatformModel, src: str, dst: str) -> Route:
    return platform_parser.route_between(platform, src, dst)


def power_at(host: Host, utilization: float) -> float:
    return platform_parser.power_at(host, utilization)
