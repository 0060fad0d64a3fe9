"""
Validador estructural de trazas Paje.

Comprueba que cada evento usado esté definido en la cabecera con el número de
campos correcto, que las marcas de tiempo no decrezcan, que tipos y
contenedores existan antes de usarse y que cada PajeStartLink tenga su
PajeEndLink con la misma clave.
"""
import logging
import shlex
from typing import Dict, List, Tuple

from TaskMapper.exceptions import ValidationError

logger = logging.getLogger(__name__)


class PajeValidator:

    def __init__(self):
        self.problems: List[str] = []
        self.definitions: Dict[str, Tuple[str, Tuple[str, ...]]] = {}
        self.container_types = {'0'}
        self.state_types = set()
        self.link_types = set()
        self.values = set()
        self.containers = {'0'}
        self.open_links: Dict[str, int] = {}
        self.last_time = None
        self.events = 0

    def error(self, line_number, message):
        self.problems.append(f"línea {line_number}: {message}")

    def validate(self, path) -> List[str]:
        with open(path, encoding='utf-8') as handle:
            lines = handle.read().split('\n')

        current = None
        for number, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            if line.startswith('%'):
                current = self._header_line(number, line, current)
                continue
            if current is not None:
                self.error(number, "evento antes de cerrar %EndEventDef")
                current = None
            self._event_line(number, line)

        for key, number in sorted(self.open_links.items()):
            self.error(number, f"el enlace '{key}' nunca termina")
        logger.debug("Traza %s: %d eventos, %d problemas", path, self.events, len(self.problems))
        return self.problems

    def _header_line(self, number, line, current):
        parts = line[1:].split()
        if parts and parts[0] == 'EventDef':
            if len(parts) != 3:
                self.error(number, "%EventDef requiere nombre y número")
                return None
            return (parts[2], parts[1], [])
        if parts and parts[0] == 'EndEventDef':
            if current is None:
                self.error(number, "%EndEventDef sin %EventDef")
            else:
                event_id, name, fields = current
                self.definitions[event_id] = (name, tuple(fields))
            return None
        if current is None:
            self.error(number, "campo fuera de una definición de evento")
        elif len(parts) != 2:
            self.error(number, "un campo requiere nombre y tipo")
        else:
            current[2].append(parts[0])
        return current

    def _event_line(self, number, line):
        try:
            tokens = shlex.split(line)
        except ValueError as exc:
            self.error(number, f"línea mal formada: {exc}")
            return
        definition = self.definitions.get(tokens[0])
        if definition is None:
            self.error(number, f"evento '{tokens[0]}' no definido en la cabecera")
            return
        name, fields = definition
        if len(tokens) - 1 != len(fields):
            self.error(number, f"{name} espera {len(fields)} campos y tiene {len(tokens) - 1}")
            return
        record = dict(zip(fields, tokens[1:]))
        self.events += 1

        if 'Time' in record:
            try:
                time = float(record['Time'])
            except ValueError:
                self.error(number, f"marca de tiempo inválida '{record['Time']}'")
                return
            if self.last_time is not None and time < self.last_time:
                self.error(number, f"el tiempo retrocede de {self.last_time} a {time}")
            self.last_time = time

        handler = getattr(self, f"_check_{name}", None)
        if handler is not None:
            handler(number, record)

    def _require(self, number, known, value, what):
        if value not in known:
            self.error(number, f"{what} '{value}' no existe")

    def _check_PajeDefineContainerType(self, number, record):
        self._require(number, self.container_types, record['Type'], "tipo de contenedor")
        self.container_types.add(record['Alias'])

    def _check_PajeDefineStateType(self, number, record):
        self._require(number, self.container_types, record['Type'], "tipo de contenedor")
        self.state_types.add(record['Alias'])

    def _check_PajeDefineLinkType(self, number, record):
        for key in ('Type', 'StartContainerType', 'EndContainerType'):
            self._require(number, self.container_types, record[key], "tipo de contenedor")
        self.link_types.add(record['Alias'])

    def _check_PajeDefineEntityValue(self, number, record):
        self._require(number, self.state_types, record['Type'], "tipo de estado")
        self.values.add(record['Alias'])

    def _check_PajeCreateContainer(self, number, record):
        self._require(number, self.container_types, record['Type'], "tipo de contenedor")
        self._require(number, self.containers, record['Container'], "contenedor")
        if record['Alias'] in self.containers:
            self.error(number, f"el contenedor '{record['Alias']}' ya existe")
        self.containers.add(record['Alias'])

    def _check_PajeSetState(self, number, record):
        self._require(number, self.state_types, record['Type'], "tipo de estado")
        self._require(number, self.containers, record['Container'], "contenedor")
        self._require(number, self.values, record['Value'], "valor")

    def _check_PajeStartLink(self, number, record):
        self._require(number, self.link_types, record['Type'], "tipo de enlace")
        self._require(number, self.containers, record['Container'], "contenedor")
        self._require(number, self.containers, record['StartContainer'], "contenedor")
        if record['Key'] in self.open_links:
            self.error(number, f"el enlace '{record['Key']}' ya está abierto")
        self.open_links[record['Key']] = number

    def _check_PajeEndLink(self, number, record):
        self._require(number, self.link_types, record['Type'], "tipo de enlace")
        self._require(number, self.containers, record['Container'], "contenedor")
        self._require(number, self.containers, record['EndContainer'], "contenedor")
        if self.open_links.pop(record['Key'], None) is None:
            self.error(number, f"el enlace '{record['Key']}' termina sin haber empezado")


def validate_paje(path) -> List[str]:
    """Retorna la lista de problemas estructurales de la traza (vacía si es válida)"""
    return PajeValidator().validate(path)


def check_paje(path) -> None:
    problems = validate_paje(path)
    if problems:
        raise ValidationError(f"Traza Paje inválida: {problems[0]} ({len(problems)} problemas)", entity=str(path))
