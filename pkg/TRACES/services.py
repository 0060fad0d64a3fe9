"""
Escritura de la línea de tiempo en formato Paje (visualizable con Vite).

El contenedor raíz `platform` agrupa un contenedor por host y, dentro de cada
host, uno por runnable mapeado en él. Los cambios de fase son PajeSetState
sobre el runnable; las activaciones son enlaces Dependency entre runnables y
las lecturas/escrituras de etiquetas son enlaces Transfer entre hosts.
"""
import logging
from typing import List, Tuple

from django.conf import settings

from MAPPING.entities import Mapping
from METRICS.entities import PHASE_ENTER, TRANSFER_END, TRANSFER_START, SimulationResult
from PLATFORMS.entities import PlatformModel

logger = logging.getLogger(__name__)

# (número, nombre, campos) de cada evento definido en la cabecera
EVENT_DEFINITIONS = (
    (0, 'PajeDefineContainerType', (('Alias', 'string'), ('Type', 'string'), ('Name', 'string'))),
    (1, 'PajeDefineStateType', (('Alias', 'string'), ('Type', 'string'), ('Name', 'string'))),
    (2, 'PajeDefineLinkType', (
        ('Alias', 'string'), ('Type', 'string'), ('StartContainerType', 'string'),
        ('EndContainerType', 'string'), ('Name', 'string'),
    )),
    (3, 'PajeDefineEntityValue', (('Alias', 'string'), ('Type', 'string'), ('Name', 'string'), ('Color', 'color'))),
    (4, 'PajeCreateContainer', (
        ('Time', 'date'), ('Alias', 'string'), ('Type', 'string'), ('Container', 'string'), ('Name', 'string'),
    )),
    (5, 'PajeSetState', (('Time', 'date'), ('Type', 'string'), ('Container', 'string'), ('Value', 'string'))),
    (6, 'PajeStartLink', (
        ('Time', 'date'), ('Type', 'string'), ('Container', 'string'), ('StartContainer', 'string'),
        ('Value', 'string'), ('Key', 'string'),
    )),
    (7, 'PajeEndLink', (
        ('Time', 'date'), ('Type', 'string'), ('Container', 'string'), ('EndContainer', 'string'),
        ('Value', 'string'), ('Key', 'string'),
    )),
)

CREATE_CONTAINER, SET_STATE, START_LINK, END_LINK = 4, 5, 6, 7

ROOT_CONTAINER = 'platform'

STATE_COLORS = (
    ('Waiting', '0.6 0.6 0.6'),
    ('Reading', '0.2 0.4 0.9'),
    ('Computing', '0.9 0.2 0.2'),
    ('Writing', '0.2 0.7 0.2'),
    ('Done', '1.0 1.0 1.0'),
)


def _quoted(text) -> str:
    return '"' + str(text).replace('"', "'") + '"'


def host_alias(host_id: str) -> str:
    return f"h_{host_id}"


def runnable_alias(runnable_id: str) -> str:
    return f"r_{runnable_id}"


class PajeTraceService:
    """
    Servicio que convierte el resultado de una simulación en una traza Paje
    """

    def header(self) -> List[str]:
        lines = []
        for number, name, fields in EVENT_DEFINITIONS:
            lines.append(f"%EventDef {name} {number}")
            lines.extend(f"% {field} {kind}" for field, kind in fields)
            lines.append("%EndEventDef")
        return lines

    def type_definitions(self) -> List[str]:
        lines = [
            f"0 CT_Platform 0 {_quoted('Platform')}",
            f"0 CT_Host CT_Platform {_quoted('Host')}",
            f"0 CT_Runnable CT_Host {_quoted('Runnable')}",
            f"1 ST_RunnableState CT_Runnable {_quoted('RunnableState')}",
            f"2 LT_Dependency CT_Platform CT_Runnable CT_Runnable {_quoted('Dependency')}",
            f"2 LT_Transfer CT_Platform CT_Host CT_Host {_quoted('Transfer')}",
        ]
        for state, color in STATE_COLORS:
            lines.append(f"3 V_{state} ST_RunnableState {_quoted(state)} {_quoted(color)}")
        return lines

    def events(self, result: SimulationResult, platform: PlatformModel, mapping: Mapping) -> List[str]:
        """Eventos con marca de tiempo, ordenados por tiempo y número de evento"""
        timed: List[Tuple[float, int, int, str]] = []

        def add(time, number, text):
            timed.append((time, number, len(timed), text))

        add(0.0, CREATE_CONTAINER, f"{ROOT_CONTAINER} CT_Platform 0 {_quoted('Platform')}")
        hosts = [host.id for host in platform.hosts]
        for host_id in hosts:
            add(0.0, CREATE_CONTAINER, f"{host_alias(host_id)} CT_Host {ROOT_CONTAINER} {_quoted(host_id)}")
        for host_id in hosts:
            runnables = sorted(rid for rid, host in mapping.runnable_to_host.items() if host == host_id)
            for rid in runnables:
                add(0.0, CREATE_CONTAINER, f"{runnable_alias(rid)} CT_Runnable {host_alias(host_id)} {_quoted(rid)}")

        for event in result.timeline:
            if event.kind == PHASE_ENTER:
                add(event.time, SET_STATE, f"ST_RunnableState {runnable_alias(event.runnable)} V_{event.phase}")
            elif event.kind in (TRANSFER_START, TRANSFER_END):
                add(event.time, START_LINK if event.kind == TRANSFER_START else END_LINK, self._link(event))

        timed.sort(key=lambda item: (item[0], item[1], item[2]))
        decimals = settings.TRACE_DECIMALS
        return [f"{number} {time:.{decimals}f} {text}" for time, number, _, text in timed]

    def _link(self, event) -> str:
        key = _quoted(f"t{event.transfer_id}")
        if event.transfer == 'activation':
            endpoint = event.runnable if event.kind == TRANSFER_START else event.target
            return f"LT_Dependency {ROOT_CONTAINER} {runnable_alias(endpoint)} {_quoted('activation')} {key}"
        endpoint = event.src_host if event.kind == TRANSFER_START else event.dst_host
        return f"LT_Transfer {ROOT_CONTAINER} {host_alias(endpoint)} {_quoted(event.label)} {key}"

    def emit(self, result: SimulationResult, platform: PlatformModel, mapping: Mapping, path) -> None:
        lines = self.header() + self.type_definitions() + self.events(result, platform, mapping)
        with open(path, 'w', encoding='utf-8', newline='\n') as handle:
            handle.write('\n'.join(lines) + '\n')
        logger.info("Traza Paje con %d líneas escrita en %s", len(lines), path)


# Instancia global del servicio
paje_service = PajeTraceService()


def emit_paje(result: SimulationResult, platform: PlatformModel, mapping: Mapping, path) -> None:
    paje_service.emit(result, platform, mapping, path)
