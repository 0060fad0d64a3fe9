"""
Estrategias de mapeo incluidas.

Todas excluyen el host frontend salvo que se construyan con
`allow_frontend=True`; `all-on:<host>` acepta cualquier host existente.
"""
import logging
from pathlib import Path
from typing import Dict, Tuple

from TaskMapper.exceptions import ArgumentError, EmptyPlatformError, UnknownHostError

from APPMODEL.entities import ApplicationModel, InstructionKind, Runnable
from PLATFORMS.entities import Host, PlatformModel

from .entities import Mapping, MappingStrategy
from .prng import SplitMix64
from .services import parse_mapping

logger = logging.getLogger(__name__)


def _candidates(platform: PlatformModel, allow_frontend: bool) -> Tuple[Host, ...]:
    hosts = platform.candidate_hosts(allow_frontend)
    if not hosts:
        raise EmptyPlatformError("La plataforma no tiene hosts de cómputo disponibles para el mapeo")
    return hosts


def _compute_work(runnable: Runnable) -> float:
    if runnable.normalized is not None:
        return runnable.normalized.compute_work
    work = 0.0
    for instruction in runnable.instructions:
        if instruction.kind is InstructionKind.COMPUTE:
            work += instruction.work
    return work


def colocate_labels(app: ApplicationModel, runnable_to_host: Dict[str, str], fallback: Host) -> Dict[str, str]:
    """
    Cada etiqueta va al host de su primer escritor (orden lexicográfico), o de
    su primer lector si nadie la escribe, o al host de respaldo si nadie la usa
    """
    writers = {}
    readers = {}
    for runnable in app.runnables:
        for instruction in runnable.instructions:
            if instruction.kind is InstructionKind.WRITE:
                writers.setdefault(instruction.label, set()).add(runnable.id)
            elif instruction.kind is InstructionKind.READ:
                readers.setdefault(instruction.label, set()).add(runnable.id)

    placement = {}
    for name in sorted(app.label_by_name):
        accessors = writers.get(name) or readers.get(name)
        placement[name] = runnable_to_host[min(accessors)] if accessors else fallback.id
    return placement


class RandomStrategy(MappingStrategy):
    """Runnables y etiquetas sorteados de forma independiente y uniforme"""

    name = 'random'

    def produce(self, app, platform, seed=0):
        hosts = _candidates(platform, self.allow_frontend)
        rng = SplitMix64(seed)
        runnable_to_host = {rid: hosts[rng.below(len(hosts))].id for rid in sorted(app.runnable_by_id)}
        label_to_host = {name: hosts[rng.below(len(hosts))].id for name in sorted(app.label_by_name)}
        return Mapping(runnable_to_host=runnable_to_host, label_to_host=label_to_host)


class RoundRobinStrategy(MappingStrategy):

    name = 'round-robin'

    def produce(self, app, platform, seed=0):
        hosts = _candidates(platform, self.allow_frontend)
        runnable_to_host = {rid: hosts[i % len(hosts)].id for i, rid in enumerate(sorted(app.runnable_by_id))}
        return Mapping(runnable_to_host, colocate_labels(app, runnable_to_host, hosts[0]))


class AllOnStrategy(MappingStrategy):

    def __init__(self, host_id: str, allow_frontend: bool = False):
        super().__init__(allow_frontend)
        self.host_id = host_id
        self.name = f"all-on:{host_id}"

    def produce(self, app, platform, seed=0):
        if self.host_id not in platform.host_by_id:
            raise UnknownHostError(f"El host '{self.host_id}' no existe en la plataforma")
        return Mapping(
            runnable_to_host={rid: self.host_id for rid in sorted(app.runnable_by_id)},
            label_to_host={name: self.host_id for name in sorted(app.label_by_name)},
        )


class GreedyLoadStrategy(MappingStrategy):
    """
    Runnables en orden de trabajo decreciente (empates por id); cada uno va al
    host donde (carga + trabajo) / velocidad resulta mínima, empates por orden
    de archivo
    """

    name = 'greedy-load'

    def produce(self, app, platform, seed=0):
        hosts = _candidates(platform, self.allow_frontend)
        load = [0.0] * len(hosts)
        runnable_to_host = {}

        ordered = sorted(app.runnables, key=lambda r: (-_compute_work(r), r.id))
        for runnable in ordered:
            work = _compute_work(runnable)
            best = min(range(len(hosts)), key=lambda i: ((load[i] + work) / hosts[i].speed, i))
            load[best] += work
            runnable_to_host[runnable.id] = hosts[best].id

        runnable_to_host = dict(sorted(runnable_to_host.items()))
        return Mapping(runnable_to_host, colocate_labels(app, runnable_to_host, hosts[0]))


class FileStrategy(MappingStrategy):
    """Mapeo leído de un archivo y validado contra la aplicación y la plataforma"""

    def __init__(self, path, allow_frontend: bool = False):
        super().__init__(allow_frontend)
        self.path = Path(path)
        self.name = f"file:{path}"

    def produce(self, app, platform, seed=0):
        return parse_mapping(self.path, app=app, platform=platform)


SIMPLE_STRATEGIES = {
    RandomStrategy.name: RandomStrategy,
    RoundRobinStrategy.name: RoundRobinStrategy,
    GreedyLoadStrategy.name: GreedyLoadStrategy,
}


def strategy_from_spec(spec: str, allow_frontend: bool = False) -> MappingStrategy:
    """
    Construye una estrategia a partir de su nombre en línea de comandos:
    random, round-robin, greedy-load, all-on:<host> o file:<ruta>
    """
    kind, _, argument = spec.partition(':')
    if spec in SIMPLE_STRATEGIES:
        strategy = SIMPLE_STRATEGIES[spec](allow_frontend)
    elif kind == 'all-on' and argument:
        strategy = AllOnStrategy(argument, allow_frontend)
    elif kind == 'file' and argument:
        strategy = FileStrategy(argument, allow_frontend)
    else:
        raise ArgumentError(
            f"Estrategia de mapeo desconocida: '{spec}' (random, round-robin, greedy-load, all-on:<host>, file:<ruta>)"
        )
    logger.debug("Estrategia de mapeo: %s (frontend permitido: %s)", strategy, allow_frontend)
    return strategy


def map_random(app: ApplicationModel, platform: PlatformModel, seed: int, allow_frontend: bool = False) -> Mapping:
    return RandomStrategy(allow_frontend).produce(app, platform, seed)


def map_round_robin(app: ApplicationModel, platform: PlatformModel, allow_frontend: bool = False) -> Mapping:
    return RoundRobinStrategy(allow_frontend).produce(app, platform)


def map_all_on(app: ApplicationModel, platform: PlatformModel, host_id: str) -> Mapping:
    return AllOnStrategy(host_id).produce(app, platform)


def map_greedy_load(app: ApplicationModel, platform: PlatformModel, allow_frontend: bool = False) -> Mapping:
    return GreedyLoadStrategy(allow_frontend).produce(app, platform)
