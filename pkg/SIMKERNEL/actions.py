"""
Procesos y acciones del kernel de simulación.

Una acción consume un recurso: las de cómputo la capacidad de un host, las de
transferencia el ancho de banda de los enlaces de su ruta. Las transferencias
primero agotan la latencia de la ruta y después comparten ancho de banda.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple


class RunnableState(str, Enum):
    WAITING = 'Waiting'
    READING = 'Reading'
    COMPUTING = 'Computing'
    WRITING = 'Writing'
    DONE = 'Done'


class TransferKind(str, Enum):
    READ = 'read'
    WRITE = 'write'
    ACTIVATION = 'activation'


@dataclass
class RunnableProcess:
    runnable: str
    host: str
    pending_activations: int
    successors: Tuple[str, ...] = ()
    state: RunnableState = RunnableState.WAITING
    pending_transfers: int = 0
    finished_at: Optional[float] = None
    # El estado actual tiene un phase-enter emitido en la línea de tiempo
    announced: bool = False


@dataclass
class ComputeAction:
    owner: str
    host: str
    work: float
    remaining_work: float = field(init=False)
    current_rate: float = 0.0
    progress: float = 0.0

    def __post_init__(self):
        self.remaining_work = self.work

    @property
    def sort_key(self):
        return (self.owner, 'compute', '')

    @property
    def resources(self):
        return (('host', self.host),)

    def time_to_completion(self) -> float:
        return self.remaining_work / self.current_rate if self.current_rate > 0 else float('inf')


@dataclass
class TransferAction:
    transfer_id: int
    owner: str
    kind: TransferKind
    src_host: str
    dst_host: str
    links: Tuple[str, ...]
    size_bytes: float
    latency_remaining: float
    label: Optional[str] = None
    target: Optional[str] = None
    remaining_bytes: float = field(init=False)
    current_rate: float = 0.0
    progress: float = 0.0

    def __post_init__(self):
        self.remaining_bytes = float(self.size_bytes)

    @property
    def sort_key(self):
        return (self.owner, self.kind.value, self.label or self.target or '', self.transfer_id)

    @property
    def in_latency_phase(self) -> bool:
        return self.latency_remaining > 0

    @property
    def resources(self):
        # Cada enlace cuenta una sola vez aunque la ruta lo repita
        return tuple(('link', link_id) for link_id in dict.fromkeys(self.links))

    def time_to_completion(self) -> float:
        if self.in_latency_phase:
            return self.latency_remaining
        if self.remaining_bytes <= 0:
            return 0.0
        return self.remaining_bytes / self.current_rate if self.current_rate > 0 else float('inf')
