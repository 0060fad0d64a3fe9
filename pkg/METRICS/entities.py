from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

PHASE_ENTER = 'phase-enter'
PHASE_EXIT = 'phase-exit'
TRANSFER_START = 'transfer-start'
TRANSFER_END = 'transfer-end'


@dataclass(frozen=True)
class TimelineEvent:
    """
    Registro de la línea de tiempo. `host` es el host del runnable; en las
    transferencias `src_host`/`dst_host` son los extremos del mensaje y
    `transfer_id` empareja el inicio con el fin.
    """
    time: float
    kind: str
    runnable: str
    host: str
    phase: Optional[str] = None
    transfer: Optional[str] = None
    label: Optional[str] = None
    target: Optional[str] = None
    src_host: Optional[str] = None
    dst_host: Optional[str] = None
    transfer_id: Optional[int] = None


@dataclass(frozen=True)
class SimulationResult:
    makespan: float
    per_host_energy: Dict[str, float]
    total_energy: float
    timeline: Tuple[TimelineEvent, ...] = ()
    sim_wall_time: float = 0.0
    host_intervals: Dict[str, Sequence[Tuple[float, float]]] = field(default_factory=dict)

    def __str__(self):
        return f"Resultado (makespan {self.makespan:.6f} s, energía {self.total_energy:.3f} J)"


@dataclass(frozen=True)
class BatchRow:
    mapping_id: str
    makespan: float
    total_energy: float
    sim_wall_time: float
    seed: Optional[int] = None
    strategy: str = ''
    per_host_energy: Dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ColumnStats:
    minimum: float
    maximum: float
    mean: float
    argmin: str
    argmax: str


@dataclass(frozen=True)
class BatchSummary:
    rows: Tuple[BatchRow, ...]
    makespan: ColumnStats
    total_energy: ColumnStats
    sim_wall_time: ColumnStats
    pareto_front: Tuple[str, ...] = ()
