"""
Tipos de dominio del modelo de aplicación: etiquetas, instrucciones,
runnables, tareas y la aplicación completa.

Todos son inmutables; la normalización produce un modelo nuevo.
"""
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Dict, Optional, Tuple


class InstructionKind(str, Enum):
    READ = 'read'
    WRITE = 'write'
    COMPUTE = 'compute'


@dataclass(frozen=True)
class Label:
    name: str
    size_bytes: int


@dataclass(frozen=True)
class Instruction:
    kind: InstructionKind
    label: Optional[str] = None
    work: float = 0.0

    @classmethod
    def read(cls, label: str) -> 'Instruction':
        return cls(InstructionKind.READ, label=label)

    @classmethod
    def write(cls, label: str) -> 'Instruction':
        return cls(InstructionKind.WRITE, label=label)

    @classmethod
    def compute(cls, work: float) -> 'Instruction':
        return cls(InstructionKind.COMPUTE, work=float(work))


@dataclass(frozen=True)
class NormalizedRunnable:
    """Las tres fases de un runnable: lectura, cómputo agregado y escritura"""

    reads: Tuple[str, ...]
    compute_work: float
    writes: Tuple[str, ...]


@dataclass(frozen=True)
class Runnable:
    id: str
    instructions: Tuple[Instruction, ...] = ()
    normalized: Optional[NormalizedRunnable] = None


@dataclass(frozen=True)
class Task:
    id: str
    runnables: Tuple[Runnable, ...]
    precedence_edges: Tuple[Tuple[str, str], ...] = ()

    @property
    def runnable_ids(self) -> Tuple[str, ...]:
        return tuple(r.id for r in self.runnables)


@dataclass(frozen=True)
class ApplicationModel:
    labels: Tuple[Label, ...] = ()
    tasks: Tuple[Task, ...] = ()
    activation_edges: Tuple[Tuple[str, str], ...] = ()

    @cached_property
    def label_by_name(self) -> Dict[str, Label]:
        return {label.name: label for label in self.labels}

    @cached_property
    def task_by_id(self) -> Dict[str, Task]:
        return {task.id: task for task in self.tasks}

    @cached_property
    def runnable_by_id(self) -> Dict[str, Runnable]:
        return {runnable.id: runnable for task in self.tasks for runnable in task.runnables}

    @cached_property
    def task_of_runnable(self) -> Dict[str, str]:
        return {runnable.id: task.id for task in self.tasks for runnable in task.runnables}

    @property
    def runnables(self) -> Tuple[Runnable, ...]:
        return tuple(runnable for task in self.tasks for runnable in task.runnables)

    @property
    def is_normalized(self) -> bool:
        return all(runnable.normalized is not None for runnable in self.runnables)

    def __str__(self):
        return f"Aplicación ({len(self.tasks)} tareas, {len(self.runnables)} runnables, {len(self.labels)} etiquetas)"
