from abc import ABC, abstractmethod
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict

from APPMODEL.entities import ApplicationModel
from PLATFORMS.entities import PlatformModel


@dataclass(frozen=True)
class Mapping:
    """
    Asignación total de runnables y etiquetas a hosts
    """
    runnable_to_host: Dict[str, str] = field(default_factory=dict)
    label_to_host: Dict[str, str] = field(default_factory=dict)

    def runnables_per_host(self) -> Counter:
        return Counter(self.runnable_to_host.values())

    def renamed(self, host_names: Dict[str, str]) -> 'Mapping':
        """El mismo mapeo con los hosts renombrados"""
        return Mapping(
            runnable_to_host={r: host_names[h] for r, h in self.runnable_to_host.items()},
            label_to_host={label: host_names[h] for label, h in self.label_to_host.items()},
        )

    def __str__(self):
        return f"Mapeo ({len(self.runnable_to_host)} runnables, {len(self.label_to_host)} etiquetas)"


class MappingStrategy(ABC):
    """
    Interfaz de las estrategias de mapeo.

    `produce` debe ser una función pura de (aplicación, plataforma, semilla);
    las estrategias deterministas ignoran la semilla.
    """

    name: str = ''

    def __init__(self, allow_frontend: bool = False):
        self.allow_frontend = allow_frontend

    @abstractmethod
    def produce(self, app: ApplicationModel, platform: PlatformModel, seed: int = 0) -> Mapping:
        raise NotImplementedError

    def __str__(self):
        return self.name
