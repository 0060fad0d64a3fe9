"""
Tipos de la descripción de plataforma: hosts, enlaces y rutas
"""
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Optional, Tuple


@dataclass(frozen=True)
class Host:
    id: str
    node: str
    speed: float
    p_idle: float
    p_full: float
    is_frontend: bool = False


@dataclass(frozen=True)
class Link:
    id: str
    bandwidth: float
    latency: float


@dataclass(frozen=True)
class Route:
    src: str
    dst: str
    links: Tuple[str, ...] = ()

    @property
    def is_local(self) -> bool:
        return not self.links


@dataclass(frozen=True)
class PlatformModel:
    hosts: Tuple[Host, ...] = ()
    links: Tuple[Link, ...] = ()
    routes: Tuple[Route, ...] = ()

    @cached_property
    def host_by_id(self) -> Dict[str, Host]:
        return {host.id: host for host in self.hosts}

    @cached_property
    def link_by_id(self) -> Dict[str, Link]:
        return {link.id: link for link in self.links}

    @cached_property
    def route_table(self) -> Dict[Tuple[str, str], Route]:
        return {(route.src, route.dst): route for route in self.routes}

    @cached_property
    def host_ids(self) -> Tuple[str, ...]:
        return tuple(host.id for host in self.hosts)

    @property
    def frontend(self) -> Optional[Host]:
        return next((host for host in self.hosts if host.is_frontend), None)

    def candidate_hosts(self, allow_frontend: bool = False) -> Tuple[Host, ...]:
        """Hosts elegibles para las estrategias, en orden de archivo"""
        return tuple(host for host in self.hosts if allow_frontend or not host.is_frontend)

    def __str__(self):
        return f"Plataforma ({len(self.hosts)} hosts, {len(self.links)} enlaces, {len(self.routes)} rutas)"
