"""
Kernel de eventos discretos.

Cada runnable es un proceso que recorre Waiting -> Reading -> Computing ->
Writing -> Done. Las lecturas y escrituras de una fase se emiten a la vez y la
fase termina cuando terminan todas; al terminar las escrituras el proceso
activa a sus sucesores con mensajes de 0 bytes que sólo pagan la latencia de
la ruta. Los accesos locales (mismo host) son instantáneos.

Entre dos eventos las tasas son constantes: `advance` reparte los recursos,
avanza el reloj hasta la próxima finalización y procesa en orden determinista
todas las finalizaciones simultáneas y las transiciones de tiempo cero que
desencadenan.
"""
import heapq
import logging
from typing import Dict, List, Optional, Tuple

from django.conf import settings

from TaskMapper.exceptions import DeadlockError, KernelInvariantError, SimulationCompleteError

from APPMODEL.entities import ApplicationModel
from APPMODEL.services import runnable_graph
from MAPPING.entities import Mapping
from METRICS.entities import PHASE_ENTER, PHASE_EXIT, TRANSFER_END, TRANSFER_START, TimelineEvent
from PLATFORMS.entities import PlatformModel
from PLATFORMS.services import route_between

from .actions import ComputeAction, RunnableProcess, RunnableState, TransferAction, TransferKind
from .sharing import share_resources

logger = logging.getLogger(__name__)

# Holgura relativa de las comprobaciones de auditoría
AUDIT_TOLERANCE = 1e-9


class SimulationKernel:

    def __init__(
        self,
        app: ApplicationModel,
        platform: PlatformModel,
        mapping: Mapping,
        audit: bool = False,
        tolerance: Optional[float] = None,
    ):
        self.app = app
        self.platform = platform
        self.mapping = mapping
        self.audit = audit
        self.tolerance = settings.KERNEL_TIME_TOLERANCE if tolerance is None else tolerance

        self.now = 0.0
        self.steps = 0
        self.timeline: List[TimelineEvent] = []
        self.host_intervals: Dict[str, List[Tuple[float, float]]] = {host.id: [] for host in platform.hosts}

        self._routes = {}
        self._computes: Dict[str, List[ComputeAction]] = {host.id: [] for host in platform.hosts}
        self._transfers: Dict[int, TransferAction] = {}
        self._link_capacities = {('link', link.id): link.bandwidth for link in platform.links}
        self._network_dirty = False
        self._dirty_hosts = set()
        self._ready = []
        self._next_transfer_id = 0

        graph = runnable_graph(app)
        self.processes: Dict[str, RunnableProcess] = {}
        for rid in sorted(graph.nodes):
            self.processes[rid] = RunnableProcess(
                runnable=rid,
                host=mapping.runnable_to_host[rid],
                pending_activations=graph.in_degree(rid),
                successors=tuple(sorted(graph.successors(rid))),
            )
        self._unfinished = len(self.processes)

        for process in self.processes.values():
            if process.pending_activations == 0:
                heapq.heappush(self._ready, process.runnable)
            else:
                process.announced = True
                self._event(PHASE_ENTER, process, phase=RunnableState.WAITING.value)
        self._drain_ready()

    # Estado

    @property
    def finished(self) -> bool:
        return self._unfinished == 0 and not self._transfers and not any(self._computes.values())

    @property
    def makespan(self) -> float:
        return max((p.finished_at for p in self.processes.values() if p.finished_at is not None), default=0.0)

    def live_actions(self):
        for host_actions in self._computes.values():
            yield from host_actions
        yield from self._transfers.values()

    # Bucle principal

    def run(self) -> 'SimulationKernel':
        while not self.finished:
            self.advance()
        logger.debug("Simulación terminada en %d pasos, %d eventos, makespan %.9f s",
                     self.steps, len(self.timeline), self.makespan)
        return self

    def advance(self) -> 'SimulationKernel':
        if self.finished:
            raise SimulationCompleteError("La simulación ya terminó: no hay acciones vivas ni procesos pendientes")

        live = list(self.live_actions())
        if not live:
            pending = sorted(rid for rid, p in self.processes.items() if p.state is not RunnableState.DONE)
            raise DeadlockError(f"Interbloqueo en t={self.now}: runnables sin terminar {', '.join(pending[:10])}")

        self._reshare()
        if self.audit:
            self._audit_capacity()

        horizons = [(action.time_to_completion(), action) for action in live]
        delta = min(horizon for horizon, _ in horizons)
        if delta == float('inf'):
            raise DeadlockError(f"Interbloqueo en t={self.now}: todas las acciones vivas tienen tasa cero")

        if delta > 0:
            self._record_utilization(delta)

        threshold = delta + self.tolerance * max(delta, self.now)
        completed = []
        for horizon, action in horizons:
            if self._progress(action, horizon, delta, threshold):
                completed.append(action)

        self.now += delta
        self.steps += 1
        for action in sorted(completed, key=lambda a: a.sort_key):
            self._complete(action)
        self._drain_ready()
        return self

    def _progress(self, action, horizon, delta, threshold) -> bool:
        """Descuenta `delta` segundos de avance; retorna True si la acción terminó"""
        if isinstance(action, TransferAction) and action.in_latency_phase:
            if horizon > threshold:
                action.latency_remaining -= delta
                return False
            action.latency_remaining = 0.0
            if action.remaining_bytes > 0:
                self._network_dirty = True
                return False
            return True

        if isinstance(action, ComputeAction):
            remaining = action.remaining_work
        else:
            remaining = action.remaining_bytes

        if horizon <= threshold:
            action.progress += remaining
            amount = 0.0
            done = True
        else:
            step = action.current_rate * delta
            action.progress += step
            amount = remaining - step
            done = False

        if isinstance(action, ComputeAction):
            action.remaining_work = amount
        else:
            action.remaining_bytes = amount
        return done

    # Reparto de recursos

    def _reshare(self):
        if self._network_dirty:
            flows = [t for t in self._transfers.values() if not t.in_latency_phase and t.remaining_bytes > 0]
            rates = share_resources({t.transfer_id: t.resources for t in flows}, self._link_capacities)
            for transfer in flows:
                transfer.current_rate = rates[transfer.transfer_id]
            self._network_dirty = False
            logger.debug("t=%.9f: reparto de red entre %d transferencias", self.now, len(flows))

        for host_id in sorted(self._dirty_hosts):
            actions = self._computes[host_id]
            if actions:
                capacity = {('host', host_id): self.platform.host_by_id[host_id].speed}
                rates = share_resources({index: a.resources for index, a in enumerate(actions)}, capacity)
                for index, action in enumerate(actions):
                    action.current_rate = rates[index]
        self._dirty_hosts.clear()

    def _record_utilization(self, delta):
        for host in self.platform.hosts:
            actions = self._computes[host.id]
            utilization = min(1.0, sum(a.current_rate for a in actions) / host.speed) if actions else 0.0
            series = self.host_intervals[host.id]
            if series and series[-1][1] == utilization:
                series[-1] = (series[-1][0] + delta, utilization)
            else:
                series.append((delta, utilization))

    # Ciclo de vida de los runnables

    def _event(self, kind, process, **fields):
        self.timeline.append(TimelineEvent(time=self.now, kind=kind, runnable=process.runnable, host=process.host, **fields))

    def _set_state(self, process: RunnableProcess, state: RunnableState, announce: bool):
        if process.announced:
            self._event(PHASE_EXIT, process, phase=process.state.value)
        process.state = state
        process.announced = announce
        if announce:
            self._event(PHASE_ENTER, process, phase=state.value)

    def _route(self, src, dst):
        key = (src, dst)
        if key not in self._routes:
            route = route_between(self.platform, src, dst)
            latency = 0.0
            for link_id in route.links:
                latency += self.platform.link_by_id[link_id].latency
            self._routes[key] = (route.links, latency)
        return self._routes[key]

    def _issue_transfer(self, process, kind, src, dst, size, label=None, target=None) -> bool:
        """Emite una transferencia; retorna False si fue instantánea"""
        links, latency = self._route(src, dst)
        transfer_id = self._next_transfer_id
        self._next_transfer_id += 1
        fields = dict(transfer=kind.value, label=label, target=target, src_host=src, dst_host=dst, transfer_id=transfer_id)
        self._event(TRANSFER_START, process, **fields)

        if not links or (size == 0 and latency == 0):
            self._event(TRANSFER_END, process, **fields)
            return False

        transfer = TransferAction(
            transfer_id=transfer_id, owner=process.runnable, kind=kind, src_host=src, dst_host=dst,
            links=links, size_bytes=size, latency_remaining=latency, label=label, target=target,
        )
        self._transfers[transfer_id] = transfer
        if not transfer.in_latency_phase:
            self._network_dirty = True
        return True

    def _start(self, process: RunnableProcess):
        reads = self.app.runnable_by_id[process.runnable].normalized.reads
        self._set_state(process, RunnableState.READING, announce=bool(reads))
        pending = 0
        for label in reads:
            size = self.app.label_by_name[label].size_bytes
            source = self.mapping.label_to_host[label]
            pending += self._issue_transfer(process, TransferKind.READ, source, process.host, size, label=label)
        process.pending_transfers = pending
        if not pending:
            self._start_computing(process)

    def _start_computing(self, process: RunnableProcess):
        work = self.app.runnable_by_id[process.runnable].normalized.compute_work
        if work > 0:
            self._set_state(process, RunnableState.COMPUTING, announce=True)
            self._computes[process.host].append(ComputeAction(owner=process.runnable, host=process.host, work=work))
            self._dirty_hosts.add(process.host)
        else:
            self._set_state(process, RunnableState.COMPUTING, announce=False)
            self._start_writing(process)

    def _start_writing(self, process: RunnableProcess):
        writes = self.app.runnable_by_id[process.runnable].normalized.writes
        self._set_state(process, RunnableState.WRITING, announce=bool(writes))
        pending = 0
        for label in writes:
            size = self.app.label_by_name[label].size_bytes
            target = self.mapping.label_to_host[label]
            pending += self._issue_transfer(process, TransferKind.WRITE, process.host, target, size, label=label)
        process.pending_transfers = pending
        if not pending:
            self._finish(process)

    def _finish(self, process: RunnableProcess):
        for successor_id in process.successors:
            successor = self.processes[successor_id]
            if not self._issue_transfer(process, TransferKind.ACTIVATION, process.host, successor.host, 0,
                                        target=successor_id):
                self._deliver(successor)
        self._set_state(process, RunnableState.DONE, announce=True)
        process.finished_at = self.now
        self._unfinished -= 1

    def _deliver(self, process: RunnableProcess):
        process.pending_activations -= 1
        if process.pending_activations == 0:
            heapq.heappush(self._ready, process.runnable)

    def _drain_ready(self):
        while self._ready:
            self._start(self.processes[heapq.heappop(self._ready)])

    def _complete(self, action):
        if self.audit:
            self._audit_conservation(action)

        if isinstance(action, ComputeAction):
            self._computes[action.host].remove(action)
            self._dirty_hosts.add(action.host)
            self._start_writing(self.processes[action.owner])
            return

        del self._transfers[action.transfer_id]
        if action.size_bytes > 0:
            self._network_dirty = True
        owner = self.processes[action.owner]
        self._event(
            TRANSFER_END, owner, transfer=action.kind.value, label=action.label, target=action.target,
            src_host=action.src_host, dst_host=action.dst_host, transfer_id=action.transfer_id,
        )

        if action.kind is TransferKind.ACTIVATION:
            self._deliver(self.processes[action.target])
            return

        owner.pending_transfers -= 1
        if owner.pending_transfers == 0:
            if action.kind is TransferKind.READ:
                self._start_computing(owner)
            else:
                self._finish(owner)

    # Auditoría

    def _audit_capacity(self):
        usage = {}
        for transfer in self._transfers.values():
            if transfer.in_latency_phase or transfer.remaining_bytes <= 0:
                continue
            for resource in transfer.resources:
                usage[resource] = usage.get(resource, 0.0) + transfer.current_rate
        for resource, used in usage.items():
            capacity = self._link_capacities[resource]
            if used > capacity * (1 + AUDIT_TOLERANCE):
                raise KernelInvariantError(f"t={self.now}: el enlace '{resource[1]}' usa {used} de {capacity} B/s")

        for host_id, actions in self._computes.items():
            used = sum(action.current_rate for action in actions)
            speed = self.platform.host_by_id[host_id].speed
            if used > speed * (1 + AUDIT_TOLERANCE):
                raise KernelInvariantError(f"t={self.now}: el host '{host_id}' usa {used} de {speed}")

    def _audit_conservation(self, action):
        expected = action.work if isinstance(action, ComputeAction) else action.size_bytes
        if abs(action.progress - expected) > AUDIT_TOLERANCE * max(abs(expected), 1e-300):
            raise KernelInvariantError(
                f"t={self.now}: la acción de '{action.owner}' avanzó {action.progress} de {expected}"
            )
