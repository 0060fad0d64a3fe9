import logging
import math
import time
from typing import Optional

from django.conf import settings

from APPMODEL.entities import ApplicationModel
from APPMODEL.services import normalize_application
from MAPPING.entities import Mapping
from MAPPING.services import validate_mapping
from METRICS.entities import SimulationResult
from METRICS.services import integrate_energy
from PLATFORMS.entities import PlatformModel

from .engine import SimulationKernel

logger = logging.getLogger(__name__)


class SimulationService:
    """
    Servicio que ejecuta una simulación completa y calcula sus métricas
    """

    def simulate(
        self,
        app: ApplicationModel,
        platform: PlatformModel,
        mapping: Mapping,
        audit: Optional[bool] = None,
    ) -> SimulationResult:
        """
        Simula la ejecución de `app` sobre `platform` con el mapeo estático dado.
        El resultado es función determinista de las tres entradas, salvo
        `sim_wall_time`, que mide sólo el kernel.
        """
        if audit is None:
            audit = settings.TASKMAPPER_AUDIT
        if not app.is_normalized:
            app = normalize_application(app)
        validate_mapping(mapping, app, platform)

        kernel = SimulationKernel(app, platform, mapping, audit=audit)
        started = time.perf_counter()
        kernel.run()
        wall_time = time.perf_counter() - started

        makespan = kernel.makespan
        per_host = integrate_energy(kernel.host_intervals, platform, makespan)
        result = SimulationResult(
            makespan=makespan,
            per_host_energy=per_host,
            total_energy=math.fsum(per_host.values()),
            timeline=tuple(kernel.timeline),
            sim_wall_time=wall_time,
            host_intervals={host_id: tuple(series) for host_id, series in kernel.host_intervals.items()},
        )
        logger.info("Simulación: makespan %.9f s, energía %.3f J", result.makespan, result.total_energy)
        return result


# Instancia global del servicio
simulation_service = SimulationService()


def simulate(app: ApplicationModel, platform: PlatformModel, mapping: Mapping, audit: Optional[bool] = None) -> SimulationResult:
    return simulation_service.simulate(app, platform, mapping, audit=audit)
