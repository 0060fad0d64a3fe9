"""
Flujo completo: lectura de entradas, mapeo, simulación y evaluación por lotes.

En un lote la semilla es el identificador del mapeo, de modo que cualquier
fila puede repetirse de forma aislada. Con varios procesos cada uno recibe
la aplicación y la plataforma una sola vez (inicializador del pool) y las
filas se recogen en orden de semilla.
"""
import logging
import multiprocessing
from typing import Dict, List, Optional, Tuple

from django.conf import settings

from TaskMapper.exceptions import ArgumentError

from APPMODEL.entities import ApplicationModel
from APPMODEL.services import normalize_application, parse_application
from MAPPING.entities import Mapping
from MAPPING.services import ms2_distribution
from MAPPING.strategies import strategy_from_spec
from METRICS.entities import BatchRow, BatchSummary, SimulationResult
from METRICS.services import batch_row, format_distribution
from PLATFORMS.entities import PlatformModel
from PLATFORMS.services import parse_platform
from SIMKERNEL.services import simulate

from .workers import init_worker, simulate_seed

logger = logging.getLogger(__name__)

class WorkflowService:
    """
    Servicio que encadena parser, mapeador, simulador y métricas
    """

    def load_inputs(self, app_path, platform_path) -> Tuple[ApplicationModel, PlatformModel]:
        app = normalize_application(parse_application(app_path))
        platform = parse_platform(platform_path)
        return app, platform

    def resolve_mapping(
        self, spec: str, app: ApplicationModel, platform: PlatformModel, seed: int = 0, allow_frontend: bool = False,
    ) -> Mapping:
        strategy = strategy_from_spec(spec, allow_frontend)
        mapping = strategy.produce(app, platform, seed)
        logger.info("Mapeo %s (semilla %d): %s", strategy, seed, mapping)
        return mapping

    def simulate_one(
        self, app, platform, spec: str, seed: int = 0, allow_frontend: bool = False, audit: Optional[bool] = None,
    ) -> Tuple[Mapping, SimulationResult, BatchRow]:
        mapping = self.resolve_mapping(spec, app, platform, seed, allow_frontend)
        result = simulate(app, platform, mapping, audit=audit)
        return mapping, result, batch_row(seed, result, seed=seed, strategy=spec)

    def run_batch(
        self,
        app: ApplicationModel,
        platform: PlatformModel,
        spec: str,
        n: int,
        first_seed: int = 0,
        jobs: Optional[int] = None,
        allow_frontend: bool = False,
        audit: Optional[bool] = None,
    ) -> List[BatchRow]:
        """
        Simula las semillas first_seed .. first_seed+n-1; las filas salen en
        orden de semilla sin importar el número de procesos
        """
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise ArgumentError(f"El tamaño del lote debe ser un entero >= 1 (se recibió {n!r})")
        if n > settings.MAX_BATCH_SIZE:
            raise ArgumentError(f"El tamaño del lote excede el máximo permitido ({settings.MAX_BATCH_SIZE})")
        jobs = settings.BATCH_DEFAULT_JOBS if jobs is None else jobs
        if jobs < 1:
            raise ArgumentError(f"El número de procesos debe ser >= 1 (se recibió {jobs})")
        if audit is None:
            audit = settings.TASKMAPPER_AUDIT

        # Falla aquí, y no dentro de un proceso, si la estrategia es inválida
        strategy_from_spec(spec, allow_frontend)
        seeds = range(first_seed, first_seed + n)
        initargs = (app, platform, spec, allow_frontend, audit)
        logger.info("Lote de %d mapeos '%s' desde la semilla %d con %d procesos", n, spec, first_seed, jobs)

        rows = []
        step = max(1, n // 10)
        if jobs == 1:
            init_worker(*initargs)
            iterator = map(simulate_seed, seeds)
            rows = self._collect(iterator, n, step)
        else:
            context = multiprocessing.get_context(settings.BATCH_START_METHOD)
            with context.Pool(processes=jobs, initializer=init_worker, initargs=initargs) as pool:
                chunksize = max(1, n // (jobs * 8))
                rows = self._collect(pool.imap(simulate_seed, seeds, chunksize=chunksize), n, step)
        return rows

    def _collect(self, iterator, n, step) -> List[BatchRow]:
        rows = []
        for row in iterator:
            rows.append(row)
            if len(rows) % step == 0:
                logger.info("Lote: %d/%d mapeos simulados", len(rows), n)
        return rows

    def ms2_report(
        self, app, platform, spec: str, summary: BatchSummary, allow_frontend: bool = False,
    ) -> Dict[str, str]:
        """
        Fracción de runnables MS2 por host en las filas de makespan mínimo y
        máximo (vacío si la aplicación no tiene tareas MS2)
        """
        hosts = [host.id for host in platform.candidate_hosts(allow_frontend)]
        report = {}
        for key, mapping_id in (('ms2_min_makespan', summary.makespan.argmin),
                                ('ms2_max_makespan', summary.makespan.argmax)):
            row = next(row for row in summary.rows if row.mapping_id == mapping_id)
            mapping = self.resolve_mapping(spec, app, platform, row.seed, allow_frontend)
            distribution = ms2_distribution(app, mapping, hosts)
            if any(distribution.values()):
                report[key] = format_distribution(distribution)
        return report


# Instancia global del servicio
workflow_service = WorkflowService()


def run_batch(app, platform, spec, n, first_seed=0, jobs=None, allow_frontend=False, audit=None) -> List[BatchRow]:
    return workflow_service.run_batch(
        app, platform, spec, n, first_seed=first_seed, jobs=jobs, allow_frontend=allow_frontend, audit=audit,
    )
