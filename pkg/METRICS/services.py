import csv
import logging
import math
from typing import Dict, Iterable, List, Mapping as MappingType, Optional, Sequence, Tuple, Union

import numpy as np
from django.conf import settings
from django.db import DatabaseError, transaction

from TaskMapper.exceptions import DomainError, EmptyBatchError, RecordError

from PLATFORMS.entities import PlatformModel
from PLATFORMS.services import power_at

from .entities import BatchRow, BatchSummary, ColumnStats, SimulationResult
from .models import BatchExperiment, SimulationRecord

logger = logging.getLogger(__name__)

CSV_HEADER = ('mapping_id', 'seed', 'strategy', 'makespan_s', 'total_energy_j', 'sim_wall_ms')


class MetricsService:
    """
    Servicio de integración de energía y agregación de resultados por lotes
    """

    def integrate_energy(
        self,
        intervals: MappingType[str, Sequence[Tuple[float, float]]],
        platform: PlatformModel,
        makespan: Optional[float] = None,
    ) -> Dict[str, float]:
        """
        Energía por host en joules: suma de power_at(h, u) * duración sobre las
        series (duración, utilización). Con `makespan` el tramo no cubierto
        hasta ese instante cuenta como ocioso.
        """
        energy = {}
        for host in platform.hosts:
            total = 0.0
            covered = 0.0
            for duration, utilization in self._merged(intervals.get(host.id, ())):
                if duration < 0 or math.isnan(duration):
                    raise DomainError(f"Duración negativa {duration} en el host '{host.id}'")
                total += power_at(host, utilization) * duration
                covered += duration
            if makespan is not None and makespan > covered:
                total += host.p_idle * (makespan - covered)
            energy[host.id] = total
        return energy

    @staticmethod
    def _merged(series: Iterable[Tuple[float, float]]) -> List[Tuple[float, float]]:
        # Intervalos consecutivos con la misma utilización se integran como uno
        merged = []
        for duration, utilization in series:
            if merged and merged[-1][1] == utilization:
                merged[-1] = (merged[-1][0] + duration, utilization)
            else:
                merged.append((duration, utilization))
        return merged

    def batch_row(self, mapping_id, result: SimulationResult, seed=None, strategy: str = '') -> BatchRow:
        return BatchRow(
            mapping_id=str(mapping_id),
            makespan=result.makespan,
            total_energy=result.total_energy,
            sim_wall_time=result.sim_wall_time,
            seed=seed,
            strategy=strategy,
            per_host_energy=dict(result.per_host_energy),
        )

    def summarize_batch(self, results: Iterable[Union[BatchRow, Tuple[str, SimulationResult]]]) -> BatchSummary:
        """
        Tabla del lote con mínimo, máximo y media por columna, los mapeos que
        alcanzan los extremos y el frente de Pareto (makespan, energía)
        """
        rows = tuple(item if isinstance(item, BatchRow) else self.batch_row(*item) for item in results)
        if not rows:
            raise EmptyBatchError("No se puede resumir un lote vacío")

        ids = [row.mapping_id for row in rows]
        summary = BatchSummary(
            rows=rows,
            makespan=self._column_stats([row.makespan for row in rows], ids),
            total_energy=self._column_stats([row.total_energy for row in rows], ids),
            sim_wall_time=self._column_stats([row.sim_wall_time for row in rows], ids),
            pareto_front=self._pareto_front(rows),
        )
        logger.info("Lote de %d mapeos: makespan mínimo %.9f s (%s), máximo %.9f s (%s)",
                    len(rows), summary.makespan.minimum, summary.makespan.argmin,
                    summary.makespan.maximum, summary.makespan.argmax)
        return summary

    @staticmethod
    def _column_stats(values: Sequence[float], ids: Sequence[str]) -> ColumnStats:
        column = np.asarray(values, dtype=float)
        # argmin/argmax de numpy devuelven la primera aparición: los empates favorecen la fila anterior
        return ColumnStats(
            minimum=float(column.min()),
            maximum=float(column.max()),
            mean=float(column.mean()),
            argmin=ids[int(column.argmin())],
            argmax=ids[int(column.argmax())],
        )

    @staticmethod
    def _pareto_front(rows: Sequence[BatchRow]) -> Tuple[str, ...]:
        """Mapeos no dominados en (makespan, energía), ordenados por makespan"""
        order = sorted(range(len(rows)), key=lambda i: (rows[i].makespan, rows[i].total_energy, i))
        front = []
        best_energy = math.inf
        for index in order:
            if rows[index].total_energy < best_energy:
                front.append(rows[index].mapping_id)
                best_energy = rows[index].total_energy
        return tuple(front)

    # Salida CSV

    def format_number(self, value: Optional[float]) -> str:
        """Notación decimal con CSV_SIGNIFICANT_DIGITS dígitos significativos"""
        if value is None:
            return ''
        if value == 0:
            return '0'
        text = np.format_float_positional(
            value, precision=settings.CSV_SIGNIFICANT_DIGITS, unique=False, fractional=False, trim='k',
        )
        return text[:-1] if text.endswith('.') else text

    def format_distribution(self, distribution: MappingType[str, float]) -> str:
        """`host:fracción` separados por espacios, en el orden del diccionario"""
        return ' '.join(f"{host}:{self.format_number(value)}" for host, value in distribution.items())

    def csv_header(self, host_ids: Sequence[str]) -> List[str]:
        return list(CSV_HEADER) + [f"energy_{host_id}_j" for host_id in host_ids]

    def csv_record(self, row: BatchRow, host_ids: Sequence[str], wall_time: bool = False) -> List[str]:
        return [
            row.mapping_id,
            '' if row.seed is None else str(row.seed),
            row.strategy,
            self.format_number(row.makespan),
            self.format_number(row.total_energy),
            self.format_number(row.sim_wall_time * 1000.0) if wall_time else '',
        ] + [self.format_number(row.per_host_energy.get(host_id, 0.0)) for host_id in host_ids]

    def summary_lines(self, summary: BatchSummary, extra: MappingType[str, str] = None) -> List[str]:
        """Bloque de comentarios que sigue a las filas del CSV"""
        fmt = self.format_number
        lines = [
            f"# rows={len(summary.rows)}",
            f"# min_makespan={fmt(summary.makespan.minimum)} id={summary.makespan.argmin}",
            f"# max_makespan={fmt(summary.makespan.maximum)} id={summary.makespan.argmax}",
            f"# mean_makespan={fmt(summary.makespan.mean)}",
            f"# min_energy={fmt(summary.total_energy.minimum)} id={summary.total_energy.argmin}",
            f"# max_energy={fmt(summary.total_energy.maximum)} id={summary.total_energy.argmax}",
            f"# mean_energy={fmt(summary.total_energy.mean)}",
            f"# pareto_front={' '.join(summary.pareto_front)}",
        ]
        for key, value in (extra or {}).items():
            lines.append(f"# {key}={value}")
        return lines

    def write_batch_csv(
        self,
        rows: Sequence[BatchRow],
        host_ids: Sequence[str],
        path,
        summary: Optional[BatchSummary] = None,
        extra: MappingType[str, str] = None,
        wall_time: Optional[bool] = None,
    ) -> None:
        if wall_time is None:
            wall_time = settings.TASKMAPPER_WALL_TIME
        with open(path, 'w', encoding='utf-8', newline='') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(self.csv_header(host_ids))
            for row in rows:
                writer.writerow(self.csv_record(row, host_ids, wall_time))
            if summary is not None:
                for line in self.summary_lines(summary, extra):
                    handle.write(line + '\n')
        logger.info("CSV con %d filas escrito en %s", len(rows), path)

    def write_energy_csv(self, result: SimulationResult, host_ids: Sequence[str], path) -> None:
        with open(path, 'w', encoding='utf-8', newline='') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(['host_id', 'energy_j'])
            for host_id in host_ids:
                writer.writerow([host_id, self.format_number(result.per_host_energy.get(host_id, 0.0))])
            writer.writerow(['total', self.format_number(result.total_energy)])
        logger.info("Reporte de energía escrito en %s", path)


# Instancia global del servicio
metrics_service = MetricsService()


def integrate_energy(intervals, platform: PlatformModel, makespan: Optional[float] = None) -> Dict[str, float]:
    return metrics_service.integrate_energy(intervals, platform, makespan)


def summarize_batch(results) -> BatchSummary:
    return metrics_service.summarize_batch(results)


def batch_row(mapping_id, result: SimulationResult, seed=None, strategy: str = '') -> BatchRow:
    return metrics_service.batch_row(mapping_id, result, seed=seed, strategy=strategy)


def write_batch_csv(rows, host_ids, path, summary=None, extra=None, wall_time=None) -> None:
    metrics_service.write_batch_csv(rows, host_ids, path, summary=summary, extra=extra, wall_time=wall_time)


def write_energy_csv(result: SimulationResult, host_ids, path) -> None:
    metrics_service.write_energy_csv(result, host_ids, path)


def record_experiment(summary: BatchSummary, command: str, application_path, platform_path, strategy: str, first_seed: int = 0):
    """
    Guarda el lote y cada una de sus filas en la base de datos de experimentos
    """
    try:
        with transaction.atomic():
            experiment = BatchExperiment.objects.create(
                command=command,
                application_path=str(application_path),
                platform_path=str(platform_path),
                strategy=strategy,
                first_seed=first_seed,
                size=len(summary.rows),
                min_makespan=summary.makespan.minimum,
                max_makespan=summary.makespan.maximum,
                min_energy=summary.total_energy.minimum,
                pareto_front=list(summary.pareto_front),
            )
            SimulationRecord.objects.bulk_create([
                SimulationRecord(
                    experiment=experiment,
                    mapping_id=row.mapping_id,
                    seed=row.seed,
                    makespan=row.makespan,
                    total_energy=row.total_energy,
                    sim_wall_time=row.sim_wall_time,
                    per_host_energy=dict(row.per_host_energy),
                )
                for row in summary.rows
            ])
    except DatabaseError as exc:
        raise RecordError(f"No se pudo guardar el experimento (¿falta ejecutar migrate?): {exc}") from exc
    logger.info("Experimento %d guardado con %d registros", experiment.pk, len(summary.rows))
    return experiment


def format_distribution(distribution) -> str:
    return metrics_service.format_distribution(distribution)


def format_number(value) -> str:
    return metrics_service.format_number(value)
