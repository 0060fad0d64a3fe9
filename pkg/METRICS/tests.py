import tempfile
from dataclasses import replace
from pathlib import Path

from django.conf import settings
from django.test import SimpleTestCase, TestCase

from TaskMapper.exceptions import DomainError, EmptyBatchError

from APPMODEL.escience import generate_escience
from APPMODEL.factories import compute_only_application
from MAPPING.entities import Mapping
from MAPPING.services import parse_mapping
from MAPPING.strategies import map_all_on
from PLATFORMS.factories import HostFactory, build_platform, uniform_platform
from PLATFORMS.services import parse_platform
from SIMKERNEL.services import simulate

from .entities import BatchRow, SimulationResult
from .models import BatchExperiment, SimulationRecord
from .services import (
    integrate_energy, metrics_service, record_experiment, summarize_batch, write_batch_csv, write_energy_csv,
)


def _row(mapping_id, makespan, energy, wall=0.0):
    return BatchRow(mapping_id=mapping_id, makespan=makespan, total_energy=energy, sim_wall_time=wall)


class IntegrateEnergyTests(SimpleTestCase):

    def setUp(self):
        self.platform = build_platform([HostFactory(id='H0', p_idle=100.0, p_full=200.0)])

    def test_idle_host_pays_idle_power(self):
        energy = integrate_energy({}, self.platform, makespan=2.0)
        self.assertEqual(energy['H0'], 200.0)

    def test_busy_then_idle(self):
        energy = integrate_energy({'H0': [(1.0, 1.0), (1.0, 0.0)]}, self.platform)
        self.assertEqual(energy['H0'], 300.0)

        padded = integrate_energy({'H0': [(1.0, 1.0)]}, self.platform, makespan=2.0)
        self.assertEqual(padded['H0'], 300.0)

    def test_splitting_an_interval_keeps_the_energy(self):
        whole = integrate_energy({'H0': [(0.75, 0.25), (0.5, 0.5)]}, self.platform)
        split = integrate_energy({'H0': [(0.5, 0.25), (0.25, 0.25), (0.5, 0.5)]}, self.platform)
        self.assertEqual(whole, split)

    def test_doubling_power_doubles_energy(self):
        intervals = {'H0': [(0.3, 0.25), (0.7, 0.5), (1.5, 1.0)]}
        doubled = build_platform([HostFactory(id='H0', p_idle=200.0, p_full=400.0)])
        self.assertEqual(
            integrate_energy(intervals, doubled, makespan=3.0)['H0'],
            2 * integrate_energy(intervals, self.platform, makespan=3.0)['H0'],
        )

    def test_utilization_outside_unit_interval(self):
        with self.assertRaises(DomainError):
            integrate_energy({'H0': [(1.0, 1.5)]}, self.platform)
        with self.assertRaises(DomainError):
            integrate_energy({'H0': [(1.0, -0.1)]}, self.platform)

    def test_swapping_identical_hosts_keeps_total_energy(self):
        app = compute_only_application([3e9, 1e9])
        platform = uniform_platform(2)
        first = simulate(app, platform, Mapping({'R0': 'H0', 'R1': 'H1'}))
        swapped = simulate(app, platform, Mapping({'R0': 'H1', 'R1': 'H0'}))

        self.assertEqual(first.total_energy, swapped.total_energy)
        self.assertEqual(first.per_host_energy['H0'], swapped.per_host_energy['H1'])

    def test_simulation_energy_by_hand(self):
        # H0 ocupado 3 s, H1 ocupado 1 s y ocioso 2 s; el frontend no consume
        app = compute_only_application([3e9, 1e9])
        result = simulate(app, uniform_platform(2), Mapping({'R0': 'H0', 'R1': 'H1'}))

        self.assertEqual(result.per_host_energy['H0'], 600.0)
        self.assertEqual(result.per_host_energy['H1'], 400.0)
        self.assertEqual(result.total_energy, 1000.0)
        floor = sum(host.p_idle for host in uniform_platform(2).hosts) * result.makespan
        self.assertGreaterEqual(result.total_energy, floor)


class SummarizeBatchTests(SimpleTestCase):

    def test_single_result(self):
        result = SimulationResult(makespan=2.0, per_host_energy={'H0': 5.0}, total_energy=5.0, sim_wall_time=0.1)
        summary = summarize_batch([('7', result)])

        self.assertEqual(len(summary.rows), 1)
        for stats in (summary.makespan, summary.total_energy, summary.sim_wall_time):
            self.assertEqual(stats.minimum, stats.maximum)
            self.assertEqual(stats.minimum, stats.mean)
            self.assertEqual((stats.argmin, stats.argmax), ('7', '7'))
        self.assertEqual(summary.pareto_front, ('7',))

    def test_empty_batch(self):
        with self.assertRaises(EmptyBatchError):
            summarize_batch([])

    def test_pareto_front_and_minimum_energy(self):
        rows = [
            _row('a', 1.0, 10.0),
            _row('b', 2.0, 8.0),
            _row('c', 2.5, 9.0),
            _row('d', 3.0, 5.0),
            _row('e', 3.0, 6.0),
        ]
        summary = summarize_batch(rows)

        self.assertEqual(summary.pareto_front, ('a', 'b', 'd'))
        self.assertEqual(summary.total_energy.argmin, 'd')
        self.assertEqual(summary.makespan.argmin, 'a')
        self.assertEqual(summary.makespan.argmax, 'd')
        self.assertEqual(summary.makespan.mean, 2.3)

    def test_argmin_is_invariant_under_energy_rescaling(self):
        rows = [_row('a', 1.0, 10.0), _row('b', 2.0, 4.0), _row('c', 3.0, 7.0)]
        scaled = [replace(row, total_energy=row.total_energy * 3.6e6) for row in rows]
        self.assertEqual(summarize_batch(rows).total_energy.argmin, summarize_batch(scaled).total_energy.argmin)
        self.assertEqual(summarize_batch(rows).total_energy.argmax, summarize_batch(scaled).total_energy.argmax)

    def test_reference_mappings_extremes(self):
        app = generate_escience(32)
        platform = parse_platform(settings.REFERENCE_PLATFORMS_DIR / 'hlrs-heterogeneous.yaml')
        mappings = {
            'm_best': map_all_on(app, platform, 'HOST_0_2'),
            'm_good': parse_mapping(settings.REFERENCE_MAPPINGS_DIR / 'escience-32-m-good.yaml', app, platform),
            'm_bad': parse_mapping(settings.REFERENCE_MAPPINGS_DIR / 'escience-32-m-bad.yaml', app, platform),
            'm_worst': map_all_on(app, platform, 'HOST_0_1'),
        }
        summary = summarize_batch([(name, simulate(app, platform, mapping)) for name, mapping in mappings.items()])

        self.assertEqual(summary.makespan.argmin, 'm_best')
        self.assertEqual(summary.makespan.argmax, 'm_worst')


class CsvOutputTests(SimpleTestCase):

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def test_number_format(self):
        fmt = metrics_service.format_number
        self.assertEqual(fmt(1.025), '1.02500000')
        self.assertEqual(fmt(0.01025), '0.0102500000')
        self.assertEqual(fmt(200.0), '200.000000')
        self.assertEqual(fmt(0.0), '0')
        self.assertEqual(fmt(None), '')

    def test_batch_csv_layout(self):
        rows = [
            replace(_row('0', 1.5, 300.0, wall=0.002), seed=0, strategy='random', per_host_energy={'H0': 300.0}),
            replace(_row('1', 2.0, 250.0, wall=0.003), seed=1, strategy='random', per_host_energy={'H0': 250.0}),
        ]
        path = self.tmp / 'batch.csv'
        write_batch_csv(rows, ['H0', 'FRONTEND'], path, summary=summarize_batch(rows), wall_time=False)

        lines = path.read_bytes().decode('utf-8').split('\n')
        self.assertEqual(
            lines[0], 'mapping_id,seed,strategy,makespan_s,total_energy_j,sim_wall_ms,energy_H0_j,energy_FRONTEND_j',
        )
        self.assertEqual(lines[1], '0,0,random,1.50000000,300.000000,,300.000000,0')
        self.assertEqual(lines[2], '1,1,random,2.00000000,250.000000,,250.000000,0')
        self.assertIn('# min_makespan=1.50000000 id=0', lines)
        self.assertIn('# min_energy=250.000000 id=1', lines)
        self.assertNotIn(b'\r', path.read_bytes())

    def test_wall_time_column_is_in_milliseconds(self):
        row = replace(_row('0', 1.0, 1.0, wall=0.25), seed=0)
        path = self.tmp / 'batch.csv'
        write_batch_csv([row], [], path, wall_time=True)
        self.assertEqual(path.read_text(encoding='utf-8').split('\n')[1], '0,0,,1.00000000,1.00000000,250.000000')

    def test_energy_report(self):
        result = SimulationResult(makespan=1.0, per_host_energy={'H0': 150.0, 'H1': 100.0}, total_energy=250.0)
        path = self.tmp / 'energy.csv'
        write_energy_csv(result, ['H0', 'H1'], path)
        self.assertEqual(
            path.read_text(encoding='utf-8'),
            'host_id,energy_j\nH0,150.000000\nH1,100.000000\ntotal,250.000000\n',
        )


class RecordExperimentTests(TestCase):

    def test_batch_is_stored_with_its_rows(self):
        rows = [replace(_row(str(seed), 1.0 + seed, 10.0 - seed), seed=seed) for seed in range(3)]
        experiment = record_experiment(summarize_batch(rows), 'batch', 'app.yaml', 'platform.yaml', 'random', 0)

        self.assertEqual(BatchExperiment.objects.count(), 1)
        self.assertEqual(experiment.size, 3)
        self.assertEqual(experiment.min_makespan, 1.0)
        self.assertEqual(experiment.min_energy, 8.0)
        self.assertEqual(list(experiment.records.values_list('mapping_id', flat=True)), ['0', '1', '2'])
        self.assertEqual(SimulationRecord.objects.get(mapping_id='2').total_energy, 8.0)
