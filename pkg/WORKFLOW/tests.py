import multiprocessing
import tempfile
from io import StringIO
from pathlib import Path
from unittest import mock

from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.db import OperationalError
from django.test import SimpleTestCase, TestCase, override_settings, tag

from APPMODEL.escience import generate_escience, ms2_runnable_ids
from APPMODEL.services import normalize_application, parse_application
from MAPPING.services import ms2_distribution, serialize_mapping
from MAPPING.strategies import map_random, strategy_from_spec
from METRICS.models import BatchExperiment
from METRICS.services import summarize_batch
from PLATFORMS.services import parse_platform
from TRACES.validators import validate_paje

from .services import run_batch

HETEROGENEOUS = str(settings.REFERENCE_PLATFORMS_DIR / 'hlrs-heterogeneous.yaml')
HOMOGENEOUS = str(settings.REFERENCE_PLATFORMS_DIR / 'hlrs-homogeneous.yaml')
SEVEN_TASKS = str(settings.REFERENCE_APPLICATIONS_DIR / 'seven-task-example.yaml')
M_GOOD = str(settings.REFERENCE_MAPPINGS_DIR / 'escience-32-m-good.yaml')


class CommandTestMixin:

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls._shared = tempfile.TemporaryDirectory()
        cls.shared = Path(cls._shared.name)
        cls.escience = str(cls.shared / 'escience-32.yaml')
        call_command('generate', '--escience', '--ms2', '32', '--out', cls.escience, stdout=StringIO())

    @classmethod
    def tearDownClass(cls):
        cls._shared.cleanup()
        super().tearDownClass()

    def setUp(self):
        super().setUp()
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()
        super().tearDown()

    def call(self, *args):
        out = StringIO()
        call_command(*args, stdout=out, stderr=StringIO())
        return out.getvalue()

    def call_error(self, *args) -> CommandError:
        with self.assertRaises(CommandError) as ctx:
            self.call(*args)
        return ctx.exception

    def outputs(self, text):
        return dict(line.split('=', 1) for line in text.splitlines() if '=' in line)


class ValidateCommandTests(CommandTestMixin, SimpleTestCase):

    def test_valid_inputs(self):
        output = self.call('validate', '--app', self.escience, '--platform', HETEROGENEOUS, '--mapping', M_GOOD)
        self.assertEqual(output.count('OK '), 3)

    def test_dangling_label_exits_with_validation_code(self):
        path = self.tmp / 'dangling.yaml'
        path.write_text(
            "tasks:\n  - id: T1\n    runnables:\n      - id: R1\n        instructions:\n"
            "          - {op: read, label: LX}\n",
            encoding='utf-8',
        )
        error = self.call_error('validate', '--app', str(path), '--platform', HETEROGENEOUS)
        self.assertEqual(error.returncode, 2)
        self.assertTrue(str(error).startswith('ValidationError: '))
        self.assertIn('LX', str(error))

    def test_missing_file_exits_with_io_code(self):
        error = self.call_error('validate', '--app', str(self.tmp / 'missing.yaml'), '--platform', HETEROGENEOUS)
        self.assertEqual(error.returncode, 1)
        self.assertTrue(str(error).startswith('IoError: '))

    def test_mapping_requires_inputs(self):
        error = self.call_error('validate', '--mapping', M_GOOD)
        self.assertEqual(error.returncode, 2)
        self.assertTrue(str(error).startswith('ArgumentError: '))

    def test_partial_mapping_names_the_runnable(self):
        error = self.call_error('validate', '--app', SEVEN_TASKS, '--platform', HETEROGENEOUS, '--mapping', M_GOOD)
        self.assertEqual(error.returncode, 2)
        self.assertTrue(str(error).startswith('MappingError: '))

    def test_trace_validation(self):
        out = self.tmp / 'run'
        self.call('simulate', '--app', SEVEN_TASKS, '--platform', HETEROGENEOUS, '--mapping', 'round-robin',
                  '--out', str(out), '--trace')
        self.assertIn('traza Paje válida', self.call('validate', '--trace', str(out / 'trace.paje')))

        broken = self.tmp / 'broken.paje'
        broken.write_text((out / 'trace.paje').read_text(encoding='utf-8') + '9 9.000000000 foo\n', encoding='utf-8')
        self.assertEqual(self.call_error('validate', '--trace', str(broken)).returncode, 2)


class SimulateCommandTests(CommandTestMixin, TestCase):

    def simulate(self, *extra, out='run'):
        output = self.call('simulate', '--app', self.escience, '--platform', HETEROGENEOUS,
                           '--out', str(self.tmp / out), *extra)
        return self.outputs(output)

    def test_fast_host_beats_slow_host(self):
        fast = self.simulate('--mapping', 'all-on:HOST_0_2', out='fast')
        slow = self.simulate('--mapping', 'all-on:HOST_0_1', out='slow')
        self.assertLess(float(fast['makespan_s']), float(slow['makespan_s']))

    def test_outputs_are_written(self):
        self.simulate('--mapping', 'random', '--seed', '3', '--trace')
        out = self.tmp / 'run'

        lines = (out / 'result.csv').read_text(encoding='utf-8').split('\n')
        self.assertTrue(lines[0].startswith('mapping_id,seed,strategy,makespan_s,total_energy_j,sim_wall_ms,'))
        self.assertTrue(lines[1].startswith('3,3,random,'))
        energy = (out / 'energy.csv').read_text(encoding='utf-8').split('\n')
        self.assertEqual(energy[0], 'host_id,energy_j')
        self.assertEqual([line.split(',')[0] for line in energy[1:-1]],
                         ['HOST_0_0', 'HOST_0_1', 'HOST_0_2', 'HOST_1_0', 'HOST_1_1', 'FRONTEND', 'total'])
        self.assertTrue((out / 'summary.json').exists())
        self.assertEqual(validate_paje(out / 'trace.paje'), [])

    def test_same_seed_gives_identical_files(self):
        self.simulate('--mapping', 'random', '--seed', '7', out='first')
        self.simulate('--mapping', 'random', '--seed', '7', out='second')
        for name in ('result.csv', 'energy.csv', 'summary.json'):
            self.assertEqual((self.tmp / 'first' / name).read_bytes(), (self.tmp / 'second' / name).read_bytes())

    def test_mapping_file_matches_programmatic_mapping(self):
        app = parse_application(self.escience)
        platform = parse_platform(HETEROGENEOUS)
        path = self.tmp / 'seed-5.yaml'
        serialize_mapping(map_random(app, platform, 5), path)

        from_file = self.simulate('--mapping', f"file:{path}", out='file')
        generated = self.simulate('--mapping', 'random', '--seed', '5', out='random')
        self.assertEqual(from_file, generated)

    def test_unknown_strategy(self):
        error = self.call_error('simulate', '--app', self.escience, '--platform', HETEROGENEOUS,
                                '--mapping', 'best-guess', '--out', str(self.tmp / 'x'))
        self.assertEqual(error.returncode, 2)

    def test_record_stores_the_run(self):
        self.simulate('--mapping', 'round-robin', '--record')
        experiment = BatchExperiment.objects.get()
        self.assertEqual(experiment.command, 'simulate')
        self.assertEqual(experiment.records.count(), 1)

    def test_record_without_migrations(self):
        missing_table = OperationalError('no such table: METRICS_batchexperiment')
        with mock.patch('METRICS.services.BatchExperiment.objects.create', side_effect=missing_table):
            error = self.call_error('simulate', '--app', self.escience, '--platform', HETEROGENEOUS,
                                    '--mapping', 'round-robin', '--out', str(self.tmp / 'run'), '--record')
        self.assertEqual(error.returncode, 1)
        self.assertTrue(str(error).startswith('RecordError: '))


class BatchCommandTests(CommandTestMixin, TestCase):

    def batch(self, *extra, name='batch.csv'):
        path = self.tmp / name
        output = self.call('batch', '--app', self.escience, '--csv', str(path), *extra)
        return path, self.outputs(output)

    def test_hundred_random_mappings_on_homogeneous_platform(self):
        path, output = self.batch('--platform', HOMOGENEOUS, '--n', '100', '--seed', '0')
        lines = path.read_text(encoding='utf-8').split('\n')
        rows = [line for line in lines[1:] if line and not line.startswith('#')]

        self.assertEqual(len(rows), 100)
        self.assertEqual([row.split(',')[0] for row in rows], [str(seed) for seed in range(100)])
        makespans = [float(row.split(',')[3]) for row in rows]
        self.assertGreater(max(makespans), min(makespans))
        self.assertEqual(output['rows'], '100')
        self.assertTrue(any(line.startswith('# min_makespan=') for line in lines))

    def test_output_does_not_depend_on_jobs(self):
        single, _ = self.batch('--platform', HETEROGENEOUS, '--n', '100', '--jobs', '1', name='single.csv')
        parallel, _ = self.batch('--platform', HETEROGENEOUS, '--n', '100', '--jobs', '8', name='parallel.csv')
        again, _ = self.batch('--platform', HETEROGENEOUS, '--n', '100', '--jobs', '1', name='again.csv')

        self.assertEqual(single.read_bytes(), parallel.read_bytes())
        self.assertEqual(single.read_bytes(), again.read_bytes())

    def test_single_row_batch_equals_simulate(self):
        path, _ = self.batch('--platform', HETEROGENEOUS, '--n', '1', '--seed', '9')
        self.call('simulate', '--app', self.escience, '--platform', HETEROGENEOUS, '--mapping', 'random',
                  '--seed', '9', '--out', str(self.tmp / 'run'))

        batch_lines = path.read_text(encoding='utf-8').split('\n')
        simulate_lines = (self.tmp / 'run' / 'result.csv').read_text(encoding='utf-8').split('\n')
        self.assertEqual(batch_lines[:2], simulate_lines[:2])

    def test_summary_reports_ms2_distribution(self):
        path, _ = self.batch('--platform', HETEROGENEOUS, '--n', '10')
        comments = [line for line in path.read_text(encoding='utf-8').split('\n') if line.startswith('#')]
        self.assertTrue(any(line.startswith('# ms2_min_makespan=HOST_0_0:') for line in comments))
        self.assertTrue(any(line.startswith('# pareto_front=') for line in comments))

    def test_record_stores_every_row(self):
        self.batch('--platform', HETEROGENEOUS, '--n', '5', '--seed', '20', '--record')
        experiment = BatchExperiment.objects.get()
        self.assertEqual(experiment.size, 5)
        self.assertEqual(list(experiment.records.values_list('seed', flat=True)), [20, 21, 22, 23, 24])

    def test_empty_batch_is_rejected(self):
        error = self.call_error('batch', '--app', self.escience, '--platform', HETEROGENEOUS,
                                '--n', '0', '--csv', str(self.tmp / 'empty.csv'))
        self.assertEqual(error.returncode, 2)


class GenerateCommandTests(CommandTestMixin, SimpleTestCase):

    def test_escience_sizes(self):
        self.assertEqual(len(parse_application(self.escience).tasks), 39)

        path = self.tmp / 'one.yaml'
        self.call('generate', '--escience', '--ms2', '1', '--out', str(path))
        self.assertEqual(len(parse_application(path).tasks), 8)

    def test_profile_overrides(self):
        path = self.tmp / 'heavy.yaml'
        self.call('generate', '--escience', '--ms2', '2', '--out', str(path), '--work', 'ms2=6e7',
                  '--label-size', 'input=1e6')
        app = parse_application(path)
        self.assertEqual(app.label_by_name['L3_01'].size_bytes, 1_000_000)

    def test_zero_ms2_tasks(self):
        error = self.call_error('generate', '--escience', '--ms2', '0', '--out', str(self.tmp / 'zero.yaml'))
        self.assertEqual(error.returncode, 2)
        self.assertTrue(str(error).startswith('ArgumentError: '))

    def test_fractional_label_size(self):
        error = self.call_error('generate', '--escience', '--ms2', '2', '--out', str(self.tmp / 'x.yaml'),
                                '--label-size', 'input=1.5')
        self.assertEqual(error.returncode, 2)
        self.assertTrue(str(error).startswith('ArgumentError: '))
        self.assertFalse((self.tmp / 'x.yaml').exists())

    def test_unknown_profile_key(self):
        error = self.call_error('generate', '--escience', '--ms2', '2', '--out', str(self.tmp / 'x.yaml'),
                                '--work', 'warp=1')
        self.assertEqual(error.returncode, 2)


class StartMethodTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.app = normalize_application(generate_escience(4))
        cls.platform = parse_platform(HETEROGENEOUS)

    def rows(self, jobs):
        rows = run_batch(self.app, self.platform, 'random', 6, first_seed=40, jobs=jobs)
        return [(row.mapping_id, row.makespan, row.total_energy, row.per_host_energy) for row in rows]

    def test_workers_start_without_fork(self):
        expected = self.rows(jobs=1)
        for method in ('spawn', 'forkserver'):
            if method not in multiprocessing.get_all_start_methods():
                continue
            with self.subTest(method=method), override_settings(BATCH_START_METHOD=method):
                self.assertEqual(self.rows(jobs=2), expected)


class ReferenceSweepTests(SimpleTestCase):

    @tag('slow')
    def test_six_thousand_mappings(self):
        app = normalize_application(generate_escience(32))
        platform = parse_platform(HETEROGENEOUS)
        rows = run_batch(app, platform, 'random', 6000, jobs=4)
        summary = summarize_batch(rows)

        self.assertEqual(len(rows), 6000)
        strategy = strategy_from_spec('random')
        hosts = [host.id for host in platform.candidate_hosts()]
        fastest = ms2_distribution(app, strategy.produce(app, platform, int(summary.makespan.argmin)), hosts)
        slowest = ms2_distribution(app, strategy.produce(app, platform, int(summary.makespan.argmax)), hosts)
        self.assertEqual(len(ms2_runnable_ids(app)), 32)
        self.assertGreater(fastest['HOST_0_2'], slowest['HOST_0_2'])
