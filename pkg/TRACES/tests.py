import tempfile
from pathlib import Path

from django.conf import settings
from django.test import SimpleTestCase

from TaskMapper.exceptions import ValidationError

from APPMODEL.entities import ApplicationModel
from APPMODEL.escience import generate_escience
from APPMODEL.factories import compute_only_application
from MAPPING.entities import Mapping
from MAPPING.services import parse_mapping
from MAPPING.strategies import map_all_on, map_random
from PLATFORMS.factories import uniform_platform
from PLATFORMS.services import parse_platform
from SIMKERNEL.services import simulate

from .services import emit_paje
from .validators import check_paje, validate_paje

HETEROGENEOUS = settings.REFERENCE_PLATFORMS_DIR / 'hlrs-heterogeneous.yaml'


class PajeTraceTests(SimpleTestCase):

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def trace(self, app, platform, mapping, name='trace.paje'):
        path = self.tmp / name
        emit_paje(simulate(app, platform, mapping), platform, mapping, path)
        return path

    def body(self, path):
        return [line.split() for line in path.read_text(encoding='utf-8').split('\n') if line and line[0].isdigit()]

    def test_empty_application_has_only_platform_and_hosts(self):
        platform = uniform_platform(2)
        path = self.trace(ApplicationModel(), platform, Mapping())
        events = self.body(path)

        created = [fields[2] for fields in events if fields[0] == '4']
        self.assertEqual(created, ['platform', 'h_H0', 'h_H1', 'h_FRONTEND'])
        self.assertFalse([fields for fields in events if fields[0] == '5'])
        self.assertEqual(validate_paje(path), [])

    def test_single_compute_runnable(self):
        path = self.trace(compute_only_application([2e9]), uniform_platform(1), Mapping({'R0': 'H0'}))
        states = [(fields[1], fields[4]) for fields in self.body(path) if fields[0] == '5']

        self.assertEqual(states, [('0.000000000', 'V_Computing'), ('2.000000000', 'V_Done')])
        self.assertEqual(validate_paje(path), [])

    def test_file_layout(self):
        path = self.trace(compute_only_application([1e9]), uniform_platform(1), Mapping({'R0': 'H0'}))
        content = path.read_bytes()

        self.assertTrue(content.startswith(b'%EventDef PajeDefineContainerType 0\n'))
        self.assertNotIn(b'\r', content)
        self.assertTrue(content.endswith(b'\n'))

    def test_reference_scenarios_are_valid(self):
        app = generate_escience(32)
        platform = parse_platform(HETEROGENEOUS)
        mappings = [
            map_all_on(app, platform, 'HOST_0_2'),
            parse_mapping(settings.REFERENCE_MAPPINGS_DIR / 'escience-32-m-good.yaml', app, platform),
            parse_mapping(settings.REFERENCE_MAPPINGS_DIR / 'escience-32-m-bad.yaml', app, platform),
            map_all_on(app, platform, 'HOST_0_1'),
        ]
        for index, mapping in enumerate(mappings):
            path = self.trace(app, platform, mapping, f"reference-{index}.paje")
            self.assertEqual(validate_paje(path), [], msg=index)

    def test_random_mappings_are_valid(self):
        app = generate_escience(8)
        platform = parse_platform(HETEROGENEOUS)
        for seed in range(20):
            path = self.trace(app, platform, map_random(app, platform, seed), f"random-{seed}.paje")
            self.assertEqual(validate_paje(path), [], msg=seed)

    def test_remote_activation_is_a_dependency_link(self):
        app = compute_only_application([1e9, 1e9], activations=[(0, 1)])
        path = self.trace(app, uniform_platform(2, connected=True, latency=0.25), Mapping({'R0': 'H0', 'R1': 'H1'}))
        links = [fields for fields in self.body(path) if fields[0] in ('6', '7')]

        self.assertEqual([fields[0] for fields in links], ['6', '7'])
        self.assertEqual(links[0][1:5], ['1.000000000', 'LT_Dependency', 'platform', 'r_R0'])
        self.assertEqual(links[1][1:5], ['1.500000000', 'LT_Dependency', 'platform', 'r_R1'])


class PajeValidatorTests(SimpleTestCase):

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)
        app = compute_only_application([1e9, 1e9], activations=[(0, 1)])
        platform = uniform_platform(2, connected=True, latency=0.25)
        mapping = Mapping({'R0': 'H0', 'R1': 'H1'})
        self.valid = self.tmp / 'valid.paje'
        emit_paje(simulate(app, platform, mapping), platform, mapping, self.valid)
        self.lines = self.valid.read_text(encoding='utf-8').split('\n')

    def tearDown(self):
        self._tmp.cleanup()

    def broken(self, lines):
        path = self.tmp / 'broken.paje'
        path.write_text('\n'.join(lines), encoding='utf-8')
        return path

    def test_valid_trace_passes(self):
        self.assertEqual(validate_paje(self.valid), [])
        check_paje(self.valid)

    def test_missing_end_link(self):
        lines = [line for line in self.lines if not line.startswith('7 ')]
        problems = validate_paje(self.broken(lines))
        self.assertEqual(len(problems), 1)
        self.assertIn('nunca termina', problems[0])

    def test_time_going_backwards(self):
        lines = self.lines + ['5 0.000000000 ST_RunnableState r_R0 V_Done']
        self.assertTrue(any('retrocede' in problem for problem in validate_paje(self.broken(lines))))

    def test_container_used_before_creation(self):
        lines = [line for line in self.lines if 'r_R1 CT_Runnable' not in line]
        problems = validate_paje(self.broken(lines))
        self.assertTrue(any("'r_R1' no existe" in problem for problem in problems))

    def test_undefined_event(self):
        lines = self.lines + ['9 9.000000000 foo']
        self.assertTrue(any("'9' no definido" in problem for problem in validate_paje(self.broken(lines))))

    def test_check_raises_validation_error(self):
        lines = [line for line in self.lines if not line.startswith('6 ')]
        with self.assertRaises(ValidationError):
            check_paje(self.broken(lines))
