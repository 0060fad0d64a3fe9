import tempfile
from collections import Counter
from pathlib import Path

from django.conf import settings
from django.test import SimpleTestCase

from TaskMapper.exceptions import (
    ArgumentError, EmptyPlatformError, MappingError, UnknownHostError, ValidationError,
)

from APPMODEL.escience import generate_escience, ms2_runnable_ids
from APPMODEL.factories import compute_only_application
from APPMODEL.services import normalize_application
from PLATFORMS.factories import FRONTEND_ID, HostFactory, build_platform, uniform_platform
from PLATFORMS.services import parse_platform

from .entities import Mapping
from .prng import SplitMix64
from .services import mapping_service, ms2_distribution, parse_mapping, serialize_mapping
from .strategies import (
    AllOnStrategy, FileStrategy, GreedyLoadStrategy, RandomStrategy, map_all_on, map_greedy_load,
    map_random, map_round_robin, strategy_from_spec,
)

HETEROGENEOUS = settings.REFERENCE_PLATFORMS_DIR / 'hlrs-heterogeneous.yaml'


def _fingerprint(mapping):
    return tuple(sorted(mapping.runnable_to_host.items())), tuple(sorted(mapping.label_to_host.items()))


class SplitMix64Tests(SimpleTestCase):

    def test_reference_sequence_for_seed_zero(self):
        rng = SplitMix64(0)
        self.assertEqual(rng.next_u64(), 0xE220A8397B1DCDAF)
        self.assertEqual(rng.next_u64(), 0x6E789E6AA1B965F4)

    def test_below_stays_in_range(self):
        rng = SplitMix64(42)
        draws = [rng.below(5) for _ in range(1000)]
        self.assertEqual(set(draws), {0, 1, 2, 3, 4})

    def test_invalid_seed(self):
        for seed in (-1, 1 << 64, 1.5):
            with self.assertRaises(ArgumentError):
                SplitMix64(seed)


class RandomMappingTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.app = generate_escience(32)
        cls.platform = parse_platform(HETEROGENEOUS)

    def test_same_seed_same_mapping(self):
        first = map_random(self.app, self.platform, 7)
        second = map_random(self.app, self.platform, 7)
        self.assertEqual(first, second)
        self.assertEqual(mapping_service.to_document(first), mapping_service.to_document(second))

    def test_seed_sweep_gives_distinct_mappings(self):
        fingerprints = {_fingerprint(map_random(self.app, self.platform, seed)) for seed in range(100)}
        self.assertGreaterEqual(len(fingerprints), 95)

    def test_frontend_is_excluded_unless_allowed(self):
        used = set()
        for seed in range(50):
            mapping = map_random(self.app, self.platform, seed)
            used.update(mapping.runnable_to_host.values(), mapping.label_to_host.values())
        self.assertNotIn('FRONTEND', used)

        mapping = map_random(self.app, self.platform, 3, allow_frontend=True)
        self.assertIn('FRONTEND', set(mapping.runnable_to_host.values()) | set(mapping.label_to_host.values()))

    def test_single_host_takes_everything(self):
        platform = uniform_platform(1)
        mapping = map_random(self.app, platform, 11)
        self.assertEqual(set(mapping.runnable_to_host.values()), {'H0'})
        self.assertEqual(set(mapping.label_to_host.values()), {'H0'})

    def test_mapping_is_total(self):
        mapping = map_random(self.app, self.platform, 123)
        mapping_service.validate(mapping, self.app, self.platform)

    def test_empty_platform(self):
        with self.assertRaises(EmptyPlatformError):
            map_random(self.app, build_platform([]), 0)


class RoundRobinMappingTests(SimpleTestCase):

    def test_cycles_over_hosts(self):
        app = compute_only_application([1, 1, 1, 1])
        mapping = map_round_robin(app, uniform_platform(2))
        self.assertEqual([mapping.runnable_to_host[f"R{i}"] for i in range(4)], ['H0', 'H1', 'H0', 'H1'])

    def test_single_runnable_goes_to_first_host(self):
        mapping = map_round_robin(compute_only_application([1]), uniform_platform(5))
        self.assertEqual(mapping.runnable_to_host, {'R0': 'H0'})

    def test_ms2_counts_are_balanced(self):
        app = generate_escience(32)
        mapping = map_round_robin(app, parse_platform(HETEROGENEOUS))
        counts = Counter(mapping.runnable_to_host[rid] for rid in ms2_runnable_ids(app))
        self.assertEqual(len(counts), 5)
        self.assertLessEqual(max(counts.values()) - min(counts.values()), 1)
        self.assertEqual(sorted(counts.values()), [6, 6, 6, 7, 7])

    def test_labels_follow_first_writer(self):
        app = generate_escience(3)
        mapping = map_round_robin(app, parse_platform(HETEROGENEOUS))
        self.assertEqual(mapping.label_to_host['L3_02'], mapping.runnable_to_host['R3'])
        self.assertEqual(mapping.label_to_host['L5_02'], mapping.runnable_to_host['R4_02'])
        self.assertEqual(mapping.label_to_host['L0'], mapping.runnable_to_host['R0'])


class AllOnMappingTests(SimpleTestCase):

    def test_everything_on_one_host(self):
        app = generate_escience(32)
        platform = parse_platform(HETEROGENEOUS)
        mapping = map_all_on(app, platform, 'HOST_0_2')
        self.assertEqual(set(mapping.runnable_to_host.values()), {'HOST_0_2'})
        self.assertEqual(set(mapping.label_to_host.values()), {'HOST_0_2'})
        self.assertEqual(ms2_distribution(app, mapping), {'HOST_0_2': 1.0})

    def test_frontend_can_be_targeted(self):
        mapping = map_all_on(compute_only_application([1]), uniform_platform(1), FRONTEND_ID)
        self.assertEqual(mapping.runnable_to_host, {'R0': FRONTEND_ID})

    def test_unknown_host(self):
        with self.assertRaises(UnknownHostError):
            map_all_on(compute_only_application([1]), uniform_platform(2), 'H9')


class GreedyLoadMappingTests(SimpleTestCase):

    def test_equal_work_is_balanced(self):
        mapping = map_greedy_load(compute_only_application([5.0] * 11), uniform_platform(3))
        counts = mapping.runnables_per_host()
        self.assertLessEqual(max(counts.values()) - min(counts.values()), 1)

    def test_fast_host_takes_the_majority_of_ms2(self):
        app = normalize_application(generate_escience(32))
        mapping = map_greedy_load(app, parse_platform(HETEROGENEOUS))
        on_fast = sum(1 for rid in ms2_runnable_ids(app) if mapping.runnable_to_host[rid] == 'HOST_0_2')
        self.assertGreater(on_fast, 16)

    def test_single_runnable_goes_to_fastest_host(self):
        hosts = [HostFactory(id='SLOW', speed=1e9), HostFactory(id='FAST', speed=4e9), HostFactory(id='MID', speed=2e9)]
        mapping = map_greedy_load(compute_only_application([10.0]), build_platform(hosts))
        self.assertEqual(mapping.runnable_to_host, {'R0': 'FAST'})

    def test_each_step_minimizes_finish_time(self):
        works = [7.0, 3.0, 3.0, 9.0, 1.0, 4.0, 4.0, 2.0]
        hosts = [HostFactory(id='A', speed=1.0), HostFactory(id='B', speed=2.0), HostFactory(id='C', speed=3.0)]
        app = compute_only_application(works)
        mapping = map_greedy_load(app, build_platform(hosts))

        load = {host.id: 0.0 for host in hosts}
        for rid in sorted(app.runnable_by_id, key=lambda r: (-works[int(r[1:])], r)):
            work = works[int(rid[1:])]
            chosen = mapping.runnable_to_host[rid]
            best = min((load[h.id] + work) / h.speed for h in hosts)
            self.assertEqual((load[chosen] + work) / next(h.speed for h in hosts if h.id == chosen), best)
            load[chosen] += work


class MappingFileTests(SimpleTestCase):

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)
        self.app = generate_escience(32)
        self.platform = parse_platform(HETEROGENEOUS)

    def tearDown(self):
        self._tmp.cleanup()

    def test_round_trip(self):
        mapping = map_random(self.app, self.platform, 5)
        path = self.tmp / 'm.yaml'
        serialize_mapping(mapping, path)
        self.assertEqual(parse_mapping(path, app=self.app, platform=self.platform), mapping)

    def test_missing_runnable_is_named(self):
        mapping = map_random(self.app, self.platform, 5)
        partial = Mapping(
            runnable_to_host={r: h for r, h in mapping.runnable_to_host.items() if r != 'R4_07'},
            label_to_host=mapping.label_to_host,
        )
        path = self.tmp / 'partial.yaml'
        serialize_mapping(partial, path)
        with self.assertRaises(ValidationError) as ctx:
            parse_mapping(path, app=self.app, platform=self.platform)
        self.assertIsInstance(ctx.exception, MappingError)
        self.assertEqual(ctx.exception.entity, 'R4_07')

    def test_unknown_host_is_named(self):
        path = self.tmp / 'bad.yaml'
        path.write_text("runnables:\n  - {id: R0, host: NOWHERE}\n", encoding='utf-8')
        app = compute_only_application([1.0])
        with self.assertRaises(MappingError) as ctx:
            parse_mapping(path, app=app, platform=uniform_platform(1))
        self.assertEqual(ctx.exception.entity, 'NOWHERE')

    def test_duplicate_entry(self):
        path = self.tmp / 'dup.yaml'
        path.write_text("runnables:\n  - {id: R0, host: H0}\n  - {id: R0, host: H0}\n", encoding='utf-8')
        with self.assertRaises(ValidationError):
            parse_mapping(path)

    def test_good_mapping_file_matches_the_published_split(self):
        mapping = parse_mapping(
            settings.REFERENCE_MAPPINGS_DIR / 'escience-32-m-good.yaml', app=self.app, platform=self.platform,
        )
        distribution = ms2_distribution(self.app, mapping, self.platform.host_ids)
        self.assertEqual(distribution['HOST_0_0'], 17 / 32)
        self.assertEqual(distribution['HOST_0_1'], 0.0625)
        self.assertEqual(distribution['HOST_0_2'], 0.1875)
        self.assertEqual(distribution['HOST_1_0'], 0.09375)
        self.assertEqual(distribution['HOST_1_1'], 0.125)
        self.assertEqual(distribution['FRONTEND'], 0.0)

    def test_bad_mapping_file_matches_the_published_split(self):
        mapping = parse_mapping(
            settings.REFERENCE_MAPPINGS_DIR / 'escience-32-m-bad.yaml', app=self.app, platform=self.platform,
        )
        distribution = ms2_distribution(self.app, mapping)
        self.assertEqual(distribution['HOST_0_0'], 0.25)
        self.assertEqual(distribution['HOST_0_2'], 11 / 32)
        self.assertEqual(set(mapping.label_to_host[f"L3_{i:02d}"] for i in range(1, 33)), {'HOST_1_1'})

    def test_file_strategy_equals_programmatic_mapping(self):
        mapping = map_random(self.app, self.platform, 9)
        path = self.tmp / 'm.yaml'
        serialize_mapping(mapping, path)
        self.assertEqual(FileStrategy(path).produce(self.app, self.platform), mapping)


class StrategyFromSpecTests(SimpleTestCase):

    def test_known_names(self):
        self.assertIsInstance(strategy_from_spec('random'), RandomStrategy)
        self.assertIsInstance(strategy_from_spec('greedy-load'), GreedyLoadStrategy)
        strategy = strategy_from_spec('all-on:HOST_0_2')
        self.assertIsInstance(strategy, AllOnStrategy)
        self.assertEqual(strategy.host_id, 'HOST_0_2')
        self.assertEqual(str(strategy_from_spec('file:m.yaml')), 'file:m.yaml')
        self.assertTrue(strategy_from_spec('round-robin', allow_frontend=True).allow_frontend)

    def test_unknown_names(self):
        for spec in ('', 'annealing', 'all-on:', 'file:'):
            with self.assertRaises(ArgumentError):
                strategy_from_spec(spec)
