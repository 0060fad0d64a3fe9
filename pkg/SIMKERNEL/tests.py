import math
import random
from dataclasses import replace

from django.conf import settings
from django.test import SimpleTestCase

from TaskMapper.exceptions import (
    DeadlockError, KernelInvariantError, MappingError, SimulationCompleteError,
)

from APPMODEL.entities import ApplicationModel, Instruction, Label, Runnable
from APPMODEL.escience import generate_escience
from APPMODEL.factories import compute_only_application, single_runnable_tasks
from APPMODEL.services import normalize_application, parse_application
from MAPPING.entities import Mapping
from MAPPING.services import parse_mapping
from MAPPING.strategies import map_all_on, map_random, map_round_robin
from METRICS.entities import PHASE_ENTER, TRANSFER_END, TRANSFER_START
from PLATFORMS.factories import FRONTEND_ID, HostFactory, LinkFactory, build_platform, uniform_platform
from PLATFORMS.services import parse_platform

from .actions import ComputeAction, RunnableState
from .engine import SimulationKernel
from .services import simulate
from .sharing import share_resources

HETEROGENEOUS = settings.REFERENCE_PLATFORMS_DIR / 'hlrs-heterogeneous.yaml'


def _filling_oracle(demands, capacities):
    """
    Llenado progresivo por niveles: todas las acciones libres suben juntas y
    en cada ronda se congelan los usuarios de todos los recursos que se saturan
    en el nivel mínimo
    """
    rates = {}
    free = set(demands)
    while free:
        levels = {}
        for resource, capacity in capacities.items():
            users = [a for a in demands if resource in demands[a]]
            unfrozen = [a for a in users if a in free]
            if unfrozen:
                used = sum(rates[a] for a in users if a not in free)
                levels[resource] = max(0.0, capacity - used) / len(unfrozen)
        level = min(levels.values())
        saturated = [r for r, value in levels.items() if value <= level * (1 + 1e-12)]
        for action in sorted(free):
            if any(resource in demands[action] for resource in saturated):
                rates[action] = level
        free -= set(rates)
    return rates


def _random_sharing_instance(rng):
    resources = [f"r{i}" for i in range(rng.randint(1, 6))]
    capacities = {resource: rng.choice([1.0, 2.5, 4.0, 10.0, 1e6, 1.25e8]) * rng.randint(1, 5) for resource in resources}
    demands = {}
    for action in range(rng.randint(1, 10)):
        demands[action] = tuple(rng.sample(resources, rng.randint(1, len(resources))))
    return demands, capacities


def _fair_share_schedule(works, edges, assignment, speeds):
    """Planificación continua de un DAG sin comunicaciones con reparto justo por host"""
    remaining = list(works)
    predecessors = {j: {i for i, k in edges if k == j} for j in range(len(works))}
    done = set()
    now = 0.0
    while len(done) < len(works):
        running = [i for i in range(len(works)) if i not in done and predecessors[i] <= done]
        per_host = {}
        for i in running:
            per_host[assignment[i]] = per_host.get(assignment[i], 0) + 1
        rate = {i: speeds[assignment[i]] / per_host[assignment[i]] for i in running}
        delta = min(remaining[i] / rate[i] for i in running)
        now += delta
        for i in running:
            remaining[i] -= rate[i] * delta
            if remaining[i] <= 1e-12 * works[i]:
                done.add(i)
    return now


def _connected_platform(speeds, bandwidth=1e9, latency=0.0):
    hosts = [HostFactory(id=f"H{i}", speed=speed, p_idle=100.0, p_full=200.0) for i, speed in enumerate(speeds)]
    links = [LinkFactory(id=f"K_{i}", bandwidth=bandwidth, latency=latency) for i in range(len(speeds))]
    routes = [(f"H{i}", f"H{j}", [f"K_{i}", f"K_{j}"]) for i in range(len(speeds)) for j in range(i + 1, len(speeds))]
    return build_platform(hosts, links, routes)


def _two_host_platform(bandwidth=1e6, latency=0.1):
    hosts = [HostFactory(id='h1', speed=1e9), HostFactory(id='h2', speed=1e9)]
    return build_platform(hosts, [LinkFactory(id='K', bandwidth=bandwidth, latency=latency)], [('h2', 'h1', ['K'])])


def _application(runnables, labels=(), activations=()):
    edges = tuple((f"T_{a}", f"T_{b}") for a, b in activations)
    return normalize_application(
        ApplicationModel(labels=tuple(labels), tasks=single_runnable_tasks(*runnables), activation_edges=edges)
    )


class ShareResourcesTests(SimpleTestCase):

    def test_equal_split_on_one_link(self):
        rates = share_resources({'a': ['link'], 'b': ['link']}, {'link': 10e6})
        self.assertEqual(rates, {'a': 5e6, 'b': 5e6})

    def test_three_compute_actions_on_one_host(self):
        rates = share_resources({i: [('host', 'h')] for i in range(3)}, {('host', 'h'): 3e9})
        self.assertEqual(set(rates.values()), {1e9})

    def test_progressive_filling_by_hand(self):
        rates = share_resources({'f1': ['A'], 'f2': ['A', 'B'], 'f3': ['B']}, {'A': 10, 'B': 4})
        self.assertEqual(rates, {'f1': 8, 'f2': 2, 'f3': 2})

    def test_action_without_resources_is_unbounded(self):
        self.assertEqual(share_resources({'x': []}, {}), {'x': float('inf')})

    def test_repeated_resource_counts_once(self):
        rates = share_resources({'a': ['A', 'A'], 'b': ['A']}, {'A': 6})
        self.assertEqual(rates, {'a': 3, 'b': 3})

    def test_matches_level_oracle_on_random_instances(self):
        rng = random.Random(20240601)
        for _ in range(250):
            demands, capacities = _random_sharing_instance(rng)
            rates = share_resources(demands, capacities)
            expected = _filling_oracle(demands, capacities)
            for action, rate in expected.items():
                self.assertLessEqual(abs(rates[action] - rate), 1e-9 * rate, msg=(demands, capacities))

    def test_every_action_has_a_saturated_bottleneck_where_it_is_maximal(self):
        rng = random.Random(7)
        for _ in range(200):
            demands, capacities = _random_sharing_instance(rng)
            rates = share_resources(demands, capacities)
            for action, resources in demands.items():
                bottlenecks = []
                for resource in resources:
                    users = [a for a in demands if resource in demands[a]]
                    used = sum(rates[a] for a in users)
                    self.assertLessEqual(used, capacities[resource] * (1 + 1e-9))
                    saturated = used >= capacities[resource] * (1 - 1e-9)
                    maximal = all(rates[a] <= rates[action] * (1 + 1e-9) for a in users)
                    bottlenecks.append(saturated and maximal)
                self.assertTrue(any(bottlenecks), msg=(demands, capacities, rates))


class SimulateTests(SimpleTestCase):

    def test_single_runnable_runs_at_host_speed(self):
        app = compute_only_application([10e9])
        platform = uniform_platform(1, speed=1e9)
        result = simulate(app, platform, Mapping({'R0': 'H0'}), audit=True)
        self.assertEqual(result.makespan, 10.0)

    def test_two_equal_runnables_share_the_host(self):
        app = compute_only_application([10e9, 10e9])
        platform = uniform_platform(1, speed=1e9)
        kernel = SimulationKernel(normalize_application(app), platform, Mapping({'R0': 'H0', 'R1': 'H0'}), audit=True)
        kernel.run()
        self.assertEqual([p.finished_at for p in kernel.processes.values()], [20.0, 20.0])
        self.assertEqual(kernel.makespan, 20.0)

    def test_remote_read_after_remote_activation(self):
        # A escribe L en su propio host h2; la activación y la lectura cruzan el enlace
        writer = Runnable('A', (Instruction.write('L'),))
        reader = Runnable('B', (Instruction.read('L'),))
        app = _application([writer, reader], labels=[Label('L', 8_000_000)], activations=[('A', 'B')])
        mapping = Mapping({'A': 'h2', 'B': 'h1'}, {'L': 'h2'})

        result = simulate(app, _two_host_platform(), mapping, audit=True)

        self.assertAlmostEqual(result.makespan, 8.2, delta=1e-9)
        read_end = [e for e in result.timeline if e.kind == TRANSFER_END and e.transfer == 'read']
        self.assertEqual(len(read_end), 1)
        self.assertAlmostEqual(read_end[0].time - 0.1, 8.1, delta=1e-9)

    def test_remote_write_is_paid_before_activation(self):
        writer = Runnable('A', (Instruction.write('L'),))
        reader = Runnable('B', (Instruction.read('L'),))
        app = _application([writer, reader], labels=[Label('L', 8_000_000)], activations=[('A', 'B')])
        mapping = Mapping({'A': 'h1', 'B': 'h1'}, {'L': 'h2'})

        result = simulate(app, _two_host_platform(), mapping, audit=True)

        self.assertAlmostEqual(result.makespan, 16.2, delta=1e-9)

    def test_completion_time_is_recomputed_after_each_event(self):
        app = normalize_application(compute_only_application([4, 6]))
        kernel = SimulationKernel(app, uniform_platform(1, speed=2), Mapping({'R0': 'H0', 'R1': 'H0'}), audit=True)

        kernel.advance()
        self.assertEqual(kernel.now, 4)
        self.assertIs(kernel.processes['R0'].state, RunnableState.DONE)
        self.assertEqual(kernel.processes['R1'].state, RunnableState.COMPUTING)
        (action,) = kernel._computes['H0']
        self.assertEqual(action.remaining_work, 2)

        kernel.advance()
        self.assertEqual(kernel.now, 5)
        self.assertEqual(action.current_rate, 2)
        self.assertTrue(kernel.finished)

    def test_action_without_rate_never_completes_first(self):
        action = ComputeAction(owner='R0', host='H0', work=5)
        self.assertEqual(action.time_to_completion(), float('inf'))

    def test_finished_simulation_refuses_to_advance(self):
        app = normalize_application(compute_only_application([1e9]))
        kernel = SimulationKernel(app, uniform_platform(1), Mapping({'R0': 'H0'})).run()
        with self.assertRaises(SimulationCompleteError):
            kernel.advance()

    def test_lost_activation_is_reported_as_deadlock(self):
        app = normalize_application(compute_only_application([1e9, 1e9], activations=[(0, 1)]))
        kernel = SimulationKernel(app, uniform_platform(1), Mapping({'R0': 'H0', 'R1': 'H0'}))
        kernel.processes['R1'].pending_activations += 1
        with self.assertRaises(DeadlockError):
            kernel.run()

    def test_partial_mapping_is_rejected(self):
        app = compute_only_application([1e9, 1e9])
        with self.assertRaises(MappingError):
            simulate(app, uniform_platform(1), Mapping({'R0': 'H0'}))

    def test_audit_detects_lost_work(self):
        app = normalize_application(compute_only_application([1e9]))
        kernel = SimulationKernel(app, uniform_platform(1), Mapping({'R0': 'H0'}), audit=True)
        (action,) = kernel._computes['H0']
        action.progress = -10.0
        with self.assertRaises(KernelInvariantError):
            kernel.run()

    def test_overloaded_host_slows_down_proportionally(self):
        app = compute_only_application([1e9] * 19)
        assignment = {f"R{i}": 'H0' if i < 15 else 'H1' for i in range(19)}
        result_kernel = SimulationKernel(normalize_application(app), uniform_platform(2), Mapping(assignment), audit=True)
        result_kernel.run()

        finished = {rid: p.finished_at for rid, p in result_kernel.processes.items()}
        self.assertAlmostEqual(finished['R0'], 15.0, delta=1e-9)
        self.assertEqual(finished['R18'], 4.0)
        self.assertAlmostEqual(finished['R0'] / finished['R18'], 15 / 4, delta=1e-9)

    def test_remote_activation_costs_route_latency(self):
        app = compute_only_application([1e9, 1e9], activations=[(0, 1)])
        platform = uniform_platform(2, connected=True, latency=0.01)
        result = simulate(app, platform, Mapping({'R0': 'H0', 'R1': 'H1'}), audit=True)
        self.assertAlmostEqual(result.makespan, 2.02, delta=1e-12)

    def test_concurrent_reads_over_disjoint_routes_wait_for_the_slowest(self):
        reader = Runnable('B', (Instruction.read('La'), Instruction.read('Lb')))
        app = _application([reader], labels=[Label('La', 1_000_000), Label('Lb', 3_000_000)])
        hosts = [HostFactory(id=h, speed=1e9) for h in ('h0', 'h1', 'h2')]
        links = [LinkFactory(id='KA', bandwidth=1e6), LinkFactory(id='KB', bandwidth=1e6)]
        platform = build_platform(hosts, links, [('h1', 'h0', ['KA']), ('h2', 'h0', ['KB'])])

        result = simulate(app, platform, Mapping({'B': 'h0'}, {'La': 'h1', 'Lb': 'h2'}), audit=True)

        self.assertAlmostEqual(result.makespan, 3.0, delta=1e-12)

    def test_concurrent_reads_over_the_same_link_share_it(self):
        reader = Runnable('B', (Instruction.read('La'), Instruction.read('Lb')))
        app = _application([reader], labels=[Label('La', 2_000_000), Label('Lb', 2_000_000)])
        result = simulate(app, _two_host_platform(latency=0.0), Mapping({'B': 'h1'}, {'La': 'h2', 'Lb': 'h2'}), audit=True)
        self.assertAlmostEqual(result.makespan, 4.0, delta=1e-12)

    def test_source_writer_enters_writing_at_time_zero(self):
        writer = Runnable('A', (Instruction.write('L'),))
        app = _application([writer], labels=[Label('L', 1_000_000)])
        result = simulate(app, _two_host_platform(latency=0.0), Mapping({'A': 'h1'}, {'L': 'h2'}), audit=True)

        entered = [(e.time, e.phase) for e in result.timeline if e.kind == PHASE_ENTER]
        self.assertEqual(entered[0], (0.0, RunnableState.WRITING.value))
        self.assertEqual(entered[-1], (1.0, RunnableState.DONE.value))
        self.assertNotIn(RunnableState.READING.value, [phase for _, phase in entered])

    def test_local_accesses_are_free(self):
        writer = Runnable('A', (Instruction.compute(1e9), Instruction.write('L')))
        reader = Runnable('B', (Instruction.read('L'), Instruction.compute(1e9)))
        app = _application([writer, reader], labels=[Label('L', 10**9)], activations=[('A', 'B')])
        result = simulate(app, uniform_platform(1), Mapping({'A': 'H0', 'B': 'H0'}, {'L': 'H0'}), audit=True)
        self.assertEqual(result.makespan, 2.0)

    def test_empty_application(self):
        result = simulate(ApplicationModel(), uniform_platform(2), Mapping())
        self.assertEqual(result.makespan, 0.0)
        self.assertEqual(result.total_energy, 0.0)
        self.assertEqual(result.timeline, ())

    def test_matches_fair_share_dag_schedule_without_communication(self):
        rng = random.Random(1234)
        for _ in range(120):
            n = rng.randint(1, 8)
            speeds = [rng.choice([1e9, 2e9, 3e9]) for _ in range(rng.randint(1, 3))]
            works = [rng.randint(1, 10) * 1e9 for _ in range(n)]
            edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.3]
            assignment = [rng.randrange(len(speeds)) for _ in range(n)]

            app = compute_only_application(works, activations=edges)
            mapping = Mapping({f"R{i}": f"H{assignment[i]}" for i in range(n)})
            result = simulate(app, _connected_platform(speeds), mapping, audit=True)

            expected = _fair_share_schedule(works, edges, assignment, speeds)
            self.assertLessEqual(abs(result.makespan - expected), 1e-9 * expected, msg=(works, edges, assignment))

    def test_timeline_is_ordered_and_balanced(self):
        app = parse_application(settings.REFERENCE_APPLICATIONS_DIR / 'seven-task-example.yaml')
        platform = parse_platform(HETEROGENEOUS)
        for seed in range(5):
            result = simulate(app, platform, map_random(app, platform, seed), audit=True)
            times = [event.time for event in result.timeline]
            self.assertEqual(times, sorted(times))
            self.assertEqual(result.makespan, max(times))
            started = {e.transfer_id for e in result.timeline if e.kind == TRANSFER_START}
            ended = {e.transfer_id for e in result.timeline if e.kind == TRANSFER_END}
            self.assertEqual(started, ended)

    def test_identical_inputs_give_identical_results(self):
        app = generate_escience(4)
        platform = parse_platform(HETEROGENEOUS)
        mapping = map_random(app, platform, 11)
        first = simulate(app, platform, mapping)
        second = simulate(app, platform, mapping)
        self.assertEqual(first.timeline, second.timeline)
        self.assertEqual(first.makespan, second.makespan)
        self.assertEqual(first.per_host_energy, second.per_host_energy)

    def test_renaming_hosts_keeps_makespan_and_energy(self):
        app = generate_escience(6)
        platform = parse_platform(HETEROGENEOUS)
        mapping = map_random(app, platform, 3)
        ids = [host.id for host in platform.candidate_hosts()]
        names = dict(zip(ids, ids[1:] + ids[:1]))
        names[FRONTEND_ID] = FRONTEND_ID
        renamed_platform = replace(
            platform,
            hosts=tuple(replace(host, id=names[host.id]) for host in platform.hosts),
            routes=tuple(replace(route, src=names[route.src], dst=names[route.dst]) for route in platform.routes),
        )

        original = simulate(app, platform, mapping)
        renamed = simulate(app, renamed_platform, mapping.renamed(names))

        self.assertAlmostEqual(original.makespan, renamed.makespan, delta=1e-9 * original.makespan)
        self.assertAlmostEqual(original.total_energy, renamed.total_energy, delta=1e-9 * original.total_energy)


class ReferenceMappingTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.app = generate_escience(32)
        cls.platform = parse_platform(HETEROGENEOUS)

    def makespan(self, mapping):
        return simulate(self.app, self.platform, mapping, audit=True).makespan

    def test_reference_mappings_are_ordered(self):
        best = self.makespan(map_all_on(self.app, self.platform, 'HOST_0_2'))
        good = self.makespan(parse_mapping(settings.REFERENCE_MAPPINGS_DIR / 'escience-32-m-good.yaml',
                                           self.app, self.platform))
        bad = self.makespan(parse_mapping(settings.REFERENCE_MAPPINGS_DIR / 'escience-32-m-bad.yaml',
                                          self.app, self.platform))
        worst = self.makespan(map_all_on(self.app, self.platform, 'HOST_0_1'))

        self.assertLess(best, good)
        self.assertLess(good, bad)
        self.assertLess(bad, worst)
        self.assertGreaterEqual(worst / best, 5)

    def test_all_on_one_host_is_the_serial_work_over_speed(self):
        self.assertAlmostEqual(self.makespan(map_all_on(self.app, self.platform, 'HOST_0_1')), 1.025, delta=1e-9)
        self.assertAlmostEqual(self.makespan(map_all_on(self.app, self.platform, 'HOST_0_2')), 0.01025, delta=1e-11)

    def test_round_robin_respects_energy_floor(self):
        result = simulate(self.app, self.platform, map_round_robin(self.app, self.platform), audit=True)
        floor = sum(host.p_idle for host in self.platform.hosts) * result.makespan
        self.assertGreaterEqual(result.total_energy, floor - 1e-9)
        self.assertTrue(math.isclose(result.total_energy, sum(result.per_host_energy.values()), rel_tol=1e-9))
