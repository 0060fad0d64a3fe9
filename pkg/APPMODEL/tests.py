import tempfile
from pathlib import Path

import networkx as nx
from django.conf import settings
from django.test import SimpleTestCase
from faker import Faker

from TaskMapper.exceptions import ArgumentError, CycleError, SchemaError, ValidationError

from .entities import ApplicationModel, Instruction, Label, Runnable, Task
from .escience import generate_escience
from .factories import ApplicationModelFactory, LabelFactory, RunnableFactory, TaskFactory
from .services import (
    normalize_application, parse_application, runnable_graph, serialize_application,
)


class TemporaryFilesMixin:

    def setUp(self):
        super().setUp()
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()
        super().tearDown()

    def write(self, name, text):
        path = self.tmp / name
        path.write_text(text, encoding='utf-8')
        return path


class ParseApplicationTests(TemporaryFilesMixin, SimpleTestCase):

    def test_reference_example_has_seven_tasks_and_three_labels(self):
        model = parse_application(settings.REFERENCE_APPLICATIONS_DIR / 'seven-task-example.yaml')

        self.assertEqual(len(model.tasks), 7)
        self.assertEqual(len(model.labels), 3)
        self.assertEqual(len(model.task_by_id['T4'].runnables), 8)
        writers = [r.id for r in model.runnables if Instruction.write('L3') in r.instructions]
        readers = [r.id for r in model.runnables if Instruction.read('L3') in r.instructions]
        self.assertEqual([model.task_of_runnable[r] for r in writers], ['T1'])
        self.assertEqual([model.task_of_runnable[r] for r in readers], ['T3'])
        self.assertIn(('R1_1', 'R3_1'), runnable_graph(model).edges())

    def test_empty_document_is_an_empty_application(self):
        model = parse_application(self.write('empty.yaml', ''))
        self.assertEqual(model, ApplicationModel())

        model = parse_application(self.write('lists.yaml', 'labels: []\ntasks: []\nactivations: []\n'))
        self.assertEqual(len(model.runnables), 0)

    def test_undeclared_label_is_named(self):
        path = self.write('dangling.yaml', (
            "tasks:\n"
            "  - id: T1\n"
            "    runnables:\n"
            "      - id: R1\n"
            "        instructions:\n"
            "          - {op: read, label: LX}\n"
        ))
        with self.assertRaises(ValidationError) as ctx:
            parse_application(path)
        self.assertEqual(ctx.exception.entity, 'LX')
        self.assertIn('LX', str(ctx.exception))

    def test_unknown_key_reports_line(self):
        path = self.write('unknown.yaml', (
            "labels:\n"
            "  - name: L1\n"
            "    size_bytes: 10\n"
            "    colour: red\n"
        ))
        with self.assertRaises(SchemaError) as ctx:
            parse_application(path)
        self.assertEqual(ctx.exception.line, 2)
        self.assertIn('colour', str(ctx.exception))

    def test_malformed_yaml_is_a_schema_error(self):
        with self.assertRaises(SchemaError) as ctx:
            parse_application(self.write('bad.yaml', "labels: [\n  - name: L1\n"))
        self.assertIsNotNone(ctx.exception.line)

    def test_missing_file_is_an_os_error(self):
        with self.assertRaises(FileNotFoundError):
            parse_application(self.tmp / 'missing.yaml')

    def test_duplicate_runnable_id(self):
        path = self.write('dup.yaml', (
            "tasks:\n"
            "  - id: T1\n"
            "    runnables: [{id: R1}]\n"
            "  - id: T2\n"
            "    runnables: [{id: R1}]\n"
        ))
        with self.assertRaises(ValidationError) as ctx:
            parse_application(path)
        self.assertEqual(ctx.exception.entity, 'R1')

    def test_task_without_runnables_is_rejected(self):
        with self.assertRaises(ValidationError) as ctx:
            parse_application(self.write('empty-task.yaml', "tasks:\n  - id: T1\n    runnables: []\n"))
        self.assertEqual(ctx.exception.entity, 'T1')

    def test_negative_sizes_and_work_are_rejected(self):
        with self.assertRaises(ValidationError):
            parse_application(self.write('neg.yaml', "labels:\n  - {name: L1, size_bytes: -1}\n"))
        with self.assertRaises(ValidationError):
            parse_application(self.write('negwork.yaml', (
                "tasks:\n  - id: T1\n    runnables:\n      - id: R1\n"
                "        instructions: [{op: compute, work: -2}]\n"
            )))

    def test_unknown_activation_endpoint(self):
        path = self.write('act.yaml', (
            "tasks:\n  - {id: T1, runnables: [{id: R1}]}\n"
            "activations:\n  - {from_task: T1, to_task: T9}\n"
        ))
        with self.assertRaises(ValidationError) as ctx:
            parse_application(path)
        self.assertEqual(ctx.exception.entity, 'T9')

    def test_cyclic_activations_are_rejected_at_parse(self):
        path = self.write('cycle.yaml', (
            "tasks:\n  - {id: T1, runnables: [{id: R1}]}\n  - {id: T2, runnables: [{id: R2}]}\n"
            "activations:\n  - {from_task: T1, to_task: T2}\n  - {from_task: T2, to_task: T1}\n"
        ))
        with self.assertRaises(CycleError):
            parse_application(path)

    def test_exponent_without_dot_is_accepted(self):
        path = self.write('exp.yaml', (
            "tasks:\n  - id: T1\n    runnables:\n      - id: R1\n"
            "        instructions: [{op: compute, work: 1e9}]\n"
        ))
        model = normalize_application(parse_application(path))
        self.assertEqual(model.runnable_by_id['R1'].normalized.compute_work, 1e9)

    def test_serialize_parse_round_trip(self):
        original = parse_application(settings.REFERENCE_APPLICATIONS_DIR / 'seven-task-example.yaml')
        path = self.tmp / 'copy.yaml'
        serialize_application(original, path)
        self.assertEqual(parse_application(path), original)

        escience = generate_escience(4)
        serialize_application(escience, path)
        self.assertEqual(parse_application(path), escience)


class NormalizeApplicationTests(SimpleTestCase):

    def _single(self, *instructions, labels=()):
        runnable = Runnable(id='R1', instructions=tuple(instructions))
        return ApplicationModel(labels=tuple(labels), tasks=(Task(id='T1', runnables=(runnable,)),))

    def test_phases_are_aggregated(self):
        model = self._single(
            Instruction.compute(5), Instruction.read('L7'), Instruction.compute(3), Instruction.write('L8'),
            labels=(Label('L7', 1), Label('L8', 1)),
        )
        normalized = normalize_application(model).runnable_by_id['R1'].normalized
        self.assertEqual(normalized.reads, ('L7',))
        self.assertEqual(normalized.compute_work, 8.0)
        self.assertEqual(normalized.writes, ('L8',))

    def test_repeated_accesses_are_kept(self):
        model = self._single(
            Instruction.read('L1'), Instruction.read('L1'), Instruction.write('L1'),
            labels=(Label('L1', 1),),
        )
        normalized = normalize_application(model).runnable_by_id['R1'].normalized
        self.assertEqual(normalized.reads, ('L1', 'L1'))
        self.assertEqual(normalized.writes, ('L1',))
        self.assertEqual(normalized.compute_work, 0.0)

    def test_compute_work_is_the_sum_in_authored_order(self):
        fake = Faker()
        Faker.seed(1234)
        works = [fake.pyfloat(min_value=0, max_value=1e9) for _ in range(300)]
        model = self._single(*(Instruction.compute(w) for w in works))

        normalized = normalize_application(model).runnable_by_id['R1'].normalized
        self.assertEqual(normalized.compute_work, sum(works))

    def test_idempotent(self):
        model = generate_escience(3)
        once = normalize_application(model)
        self.assertTrue(once.is_normalized)
        self.assertFalse(model.is_normalized)
        self.assertEqual(normalize_application(once), once)

    def test_mutual_activation_is_a_cycle(self):
        model = ApplicationModelFactory(
            tasks=(TaskFactory(id='T1'), TaskFactory(id='T2')),
            activation_edges=(('T1', 'T2'), ('T2', 'T1')),
        )
        with self.assertRaises(CycleError):
            normalize_application(model)

    def test_activation_lifts_to_sinks_times_sources(self):
        a, b, c, d = (RunnableFactory(id=name) for name in ('A', 'B', 'C', 'D'))
        model = ApplicationModelFactory(
            labels=(LabelFactory(),),
            tasks=(
                Task(id='T1', runnables=(a, b)),
                Task(id='T2', runnables=(c, d), precedence_edges=(('C', 'D'),)),
            ),
            activation_edges=(('T1', 'T2'),),
        )
        self.assertEqual(sorted(runnable_graph(model).edges()), [('A', 'C'), ('B', 'C'), ('C', 'D')])


class GenerateEscienceTests(SimpleTestCase):

    def test_thirty_two_ms2_tasks(self):
        model = generate_escience(32)
        self.assertEqual(len(model.tasks), 39)
        self.assertEqual(len(model.runnables), 39)
        self.assertTrue(all(len(task.runnables) == 1 for task in model.tasks))
        self.assertIn('R4_32', model.runnable_by_id)
        self.assertIn('L3_01', model.label_by_name)

        graph = runnable_graph(model)
        self.assertTrue(nx.is_directed_acyclic_graph(graph))
        self.assertEqual([n for n in graph if graph.in_degree(n) == 0], ['R0'])
        self.assertEqual([n for n in graph if graph.out_degree(n) == 0], ['R8'])

    def test_single_ms2_is_a_linear_pipeline(self):
        model = generate_escience(1)
        graph = runnable_graph(model)
        self.assertEqual(len(model.tasks), 8)
        self.assertEqual(list(nx.topological_sort(graph)), ['R0', 'R1', 'R2', 'R3', 'R4_01', 'R6', 'R7', 'R8'])
        self.assertEqual(graph.number_of_edges(), 7)

    def test_ms2_tasks_are_independent(self):
        graph = runnable_graph(generate_escience(2))
        for ms2 in ('R4_01', 'R4_02'):
            self.assertTrue(graph.has_edge('R3', ms2))
            self.assertTrue(graph.has_edge(ms2, 'R6'))
        self.assertFalse(nx.has_path(graph, 'R4_01', 'R4_02'))
        self.assertFalse(nx.has_path(graph, 'R4_02', 'R4_01'))

    def test_rank_individuals_phases(self):
        model = normalize_application(generate_escience(32))
        r7 = model.runnable_by_id['R7'].normalized
        self.assertEqual(r7.reads, ('L7',))
        self.assertEqual(r7.writes, ('L8',))
        self.assertEqual(r7.compute_work, settings.ESCIENCE_WORK_PROFILE['rank_individuals'])
        self.assertEqual(len(model.runnable_by_id['R6'].normalized.reads), 32)

    def test_index_width_grows_with_n(self):
        model = generate_escience(120)
        self.assertIn('R4_001', model.runnable_by_id)
        self.assertIn('MS2_120', model.task_by_id)

    def test_profiles_override_defaults(self):
        model = generate_escience(2, compute_work_profile={'ms2': 7.0}, label_size_profile={'input': 3})
        self.assertEqual(model.runnable_by_id['R4_02'].instructions[1], Instruction.compute(7.0))
        self.assertEqual(model.label_by_name['L3_01'].size_bytes, 3)

    def test_invalid_arguments(self):
        with self.assertRaises(ArgumentError):
            generate_escience(0)
        with self.assertRaises(ArgumentError):
            generate_escience(2, compute_work_profile={'gpu': 1.0})
        with self.assertRaises(ArgumentError):
            generate_escience(2, label_size_profile={'state': -1})
