import logging
from dataclasses import replace
from typing import Any, Dict, List

import networkx as nx

from TaskMapper.exceptions import CycleError, SchemaError, ValidationError
from TaskMapper.schema import (
    check_keys, dump_document, get_int, get_list, get_number, get_str, line_of, load_document,
)

from .entities import (
    ApplicationModel, Instruction, InstructionKind, Label, NormalizedRunnable, Runnable, Task,
)

logger = logging.getLogger(__name__)


class ApplicationParserService:
    """
    Servicio principal para leer, validar, normalizar y escribir modelos de aplicación
    """

    def parse(self, path) -> ApplicationModel:
        """
        Lee un archivo de aplicación y retorna el modelo validado
        """
        document = load_document(path)
        model = self.from_document(document)
        self.validate(model)
        logger.info("Aplicación leída de %s: %d tareas, %d runnables, %d etiquetas",
                    path, len(model.tasks), len(model.runnables), len(model.labels))
        return model

    def from_document(self, document: Dict[str, Any]) -> ApplicationModel:
        """
        Convierte el documento ya cargado en entidades (sin validar invariantes)
        """
        check_keys(document, 'aplicación', optional=('labels', 'tasks', 'activations'))

        labels = tuple(self._parse_label(item) for item in get_list(document, 'labels', 'aplicación'))
        tasks = tuple(self._parse_task(item) for item in get_list(document, 'tasks', 'aplicación'))

        activations = []
        for item in get_list(document, 'activations', 'aplicación'):
            check_keys(item, 'activación', required=('from_task', 'to_task'))
            activations.append((get_str(item, 'from_task', 'activación'), get_str(item, 'to_task', 'activación')))

        return ApplicationModel(labels=labels, tasks=tasks, activation_edges=tuple(activations))

    def _parse_label(self, item) -> Label:
        check_keys(item, 'etiqueta', required=('name', 'size_bytes'))
        return Label(name=get_str(item, 'name', 'etiqueta'), size_bytes=get_int(item, 'size_bytes', 'etiqueta'))

    def _parse_task(self, item) -> Task:
        check_keys(item, 'tarea', required=('id', 'runnables'), optional=('precedence',))
        task_id = get_str(item, 'id', 'tarea')
        where = f"tarea '{task_id}'"

        runnables = tuple(self._parse_runnable(entry, where) for entry in get_list(item, 'runnables', where))

        edges = []
        for entry in get_list(item, 'precedence', where):
            check_keys(entry, f"precedencia de {where}", required=('from', 'to'))
            edges.append((get_str(entry, 'from', where), get_str(entry, 'to', where)))

        return Task(id=task_id, runnables=runnables, precedence_edges=tuple(edges))

    def _parse_runnable(self, item, task_where) -> Runnable:
        check_keys(item, f"runnable de {task_where}", required=('id',), optional=('instructions',))
        runnable_id = get_str(item, 'id', f"runnable de {task_where}")
        where = f"runnable '{runnable_id}'"

        instructions = []
        for entry in get_list(item, 'instructions', where):
            if not isinstance(entry, dict):
                raise SchemaError(line_of(item), f"{where}: cada instrucción debe ser un mapeo")
            op = entry.get('op')
            if op in (InstructionKind.READ.value, InstructionKind.WRITE.value):
                check_keys(entry, f"instrucción de {where}", required=('op', 'label'))
                instructions.append(Instruction(InstructionKind(op), label=get_str(entry, 'label', where)))
            elif op == InstructionKind.COMPUTE.value:
                check_keys(entry, f"instrucción de {where}", required=('op', 'work'))
                instructions.append(Instruction.compute(get_number(entry, 'work', where)))
            else:
                raise SchemaError(line_of(entry), f"{where}: operación desconocida {op!r} (read, write o compute)")

        return Runnable(id=runnable_id, instructions=tuple(instructions))

    def validate(self, model: ApplicationModel) -> None:
        """
        Verifica unicidad de identificadores, referencias a etiquetas y tareas,
        trabajo no negativo y que el DAG de runnables sea acíclico
        """
        label_names = set()
        for label in model.labels:
            if label.name in label_names:
                raise ValidationError(f"Etiqueta duplicada: '{label.name}'", entity=label.name)
            if label.size_bytes < 0:
                raise ValidationError(f"La etiqueta '{label.name}' tiene tamaño negativo", entity=label.name)
            label_names.add(label.name)

        task_ids = set()
        runnable_ids = set()
        for task in model.tasks:
            if task.id in task_ids:
                raise ValidationError(f"Tarea duplicada: '{task.id}'", entity=task.id)
            task_ids.add(task.id)
            if not task.runnables:
                raise ValidationError(f"La tarea '{task.id}' no contiene runnables", entity=task.id)

            for runnable in task.runnables:
                if runnable.id in runnable_ids:
                    raise ValidationError(f"Runnable duplicado: '{runnable.id}'", entity=runnable.id)
                runnable_ids.add(runnable.id)
                self._validate_instructions(runnable, label_names)

            local_ids = set(task.runnable_ids)
            for source, target in task.precedence_edges:
                for endpoint in (source, target):
                    if endpoint not in local_ids:
                        raise ValidationError(
                            f"La precedencia {source} -> {target} de la tarea '{task.id}' "
                            f"referencia el runnable '{endpoint}' que no pertenece a la tarea",
                            entity=endpoint,
                        )

        for source, target in model.activation_edges:
            for endpoint in (source, target):
                if endpoint not in task_ids:
                    raise ValidationError(
                        f"La activación {source} -> {target} referencia la tarea inexistente '{endpoint}'",
                        entity=endpoint,
                    )

        self.runnable_graph(model)

    def _validate_instructions(self, runnable: Runnable, label_names) -> None:
        for instruction in runnable.instructions:
            if instruction.kind is InstructionKind.COMPUTE:
                if not instruction.work >= 0:
                    raise ValidationError(
                        f"El runnable '{runnable.id}' tiene trabajo de cómputo negativo ({instruction.work})",
                        entity=runnable.id,
                    )
            elif instruction.label not in label_names:
                raise ValidationError(
                    f"El runnable '{runnable.id}' accede a la etiqueta no declarada '{instruction.label}'",
                    entity=instruction.label,
                )

    def runnable_graph(self, model: ApplicationModel) -> nx.DiGraph:
        """
        DAG de runnables: precedencias internas de cada tarea más, por cada
        activación Ti -> Tj, aristas de cada sumidero de Ti a cada fuente de Tj
        """
        graph = nx.DiGraph()
        for task in model.tasks:
            graph.add_nodes_from(task.runnable_ids)
            graph.add_edges_from(task.precedence_edges)

        for source_task, target_task in model.activation_edges:
            sinks = self._task_sinks(model.task_by_id[source_task])
            sources = self._task_sources(model.task_by_id[target_task])
            graph.add_edges_from((sink, source) for sink in sinks for source in sources)

        if not nx.is_directed_acyclic_graph(graph):
            cycle = [edge[0] for edge in nx.find_cycle(graph)]
            cycle.append(cycle[0])
            raise CycleError(f"El grafo de runnables contiene un ciclo: {' -> '.join(cycle)}", entity=cycle[0])
        return graph

    def _task_sinks(self, task: Task) -> List[str]:
        has_successor = {source for source, _ in task.precedence_edges}
        return [rid for rid in task.runnable_ids if rid not in has_successor]

    def _task_sources(self, task: Task) -> List[str]:
        has_predecessor = {target for _, target in task.precedence_edges}
        return [rid for rid in task.runnable_ids if rid not in has_predecessor]

    def normalize(self, model: ApplicationModel) -> ApplicationModel:
        """
        Agrupa las instrucciones de cada runnable en lectura -> cómputo -> escritura
        """
        tasks = tuple(
            replace(task, runnables=tuple(replace(r, normalized=self._normalize_runnable(r)) for r in task.runnables))
            for task in model.tasks
        )
        normalized = replace(model, tasks=tasks)
        self.runnable_graph(normalized)
        return normalized

    def _normalize_runnable(self, runnable: Runnable) -> NormalizedRunnable:
        reads = []
        writes = []
        compute_work = 0.0
        for instruction in runnable.instructions:
            if instruction.kind is InstructionKind.READ:
                reads.append(instruction.label)
            elif instruction.kind is InstructionKind.WRITE:
                writes.append(instruction.label)
            else:
                compute_work += instruction.work
        return NormalizedRunnable(reads=tuple(reads), compute_work=compute_work, writes=tuple(writes))

    def to_document(self, model: ApplicationModel) -> Dict[str, Any]:
        return {
            'labels': [{'name': label.name, 'size_bytes': label.size_bytes} for label in model.labels],
            'tasks': [
                {
                    'id': task.id,
                    'runnables': [
                        {'id': runnable.id, 'instructions': [self._instruction_document(i) for i in runnable.instructions]}
                        for runnable in task.runnables
                    ],
                    'precedence': [{'from': source, 'to': target} for source, target in task.precedence_edges],
                }
                for task in model.tasks
            ],
            'activations': [{'from_task': source, 'to_task': target} for source, target in model.activation_edges],
        }

    def _instruction_document(self, instruction: Instruction) -> Dict[str, Any]:
        if instruction.kind is InstructionKind.COMPUTE:
            return {'op': 'compute', 'work': instruction.work}
        return {'op': instruction.kind.value, 'label': instruction.label}

    def serialize(self, model: ApplicationModel, path) -> None:
        dump_document(self.to_document(model), path)
        logger.info("Aplicación escrita en %s", path)


# Instancia global del servicio
application_parser = ApplicationParserService()


def parse_application(path) -> ApplicationModel:
    return application_parser.parse(path)


def normalize_application(model: ApplicationModel) -> ApplicationModel:
    return application_parser.normalize(model)


def serialize_application(model: ApplicationModel, path) -> None:
    application_parser.serialize(model, path)


def runnable_graph(model: ApplicationModel) -> nx.DiGraph:
    return application_parser.runnable_graph(model)
