"""
Generador de la aplicación eScience: un pipeline de algoritmo genético con
`n` tareas MS2 paralelas entre la generación de datos de entrada y el cálculo
de aptitud.

    LoadExperimentalData -> AdaptState -> GenerateIndividuals -> GenerateInputDataSets
        -> MS2_01 .. MS2_n -> CalculateFitness -> RankIndividuals -> CheckTermination

Cada tarea contiene un único runnable con fases lectura / cómputo / escritura y
cada arista entre etapas se comunica mediante una etiqueta propia.
"""
import logging
from typing import List, Mapping, Optional

from django.conf import settings

from TaskMapper.exceptions import ArgumentError

from .entities import ApplicationModel, Instruction, Label, Runnable, Task

logger = logging.getLogger(__name__)

MS2_TASK_PREFIX = 'MS2_'


def _merge_profile(name, defaults, overrides):
    profile = dict(defaults)
    for key, value in (overrides or {}).items():
        if key not in defaults:
            raise ArgumentError(f"Clave desconocida en el perfil {name}: '{key}' (válidas: {', '.join(defaults)})")
        profile[key] = value
    for key, value in profile.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not value >= 0:
            raise ArgumentError(f"El perfil {name} requiere valores no negativos: '{key}' = {value!r}")
    return profile


def _stage(task_id, runnable_id, reads, work, writes) -> Task:
    instructions = [Instruction.read(label) for label in reads]
    instructions.append(Instruction.compute(work))
    instructions.extend(Instruction.write(label) for label in writes)
    return Task(id=task_id, runnables=(Runnable(id=runnable_id, instructions=tuple(instructions)),))


def generate_escience(
    n_ms2: int,
    compute_work_profile: Optional[Mapping[str, float]] = None,
    label_size_profile: Optional[Mapping[str, int]] = None,
) -> ApplicationModel:
    """
    Construye la aplicación eScience con `n_ms2` tareas MS2.

    Los perfiles se combinan con `ESCIENCE_WORK_PROFILE` y
    `ESCIENCE_LABEL_PROFILE`; el modelo retornado no está normalizado.
    """
    if isinstance(n_ms2, bool) or not isinstance(n_ms2, int) or n_ms2 < 1:
        raise ArgumentError(f"El número de tareas MS2 debe ser un entero >= 1 (se recibió {n_ms2!r})")

    work = _merge_profile('de trabajo', settings.ESCIENCE_WORK_PROFILE, compute_work_profile)
    sizes = _merge_profile('de etiquetas', settings.ESCIENCE_LABEL_PROFILE, label_size_profile)

    width = max(2, len(str(n_ms2)))
    indexes = [f"{i:0{width}d}" for i in range(1, n_ms2 + 1)]
    inputs = [f"L3_{index}" for index in indexes]
    outputs = [f"L5_{index}" for index in indexes]

    labels = [
        Label('L0', int(sizes['experimental'])),
        Label('L1', int(sizes['state'])),
        Label('L2', int(sizes['individuals'])),
    ]
    labels.extend(Label(name, int(sizes['input'])) for name in inputs)
    labels.extend(Label(name, int(sizes['output'])) for name in outputs)
    labels.extend([Label('L7', int(sizes['fitness'])), Label('L8', int(sizes['ranking']))])

    tasks = [
        _stage('LoadExperimentalData', 'R0', (), work['load_experimental_data'], ('L0',)),
        _stage('AdaptState', 'R1', ('L0',), work['adapt_state'], ('L1',)),
        _stage('GenerateIndividuals', 'R2', ('L1',), work['generate_individuals'], ('L2',)),
        _stage('GenerateInputDataSets', 'R3', ('L2',), work['generate_input_datasets'], inputs),
    ]
    ms2_tasks = [f"{MS2_TASK_PREFIX}{index}" for index in indexes]
    for task_id, index, source, target in zip(ms2_tasks, indexes, inputs, outputs):
        tasks.append(_stage(task_id, f"R4_{index}", (source,), work['ms2'], (target,)))
    tasks.extend([
        _stage('CalculateFitness', 'R6', outputs, work['calculate_fitness'], ('L7',)),
        _stage('RankIndividuals', 'R7', ('L7',), work['rank_individuals'], ('L8',)),
        _stage('CheckTermination', 'R8', ('L8',), work['check_termination'], ()),
    ])

    activations = [
        ('LoadExperimentalData', 'AdaptState'),
        ('AdaptState', 'GenerateIndividuals'),
        ('GenerateIndividuals', 'GenerateInputDataSets'),
    ]
    activations.extend(('GenerateInputDataSets', task_id) for task_id in ms2_tasks)
    activations.extend((task_id, 'CalculateFitness') for task_id in ms2_tasks)
    activations.extend([('CalculateFitness', 'RankIndividuals'), ('RankIndividuals', 'CheckTermination')])

    model = ApplicationModel(labels=tuple(labels), tasks=tuple(tasks), activation_edges=tuple(activations))
    logger.info("Aplicación eScience generada con %d tareas MS2 (%d tareas en total)", n_ms2, len(tasks))
    return model


def ms2_runnable_ids(app: ApplicationModel) -> List[str]:
    """Runnables de las tareas MS2, en orden de identificador"""
    return sorted(
        runnable.id for task in app.tasks if task.id.startswith(MS2_TASK_PREFIX) for runnable in task.runnables
    )
