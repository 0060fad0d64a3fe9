"""
Factories de factory-boy para construir modelos de aplicación en las pruebas
"""
import factory

from .entities import ApplicationModel, Instruction, Label, Runnable, Task


class LabelFactory(factory.Factory):
    class Meta:
        model = Label

    name = factory.Sequence(lambda n: f"L{n}")
    size_bytes = factory.Faker('pyint', min_value=0, max_value=8_000_000)


class RunnableFactory(factory.Factory):
    class Meta:
        model = Runnable

    class Params:
        work = factory.Faker('pyint', min_value=1, max_value=10**9)

    id = factory.Sequence(lambda n: f"R{n}")
    instructions = factory.LazyAttribute(lambda o: (Instruction.compute(o.work),))
    normalized = None


class TaskFactory(factory.Factory):
    class Meta:
        model = Task

    id = factory.Sequence(lambda n: f"T{n}")
    runnables = factory.LazyFunction(lambda: (RunnableFactory(),))
    precedence_edges = ()


class ApplicationModelFactory(factory.Factory):
    class Meta:
        model = ApplicationModel

    labels = ()
    tasks = ()
    activation_edges = ()


def single_runnable_tasks(*runnables):
    """Envuelve cada runnable en su propia tarea (T_<id>)"""
    return tuple(Task(id=f"T_{runnable.id}", runnables=(runnable,)) for runnable in runnables)


def compute_only_application(works, activations=()):
    """
    Aplicación sin etiquetas: un runnable `R<i>` por trabajo dado, cada uno en
    su tarea `T_R<i>`; `activations` son pares de índices (i, j)
    """
    runnables = [Runnable(id=f"R{i}", instructions=(Instruction.compute(work),)) for i, work in enumerate(works)]
    edges = tuple((f"T_R{i}", f"T_R{j}") for i, j in activations)
    return ApplicationModel(tasks=single_runnable_tasks(*runnables), activation_edges=edges)
