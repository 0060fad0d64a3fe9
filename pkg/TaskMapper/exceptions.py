"""
Jerarquía de errores del proyecto.

Los comandos de gestión traducen cada familia a un código de salida:
1 entrada/salida, 2 validación, 3 simulación.
"""


class TaskMapperError(Exception):
    """Error base de TaskMapper"""

    exit_code = 3


class SchemaError(TaskMapperError):
    """Documento mal formado: sintaxis, claves desconocidas o faltantes, tipos incorrectos"""

    exit_code = 2

    def __init__(self, line, message):
        self.line = line
        self.message = message
        super().__init__(f"línea {line}: {message}" if line is not None else message)


class ValidationError(TaskMapperError):
    """Violación de un invariante del modelo; `entity` nombra la entidad culpable"""

    exit_code = 2

    def __init__(self, message, entity=None):
        self.entity = entity
        super().__init__(message)


class CycleError(ValidationError):
    """El grafo de precedencias (o el DAG de runnables) contiene un ciclo"""


class MappingError(ValidationError):
    """Mapeo parcial o con hosts inexistentes entregado al simulador"""


class ArgumentError(TaskMapperError, ValueError):
    exit_code = 2


class DomainError(TaskMapperError, ValueError):
    """Valor fuera del dominio de una función (p. ej. utilización fuera de [0, 1])"""


class NoRouteError(TaskMapperError):
    exit_code = 2


class UnknownHostError(TaskMapperError):
    exit_code = 2


class EmptyPlatformError(TaskMapperError):
    exit_code = 2


class SimulationError(TaskMapperError):
    exit_code = 3


class DeadlockError(SimulationError):
    """Quedan procesos sin terminar y ninguna acción puede progresar"""


class SimulationCompleteError(SimulationError):
    """Se pidió avanzar una simulación que ya terminó"""


class KernelInvariantError(SimulationError):
    """La auditoría detectó sobre-suscripción de un recurso o pérdida de trabajo"""


class EmptyBatchError(TaskMapperError):
    exit_code = 3


class RecordError(TaskMapperError):
    """La base de datos de experimentos no acepta el registro (p. ej. sin migrar)"""

    exit_code = 1
