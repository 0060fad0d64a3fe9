import logging

from django.core.management.base import BaseCommand, CommandError

from TaskMapper.exceptions import TaskMapperError

logger = logging.getLogger(__name__)

IO_EXIT_CODE = 1


def command_error(exc: Exception) -> CommandError:
    """
    Traduce una excepción del proyecto a CommandError con el código de salida
    de su familia; el mensaje empieza con el nombre de la clase de error
    """
    if isinstance(exc, TaskMapperError):
        return CommandError(f"{type(exc).__name__}: {exc}", returncode=exc.exit_code)
    if isinstance(exc, OSError):
        detail = f"{exc.strerror}: {exc.filename}" if exc.filename else str(exc)
        return CommandError(f"IoError: {detail}", returncode=IO_EXIT_CODE)
    raise exc


class TaskMapperCommand(BaseCommand):
    """
    Comando base: las subclases implementan `run` y los errores conocidos se
    convierten en un mensaje de una línea con su código de salida
    """

    def handle(self, *args, **options):
        try:
            return self.run(**options)
        except (TaskMapperError, OSError) as exc:
            logger.debug("Comando interrumpido", exc_info=True)
            raise command_error(exc) from exc

    def run(self, **options):
        raise NotImplementedError

    def add_input_arguments(self, parser, required=True):
        parser.add_argument('--app', required=required, help='Archivo YAML de la aplicación')
        parser.add_argument('--platform', required=required, help='Archivo YAML de la plataforma')
