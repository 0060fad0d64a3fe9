from TaskMapper.exceptions import ArgumentError

from APPMODEL.escience import generate_escience
from APPMODEL.services import serialize_application
from WORKFLOW.base import TaskMapperCommand


def _profile(entries, cast):
    profile = {}
    for entry in entries or ():
        key, sep, value = entry.partition('=')
        if not sep or not key:
            raise ArgumentError(f"Se esperaba CLAVE=VALOR y se recibió '{entry}'")
        try:
            number = float(value)
            profile[key] = cast(number)
        except (ValueError, OverflowError) as exc:
            raise ArgumentError(f"Valor no numérico para '{key}': '{value}'") from exc
        if cast is int and not number.is_integer():
            raise ArgumentError(f"El tamaño de '{key}' debe ser un número entero de bytes: '{value}'")
    return profile


class Command(TaskMapperCommand):
    help = 'Genera el archivo de aplicación eScience con N tareas MS2'

    def add_arguments(self, parser):
        parser.add_argument('--escience', action='store_true', help='Generar la aplicación eScience')
        parser.add_argument('--ms2', type=int, required=True, help='Número de tareas MS2 paralelas')
        parser.add_argument('--out', required=True, help='Archivo YAML de salida')
        parser.add_argument('--work', action='append', metavar='ETAPA=TRABAJO',
                            help='Sobrescribe el trabajo de una etapa (p. ej. ms2=6e7); repetible')
        parser.add_argument('--label-size', action='append', metavar='ETIQUETA=BYTES',
                            help='Sobrescribe el tamaño de una etiqueta (p. ej. input=1e6); repetible')

    def run(self, escience=False, ms2=None, out=None, work=None, label_size=None, **options):
        if not escience:
            raise ArgumentError("Sólo está disponible el generador eScience: use --escience")
        app = generate_escience(ms2, _profile(work, float), _profile(label_size, int))
        serialize_application(app, out)
        self.stdout.write(f"{out}: {app}")
