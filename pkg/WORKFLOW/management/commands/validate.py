from TaskMapper.exceptions import ArgumentError

from APPMODEL.services import normalize_application, parse_application
from MAPPING.services import parse_mapping
from PLATFORMS.services import parse_platform
from TRACES.validators import check_paje
from WORKFLOW.base import TaskMapperCommand


class Command(TaskMapperCommand):
    help = 'Valida una aplicación, una plataforma y opcionalmente un mapeo o una traza Paje'

    def add_arguments(self, parser):
        self.add_input_arguments(parser, required=False)
        parser.add_argument('--mapping', help='Archivo YAML de mapeo (requiere --app y --platform)')
        parser.add_argument('--trace', help='Traza Paje a validar estructuralmente')

    def run(self, app=None, platform=None, mapping=None, trace=None, **options):
        if mapping and not (app and platform):
            raise ArgumentError("--mapping requiere --app y --platform")
        if not (app or platform or trace):
            raise ArgumentError("Nada que validar: indique --app, --platform o --trace")

        model = None
        if app:
            model = normalize_application(parse_application(app))
            self.stdout.write(f"OK {app}: {model}")
        platform_model = None
        if platform:
            platform_model = parse_platform(platform)
            self.stdout.write(f"OK {platform}: {platform_model}")
        if mapping:
            path = mapping[len('file:'):] if mapping.startswith('file:') else mapping
            self.stdout.write(f"OK {path}: {parse_mapping(path, model, platform_model)}")
        if trace:
            check_paje(trace)
            self.stdout.write(f"OK {trace}: traza Paje válida")
