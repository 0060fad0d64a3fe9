from pathlib import Path

from METRICS.services import format_number, record_experiment, summarize_batch, write_batch_csv
from WORKFLOW.base import TaskMapperCommand
from WORKFLOW.services import workflow_service


class Command(TaskMapperCommand):
    help = 'Evalúa N mapeos con semillas consecutivas y escribe la tabla CSV del lote'

    def add_arguments(self, parser):
        self.add_input_arguments(parser)
        parser.add_argument('--strategy', default='random',
                            help='random, round-robin, greedy-load, all-on:<host> o file:<ruta>')
        parser.add_argument('--n', type=int, required=True, help='Número de mapeos')
        parser.add_argument('--seed', type=int, default=0, help='Primera semilla')
        parser.add_argument('--csv', required=True, help='Archivo CSV de salida')
        parser.add_argument('--jobs', type=int, default=None, help='Procesos de trabajo')
        parser.add_argument('--record', action='store_true', help='Guardar el lote en la base de datos')
        parser.add_argument('--allow-frontend', action='store_true', help='Permitir mapear sobre el frontend')
        parser.add_argument('--audit', action='store_true', default=None,
                            help='Auditar capacidad y conservación en cada paso del kernel')
        parser.add_argument('--wall-time', action='store_true', default=None,
                            help='Incluir el tiempo de pared medido en el CSV')

    def run(self, app, platform, strategy, n, seed, csv, jobs=None, record=False, allow_frontend=False,
            audit=None, wall_time=None, **options):
        model, platform_model = workflow_service.load_inputs(app, platform)
        rows = workflow_service.run_batch(
            model, platform_model, strategy, n, first_seed=seed, jobs=jobs, allow_frontend=allow_frontend, audit=audit,
        )
        summary = summarize_batch(rows)
        extra = workflow_service.ms2_report(model, platform_model, strategy, summary, allow_frontend)

        path = Path(csv)
        if path.parent != Path('.'):
            path.parent.mkdir(parents=True, exist_ok=True)
        write_batch_csv(rows, platform_model.host_ids, path, summary=summary, extra=extra, wall_time=wall_time)
        if record:
            record_experiment(summary, 'batch', app, platform, strategy, seed)

        self.stdout.write(f"rows={len(rows)}")
        self.stdout.write(f"min_makespan_s={format_number(summary.makespan.minimum)} id={summary.makespan.argmin}")
        self.stdout.write(f"max_makespan_s={format_number(summary.makespan.maximum)} id={summary.makespan.argmax}")
        self.stdout.write(
            f"min_energy_j={format_number(summary.total_energy.minimum)} id={summary.total_energy.argmin}"
        )
