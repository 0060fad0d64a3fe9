from pathlib import Path

import orjson

from METRICS.services import format_number, record_experiment, summarize_batch, write_batch_csv, write_energy_csv
from TRACES.services import emit_paje
from WORKFLOW.base import TaskMapperCommand
from WORKFLOW.services import workflow_service


class Command(TaskMapperCommand):
    help = 'Simula una aplicación sobre una plataforma con un mapeo estático'

    def add_arguments(self, parser):
        self.add_input_arguments(parser)
        parser.add_argument('--mapping', required=True,
                            help='random, round-robin, greedy-load, all-on:<host> o file:<ruta>')
        parser.add_argument('--seed', type=int, default=0, help='Semilla del mapeo aleatorio (y id del mapeo)')
        parser.add_argument('--out', required=True, help='Directorio de resultados')
        parser.add_argument('--trace', action='store_true', help='Escribir además trace.paje')
        parser.add_argument('--record', action='store_true', help='Guardar el resultado en la base de datos')
        parser.add_argument('--allow-frontend', action='store_true', help='Permitir mapear sobre el frontend')
        parser.add_argument('--audit', action='store_true', default=None,
                            help='Auditar capacidad y conservación en cada paso del kernel')
        parser.add_argument('--wall-time', action='store_true', default=None,
                            help='Incluir el tiempo de pared medido en result.csv')

    def run(self, app, platform, mapping, seed, out, trace=False, record=False, allow_frontend=False,
            audit=None, wall_time=None, **options):
        model, platform_model = workflow_service.load_inputs(app, platform)
        chosen, result, row = workflow_service.simulate_one(
            model, platform_model, mapping, seed=seed, allow_frontend=allow_frontend, audit=audit,
        )

        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        host_ids = platform_model.host_ids
        summary = summarize_batch([row])
        write_batch_csv([row], host_ids, out_dir / 'result.csv', wall_time=wall_time)
        write_energy_csv(result, host_ids, out_dir / 'energy.csv')
        (out_dir / 'summary.json').write_bytes(orjson.dumps(
            {
                'mapping': mapping,
                'seed': seed,
                'makespan_s': result.makespan,
                'total_energy_j': result.total_energy,
                'per_host_energy_j': {host_id: result.per_host_energy[host_id] for host_id in host_ids},
                'runnables_per_host': dict(sorted(chosen.runnables_per_host().items())),
                'timeline_events': len(result.timeline),
            },
            option=orjson.OPT_INDENT_2 | orjson.OPT_APPEND_NEWLINE,
        ))
        if trace:
            emit_paje(result, platform_model, chosen, out_dir / 'trace.paje')
        if record:
            record_experiment(summary, 'simulate', app, platform, mapping, seed)

        self.stdout.write(f"makespan_s={format_number(result.makespan)}")
        self.stdout.write(f"total_energy_j={format_number(result.total_energy)}")
