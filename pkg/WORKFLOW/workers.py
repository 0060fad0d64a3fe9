"""
Funciones de los procesos del pool del evaluador por lotes.

Con los métodos de arranque 'spawn' y 'forkserver' el proceso hijo importa
este módulo desde cero, así que Django se inicializa antes de importar los
servicios que dependen de modelos.
"""
from typing import Dict

import django
from django.apps import apps

if not apps.ready:
    django.setup()

from MAPPING.strategies import strategy_from_spec  # noqa: E402
from METRICS.entities import BatchRow  # noqa: E402
from METRICS.services import batch_row  # noqa: E402
from SIMKERNEL.services import simulate  # noqa: E402

# Estado de cada proceso del pool
_worker: Dict[str, object] = {}


def init_worker(app, platform, strategy_spec, allow_frontend, audit):
    _worker.update(
        app=app,
        platform=platform,
        strategy=strategy_from_spec(strategy_spec, allow_frontend),
        spec=strategy_spec,
        audit=audit,
    )


def simulate_seed(seed: int) -> BatchRow:
    mapping = _worker['strategy'].produce(_worker['app'], _worker['platform'], seed)
    result = simulate(_worker['app'], _worker['platform'], mapping, audit=_worker['audit'])
    return batch_row(seed, result, seed=seed, strategy=_worker['spec'])
