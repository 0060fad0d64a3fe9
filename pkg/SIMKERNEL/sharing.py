"""
Reparto max-min justo por llenado progresivo.

Cada recurso tiene una capacidad; cada acción usa un conjunto de recursos.
En cada ronda se satura el recurso cuello de botella (capacidad restante /
usuarios sin congelar mínima), se congelan sus usuarios a esa tasa, se resta
su consumo de los demás recursos y se repite hasta congelar todas las acciones.
"""
from typing import Dict, Hashable, Mapping, Sequence


def share_resources(
    demands: Mapping[Hashable, Sequence[Hashable]],
    capacities: Mapping[Hashable, float],
) -> Dict[Hashable, float]:
    """
    `demands` asocia cada acción con los recursos que usa; retorna la tasa de
    cada acción. Una acción sin recursos no está limitada (tasa infinita).
    Los empates entre cuellos de botella se resuelven por el orden de la clave
    del recurso, de modo que el resultado es determinista.
    """
    rates = {}
    users = {}
    for action, resources in demands.items():
        resources = tuple(dict.fromkeys(resources))
        if not resources:
            rates[action] = float('inf')
            continue
        for resource in resources:
            users.setdefault(resource, set()).add(action)

    remaining = {resource: float(capacities[resource]) for resource in users}
    active = {resource: len(members) for resource, members in users.items()}
    frozen = set(rates)

    while active:
        bottleneck = min(active, key=lambda resource: (remaining[resource] / active[resource], resource))
        share = remaining[bottleneck] / active[bottleneck]

        for action in sorted(users[bottleneck] - frozen):
            rates[action] = share
            frozen.add(action)
            for resource in dict.fromkeys(demands[action]):
                remaining[resource] = max(0.0, remaining[resource] - share)
                active[resource] -= 1
                if active[resource] == 0:
                    del active[resource]

    return rates
