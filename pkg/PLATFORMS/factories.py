"""
Factories de factory-boy para plataformas de prueba
"""
import factory

from .entities import Host, Link, PlatformModel, Route

FRONTEND_ID = 'FRONTEND'


class HostFactory(factory.Factory):
    class Meta:
        model = Host

    id = factory.Sequence(lambda n: f"H{n}")
    node = '0'
    speed = 1e9
    p_idle = factory.Faker('pyfloat', min_value=50, max_value=150)
    p_full = factory.LazyAttribute(lambda o: o.p_idle * 2)
    is_frontend = False


class LinkFactory(factory.Factory):
    class Meta:
        model = Link

    id = factory.Sequence(lambda n: f"K{n}")
    bandwidth = 1e9
    latency = 0.0


def frontend_host() -> Host:
    return Host(id=FRONTEND_ID, node='frontend', speed=1e9, p_idle=0.0, p_full=0.0, is_frontend=True)


def build_platform(hosts, links=(), routes=(), symmetric=True) -> PlatformModel:
    """
    Plataforma con los hosts dados más un frontend sin consumo.
    `routes` son tuplas (src, dst, [enlaces]); con `symmetric` se añade la inversa.
    """
    materialized = []
    for src, dst, link_ids in routes:
        materialized.append(Route(src, dst, tuple(link_ids)))
        if symmetric:
            materialized.append(Route(dst, src, tuple(reversed(link_ids))))
    return PlatformModel(hosts=tuple(hosts) + (frontend_host(),), links=tuple(links), routes=tuple(materialized))


def uniform_platform(n_hosts, speed=1e9, p_idle=100.0, p_full=200.0, connected=False, bandwidth=1e9, latency=0.0):
    """
    `n_hosts` hosts idénticos H0..Hn-1. Con `connected` cada host tiene su
    enlace K_i y la ruta entre dos hosts es [K_i, K_j]; sin él no hay rutas.
    """
    hosts = [HostFactory(id=f"H{i}", speed=speed, p_idle=p_idle, p_full=p_full) for i in range(n_hosts)]
    if not connected:
        return build_platform(hosts)
    links = [LinkFactory(id=f"K_{i}", bandwidth=bandwidth, latency=latency) for i in range(n_hosts)]
    routes = [
        (f"H{i}", f"H{j}", [f"K_{i}", f"K_{j}"]) for i in range(n_hosts) for j in range(i + 1, n_hosts)
    ]
    return build_platform(hosts, links, routes)
