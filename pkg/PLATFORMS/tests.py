import tempfile
from pathlib import Path

from django.conf import settings
from django.test import SimpleTestCase

from TaskMapper.exceptions import DomainError, NoRouteError, SchemaError, ValidationError

from .entities import Host
from .services import parse_platform, power_at, route_between, serialize_platform

HETEROGENEOUS = settings.REFERENCE_PLATFORMS_DIR / 'hlrs-heterogeneous.yaml'
HOMOGENEOUS = settings.REFERENCE_PLATFORMS_DIR / 'hlrs-homogeneous.yaml'
SINGLE_HOST = settings.REFERENCE_PLATFORMS_DIR / 'single-host.yaml'

FRONTEND = "  - {id: F, node: f, speed: 1, p_idle: 1, p_full: 1, frontend: true}\n"


class ParsePlatformTests(SimpleTestCase):

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def write(self, text):
        path = self.tmp / 'platform.yaml'
        path.write_text(text, encoding='utf-8')
        return path

    def test_reference_heterogeneous_platform(self):
        platform = parse_platform(HETEROGENEOUS)
        self.assertEqual(len(platform.hosts), 6)
        self.assertEqual(
            [host.id for host in platform.candidate_hosts()],
            ['HOST_0_0', 'HOST_0_1', 'HOST_0_2', 'HOST_1_0', 'HOST_1_1'],
        )
        self.assertEqual(platform.frontend.id, 'FRONTEND')
        fast = platform.host_by_id['HOST_0_2']
        self.assertEqual(fast.speed / platform.host_by_id['HOST_0_1'].speed, 100.0)
        self.assertEqual((fast.p_idle, fast.p_full), (190.0, 380.0))

    def test_homogeneous_platform_drops_the_accelerator(self):
        platform = parse_platform(HOMOGENEOUS)
        self.assertNotIn('HOST_0_2', platform.host_by_id)
        self.assertEqual(len(platform.candidate_hosts()), 4)
        self.assertEqual({host.speed for host in platform.candidate_hosts()}, {1e9})

    def test_single_host_platform_has_no_routes(self):
        platform = parse_platform(SINGLE_HOST)
        self.assertEqual(platform.routes, ())
        self.assertEqual([host.id for host in platform.candidate_hosts()], ['HOST_0'])

    def test_p_full_below_p_idle(self):
        path = self.write("hosts:\n  - {id: H, node: n, speed: 1, p_idle: 100, p_full: 50}\n" + FRONTEND)
        with self.assertRaises(ValidationError) as ctx:
            parse_platform(path)
        self.assertEqual(ctx.exception.entity, 'H')

    def test_non_positive_speed_and_bandwidth(self):
        with self.assertRaises(ValidationError):
            parse_platform(self.write("hosts:\n  - {id: H, node: n, speed: 0, p_idle: 1, p_full: 1}\n" + FRONTEND))
        with self.assertRaises(ValidationError):
            parse_platform(self.write("hosts:\n" + FRONTEND + "links:\n  - {id: K, bandwidth: -1, latency: 0}\n"))

    def test_frontend_must_be_unique(self):
        with self.assertRaises(ValidationError):
            parse_platform(self.write("hosts:\n  - {id: H, node: n, speed: 1, p_idle: 1, p_full: 1}\n"))
        with self.assertRaises(ValidationError):
            parse_platform(self.write("hosts:\n" + FRONTEND + FRONTEND.replace('id: F', 'id: G')))
        with self.assertRaises(ValidationError):
            parse_platform(self.write("hosts: []\nlinks: []\nroutes: []\n"))

    def test_dangling_link_reference(self):
        path = self.write(
            "hosts:\n  - {id: H, node: n, speed: 1, p_idle: 1, p_full: 1}\n" + FRONTEND
            + "routes:\n  - {src: H, dst: F, links: [NOPE]}\n"
        )
        with self.assertRaises(ValidationError) as ctx:
            parse_platform(path)
        self.assertEqual(ctx.exception.entity, 'NOPE')

    def test_symmetric_route_clashing_with_declared_reverse(self):
        path = self.write(
            "hosts:\n  - {id: H, node: n, speed: 1, p_idle: 1, p_full: 1}\n" + FRONTEND
            + "links:\n  - {id: K, bandwidth: 1, latency: 0}\n"
            + "routes:\n  - {src: H, dst: F, links: [K], symmetric: true}\n  - {src: F, dst: H, links: [K]}\n"
        )
        with self.assertRaises(ValidationError):
            parse_platform(path)

    def test_explicit_self_route_must_be_empty(self):
        hosts = "hosts:\n  - {id: H, node: n, speed: 1, p_idle: 1, p_full: 1}\n" + FRONTEND
        platform = parse_platform(self.write(hosts + "routes:\n  - {src: H, dst: H, links: [], symmetric: true}\n"))
        self.assertEqual(route_between(platform, 'H', 'H').links, ())

        path = self.write(
            hosts + "links:\n  - {id: K, bandwidth: 1, latency: 0}\n" + "routes:\n  - {src: H, dst: H, links: [K]}\n"
        )
        with self.assertRaises(ValidationError) as ctx:
            parse_platform(path)
        self.assertEqual(ctx.exception.entity, 'H')

    def test_ids_cannot_contain_whitespace(self):
        with self.assertRaises(SchemaError):
            parse_platform(self.write("hosts:\n  - {id: 'HOST 0', node: n, speed: 1, p_idle: 1, p_full: 1}\n" + FRONTEND))

    def test_unknown_key(self):
        with self.assertRaises(SchemaError):
            parse_platform(self.write("hosts: []\nswitches: []\n"))

    def test_serialize_parse_round_trip(self):
        platform = parse_platform(HETEROGENEOUS)
        path = self.tmp / 'copy.yaml'
        serialize_platform(platform, path)
        self.assertEqual(parse_platform(path), platform)


class RouteBetweenTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.platform = parse_platform(HETEROGENEOUS)

    def test_identity_route_is_empty(self):
        route = route_between(self.platform, 'HOST_0_0', 'HOST_0_0')
        self.assertEqual(route.links, ())
        self.assertTrue(route.is_local)

    def test_inter_node_route_crosses_the_backbone(self):
        route = route_between(self.platform, 'HOST_0_0', 'HOST_1_1')
        self.assertEqual(route.links, ('LINK_0_0', 'BACKBONE', 'LINK_1_1'))

    def test_symmetric_routes_resolve_both_ways(self):
        for src in self.platform.host_ids:
            for dst in self.platform.host_ids:
                forward = route_between(self.platform, src, dst)
                backward = route_between(self.platform, dst, src)
                self.assertEqual(forward.links, tuple(reversed(backward.links)))

    def test_unknown_host(self):
        with self.assertRaises(NoRouteError):
            route_between(self.platform, 'HOST_0_0', 'HOST_9_9')
        with self.assertRaises(NoRouteError):
            route_between(self.platform, 'HOST_9_9', 'HOST_9_9')

    def test_missing_pair(self):
        platform = parse_platform(SINGLE_HOST)
        with self.assertRaises(NoRouteError):
            route_between(platform, 'HOST_0', 'FRONTEND')


class PowerAtTests(SimpleTestCase):

    host = Host(id='H', node='0', speed=1.0, p_idle=100.0, p_full=200.0)

    def test_linear_interpolation(self):
        self.assertEqual(power_at(self.host, 0.5), 150.0)
        self.assertEqual(power_at(self.host, 0.0), 100.0)
        self.assertEqual(power_at(self.host, 1.0), 200.0)

    def test_monotone(self):
        values = [power_at(self.host, step / 100) for step in range(101)]
        self.assertEqual(values, sorted(values))

    def test_out_of_range(self):
        for utilization in (-0.01, 1.5, float('nan')):
            with self.assertRaises(DomainError):
                power_at(self.host, utilization)
