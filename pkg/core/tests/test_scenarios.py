import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from core.mesh import validate_mesh
from core.post import SeparationGauge, separations
from core.scenarios import (
    SCENARIOS, box_probe_points, build_box_self_contact, build_pneumatic_box, build_punch,
    build_rotating_box, build_soft_actuator, grid_lines,
)


class GridLineTests(SimpleTestCase):

    def test_segments_are_joined(self):
        assert_allclose(grid_lines((0.0, 1.0, 2), (1.0, 2.0, 1)), [0.0, 0.5, 1.0, 2.0])

    def test_zero_subdivisions(self):
        with self.assertRaisesMessage(ValueError, 'Zero subdivisions'):
            grid_lines((0.0, 1.0, 0))

    def test_empty_segment(self):
        with self.assertRaises(ValueError):
            grid_lines((1.0, 1.0, 2))


class BuilderTests(SimpleTestCase):

    def assertValid(self, mesh):
        report = validate_mesh(mesh)
        self.assertTrue(report.ok, report.failures)

    def test_box_self_contact(self):
        mesh = build_box_self_contact()
        self.assertValid(mesh)
        self.assertEqual(set(mesh.node_sets),
                         {'bottom_fixed', 'top_load', 'front_back_z', 'left_end', 'right_end'})
        self.assertEqual(mesh.medium_groups(), ['cavity'])
        # (1 web + 4 + 1 strip + 4 + 1 web) x (1 + 2 + 1) x 1 cells
        self.assertEqual(mesh.n_elements, 11 * 4)
        self.assertEqual(len(mesh.medium_elements()), 9 * 2)
        top = mesh.coords[list(mesh.node_sets['top_load'])]
        assert_allclose(top[:, 1], 0.5)
        self.assertTrue(np.all(np.abs(top[:, 0] - 1.0) <= 0.1 + 1e-12))
        self.assertIn(1.0, np.round(top[:, 0], 12))

    def test_box_lower_plate_is_free_between_the_webs(self):
        mesh = build_box_self_contact()
        supports = mesh.coords[list(mesh.node_sets['bottom_fixed'])]
        assert_allclose(supports[:, 1], 0.0)
        self.assertTrue(np.all((supports[:, 0] <= 0.1 + 1e-12) | (supports[:, 0] >= 1.9 - 1e-12)))
        # both webs are carried
        self.assertTrue(np.any(supports[:, 0] < 0.05) and np.any(supports[:, 0] > 1.95))

    def test_box_gap_points_sit_under_the_load_strip(self):
        (xa, ya, _), (xb, yb, _) = box_probe_points()
        self.assertEqual((xa, xb), (1.0, 1.0))
        self.assertAlmostEqual(yb - ya, 0.3)

    def test_box_dimension_checks(self):
        with self.assertRaisesMessage(ValueError, 'Inconsistent dimensions'):
            build_box_self_contact(H=0.2, t=0.1)
        with self.assertRaisesMessage(ValueError, 'Inconsistent dimensions'):
            build_box_self_contact(g0=0.5)
        with self.assertRaisesMessage(ValueError, 'Inconsistent dimensions'):
            build_box_self_contact(L=0.4)
        with self.assertRaisesMessage(ValueError, 'nx must be even'):
            build_box_self_contact(nx=7)
        with self.assertRaises(ValueError):
            build_box_self_contact(L=-1.0)

    def test_pneumatic_box_one_eighth_and_full(self):
        eighth = build_pneumatic_box()
        self.assertValid(eighth)
        self.assertIn('sym_x', eighth.node_sets)
        self.assertEqual(len(eighth.medium_elements()), 8)
        full = build_pneumatic_box(one_eighth=False)
        self.assertValid(full)
        self.assertIn('mid_z', full.node_sets)
        self.assertEqual(len(full.medium_elements()), 64)

    def test_rotating_box_is_closed_and_padded(self):
        mesh = build_rotating_box()
        self.assertValid(mesh)
        assert_allclose(mesh.coords[:, 2].min(), -0.25)
        self.assertGreater(len(mesh.medium_elements()), len(build_box_self_contact().medium_elements()))
        self.assertNotIn('top_load', mesh.node_sets)

    def test_punch(self):
        mesh = build_punch()
        self.assertValid(mesh)
        bodies = {e.tag.body_id for e in mesh.solid_elements()}
        self.assertEqual(bodies, {0, 1})
        self.assertEqual(mesh.medium_groups(), ['gap'])
        top = mesh.coords[list(mesh.node_sets['punch_top'])]
        assert_allclose(top[:, 2], 2.5)
        self.assertTrue(np.all(top[:, :2] <= 0.5 + 1e-12))
        with self.assertRaisesMessage(ValueError, 'smaller than g0'):
            build_punch(R=0.75, g0=0.1)

    def test_soft_actuator(self):
        mesh = build_soft_actuator()
        self.assertValid(mesh)
        self.assertEqual(mesh.medium_groups(), ['chamber_0', 'chamber_1', 'chamber_2', 'gap'])
        assert_allclose(mesh.coords[:, 0].max(), 3.4)
        with self.assertRaises(ValueError):
            build_soft_actuator(n_cells=0)

    def test_registry_probes_lie_in_the_mesh(self):
        for name, scenario in SCENARIOS.items():
            with self.subTest(name):
                mesh = scenario.build()
                a, b = scenario.probe()
                lo, hi = mesh.coords.min(axis=0), mesh.coords.max(axis=0)
                for point in (a, b):
                    self.assertTrue(np.all(np.asarray(point) >= lo - 1e-12))
                    self.assertTrue(np.all(np.asarray(point) <= hi + 1e-12))

    def test_registry_surfaces_start_apart(self):
        for name, scenario in SCENARIOS.items():
            if scenario.surfaces is None:
                continue
            with self.subTest(name):
                mesh = scenario.build()
                gauge = SeparationGauge.from_points(mesh, *scenario.surfaces())
                values = separations(mesh, np.zeros(3 * mesh.n_nodes), gauge)
                self.assertTrue(np.all(values > 0.0), values)

    def test_builders_are_deterministic(self):
        first, second = build_punch(), build_punch()
        self.assertTrue(np.array_equal(first.coords, second.coords))
        self.assertEqual(first.elements, second.elements)
