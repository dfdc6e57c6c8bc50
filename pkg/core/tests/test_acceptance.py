"""
Benchmark runs at desk resolution. These take minutes; enable them with
TM_RUN_SLOW_TESTS=True.
"""
import shutil
import tempfile
import unittest
from pathlib import Path

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase

from core.config import load_config, load_problem
from core.post import cavity_volume, check_separation, material_point, min_jacobian
from core.runner import cli_run, table1_harness
from core.solver import run_schedule

# Gap between the plates of the box at u_y = -1 and alpha_r = 10.
REFERENCE_GAPS = {1e-4: 1.1135e-2, 1e-5: 2.4206e-3, 1e-6: 4.9783e-4}

slow = unittest.skipUnless(settings.RUN_SLOW_TESTS, 'set TM_RUN_SLOW_TESTS=True to run benchmark tests')


class SlowTestMixin:

    def setUp(self):
        super().setUp()
        self.tmp = Path(tempfile.mkdtemp())
        self.addCleanup(shutil.rmtree, self.tmp, ignore_errors=True)


@slow
class BoxSelfContactTests(SlowTestMixin, SimpleTestCase):

    def test_gap_trend_over_gamma(self):
        cells = table1_harness(load_config('box_self_contact'), alpha_r=[10.0],
                               gamma=sorted(REFERENCE_GAPS, reverse=True), output_dir=self.tmp)
        self.assertTrue(all(not c.failed for c in cells), [c.message for c in cells])
        gaps = [c.gap for c in cells]
        self.assertTrue(gaps[0] > gaps[1] > gaps[2], gaps)
        self.assertTrue(all(c.min_separation >= 0.0 for c in cells), [c.min_separation for c in cells])
        for cell in cells:
            ratio = cell.gap / REFERENCE_GAPS[cell.gamma]
            self.assertTrue(1.0 / 3.0 <= ratio <= 3.0, (cell.gamma, cell.gap))

    def test_stiff_regularization_row_completes(self):
        cells = table1_harness(load_config('box_self_contact'), alpha_r=[100.0],
                               gamma=sorted(REFERENCE_GAPS, reverse=True), output_dir=self.tmp)
        self.assertEqual([c.status for c in cells], ['completed'] * 3)
        self.assertTrue(all(c.min_separation >= 0.0 for c in cells), [c.min_separation for c in cells])

    def test_repeated_cell_is_byte_identical(self):
        overrides = ['third_medium.alpha_r=100', 'third_medium.gamma=1e-4']
        first = cli_run(load_problem('box_self_contact', overrides), output_dir=self.tmp / 'first')
        second = cli_run(load_problem('box_self_contact', overrides), output_dir=self.tmp / 'second')
        names = ['probe.csv'] + [path.name for path, _ in first.vtk_files]
        for name in names:
            self.assertEqual((first.output_dir / name).read_bytes(), (second.output_dir / name).read_bytes(), name)
        self.assertEqual(len(second.vtk_files), len(first.vtk_files))


@slow
class PneumaticBoxTests(SlowTestMixin, SimpleTestCase):

    def ramp(self, config, overrides=()):
        problem = load_problem(config, overrides)
        assembler = problem.assembler()
        volumes, j_min, wall = [], [], []

        def track(step, lam, u, step_report):
            volumes.append(cavity_volume(assembler, u))
            j_min.append(min_jacobian(assembler, u))
            # inner wall point on the x axis
            wall.append(material_point(problem.mesh, u, problem.probe.point_a)[0])

        u, report = run_schedule(assembler, problem.schedule, problem.settings, callback=track)
        return problem, u, report, volumes, j_min, wall

    def test_suction_contracts_the_cavity(self):
        problem, _, report, volumes, j_min, wall = self.ramp('pneumatic_box_suction')
        self.assertTrue(report.completed, report.message)
        self.assertLessEqual(report.mean_iterations, 7.0)
        self.assertTrue(all(b <= a + 1e-12 for a, b in zip(volumes, volumes[1:])))
        self.assertLess(volumes[-1], 0.125)
        self.assertGreater(min(j_min), 0.0)
        self.assertLess(wall[-1], 0.5)

    def test_inflation_expands_the_cavity(self):
        _, _, report, volumes, j_min, wall = self.ramp('pneumatic_box_inflation')
        self.assertTrue(report.completed, report.message)
        self.assertGreater(volumes[-1], 0.125)
        self.assertGreater(min(j_min), 0.0)
        self.assertGreater(wall[-1], 0.5)

    def test_strong_suction_brings_the_walls_into_contact(self):
        problem, u, report, volumes, j_min, wall = self.ramp('pneumatic_box_collapse')
        self.assertTrue(report.completed, report.message)
        self.assertTrue(all(b <= a + 1e-12 for a, b in zip(volumes, volumes[1:])))
        self.assertLess(volumes[-1], 0.5 * 0.125)
        self.assertLess(wall[-1], 0.25)
        self.assertGreater(min(j_min), 0.0)
        # the wall meets its mirror image on the symmetry plane without crossing it
        self.assertGreaterEqual(check_separation(problem.mesh, u, problem.gauge), 0.0)

    def test_step_count_does_not_change_the_solution(self):
        _, u100, r100, *_ = self.ramp('pneumatic_box_suction')
        _, u200, r200, *_ = self.ramp('pneumatic_box_suction', ['schedule.n_steps=200'])
        self.assertTrue(r100.completed and r200.completed)
        diff = np.abs(u100 - u200).max() / np.abs(u200).max()
        self.assertLessEqual(diff, 1e-6)


@slow
class OptionalScenarioSmokeTests(SlowTestMixin, SimpleTestCase):
    """The first load step of the remaining benchmarks converges."""

    def check_first_step(self, config):
        problem = load_problem(config, ['schedule.max_steps=1'])
        result = cli_run(problem, output_dir=self.tmp / config)
        self.assertEqual(len(result.report.steps), 1, result.report.message)
        self.assertEqual(result.report.status, 'partial')
        self.assertGreater(min_jacobian(problem.assembler(), result.displacement), 0.0)

    def test_rotating_box(self):
        self.check_first_step('rotating_box')

    def test_punch(self):
        self.check_first_step('punch')

    def test_soft_actuator(self):
        self.check_first_step('soft_actuator')
