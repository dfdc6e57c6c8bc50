from fractions import Fraction
from types import SimpleNamespace
from unittest import mock

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose
from scipy import sparse
from scipy.optimize import brentq

from core.assembly import Assembler, BoundaryConditions, DirichletBC, MaterialSet
from core.exceptions import NonConvergenceError, SingularSystemError
from core.material import SolidParams
from core.solver import (
    LoadSchedule, NewtonSettings, linear_solve, newton_solve_step, run_schedule,
)

from .helpers import block_mesh

K_BULK, MU = 20.0, 10.0
SIZE = (2.0, 1.0, 1.0)


def uniaxial_assembler(stretch):
    """Block with roller supports on the min faces and a prescribed x-stretch."""
    bcs = BoundaryConditions(dirichlet=(
        DirichletBC('xmin', components=(0,)),
        DirichletBC('ymin', components=(1,)),
        DirichletBC('zmin', components=(2,)),
        DirichletBC('xmax', components=(0,), value=(stretch - 1.0) * SIZE[0]),
    ))
    return Assembler(block_mesh(nx=2, ny=1, nz=1, size=SIZE),
                     MaterialSet(solids={0: SolidParams(K=K_BULK, mu=MU)}), bcs, points_per_axis=2)


def lateral_stress(s, t):
    """P_yy of the Neo-Hookean solid under F = diag(s, t, t)."""
    J = s * t * t
    I1 = s * s + 2.0 * t * t
    return K_BULK * np.log(J) / t + MU * J ** (-2.0 / 3.0) * (t - I1 / (3.0 * t))


class LinearSolveTests(SimpleTestCase):

    def test_identity(self):
        rhs = np.arange(5.0)
        assert_allclose(linear_solve(sparse.identity(5, format='csr'), rhs), rhs)

    def test_spd_matches_dense_solve(self):
        rng = np.random.default_rng(0)
        A = sparse.random(100, 100, density=0.05, random_state=1)
        K = (A @ A.T + sparse.identity(100)).tocsr()
        rhs = rng.standard_normal(100)
        assert_allclose(linear_solve(K, rhs), np.linalg.solve(K.toarray(), rhs), rtol=1e-10)

    def test_empty_system(self):
        self.assertEqual(linear_solve(sparse.csr_matrix((0, 0)), np.zeros(0)).size, 0)

    def test_singular_matrix(self):
        K = sparse.csr_matrix(np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 2.0]]))
        with self.assertRaises(SingularSystemError):
            linear_solve(K, np.ones(3))


class NewtonTests(SimpleTestCase):

    def test_uniaxial_stretch_matches_scalar_equilibrium(self):
        s = 1.2
        assembler = uniaxial_assembler(s)
        settings = NewtonSettings(tol_rel=1e-12, tol_abs=1e-13)
        u, report = run_schedule(assembler, LoadSchedule(n_steps=2), settings)
        self.assertTrue(report.completed)
        t = brentq(lambda t: lateral_stress(s, t), 0.5, 1.0)
        X = assembler.mesh.coords
        uy = u[1::3]
        uz = u[2::3]
        assert_allclose(uy, (t - 1.0) * X[:, 1], atol=1e-10)
        assert_allclose(uz, (t - 1.0) * X[:, 2], atol=1e-10)
        assert_allclose(u[0::3], (s - 1.0) * X[:, 0], atol=1e-10)

    def test_quadratic_convergence_for_small_load(self):
        assembler = uniaxial_assembler(1.0 + 1e-6)
        u, history = newton_solve_step(assembler, np.zeros(assembler.dofmap.n_dofs), 1.0, NewtonSettings())
        self.assertLessEqual(len(history) - 1, 2)
        self.assertGreater(np.abs(u).max(), 0.0)

    def test_zero_load_needs_no_iterations(self):
        assembler = uniaxial_assembler(1.0)
        _, report = run_schedule(assembler, LoadSchedule(n_steps=3), NewtonSettings())
        self.assertEqual(report.iterations, [0, 0, 0])
        self.assertEqual(report.mean_iterations, 0.0)
        self.assertEqual(report.status, 'completed')

    def test_iteration_limit_raises(self):
        assembler = uniaxial_assembler(1.3)
        settings = NewtonSettings(tol_rel=1e-15, tol_abs=1e-300, max_iter=1)
        with self.assertRaises(NonConvergenceError):
            newton_solve_step(assembler, np.zeros(assembler.dofmap.n_dofs), 1.0, settings)

    def test_callback_sees_every_accepted_step(self):
        assembler = uniaxial_assembler(1.1)
        seen = []
        run_schedule(assembler, LoadSchedule(n_steps=4), NewtonSettings(),
                     callback=lambda step, lam, u, report: seen.append((step, lam)))
        self.assertEqual(seen, [(1, 0.25), (2, 0.5), (3, 0.75), (4, 1.0)])


class ScheduleTests(SimpleTestCase):
    """Continuation logic with a stubbed increment solver."""

    def setUp(self):
        self.assembler = SimpleNamespace(dofmap=SimpleNamespace(n_dofs=3))
        self.targets = []

    def fake_step(self, fail_at=()):
        failures = list(fail_at)

        def step(assembler, u, lam, settings):
            self.targets.append(lam)
            if lam in failures:
                failures.remove(lam)
                raise NonConvergenceError(settings.max_iter, 1.0)
            return u + 1.0, [1.0, 0.0]
        return step

    def test_bisection_recovers_and_lands_on_one(self):
        with mock.patch('core.solver.newton_solve_step', self.fake_step(fail_at=[Fraction(1, 2)])):
            _, report = run_schedule(self.assembler, LoadSchedule(n_steps=2), NewtonSettings())
        self.assertTrue(report.completed)
        self.assertEqual(report.final_lambda, 1.0)
        self.assertEqual(self.targets, [Fraction(1, 2), Fraction(1, 4), Fraction(3, 4), Fraction(1)])
        self.assertEqual([s.bisections for s in report.steps], [1, 0, 0])
        self.assertEqual(len(report.bisection_events), 1)
        self.assertEqual(report.bisection_events[0].lam_to, 0.5)

    def test_exhausted_bisections_fail(self):
        def always_fail(assembler, u, lam, settings):
            raise NonConvergenceError(settings.max_iter, 1.0)

        with mock.patch('core.solver.newton_solve_step', always_fail):
            _, report = run_schedule(self.assembler, LoadSchedule(n_steps=4), NewtonSettings(max_bisections=3))
        self.assertFalse(report.completed)
        self.assertEqual(report.status, 'failed')
        self.assertEqual(report.final_lambda, 0.0)
        self.assertEqual(len(report.bisection_events), 4)
        self.assertTrue(report.message.startswith('Bisections exhausted'))

    def test_max_steps_stops_early(self):
        with mock.patch('core.solver.newton_solve_step', self.fake_step()):
            u, report = run_schedule(self.assembler, LoadSchedule(n_steps=4, max_steps=1), NewtonSettings())
        self.assertEqual(report.status, 'partial')
        self.assertEqual(report.final_lambda, 0.25)
        assert_allclose(u, 1.0)

    def test_invalid_settings(self):
        with self.assertRaises(ValueError):
            LoadSchedule(n_steps=0)
        with self.assertRaises(ValueError):
            NewtonSettings(tol_rel=0.0)
        with self.assertRaises(ValueError):
            NewtonSettings(max_bisections=-1)
