import itertools

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from core.exceptions import BarrierViolation, OracleError, ThirdMediumError
from core.material import (
    DerivativeProvider, KinematicState, RegKind, SolidParams, ThirdMediumParams,
    cauchy_from_pk1, fd_oracle, flatten2, flatten3, flatten4, flatten5, flatten6,
    psi_neo_hookean, psi_pneumatic, psi_reg_fullgrad, psi_reg_skew, psi_solid,
    psi_third_medium, solid_response, third_medium_response, unflatten2, unflatten3,
)

from .helpers import random_F, random_gradF, relative_error


class FlatteningTests(SimpleTestCase):

    def setUp(self):
        self.rng = np.random.default_rng(0)

    def test_first_index_fastest(self):
        P = self.rng.standard_normal((3, 3))
        T = self.rng.standard_normal((3, 3, 3))
        Phat, That = flatten2(P), flatten3(T)
        for i, j in itertools.product(range(3), repeat=2):
            self.assertEqual(Phat[i + 3 * j], P[i, j])
        for i, j, k in itertools.product(range(3), repeat=3):
            self.assertEqual(That[i + 3 * j + 9 * k], T[i, j, k])
        assert_allclose(unflatten2(Phat), P)
        assert_allclose(unflatten3(That), T)

    def test_tangent_blocks_use_the_same_maps(self):
        C = self.rng.standard_normal((3,) * 4)
        A = self.rng.standard_normal((3,) * 5)
        B = self.rng.standard_normal((3,) * 6)
        Chat, Ahat, Bhat = flatten4(C), flatten5(A), flatten6(B)
        self.assertEqual(Chat[2 + 3 * 0, 1 + 3 * 2], C[2, 0, 1, 2])
        self.assertEqual(Ahat[1 + 3 * 2 + 9 * 0, 2 + 3 * 1], A[1, 2, 0, 2, 1])
        self.assertEqual(Bhat[0 + 3 * 1 + 9 * 2, 2 + 3 * 2 + 9 * 1], B[0, 1, 2, 2, 2, 1])


class ParameterTests(SimpleTestCase):

    def test_invalid_parameters(self):
        with self.assertRaises(ValueError):
            SolidParams(K=-1.0, mu=1.0)
        with self.assertRaises(ValueError):
            ThirdMediumParams(K=1.0, mu=1.0, gamma=0.0)
        with self.assertRaises(ValueError):
            ThirdMediumParams(K=1.0, mu=1.0, gamma=1e-5, alpha_r=-1.0)

    def test_reg_kind_is_coerced(self):
        params = ThirdMediumParams(K=1.0, mu=1.0, gamma=1e-5, reg_kind='full')
        self.assertIs(params.reg_kind, RegKind.FULL_GRADIENT)
        self.assertEqual(params.with_pressure(0.3).pbar, 0.3)
        self.assertIs(params.with_pressure(0.3).reg_kind, RegKind.FULL_GRADIENT)


class EnergyTests(SimpleTestCase):

    def test_neo_hookean_is_stress_free_in_reference_state(self):
        params = SolidParams(K=20.0, mu=10.0)
        self.assertAlmostEqual(float(psi_solid(np.eye(3), params)), 0.0)
        resp, _ = solid_response(np.eye(3), params)
        assert_allclose(resp.Phat, 0.0, atol=1e-14)

    def test_neo_hookean_is_isochoric_invariant(self):
        s = 1.3
        F = np.diag([s, 1.0 / np.sqrt(s), 1.0 / np.sqrt(s)])
        expected = 0.5 * 10.0 * (s * s + 2.0 / s - 3.0)
        self.assertAlmostEqual(float(psi_neo_hookean(F, 20.0, 10.0)), expected, places=12)

    def test_barrier_growth_under_uniform_compression(self):
        # psi(sI) = 9K/2 ln^2 s; the isochoric part vanishes for uniform stretch
        stretches = (0.5, 0.1, 0.01, 0.001)
        values = [float(psi_neo_hookean(s * np.eye(3), 20.0, 10.0)) for s in stretches]
        assert_allclose(values, [90.0 * np.log(s) ** 2 for s in stretches], rtol=1e-10)
        self.assertTrue(all(b > a for a, b in zip(values, values[1:])))
        ratio = values[-1] / values[0]
        self.assertAlmostEqual(ratio, (np.log(1e-3) / np.log(0.5)) ** 2, places=6)
        self.assertGreater(ratio, 99.0)

    def test_non_positive_J_is_a_barrier_violation(self):
        F = np.diag([1.0, 1.0, -0.1])
        with self.assertRaises(BarrierViolation):
            psi_neo_hookean(F, 20.0, 10.0)
        with self.assertRaises(BarrierViolation):
            psi_pneumatic(0.0, 0.3)

    def test_skew_regularization_ignores_symmetric_part(self):
        rng = np.random.default_rng(1)
        G = rng.standard_normal((3, 3, 3))
        sym = 0.5 * (G + np.swapaxes(G, 0, 1))
        self.assertAlmostEqual(float(psi_reg_skew(sym, 1e-5, 10.0)), 0.0, places=15)
        self.assertGreater(float(psi_reg_skew(G, 1e-5, 10.0)), 0.0)

    def test_full_gradient_regularization_removes_trace_part(self):
        G = np.zeros((3, 3, 3))
        for i in range(3):
            G[i, i, i] = 1.0
        expected = 0.5 * 10.0 * 1e-5 * (3.0 - 3.0 / 3.0)
        self.assertAlmostEqual(float(psi_reg_fullgrad(G, 1e-5, 10.0)), expected, places=15)

    def test_third_medium_energy_is_the_sum_of_its_terms(self):
        rng = np.random.default_rng(2)
        F, G = random_F(rng), random_gradF(rng)
        params = ThirdMediumParams(K=20.0, mu=10.0, gamma=1e-3, alpha_r=10.0, pbar=0.3)
        expected = (1e-3 * psi_neo_hookean(F, 20.0, 10.0) + psi_reg_skew(G, 1e-3, 10.0)
                    + psi_pneumatic(np.linalg.det(F), 0.3))
        self.assertAlmostEqual(float(psi_third_medium(F, G, params)), float(expected), places=13)
        resp, _ = third_medium_response(KinematicState.from_F(F, G), params)
        self.assertAlmostEqual(float(resp.psi), float(expected), places=12)


class DerivativeConsistencyTests(SimpleTestCase):
    """Stresses and tangent blocks against finite differences of the energy."""

    n_states = 100

    def check_state(self, params, provider, F, G):
        state = KinematicState.from_F(F, G)
        resp, blocks = third_medium_response(state, params, provider)
        Phat, That, Chat, Ahat, Bhat = fd_oracle(
            lambda F_, G_: psi_third_medium(F_, G_, params), state)
        self.assertLess(relative_error(resp.Phat, Phat), 1e-6)
        self.assertLess(relative_error(resp.That, That), 1e-6)
        scale = np.linalg.norm(blocks.assembled())
        for actual, expected in ((blocks.Chat, Chat), (blocks.Ahat, Ahat), (blocks.Bhat, Bhat)):
            self.assertLess(np.linalg.norm(actual - expected) / scale, 1e-5)

    def test_third_medium_against_finite_differences(self):
        rng = np.random.default_rng(2024)
        for reg_kind, pbar in itertools.product(RegKind, (0.0, 0.3)):
            params = ThirdMediumParams(K=20.0, mu=10.0, gamma=1e-2, alpha_r=10.0, pbar=pbar, reg_kind=reg_kind)
            with self.subTest(reg_kind=reg_kind.value, pbar=pbar):
                for _ in range(self.n_states):
                    self.check_state(params, DerivativeProvider.ANALYTIC, random_F(rng), random_gradF(rng))

    def test_dual_provider_matches_finite_differences(self):
        rng = np.random.default_rng(7)
        for reg_kind in RegKind:
            params = ThirdMediumParams(K=20.0, mu=10.0, gamma=1e-2, alpha_r=10.0, pbar=-0.2, reg_kind=reg_kind)
            for _ in range(5):
                self.check_state(params, DerivativeProvider.DUAL, random_F(rng), random_gradF(rng))

    def test_providers_agree_on_batched_states(self):
        rng = np.random.default_rng(8)
        F = np.stack([random_F(rng) for _ in range(6)])
        G = np.stack([random_gradF(rng) for _ in range(6)])
        state = KinematicState.from_F(F, G)
        params = ThirdMediumParams(K=20.0, mu=10.0, gamma=1e-5, alpha_r=100.0, pbar=0.3)
        ra, ba = third_medium_response(state, params, DerivativeProvider.ANALYTIC)
        rd, bd = third_medium_response(state, params, DerivativeProvider.DUAL)
        assert_allclose(rd.psi, ra.psi, rtol=1e-12)
        assert_allclose(rd.Phat, ra.Phat, rtol=1e-10, atol=1e-14)
        assert_allclose(rd.That, ra.That, rtol=1e-10, atol=1e-14)
        assert_allclose(bd.assembled(), ba.assembled(), rtol=1e-9, atol=1e-12)

    def test_solid_against_finite_differences(self):
        rng = np.random.default_rng(9)
        params = SolidParams(K=20.0, mu=10.0)
        for provider in DerivativeProvider:
            for _ in range(10):
                F = random_F(rng)
                resp, Chat = solid_response(F, params, provider)
                state = KinematicState.from_F(F)
                Phat, _, C_fd, _, _ = fd_oracle(lambda F_, G_: psi_solid(F_, params), state)
                self.assertLess(relative_error(resp.Phat, Phat), 1e-6)
                self.assertLess(relative_error(Chat, C_fd), 1e-5)
                assert_allclose(resp.That, 0.0)

    def test_non_finite_stencil_is_a_library_error(self):
        state = KinematicState.from_F(np.eye(3), np.zeros((3, 3, 3)))
        with self.assertRaises(OracleError) as ctx:
            fd_oracle(lambda F_, G_: np.full(F_.shape[:-2], np.nan), state)
        self.assertIsInstance(ctx.exception, ThirdMediumError)
        self.assertIsNotNone(ctx.exception.entry)

    def test_stencil_crossing_zero_volume(self):
        params = SolidParams(K=20.0, mu=10.0)
        state = KinematicState.from_F(np.diag([1.0, 1.0, 1e-7]), np.zeros((3, 3, 3)))
        with self.assertRaisesMessage(OracleError, 'admissible set'):
            fd_oracle(lambda F_, G_: psi_solid(F_, params), state)


class PneumaticTests(SimpleTestCase):

    def test_pneumatic_term_gives_hydrostatic_cauchy_stress(self):
        rng = np.random.default_rng(12)
        pbar = 0.37
        base = ThirdMediumParams(K=20.0, mu=10.0, gamma=1e-5, alpha_r=100.0)
        F = np.stack([random_F(rng, spread=0.4, J_range=(0.1, 5.0)) for _ in range(20)])
        state = KinematicState.from_F(F)
        with_p, _ = third_medium_response(state, base.with_pressure(pbar))
        without, _ = third_medium_response(state, base)
        sigma = cauchy_from_pk1(F, with_p.Phat - without.Phat)
        assert_allclose(sigma, pbar * np.broadcast_to(np.eye(3), sigma.shape), atol=1e-12)

    def test_suction_and_inflation_have_opposite_signs(self):
        F = np.diag([1.1, 0.9, 1.05])
        params = ThirdMediumParams(K=20.0, mu=10.0, gamma=1e-5)
        s = cauchy_from_pk1(F, third_medium_response(KinematicState.from_F(F), params.with_pressure(0.3))[0].Phat)
        i = cauchy_from_pk1(F, third_medium_response(KinematicState.from_F(F), params.with_pressure(-0.2))[0].Phat)
        self.assertGreater(np.trace(s), 0.0)
        self.assertLess(np.trace(i), 0.0)
