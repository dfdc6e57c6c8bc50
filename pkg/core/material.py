"""
Constitutive kernels for the hyperelastic solid and the third medium.

Contains:
- SolidParams, ThirdMediumParams, RegKind, DerivativeProvider
- KinematicState, MaterialResponse, TangentBlocks
- Energy densities (solid, skew/full-gradient regularization, pneumatic)
- solid_response / third_medium_response (analytic or jet provider)
- cauchy_from_pk1, fd_oracle
- Flattening helpers shared with the element kernels

Flattening is first-index-fastest everywhere:
``Phat[i + 3j] = P[i, j]``, ``That[i + 3j + 9k] = T[i, j, k]``; tangent
blocks use the same maps for rows and columns (Ahat rows follow the 27-map,
columns the 9-map).

All functions broadcast over leading batch axes (quadrature points).
"""
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .dual import Jet, det3, jet_sum
from .exceptions import BarrierViolation, OracleError

N_F = 9
N_GRAD = 27
N_VARS = N_F + N_GRAD


class RegKind(str, Enum):
    SKEW_GRADIENT = 'skew'
    FULL_GRADIENT = 'full'


class DerivativeProvider(str, Enum):
    ANALYTIC = 'analytic'
    DUAL = 'dual'


@dataclass(frozen=True)
class SolidParams:
    """Neo-Hookean parameters: bulk modulus K and shear modulus mu."""
    K: float
    mu: float

    def __post_init__(self):
        if not (self.K > 0 and self.mu > 0):
            raise ValueError(f'Solid moduli must be positive (K={self.K}, mu={self.mu})')


@dataclass(frozen=True)
class ThirdMediumParams:
    """
    Third-medium parameters.

    ``gamma`` scales the Neo-Hookean energy and the regularization,
    ``alpha_r`` weights the regularization, ``pbar`` is the pneumatic pressure
    (positive for suction, negative for inflation).
    """
    K: float
    mu: float
    gamma: float
    alpha_r: float = 0.0
    pbar: float = 0.0
    reg_kind: RegKind = RegKind.SKEW_GRADIENT

    def __post_init__(self):
        if not (self.K > 0 and self.mu > 0):
            raise ValueError(f'Third-medium moduli must be positive (K={self.K}, mu={self.mu})')
        if not self.gamma > 0:
            raise ValueError(f'gamma must be positive, got {self.gamma}')
        if self.alpha_r < 0:
            raise ValueError(f'alpha_r must be non-negative, got {self.alpha_r}')
        object.__setattr__(self, 'reg_kind', RegKind(self.reg_kind))

    def with_pressure(self, pbar):
        return ThirdMediumParams(self.K, self.mu, self.gamma, self.alpha_r, pbar, self.reg_kind)


@dataclass(frozen=True)
class KinematicState:
    """F (..., 3, 3), gradF[i, j, k] = d2u_i / dX_j dX_k (..., 3, 3, 3), J = det F."""
    F: np.ndarray
    gradF: np.ndarray
    J: np.ndarray

    @classmethod
    def from_F(cls, F, gradF=None):
        F = np.asarray(F, dtype=float)
        if gradF is None:
            gradF = np.zeros(F.shape[:-2] + (3, 3, 3))
        return cls(F=F, gradF=np.asarray(gradF, dtype=float), J=np.linalg.det(F))


@dataclass(frozen=True)
class MaterialResponse:
    psi: np.ndarray
    Phat: np.ndarray
    That: np.ndarray


@dataclass(frozen=True)
class TangentBlocks:
    Chat: np.ndarray
    Ahat: np.ndarray
    Bhat: np.ndarray

    def assembled(self):
        """The symmetric 36x36 block matrix [[Chat, Ahat^T], [Ahat, Bhat]]."""
        top = np.concatenate([self.Chat, np.swapaxes(self.Ahat, -1, -2)], axis=-1)
        bottom = np.concatenate([self.Ahat, self.Bhat], axis=-1)
        return np.concatenate([top, bottom], axis=-2)


# Flattening

def flatten2(P):
    return np.swapaxes(P, -1, -2).reshape(P.shape[:-2] + (N_F,))


def unflatten2(Phat):
    Phat = np.asarray(Phat)
    return np.swapaxes(Phat.reshape(Phat.shape[:-1] + (3, 3)), -1, -2)


def flatten3(T):
    return np.swapaxes(T, -1, -3).reshape(T.shape[:-3] + (N_GRAD,))


def unflatten3(That):
    That = np.asarray(That)
    return np.swapaxes(That.reshape(That.shape[:-1] + (3, 3, 3)), -1, -3)


def flatten4(C):
    return np.einsum('...ijkl->...jilk', C).reshape(C.shape[:-4] + (N_F, N_F))


def flatten5(A):
    return np.einsum('...ijklm->...kjiml', A).reshape(A.shape[:-5] + (N_GRAD, N_F))


def flatten6(B):
    return np.einsum('...ijklmn->...kjinml', B).reshape(B.shape[:-6] + (N_GRAD, N_GRAD))


def _expand(v, n):
    v = np.asarray(v)
    return v.reshape(v.shape + (1,) * n)


def _check_J(J, element=None):
    J = np.asarray(J)
    if np.any(~(J > 0.0)):
        qp = int(np.argmin(np.where(np.isnan(J), -np.inf, J))) if J.ndim else None
        raise BarrierViolation(np.nanmin(J) if np.any(np.isfinite(J)) else np.nan, element=element, qp=qp)


# Energies

def psi_neo_hookean(F, K, mu):
    F = np.asarray(F, dtype=float)
    J = np.linalg.det(F)
    _check_J(J)
    lnJ = np.log(J)
    I1 = np.einsum('...ij,...ij->...', F, F)
    return 0.5 * K * lnJ ** 2 + 0.5 * mu * (J ** (-2.0 / 3.0) * I1 - 3.0)


def psi_solid(F, params):
    return psi_neo_hookean(F, params.K, params.mu)


def psi_reg_skew(gradF, gamma, alpha_r):
    G = np.asarray(gradF, dtype=float)
    s = 0.5 * (G - np.swapaxes(G, -3, -2))
    return 0.5 * alpha_r * gamma * np.einsum('...ijk,...ijk->...', s, s)


def psi_reg_fullgrad(gradF, gamma, alpha_r, n_dim=3):
    G = np.asarray(gradF, dtype=float)
    d = np.einsum('...ijj->...i', G)
    return 0.5 * alpha_r * gamma * (np.einsum('...ijk,...ijk->...', G, G)
                                    - np.einsum('...i,...i->...', d, d) / n_dim)


def psi_pneumatic(J, pbar):
    J = np.asarray(J, dtype=float)
    _check_J(J)
    return pbar * J


def psi_regularization(gradF, params):
    if params.reg_kind is RegKind.FULL_GRADIENT:
        return psi_reg_fullgrad(gradF, params.gamma, params.alpha_r)
    return psi_reg_skew(gradF, params.gamma, params.alpha_r)


def psi_third_medium(F, gradF, params):
    F = np.asarray(F, dtype=float)
    return (params.gamma * psi_neo_hookean(F, params.K, params.mu)
            + psi_regularization(gradF, params)
            + psi_pneumatic(np.linalg.det(F), params.pbar))


# Analytic derivatives

def _neo_hookean_derivatives(F, K, mu):
    J = np.linalg.det(F)
    _check_J(J)
    H = np.swapaxes(np.linalg.inv(F), -1, -2)
    lnJ = np.log(J)
    I1 = np.einsum('...ij,...ij->...', F, F)
    a = mu * J ** (-2.0 / 3.0)
    psi = 0.5 * K * lnJ ** 2 + 0.5 * mu * (J ** (-2.0 / 3.0) * I1 - 3.0)

    x = lambda v: _expand(v, 2)
    dev = F - x(I1 / 3.0) * H
    P = x(K * lnJ) * H + x(a) * dev

    y = lambda v: _expand(v, 4)
    HH = np.einsum('...ij,...kl->...ijkl', H, H)
    HHt = np.einsum('...il,...kj->...ijkl', H, H)
    eye = np.eye(3)
    II = np.einsum('ik,jl->ijkl', eye, eye)
    C = (y(K) * HH - y(K * lnJ) * HHt
         - y(2.0 * a / 3.0) * (np.einsum('...ij,...kl->...ijkl', dev, H)
                               + np.einsum('...ij,...kl->...ijkl', H, F))
         + y(a) * (II + y(I1 / 3.0) * HHt))
    return psi, P, C, J, H, HH, HHt


@lru_cache(maxsize=None)
def _reg_unit_tensor(reg_kind):
    """Bhat per unit alpha_r * gamma; constant in the state."""
    eye = np.eye(3)
    if RegKind(reg_kind) is RegKind.FULL_GRADIENT:
        B = (np.einsum('il,jm,kn->ijklmn', eye, eye, eye)
             - np.einsum('il,jk,mn->ijklmn', eye, eye, eye) / 3.0)
    else:
        B = 0.5 * np.einsum('kn,ijlm->ijklmn', eye,
                            np.einsum('il,jm->ijlm', eye, eye) - np.einsum('jl,im->ijlm', eye, eye))
    Bhat = flatten6(B)
    Bhat.setflags(write=False)
    return Bhat


def _analytic_solid(F, params):
    psi, P, C, *_ = _neo_hookean_derivatives(F, params.K, params.mu)
    return psi, flatten2(P), flatten4(C)


def _analytic_third_medium(F, gradF, params):
    psi_m, P, C, J, H, HH, HHt = _neo_hookean_derivatives(F, params.K, params.mu)
    g = params.gamma
    psi = g * psi_m + params.pbar * J
    P = g * P + _expand(params.pbar * J, 2) * H
    C = g * C + _expand(params.pbar * J, 4) * (HH - HHt)

    scale = params.alpha_r * g
    Bhat_unit = _reg_unit_tensor(params.reg_kind.value)
    Ghat = flatten3(gradF)
    That = scale * np.einsum('ab,...b->...a', Bhat_unit, Ghat)
    psi = psi + 0.5 * np.einsum('...a,...a->...', That, Ghat)

    batch = F.shape[:-2]
    Ahat = np.zeros(batch + (N_GRAD, N_F))
    Bhat = np.broadcast_to(scale * Bhat_unit, batch + (N_GRAD, N_GRAD)).copy()
    return psi, flatten2(P), That, flatten4(C), Ahat, Bhat


# Jet (forward-mode) derivatives

def _jet_neo_hookean(Fv, K, mu):
    Fm = [[Fv[i + 3 * j] for j in range(3)] for i in range(3)]
    J = det3(Fm)
    lnJ = J.log()
    I1 = jet_sum(f * f for f in Fv)
    return 0.5 * K * lnJ * lnJ + 0.5 * mu * (J ** (-2.0 / 3.0) * I1 - 3.0), J


def _jet_solid(F, params):
    _check_J(np.linalg.det(F))
    Fv = Jet.variables(flatten2(F))
    psi, _ = _jet_neo_hookean(Fv, params.K, params.mu)
    return psi.val, psi.grad, psi.hessian()


def _jet_third_medium(F, gradF, params):
    _check_J(np.linalg.det(F))
    v = Jet.variables(np.concatenate([flatten2(F), flatten3(gradF)], axis=-1))
    Fv, Gv = v[:N_F], v[N_F:]
    psi_m, J = _jet_neo_hookean(Fv, params.K, params.mu)
    G = lambda i, j, k: Gv[i + 3 * j + 9 * k]
    scale = 0.5 * params.alpha_r * params.gamma
    if params.reg_kind is RegKind.FULL_GRADIENT:
        d = [jet_sum(G(i, j, j) for j in range(3)) for i in range(3)]
        reg = scale * (jet_sum(g * g for g in Gv) - jet_sum(di * di for di in d) / 3.0)
    else:
        skew = [0.5 * (G(i, j, k) - G(j, i, k))
                for i in range(3) for j in range(3) for k in range(3)]
        reg = scale * jet_sum(s * s for s in skew)
    psi = params.gamma * psi_m + reg + params.pbar * J
    hess = psi.hessian()
    return (psi.val, psi.grad[..., :N_F], psi.grad[..., N_F:],
            hess[..., :N_F, :N_F], hess[..., N_F:, :N_F], hess[..., N_F:, N_F:])


# Public responses

def solid_response(F, params, provider=DerivativeProvider.ANALYTIC):
    """Energy, PK1 and Chat of the Neo-Hookean solid; That is identically zero."""
    F = np.asarray(F, dtype=float)
    if DerivativeProvider(provider) is DerivativeProvider.DUAL:
        psi, Phat, Chat = _jet_solid(F, params)
    else:
        psi, Phat, Chat = _analytic_solid(F, params)
    That = np.zeros(F.shape[:-2] + (N_GRAD,))
    return MaterialResponse(psi=psi, Phat=Phat, That=That), Chat


def third_medium_response(state, params, provider=DerivativeProvider.ANALYTIC):
    """Energy, stresses and tangent blocks of the third medium at ``state``."""
    F = np.asarray(state.F, dtype=float)
    gradF = np.asarray(state.gradF, dtype=float)
    if DerivativeProvider(provider) is DerivativeProvider.DUAL:
        psi, Phat, That, Chat, Ahat, Bhat = _jet_third_medium(F, gradF, params)
    else:
        psi, Phat, That, Chat, Ahat, Bhat = _analytic_third_medium(F, gradF, params)
    return (MaterialResponse(psi=psi, Phat=Phat, That=That),
            TangentBlocks(Chat=Chat, Ahat=Ahat, Bhat=Bhat))


def cauchy_from_pk1(F, Phat):
    """sigma = P F^T / J."""
    F = np.asarray(F, dtype=float)
    J = np.linalg.det(F)
    _check_J(J)
    P = unflatten2(Phat)
    return np.einsum('...ik,...jk->...ij', P, F) / _expand(J, 2)


def fd_oracle(psi_fn, state, step=1e-6, hessian_step=1e-4):
    """
    Central finite differences of ``psi_fn(F, gradF)`` over the 36 entries of
    (F, gradF).

    ``psi_fn`` must accept batched arrays. Returns (Phat, That, Chat, Ahat,
    Bhat) for a single (unbatched) state; second derivatives use the
    four-point mixed stencil with ``hessian_step``.
    """
    x0 = np.concatenate([flatten2(np.asarray(state.F, dtype=float)),
                         flatten3(np.asarray(state.gradF, dtype=float))])
    eye = np.eye(N_VARS)

    def evaluate(X):
        try:
            vals = np.asarray(psi_fn(unflatten2(X[..., :N_F]), unflatten3(X[..., N_F:])), dtype=float)
        except BarrierViolation as exc:
            raise OracleError(f'Finite-difference stencil leaves the admissible set: {exc}') from exc
        bad = np.argwhere(~np.isfinite(vals))
        if len(bad):
            raise OracleError('Non-finite energy inside the finite-difference stencil',
                              entry=tuple(int(i) for i in bad[0]))
        return vals

    h = step
    plus = evaluate(x0 + h * eye)
    minus = evaluate(x0 - h * eye)
    grad = (plus - minus) / (2.0 * h)

    h = hessian_step
    dp = h * eye
    pp = evaluate(x0 + dp[:, None, :] + dp[None, :, :])
    pm = evaluate(x0 + dp[:, None, :] - dp[None, :, :])
    mp = evaluate(x0 - dp[:, None, :] + dp[None, :, :])
    mm = evaluate(x0 - dp[:, None, :] - dp[None, :, :])
    hess = (pp - pm - mp + mm) / (4.0 * h * h)
    hess = 0.5 * (hess + hess.T)

    return (grad[:N_F], grad[N_F:], hess[:N_F, :N_F], hess[N_F:, :N_F], hess[N_F:, N_F:])
