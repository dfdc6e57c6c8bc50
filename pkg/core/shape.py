"""
Q2S (20-node serendipity) hexahedron kernel.

Shape functions with first and second reference derivatives, the Jacobian
with its adjugate and the derivative of its inverse, shape derivatives with
respect to the reference configuration, and tensor-product Gauss rules.

Node order is the VTK_QUADRATIC_HEXAHEDRON order: corners 0-3 counterclockwise
on the bottom face, corners 4-7 on the top face, then the mid-edge nodes of
edges 0-1, 1-2, 2-3, 3-0, 4-5, 5-6, 6-7, 7-4, 0-4, 1-5, 2-6, 3-7.

All functions broadcast over leading axes of ``xi`` so a whole quadrature rule
can be evaluated in one call.
"""
from dataclasses import dataclass

import numpy as np

from .exceptions import InvertedElementError

N_NODES = 20

REF_TOL = 1e-12

NODE_XI = np.array([
    [-1, -1, -1], [1, -1, -1], [1, 1, -1], [-1, 1, -1],
    [-1, -1, 1], [1, -1, 1], [1, 1, 1], [-1, 1, 1],
    [0, -1, -1], [1, 0, -1], [0, 1, -1], [-1, 0, -1],
    [0, -1, 1], [1, 0, 1], [0, 1, 1], [-1, 0, 1],
    [-1, -1, 0], [1, -1, 0], [1, 1, 0], [-1, 1, 0],
], dtype=float)

# (a, b, c) cycles used for the mixed corner derivatives
_CYCLE = ((0, 1, 2), (1, 2, 0), (2, 0, 1))


@dataclass(frozen=True)
class ShapeEval:
    """Shape values and reference derivatives at one or more points."""
    N: np.ndarray          # (..., 20)
    dN_dxi: np.ndarray     # (..., 20, 3)
    d2N_dxi2: np.ndarray   # (..., 20, 3, 3)


@dataclass(frozen=True)
class JacobianData:
    """
    Reference-to-physical mapping data.

    ``G[i, k] = dX_k / dxi_i``; ``dGinv_dxi[i, k, l]`` is the derivative of
    ``Ginv[i, k]`` with respect to ``xi_l``.
    """
    G: np.ndarray
    detG: np.ndarray
    Gstar: np.ndarray
    Ginv: np.ndarray
    dGinv_dxi: np.ndarray


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray     # (n, 3)
    weights: np.ndarray    # (n,)
    points_per_axis: int

    def __len__(self):
        return len(self.weights)


def q2s_eval(xi):
    """Evaluate the 20 serendipity shape functions and their derivatives."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] != 3:
        raise ValueError(f'Reference coordinates must have 3 components, got shape {xi.shape}')
    if np.any(np.abs(xi) > 1.0 + REF_TOL):
        raise ValueError('Reference coordinates outside [-1, 1]^3')

    batch = xi.shape[:-1]
    N = np.empty(batch + (N_NODES,))
    dN = np.empty(batch + (N_NODES, 3))
    d2N = np.zeros(batch + (N_NODES, 3, 3))

    for I in range(8):
        r = NODE_XI[I]
        f = 1.0 + xi * r
        s = xi @ r - 2.0
        N[..., I] = f[..., 0] * f[..., 1] * f[..., 2] * s / 8.0
        for a, b, c in _CYCLE:
            Pa = f[..., b] * f[..., c]
            dN[..., I, a] = r[a] * Pa * (s + f[..., a]) / 8.0
            d2N[..., I, a, a] = Pa / 4.0
            mixed = r[a] * r[b] * f[..., c] * (s + f[..., a] + f[..., b]) / 8.0
            d2N[..., I, a, b] = mixed
            d2N[..., I, b, a] = mixed

    for I in range(8, N_NODES):
        r = NODE_XI[I]
        m = int(np.flatnonzero(r == 0.0)[0])
        p, q = (a for a in range(3) if a != m)
        xm = xi[..., m]
        bm = 1.0 - xm * xm
        fp = 1.0 + xi[..., p] * r[p]
        fq = 1.0 + xi[..., q] * r[q]

        N[..., I] = bm * fp * fq / 4.0
        dN[..., I, m] = -xm * fp * fq / 2.0
        dN[..., I, p] = bm * r[p] * fq / 4.0
        dN[..., I, q] = bm * fp * r[q] / 4.0

        d2N[..., I, m, m] = -fp * fq / 2.0
        d2N[..., I, m, p] = d2N[..., I, p, m] = -xm * r[p] * fq / 2.0
        d2N[..., I, m, q] = d2N[..., I, q, m] = -xm * fp * r[q] / 2.0
        d2N[..., I, p, q] = d2N[..., I, q, p] = bm * r[p] * r[q] / 4.0

    return ShapeEval(N=N, dN_dxi=dN, d2N_dxi2=d2N)


def gauss_rule(points_per_axis=3):
    """Tensor-product Gauss-Legendre rule on [-1, 1]^3, xi running fastest."""
    if points_per_axis not in (2, 3, 4):
        raise ValueError(f'Unsupported quadrature order: {points_per_axis} points per axis')
    g, w = np.polynomial.legendre.leggauss(points_per_axis)
    z, y, x = np.meshgrid(g, g, g, indexing='ij')
    wz, wy, wx = np.meshgrid(w, w, w, indexing='ij')
    points = np.stack([x.ravel(), y.ravel(), z.ravel()], axis=-1)
    weights = (wx * wy * wz).ravel()
    return QuadratureRule(points=points, weights=weights, points_per_axis=points_per_axis)


def adjugate(A):
    """Adjugate of (..., 3, 3) matrices: columns are cross products of rows."""
    a0, a1, a2 = A[..., 0, :], A[..., 1, :], A[..., 2, :]
    return np.stack([np.cross(a1, a2), np.cross(a2, a0), np.cross(a0, a1)], axis=-1)


def jacobian(element_coords, xi=None, element=None, shape=None):
    """
    Jacobian data at ``xi``; pass a precomputed ``shape`` to skip re-evaluation.

    The inverse derivative follows from differentiating G* and det(G):
    dGinv/dxi_l = dG*/dxi_l / |G| - d|G|/dxi_l * G* / |G|^2.
    """
    X = np.asarray(element_coords, dtype=float)
    sh = shape if shape is not None else q2s_eval(xi)

    G = np.einsum('...Ii,Ik->...ik', sh.dN_dxi, X)
    dG = np.einsum('...Iil,Ik->...ikl', sh.d2N_dxi2, X)
    Gstar = adjugate(G)
    detG = np.einsum('...k,...k->...', G[..., 0, :], Gstar[..., :, 0])

    if np.any(detG <= 0.0):
        raise InvertedElementError(np.min(detG), element=element)

    a0, a1, a2 = G[..., 0, :], G[..., 1, :], G[..., 2, :]
    da0, da1, da2 = dG[..., 0, :, :], dG[..., 1, :, :], dG[..., 2, :, :]
    dGstar = np.stack([
        np.cross(da1, a2[..., :, None], axis=-2) + np.cross(a1[..., :, None], da2, axis=-2),
        np.cross(da2, a0[..., :, None], axis=-2) + np.cross(a2[..., :, None], da0, axis=-2),
        np.cross(da0, a1[..., :, None], axis=-2) + np.cross(a0[..., :, None], da1, axis=-2),
    ], axis=-2)
    ddet = np.einsum('...ji,...ijl->...l', Gstar, dG)

    Ginv = Gstar / detG[..., None, None]
    dGinv = (dGstar / detG[..., None, None, None]
             - ddet[..., None, None, :] * Gstar[..., None] / (detG ** 2)[..., None, None, None])

    return JacobianData(G=G, detG=detG, Gstar=Gstar, Ginv=Ginv, dGinv_dxi=dGinv)


def physical_derivatives(element_coords, xi=None, element=None, shape=None, jac=None):
    """
    First and second shape derivatives with respect to reference coordinates X.

    Returns ``dN_dX`` (..., 20, 3) and ``d2N_dX2`` (..., 20, 3, 3); the Hessian
    is symmetrized over its two derivative indices.
    """
    sh = shape if shape is not None else q2s_eval(xi)
    jd = jac if jac is not None else jacobian(element_coords, element=element, shape=sh)

    dN_dX = np.einsum('...ik,...Ik->...Ii', jd.Ginv, sh.dN_dxi)
    term = (np.einsum('...ik,...Ilk->...Iil', jd.Ginv, sh.d2N_dxi2)
            + np.einsum('...Ik,...ikl->...Iil', sh.dN_dxi, jd.dGinv_dxi))
    d2N_dX2 = np.einsum('...Iil,...jl->...Iij', term, jd.Ginv)
    d2N_dX2 = 0.5 * (d2N_dX2 + np.swapaxes(d2N_dX2, -1, -2))
    return dN_dX, d2N_dX2
