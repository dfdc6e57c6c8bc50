"""
Element integration and global assembly.

Contains:
- BOperators / build_b_operators: placement of dN/dX and d2N/dX2 into the
  9x60 and 27x60 operators (element DOFs node-major: u_x, u_y, u_z per node)
- ElementKernel: per-element quadrature data computed once per mesh
- element_contribution: residual, tangent and energy of one element
- LoadGroup, MaterialSet: material parameters per domain tag and the
  pneumatic pressure of each third-medium load group
- DirichletBC, TractionBC, BoundaryConditions, DofMap
- Assembler / assemble: ordered sparse assembly with Dirichlet elimination
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import sparse

from .exceptions import BarrierViolation, SingularSystemError
from .material import (
    DerivativeProvider,
    KinematicState,
    solid_response,
    third_medium_response,
)
from .mesh import FACE_AXIS_SIDE, HEX20_FACES
from .shape import gauss_rule, jacobian, physical_derivatives, q2s_eval

logger = logging.getLogger(__name__)

N_EDOF = 60


@dataclass(frozen=True)
class BOperators:
    B1: np.ndarray   # (..., 9, 60)
    B2: np.ndarray   # (..., 27, 60)


def build_b_operators(dN_dX, d2N_dX2):
    """Row ``i + 3j`` of B1 holds dN_I/dX_j in column 3I + i; row ``i + 3j + 9k`` of B2 holds d2N_I/dX_j dX_k."""
    dN_dX = np.asarray(dN_dX, dtype=float)
    d2N_dX2 = np.asarray(d2N_dX2, dtype=float)
    batch = dN_dX.shape[:-2]
    B1 = np.zeros(batch + (9, N_EDOF))
    B2 = np.zeros(batch + (27, N_EDOF))
    for i in range(3):
        for j in range(3):
            B1[..., i + 3 * j, i::3] = dN_dX[..., :, j]
            for k in range(3):
                B2[..., i + 3 * j + 9 * k, i::3] = d2N_dX2[..., :, j, k]
    return BOperators(B1=B1, B2=B2)


@dataclass(frozen=True)
class ElementContribution:
    residual: np.ndarray
    tangent: np.ndarray
    energy: float


@dataclass(frozen=True)
class ElementKernel:
    """Quadrature data of one element in the reference configuration."""
    element: int
    medium: bool
    wdet: np.ndarray       # (nq,) weight * det(G)
    dN_dX: np.ndarray      # (nq, 20, 3)
    d2N_dX2: np.ndarray    # (nq, 20, 3, 3)

    @classmethod
    def build(cls, element_coords, rule, medium, element=None, shape=None):
        sh = shape if shape is not None else q2s_eval(rule.points)
        jac = jacobian(element_coords, element=element, shape=sh)
        dN_dX, d2N_dX2 = physical_derivatives(element_coords, shape=sh, jac=jac)
        return cls(element=element, medium=medium, wdet=rule.weights * jac.detG,
                   dN_dX=dN_dX, d2N_dX2=d2N_dX2)

    @property
    def volume(self):
        return float(self.wdet.sum())

    def operators(self):
        return build_b_operators(self.dN_dX, self.d2N_dX2)

    def kinematics(self, u_e):
        u = np.asarray(u_e, dtype=float).reshape(20, 3)
        F = np.eye(3) + np.einsum('Ii,qIj->qij', u, self.dN_dX)
        gradF = np.einsum('Ii,qIjk->qijk', u, self.d2N_dX2)
        return KinematicState(F=F, gradF=gradF, J=np.linalg.det(F))


def element_contribution(kernel, u_e, params, provider=DerivativeProvider.ANALYTIC, need_tangent=True):
    """
    Residual B1^T Phat + B2^T That and the consistent tangent, integrated over
    the quadrature points of ``kernel``. Solid elements use only the B1 parts.
    """
    state = kernel.kinematics(u_e)
    ops = kernel.operators()
    w = kernel.wdet
    try:
        if kernel.medium:
            resp, blocks = third_medium_response(state, params, provider)
        else:
            resp, Chat = solid_response(state.F, params, provider)
    except BarrierViolation as exc:
        raise BarrierViolation(exc.J, element=kernel.element, qp=exc.qp) from exc

    residual = np.einsum('q,qra,qr->a', w, ops.B1, resp.Phat)
    energy = float(np.dot(w, resp.psi))
    if kernel.medium:
        residual = residual + np.einsum('q,qra,qr->a', w, ops.B2, resp.That)

    tangent = None
    if need_tangent:
        if kernel.medium:
            C = np.einsum('q,qrs->qrs', w, blocks.Chat)
            A = np.einsum('q,qrs->qrs', w, blocks.Ahat)
            B = np.einsum('q,qrs->qrs', w, blocks.Bhat)
            cross = np.einsum('qra,qrs,qsb->ab', ops.B2, A, ops.B1, optimize=True)
            tangent = (np.einsum('qra,qrs,qsb->ab', ops.B1, C, ops.B1, optimize=True)
                       + cross + cross.T
                       + np.einsum('qra,qrs,qsb->ab', ops.B2, B, ops.B2, optimize=True))
        else:
            C = np.einsum('q,qrs->qrs', w, Chat)
            tangent = np.einsum('qra,qrs,qsb->ab', ops.B1, C, ops.B1, optimize=True)
        tangent = 0.5 * (tangent + tangent.T)
    return ElementContribution(residual=residual, tangent=tangent, energy=energy)


@dataclass(frozen=True)
class LoadGroup:
    """Pneumatic pressure of one third-medium group, ramped over [start, end] in lambda."""
    name: str
    pbar: float = 0.0
    start: float = 0.0
    end: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.start < self.end <= 1.0):
            raise ValueError(f'Load group "{self.name}": ramp window must satisfy 0 <= start < end <= 1')

    def factor(self, lam):
        return float(np.clip((float(lam) - self.start) / (self.end - self.start), 0.0, 1.0))


@dataclass(frozen=True)
class MaterialSet:
    """Solid parameters per body id, one third-medium parameter set, and load groups."""
    solids: dict
    medium: object = None
    groups: dict = field(default_factory=dict)
    provider: DerivativeProvider = DerivativeProvider.ANALYTIC

    def params_for(self, tag, lam):
        if tag.is_medium:
            if self.medium is None:
                raise ValueError('Mesh has third-medium elements but no third-medium parameters were given')
            group = self.groups.get(tag.group)
            pbar = group.pbar * group.factor(lam) if group is not None else 0.0
            return self.medium.with_pressure(pbar)
        try:
            return self.solids[tag.body_id]
        except KeyError:
            raise ValueError(f'No material parameters for solid body {tag.body_id}') from None


class DirichletKind(str, Enum):
    FIXED = 'fixed'
    ROTATION = 'rotation'


@dataclass(frozen=True)
class DirichletBC:
    """
    Prescribed displacement on a node set at full load, ramped linearly by lambda.

    ``fixed``: ``value`` on each listed component. ``rotation``: rigid rotation
    by ``angle`` (radians) about ``axis`` through ``center``.
    """
    node_set: str
    components: tuple = (0, 1, 2)
    value: float = 0.0
    kind: DirichletKind = DirichletKind.FIXED
    axis: tuple = (1.0, 0.0, 0.0)
    center: tuple = (0.0, 0.0, 0.0)
    angle: float = 0.0

    def displacements(self, X, lam):
        """(n, 3) displacement of reference points X at load factor lam."""
        X = np.asarray(X, dtype=float)
        if DirichletKind(self.kind) is DirichletKind.ROTATION:
            return rotation_displacement(X, self.axis, self.center, float(lam) * self.angle)
        return np.full(X.shape, float(lam) * self.value)


def rotation_displacement(X, axis, center, angle):
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    K = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    R = np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * K @ K
    r = X - np.asarray(center, dtype=float)
    return r @ R.T - r


@dataclass(frozen=True)
class TractionBC:
    side_set: str
    traction: tuple


@dataclass(frozen=True)
class BoundaryConditions:
    dirichlet: tuple = ()
    tractions: tuple = ()
    body_force: tuple = None

    def prescribed(self, mesh, lam):
        """Sorted constrained dofs and their values at lam; conflicting values raise ValueError."""
        values = {}
        for bc in self.dirichlet:
            if bc.node_set not in mesh.node_sets:
                raise ValueError(f'Unknown node set "{bc.node_set}"')
            nodes = np.asarray(mesh.node_sets[bc.node_set], dtype=np.int64)
            if nodes.size == 0:
                continue
            disp = bc.displacements(mesh.coords[nodes], lam)
            for c in bc.components:
                for node, v in zip(nodes.tolist(), disp[:, c].tolist()):
                    dof = 3 * node + int(c)
                    old = values.setdefault(dof, v)
                    if abs(old - v) > 1e-12 * max(1.0, abs(old), abs(v)):
                        raise ValueError(f'Conflicting Dirichlet values on node {node} component {c}: {old} vs {v}')
        dofs = np.array(sorted(values), dtype=np.int64)
        return dofs, np.array([values[d] for d in dofs.tolist()], dtype=float)


class DofMap:
    """Node-major global numbering (3 dofs per node) with a free/constrained split."""

    def __init__(self, n_nodes, constrained):
        self.n_nodes = n_nodes
        self.n_dofs = 3 * n_nodes
        self.constrained = np.unique(np.asarray(constrained, dtype=np.int64))
        mask = np.ones(self.n_dofs, dtype=bool)
        mask[self.constrained] = False
        self.free = np.flatnonzero(mask)
        self.free_index = np.full(self.n_dofs, -1, dtype=np.int64)
        self.free_index[self.free] = np.arange(self.free.size)

    def dof(self, node, component):
        return 3 * int(node) + int(component)

    def element_dofs(self, nodes):
        nodes = np.asarray(nodes, dtype=np.int64)
        return (3 * nodes[..., :, None] + np.arange(3)).reshape(nodes.shape[:-1] + (3 * nodes.shape[-1],))


@dataclass
class GlobalSystem:
    """Reduced tangent and residual over free dofs, with the coupling block to constrained dofs."""
    K: sparse.csr_matrix
    R: np.ndarray
    K_fc: sparse.csr_matrix
    reactions: np.ndarray
    energy: float


class Assembler:
    """
    Assembles a mesh with fixed materials and boundary conditions.

    Element kernels, the sparsity pattern and the external load vector are
    built once; ``system(u, lam)`` then evaluates elements (concurrently when
    ``workers`` > 1) and merges them in element order.
    """

    def __init__(self, mesh, materials, bcs=None, points_per_axis=3, workers=1):
        self.mesh = mesh
        self.materials = materials
        self.bcs = bcs or BoundaryConditions()
        self.rule = gauss_rule(points_per_axis)
        self.workers = max(1, int(workers))

        shape = q2s_eval(self.rule.points)
        conn = mesh.connectivity
        self.kernels = [
            ElementKernel.build(mesh.coords[conn[e.id]], self.rule, e.tag.is_medium, element=e.id, shape=shape)
            for e in mesh.elements
        ]

        constrained, _ = self.bcs.prescribed(mesh, 1.0)
        self.dofmap = DofMap(mesh.n_nodes, constrained)
        self._check_isolated_nodes()

        self.edofs = self.dofmap.element_dofs(conn)
        rows = np.repeat(self.edofs, N_EDOF, axis=1).ravel()
        cols = np.tile(self.edofs, (1, N_EDOF)).ravel()
        n = self.dofmap.n_dofs
        keys, self._scatter = np.unique(rows * n + cols, return_inverse=True)
        self._pattern_rows = keys // n
        self._pattern_cols = keys % n
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, self._pattern_rows + 1, 1)
        self._indptr = np.cumsum(indptr)

        self.f_ext = self._external_load()

    def _check_isolated_nodes(self):
        used = np.zeros(self.mesh.n_nodes, dtype=bool)
        used[self.mesh.connectivity.ravel()] = True
        for node in np.flatnonzero(~used):
            dofs = 3 * node + np.arange(3)
            if np.any(self.dofmap.free_index[dofs] >= 0):
                raise SingularSystemError(f'Node {node} is not attached to any element', dof=int(dofs[0]))

    def _external_load(self):
        f = np.zeros(self.dofmap.n_dofs)
        conn = self.mesh.connectivity
        for bc in self.bcs.tractions:
            t = np.asarray(bc.traction, dtype=float)
            for e, face in self.mesh.side_sets[bc.side_set]:
                fe = face_load(self.mesh.coords[conn[e]], face, t)
                np.add.at(f, self.edofs[e], fe)
        if self.bcs.body_force is not None:
            b = np.asarray(self.bcs.body_force, dtype=float)
            N = q2s_eval(self.rule.points).N
            for e, kernel in enumerate(self.kernels):
                fe = np.einsum('q,qI,i->Ii', kernel.wdet, N, b).ravel()
                np.add.at(f, self.edofs[e], fe)
        return f

    def prescribed(self, lam):
        return self.bcs.prescribed(self.mesh, lam)

    def element_contributions(self, u, lam, need_tangent=True):
        u = np.asarray(u, dtype=float)
        provider = self.materials.provider
        elements = self.mesh.elements

        def evaluate(e):
            params = self.materials.params_for(elements[e].tag, lam)
            return element_contribution(self.kernels[e], u[self.edofs[e]], params, provider, need_tangent)

        indices = range(len(self.kernels))
        if self.workers == 1:
            return [evaluate(e) for e in indices]
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            return list(pool.map(evaluate, indices))

    def residual_vector(self, contributions, lam):
        r = np.zeros(self.dofmap.n_dofs)
        for e, c in enumerate(contributions):
            np.add.at(r, self.edofs[e], c.residual)
        return r - float(lam) * self.f_ext

    def energy(self, u, lam, contributions=None):
        """Total potential: stored energy minus work of the scaled external load."""
        contributions = contributions or self.element_contributions(u, lam, need_tangent=False)
        stored = sum(c.energy for c in contributions)
        return stored - float(lam) * float(np.dot(self.f_ext, u))

    def full_residual(self, u, lam):
        return self.residual_vector(self.element_contributions(u, lam, need_tangent=False), lam)

    def system(self, u, lam):
        """GlobalSystem at displacement ``u`` (all dofs) and load factor ``lam``."""
        contributions = self.element_contributions(u, lam)
        r = self.residual_vector(contributions, lam)
        values = np.concatenate([c.tangent.ravel() for c in contributions])
        data = np.bincount(self._scatter, weights=values, minlength=self._pattern_rows.size)
        n = self.dofmap.n_dofs
        K = sparse.csr_matrix((data, self._pattern_cols, self._indptr), shape=(n, n))
        free, con = self.dofmap.free, self.dofmap.constrained
        K_free = K[free]
        return GlobalSystem(
            K=K_free[:, free].tocsr(),
            R=r[free],
            K_fc=K_free[:, con].tocsr(),
            reactions=r[con],
            energy=self.energy(u, lam, contributions),
        )


def face_load(element_coords, face, traction, points_per_axis=3):
    """Consistent nodal forces (60,) of a constant traction on one element face."""
    axis, side = FACE_AXIS_SIDE[face]
    g, w = np.polynomial.legendre.leggauss(points_per_axis)
    p, q = (a for a in range(3) if a != axis)
    a, b = np.meshgrid(g, g, indexing='ij')
    wa, wb = np.meshgrid(w, w, indexing='ij')
    xi = np.zeros((a.size, 3))
    xi[:, axis] = side
    xi[:, p] = a.ravel()
    xi[:, q] = b.ravel()
    sh = q2s_eval(xi)
    G = np.einsum('nIi,Ik->nik', sh.dN_dxi, np.asarray(element_coords, dtype=float))
    dA = np.linalg.norm(np.cross(G[:, p], G[:, q]), axis=-1) * (wa * wb).ravel()
    return np.einsum('n,nI,i->Ii', dA, sh.N, np.asarray(traction, dtype=float)).ravel()


def assemble(mesh, displacements, materials, bcs, load_factor, points_per_axis=3):
    """One-shot assembly; build an Assembler directly to reuse the pattern across iterations."""
    return Assembler(mesh, materials, bcs, points_per_axis=points_per_axis).system(
        np.asarray(displacements, dtype=float).ravel(), load_factor)


def total_energy(mesh, displacements, materials, bcs, load_factor, points_per_axis=3):
    assembler = Assembler(mesh, materials, bcs, points_per_axis=points_per_axis)
    return assembler.energy(np.asarray(displacements, dtype=float).ravel(), load_factor)
