"""
Post-processing of converged states.

Contains:
- von_mises
- GapProbe / gap_measure (distance between two material points)
- SeparationGauge / separations / check_separation (interpenetration of facing surfaces)
- FieldOutput / field_output (element-averaged von Mises, min J, tags)
- cavity_volume (current volume of third-medium groups)
"""
from dataclasses import dataclass

import numpy as np

from .exceptions import InterpenetrationError, ProbeError
from .material import cauchy_from_pk1, solid_response, third_medium_response
from .mesh import locate_point
from .shape import q2s_eval

SYMMETRY_TOL = 1e-8

def von_mises(sigma, sym_tol=SYMMETRY_TOL):
    """sqrt(3/2 s:s) of the deviator; inputs may be batched (..., 3, 3)."""
    sigma = np.asarray(sigma, dtype=float)
    skew = sigma - np.swapaxes(sigma, -1, -2)
    size = np.linalg.norm(sigma, axis=(-2, -1))
    if np.any(np.linalg.norm(skew, axis=(-2, -1)) > sym_tol * np.maximum(size, np.finfo(float).tiny)):
        raise ValueError('Stress tensor is not symmetric')
    sigma = 0.5 * (sigma + np.swapaxes(sigma, -1, -2))
    trace = np.trace(sigma, axis1=-2, axis2=-1)
    s = sigma - (trace / 3.0)[..., None, None] * np.eye(3)
    return np.sqrt(1.5 * np.einsum('...ij,...ij->...', s, s))

def locate_on_solid(mesh, X):
    """locate_point, trying solid elements first so surface points land on the body."""
    solids = [e.id for e in mesh.solid_elements()]
    if solids:
        try:
            return locate_point(mesh, X, element_ids=solids)
        except ProbeError:
            pass
    return locate_point(mesh, X)

def _material(element, xi):
    return int(element), tuple(float(v) for v in xi)

@dataclass(frozen=True)
class GapProbe:
    """Two material points given as (element id, reference coordinate)."""
    point_a: tuple
    point_b: tuple
    name: str = 'gap'

    @classmethod
    def from_points(cls, mesh, X_a, X_b, name='gap'):
        """Locate reference points, preferring solid elements so the probe sits on the body surface."""
        return cls(_material(*locate_on_solid(mesh, X_a)), _material(*locate_on_solid(mesh, X_b)), name=name)

def material_point(mesh, u, point):
    """Current position of a material point for displacement ``u`` (flat or (n, 3))."""
    element, xi = point
    if not 0 <= element < mesh.n_elements:
        raise ProbeError(f'Probe element {element} does not exist')
    nodes = mesh.connectivity[element]
    N = q2s_eval(np.asarray(xi, dtype=float)).N
    U = np.asarray(u, dtype=float).reshape(-1, 3)
    return N @ (mesh.coords[nodes] + U[nodes])

def gap_measure(mesh, u, probe):
    return float(np.linalg.norm(material_point(mesh, u, probe.point_b) - material_point(mesh, u, probe.point_a)))

@dataclass(frozen=True)
class SeparationGauge:
    """
    Pairs of material points on two facing surfaces.

    ``direction`` is the unit vector from side a towards side b in the
    reference state. The signed separation of a pair is the projection of
    x_b - x_a on it, so a negative value means side b has passed through
    side a.
    """
    pairs: tuple
    direction: tuple

    @classmethod
    def from_points(cls, mesh, points_a, points_b, direction):
        if len(points_a) != len(points_b) or not len(points_a):
            raise ProbeError('Separation gauge needs the same non-zero number of points on both sides')
        n = np.asarray(direction, dtype=float)
        norm = np.linalg.norm(n)
        if not norm > 0:
            raise ProbeError('Separation gauge direction must be non-zero')
        pairs = tuple(
            (_material(*locate_on_solid(mesh, np.asarray(a, dtype=float))),
             _material(*locate_on_solid(mesh, np.asarray(b, dtype=float))))
            for a, b in zip(points_a, points_b)
        )
        return cls(pairs, tuple(float(v) for v in n / norm))

def separations(mesh, u, gauge):
    """Signed separation of every gauge pair in the state ``u``."""
    n = np.asarray(gauge.direction)
    return np.array([float(np.dot(material_point(mesh, u, b) - material_point(mesh, u, a), n))
                     for a, b in gauge.pairs])

def check_separation(mesh, u, gauge, tol=0.0):
    """Smallest separation; raises InterpenetrationError when it is below ``-tol``."""
    values = separations(mesh, u, gauge)
    sample = int(np.argmin(values))
    if values[sample] < -tol:
        raise InterpenetrationError(values[sample], sample=sample)
    return float(values[sample])

@dataclass(frozen=True)
class FieldOutput:
    displacement: np.ndarray   # (n_nodes, 3)
    von_mises: np.ndarray      # (n_elements,) quadrature average of Cauchy von Mises
    j_min: np.ndarray          # (n_elements,)
    domain_tag: np.ndarray     # body id for solids, -1 for third medium
    solid_mask: np.ndarray     # 1 for solid elements

def field_output(assembler, u, lam):
    """Element fields of state ``u`` at load factor ``lam``."""
    mesh = assembler.mesh
    materials = assembler.materials
    u = np.asarray(u, dtype=float)
    vm = np.zeros(mesh.n_elements)
    j_min = np.zeros(mesh.n_elements)
    for e, kernel in enumerate(assembler.kernels):
        tag = mesh.elements[e].tag
        state = kernel.kinematics(u[assembler.edofs[e]])
        params = materials.params_for(tag, lam)
        if kernel.medium:
            resp, _ = third_medium_response(state, params, materials.provider)
        else:
            resp, _ = solid_response(state.F, params, materials.provider)
        sigma = cauchy_from_pk1(state.F, resp.Phat)
        vm[e] = np.dot(kernel.wdet, von_mises(sigma, sym_tol=1e-6)) / kernel.wdet.sum()
        j_min[e] = state.J.min()
    tags = np.array([-1 if el.tag.is_medium else el.tag.body_id for el in mesh.elements], dtype=np.int64)
    return FieldOutput(displacement=u.reshape(-1, 3), von_mises=vm, j_min=j_min,
                       domain_tag=tags, solid_mask=(tags >= 0).astype(np.int64))

def cavity_volume(assembler, u, groups=None):
    """Current volume of third-medium elements, optionally restricted to some groups."""
    mesh = assembler.mesh
    u = np.asarray(u, dtype=float)
    total = 0.0
    for e, kernel in enumerate(assembler.kernels):
        tag = mesh.elements[e].tag
        if not kernel.medium or (groups is not None and tag.group not in groups):
            continue
        total += float(np.dot(kernel.wdet, kernel.kinematics(u[assembler.edofs[e]]).J))
    return total

def min_jacobian(assembler, u):
    u = np.asarray(u, dtype=float)
    return min(float(k.kinematics(u[assembler.edofs[e]]).J.min()) for e, k in enumerate(assembler.kernels))
