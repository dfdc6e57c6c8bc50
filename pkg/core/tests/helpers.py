"""Small meshes and random states shared by the test modules."""
import numpy as np

from core.mesh import DomainTag, Hex20Element, Mesh
from core.scenarios import grid_lines, structured_hex20
from core.shape import NODE_XI


def cube_coords(size=1.0, origin=(0.0, 0.0, 0.0)):
    """Node coordinates of an axis-aligned cube element in Hex20 order."""
    return np.asarray(origin, dtype=float) + 0.5 * size * (NODE_XI + 1.0)


def curved_coords(seed=0, amplitude=0.08):
    """Unit cube with perturbed mid-edge nodes (curved edges, positive Jacobian)."""
    rng = np.random.default_rng(seed)
    X = cube_coords()
    X[8:] += amplitude * rng.uniform(-1.0, 1.0, size=(12, 3))
    return X


def single_element_mesh(tag=None, coords=None, node_sets=None):
    X = cube_coords() if coords is None else coords
    element = Hex20Element(id=0, nodes=tuple(range(20)), tag=tag or DomainTag.solid(0))
    return Mesh(coords=X, elements=[element], node_sets=node_sets or {})


def block_mesh(nx=2, ny=1, nz=1, size=(2.0, 1.0, 1.0), tag=None):
    """Structured block of one domain with face node sets xmin..zmax."""
    tag = tag or DomainTag.solid(0)
    xs = grid_lines((0.0, size[0], nx))
    ys = grid_lines((0.0, size[1], ny))
    zs = grid_lines((0.0, size[2], nz))
    coords, elements, side_sets = structured_hex20(xs, ys, zs, lambda c: tag)
    node_sets = {}
    for axis, name in enumerate('xyz'):
        node_sets[f'{name}min'] = np.flatnonzero(np.isclose(coords[:, axis], 0.0)).tolist()
        node_sets[f'{name}max'] = np.flatnonzero(np.isclose(coords[:, axis], size[axis])).tolist()
    return Mesh(coords=coords, elements=elements, node_sets=node_sets, side_sets=side_sets)


def random_F(rng, spread=0.25, J_range=(0.5, 2.0)):
    while True:
        F = np.eye(3) + spread * rng.standard_normal((3, 3))
        J = np.linalg.det(F)
        if J_range[0] <= J <= J_range[1]:
            return F


def random_gradF(rng, norm_range=(0.2, 1.0)):
    G = rng.standard_normal((3, 3, 3))
    return G / np.linalg.norm(G) * rng.uniform(*norm_range)


def relative_error(actual, expected):
    scale = max(float(np.linalg.norm(expected)), np.finfo(float).tiny)
    return float(np.linalg.norm(np.asarray(actual) - np.asarray(expected))) / scale
