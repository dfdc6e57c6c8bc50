"""
Mesh data model for 20-node hexahedral discretizations.

Contains:
- DomainTag (solid body or third medium, with an optional load group)
- Node, Hex20Element, Mesh (immutable after construction)
- validate_mesh (reference Jacobians, conformity, set integrity)
- locate_point (inverse isoparametric map for probes)
"""
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from types import MappingProxyType

import numpy as np

from .exceptions import ProbeError
from .shape import gauss_rule, q2s_eval

# Faces as (corner nodes, mid-edge nodes), outward normal by right-hand rule,
# and the reference axis/side each face lies on.
HEX20_FACES = (
    ((0, 3, 2, 1), (11, 10, 9, 8)),
    ((4, 5, 6, 7), (12, 13, 14, 15)),
    ((0, 1, 5, 4), (8, 17, 12, 16)),
    ((1, 2, 6, 5), (9, 18, 13, 17)),
    ((2, 3, 7, 6), (10, 19, 14, 18)),
    ((3, 0, 4, 7), (11, 16, 15, 19)),
)
FACE_AXIS_SIDE = ((2, -1.0), (2, 1.0), (1, -1.0), (0, 1.0), (1, 1.0), (0, -1.0))

HEX20_EDGES = (
    (0, 1, 8), (1, 2, 9), (2, 3, 10), (3, 0, 11),
    (4, 5, 12), (5, 6, 13), (6, 7, 14), (7, 4, 15),
    (0, 4, 16), (1, 5, 17), (2, 6, 18), (3, 7, 19),
)


class DomainKind(str, Enum):
    SOLID = 'solid'
    MEDIUM = 'medium'


@dataclass(frozen=True)
class DomainTag:
    """Solid body (with body id) or third medium (with load group name)."""
    kind: DomainKind
    body_id: int = 0
    group: str = 'cavity'

    @classmethod
    def solid(cls, body_id=0):
        return cls(DomainKind.SOLID, body_id=int(body_id), group='')

    @classmethod
    def medium(cls, group='cavity'):
        return cls(DomainKind.MEDIUM, body_id=-1, group=group)

    @property
    def is_medium(self):
        return self.kind is DomainKind.MEDIUM

    @property
    def token(self):
        if self.is_medium:
            return f'medium:{self.group}'
        return f'solid:{self.body_id}'

    @classmethod
    def from_token(cls, token):
        kind, _, rest = token.partition(':')
        if kind == DomainKind.SOLID.value:
            return cls.solid(int(rest or 0))
        if kind == DomainKind.MEDIUM.value:
            return cls.medium(rest or 'cavity')
        raise ValueError(f'Unknown domain tag "{token}"')

    def __str__(self):
        return self.token


@dataclass(frozen=True)
class Node:
    id: int
    X: tuple


@dataclass(frozen=True)
class Hex20Element:
    id: int
    nodes: tuple
    tag: DomainTag


@dataclass(frozen=True, eq=False)
class Mesh:
    """
    Nodes, Hex20 elements, and named node/side sets.

    Coordinates are stored as a read-only (n_nodes, 3) array; node ids are the
    row indices. Side sets hold (element id, face index) pairs.
    """
    coords: np.ndarray
    elements: tuple
    node_sets: dict = field(default_factory=dict)
    side_sets: dict = field(default_factory=dict)

    def __post_init__(self):
        coords = np.array(self.coords, dtype=float, copy=True).reshape(-1, 3)
        coords.setflags(write=False)
        object.__setattr__(self, 'coords', coords)
        object.__setattr__(self, 'elements', tuple(self.elements))
        object.__setattr__(self, 'node_sets', MappingProxyType(
            {name: tuple(int(i) for i in ids) for name, ids in self.node_sets.items()}))
        object.__setattr__(self, 'side_sets', MappingProxyType(
            {name: tuple((int(e), int(f)) for e, f in pairs) for name, pairs in self.side_sets.items()}))

    @property
    def n_nodes(self):
        return self.coords.shape[0]

    @property
    def n_elements(self):
        return len(self.elements)

    @property
    def nodes(self):
        return [Node(i, tuple(x)) for i, x in enumerate(self.coords)]

    def node(self, node_id):
        return Node(int(node_id), tuple(self.coords[node_id]))

    @cached_property
    def connectivity(self):
        conn = np.array([e.nodes for e in self.elements], dtype=np.int64).reshape(-1, 20)
        conn.setflags(write=False)
        return conn

    def element_coords(self, element_id):
        return self.coords[self.connectivity[element_id]]

    def medium_elements(self):
        return [e for e in self.elements if e.tag.is_medium]

    def solid_elements(self):
        return [e for e in self.elements if not e.tag.is_medium]

    def medium_groups(self):
        return sorted({e.tag.group for e in self.elements if e.tag.is_medium})


@dataclass
class MeshReport:
    """Outcome of validate_mesh; ``ok`` is False when any failure was recorded."""
    min_detG: np.ndarray
    inverted: list = field(default_factory=list)
    degenerate: list = field(default_factory=list)
    invalid_nodes: list = field(default_factory=list)
    orphan_nodes: list = field(default_factory=list)
    conforming: bool = True
    conformity_issues: list = field(default_factory=list)
    set_issues: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.failures

    @property
    def failures(self):
        messages = []
        for e in self.invalid_nodes:
            messages.append(f'element {e}: node id out of range')
        for e in self.degenerate:
            messages.append(f'element {e}: duplicated node in connectivity')
        for e in self.inverted:
            messages.append(f'element {e}: non-positive reference Jacobian '
                            f'(min det(G) = {self.min_detG[e]:.6g})')
        if self.orphan_nodes:
            messages.append(f'{len(self.orphan_nodes)} node(s) not used by any element, '
                            f'first {self.orphan_nodes[0]}')
        messages.extend(self.conformity_issues)
        messages.extend(self.set_issues)
        return messages

    @property
    def failed_elements(self):
        return sorted(set(self.invalid_nodes) | set(self.degenerate) | set(self.inverted))


def validate_mesh(mesh, points_per_axis=3):
    """Check reference Jacobians at every quadrature point, conformity, and sets."""
    n_nodes = mesh.n_nodes
    n_elem = mesh.n_elements
    conn = mesh.connectivity
    report = MeshReport(min_detG=np.full(n_elem, np.nan))

    valid = np.ones(n_elem, dtype=bool)
    for e, nodes in enumerate(conn):
        if np.any(nodes < 0) or np.any(nodes >= n_nodes):
            report.invalid_nodes.append(e)
            valid[e] = False
        elif len(set(nodes.tolist())) < 20:
            report.degenerate.append(e)

    if np.any(valid):
        rule = gauss_rule(points_per_axis)
        dN = q2s_eval(rule.points).dN_dxi
        X = mesh.coords[conn[valid]]
        G = np.einsum('qIi,eIk->eqik', dN, X)
        det = np.linalg.det(G).min(axis=1)
        report.min_detG[valid] = det
        report.inverted = [int(e) for e in np.flatnonzero(valid)[det <= 0.0]
                           if e not in report.degenerate]

    used = np.zeros(n_nodes, dtype=bool)
    used[conn[valid].ravel()] = True
    report.orphan_nodes = np.flatnonzero(~used).tolist()

    _check_conformity(mesh, conn, valid, report)
    _check_sets(mesh, report)
    return report


def _check_conformity(mesh, conn, valid, report):
    faces = defaultdict(list)
    edges = {}
    for e in np.flatnonzero(valid):
        nodes = conn[e]
        for f, (corners, mids) in enumerate(HEX20_FACES):
            key = tuple(sorted(nodes[list(corners)].tolist()))
            faces[key].append((int(e), f, tuple(sorted(nodes[list(mids)].tolist()))))
        for a, b, m in HEX20_EDGES:
            key = tuple(sorted((int(nodes[a]), int(nodes[b]))))
            mid = int(nodes[m])
            if edges.setdefault(key, mid) != mid:
                report.conformity_issues.append(
                    f'element {e}: edge {key} has mid node {mid}, neighbour uses {edges[key]}')

    for key, owners in faces.items():
        if len(owners) > 2:
            report.conformity_issues.append(
                f'face {key} shared by {len(owners)} elements: {[o[0] for o in owners]}')
        elif len(owners) == 2 and owners[0][2] != owners[1][2]:
            report.conformity_issues.append(
                f'elements {owners[0][0]} and {owners[1][0]} share face corners '
                f'{key} but not its mid nodes')

    used = np.unique(conn[valid].ravel())
    if used.size:
        X = mesh.coords[used]
        scale = max(float(np.ptp(X, axis=0).max()), 1.0)
        keys = np.round(X / (scale * 1e-9)).astype(np.int64)
        _, first, counts = np.unique(keys, axis=0, return_index=True, return_counts=True)
        for idx in first[counts > 1]:
            report.conformity_issues.append(
                f'node {int(used[idx])} coincides with another node (unmerged interface)')

    report.conforming = not report.conformity_issues


def locate_point(mesh, X, element_ids=None, tol=1e-10, max_iter=30):
    """
    Find (element id, xi) of the material point with reference coordinates X.

    Candidates are filtered by bounding box, then the isoparametric map is
    inverted by Newton iteration projected onto the reference cube. Elements
    are tried in id order so the result is deterministic on shared faces.
    """
    X = np.asarray(X, dtype=float)
    conn = mesh.connectivity
    ids = range(mesh.n_elements) if element_ids is None else sorted(element_ids)
    scale = max(float(np.ptp(mesh.coords, axis=0).max()), 1.0)
    slack = 1e-8 * scale
    for e in ids:
        Xe = mesh.coords[conn[e]]
        if np.any(X < Xe.min(axis=0) - slack) or np.any(X > Xe.max(axis=0) + slack):
            continue
        xi = np.zeros(3)
        for _ in range(max_iter):
            sh = q2s_eval(xi)
            r = sh.N @ Xe - X
            if np.linalg.norm(r) <= tol * scale:
                return e, xi
            G = sh.dN_dxi.T @ Xe
            try:
                xi = np.clip(xi - np.linalg.solve(G.T, r), -1.0, 1.0)
            except np.linalg.LinAlgError:
                break
    raise ProbeError(f'Point {tuple(X)} is not inside any candidate element')


def _check_sets(mesh, report):
    n_nodes = mesh.n_nodes
    n_elem = mesh.n_elements
    for name, ids in mesh.node_sets.items():
        bad = [i for i in ids if not 0 <= i < n_nodes]
        if bad:
            report.set_issues.append(f'node set "{name}": invalid node ids {bad[:5]}')
    for name, pairs in mesh.side_sets.items():
        bad = [(e, f) for e, f in pairs if not (0 <= e < n_elem and 0 <= f < 6)]
        if bad:
            report.set_issues.append(f'side set "{name}": invalid entries {bad[:5]}')
