"""
Benchmark scenario builders.

Every builder produces a conforming Hex20 mesh on a structured grid: solid
cells carry ``DomainTag.solid(body)``, third-medium cells carry
``DomainTag.medium(group)``. Builders are deterministic and name their node
sets so that scenario configs can attach boundary conditions symbolically.

Contains:
- structured_hex20 (shared grid generator with optional warp)
- build_box_self_contact, build_pneumatic_box
- build_rotating_box, build_punch, build_soft_actuator
- SCENARIOS registry with default gap probe points and facing surfaces
"""
from dataclasses import dataclass

import numpy as np

from .mesh import DomainTag, Hex20Element, Mesh

_CORNER_OFFSETS = ((0, 0, 0), (2, 0, 0), (2, 2, 0), (0, 2, 0),
                   (0, 0, 2), (2, 0, 2), (2, 2, 2), (0, 2, 2))
_MID_OFFSETS = ((1, 0, 0), (2, 1, 0), (1, 2, 0), (0, 1, 0),
                (1, 0, 2), (2, 1, 2), (1, 2, 2), (0, 1, 2),
                (0, 0, 1), (2, 0, 1), (2, 2, 1), (0, 2, 1))
_OFFSETS = np.array(_CORNER_OFFSETS + _MID_OFFSETS)


def grid_lines(*segments):
    """Concatenate (start, end, n) segments into one increasing array of grid lines."""
    lines = []
    for start, end, n in segments:
        if int(n) < 1:
            raise ValueError('Zero subdivisions: every segment needs at least one element')
        if not end > start:
            raise ValueError(f'Empty segment [{start}, {end}]')
        pts = np.linspace(start, end, int(n) + 1)
        lines.extend(pts[1:] if lines else pts)
    return np.array(lines)


def _lattice(lines):
    lat = np.empty(2 * len(lines) - 1)
    lat[0::2] = lines
    lat[1::2] = 0.5 * (lines[:-1] + lines[1:])
    return lat


def structured_hex20(xs, ys, zs, classify, warp=None):
    """
    Hex20 mesh of the grid spanned by ``xs``, ``ys``, ``zs``.

    ``classify(center)`` returns the DomainTag of a cell or None to leave it
    empty. ``warp`` maps the (n, 3) node array to new coordinates. Node ids
    run x fastest, then y, then z; elements follow the same cell order.
    Side sets ``xmin`` .. ``zmax`` collect faces on the grid bounding box.
    """
    xs, ys, zs = (np.asarray(v, dtype=float) for v in (xs, ys, zs))
    nx, ny, nz = len(xs) - 1, len(ys) - 1, len(zs) - 1
    lx, ly, lz = _lattice(xs), _lattice(ys), _lattice(zs)

    cells = []
    for k in range(nz):
        for j in range(ny):
            for i in range(nx):
                center = np.array([0.5 * (xs[i] + xs[i + 1]),
                                   0.5 * (ys[j] + ys[j + 1]),
                                   0.5 * (zs[k] + zs[k + 1])])
                tag = classify(center)
                if tag is not None:
                    cells.append(((i, j, k), tag))

    used = np.zeros((2 * nz + 1, 2 * ny + 1, 2 * nx + 1), dtype=bool)
    for (i, j, k), _ in cells:
        base = np.array([2 * i, 2 * j, 2 * k])
        for a, b, c in base + _OFFSETS:
            used[c, b, a] = True

    node_id = np.full(used.shape, -1, dtype=np.int64)
    flat = np.flatnonzero(used.ravel())
    node_id.ravel()[flat] = np.arange(flat.size)
    c, b, a = np.unravel_index(flat, used.shape)
    coords = np.stack([lx[a], ly[b], lz[c]], axis=-1)

    elements = []
    side_sets = {name: [] for name in ('xmin', 'xmax', 'ymin', 'ymax', 'zmin', 'zmax')}
    for e, ((i, j, k), tag) in enumerate(cells):
        base = np.array([2 * i, 2 * j, 2 * k])
        nodes = tuple(int(node_id[c, b, a]) for a, b, c in base + _OFFSETS)
        elements.append(Hex20Element(id=e, nodes=nodes, tag=tag))
        for name, hit, face in (('xmin', i == 0, 5), ('xmax', i == nx - 1, 3),
                                ('ymin', j == 0, 2), ('ymax', j == ny - 1, 4),
                                ('zmin', k == 0, 0), ('zmax', k == nz - 1, 1)):
            if hit:
                side_sets[name].append((e, face))

    if warp is not None:
        coords = np.asarray(warp(coords), dtype=float)
    return coords, elements, side_sets


def nodes_where(mask):
    return np.flatnonzero(mask).tolist()


def _near(values, target, scale):
    return np.abs(values - target) <= 1e-9 * scale


@dataclass(frozen=True)
class Scenario:
    """A builder plus the reference points of its default gap probe and facing surfaces."""
    name: str
    build: object
    probe: object = None
    surfaces: object = None


def build_box_self_contact(L=2.0, H=0.5, W=0.3, t=0.1, g0=None, nx=8, ny=2, nz=1,
                           n_wall=1, load_width=0.2, n_load=1, padding=0.0, n_pad=1):
    """
    Closed hollow box for the self-contact benchmark.

    Two plates of thickness ``t`` (y in [0, t] and [H - t, H]) are joined by
    webs at x in [0, t] and [L - t, L]. The cavity between the plates is third
    medium, as is an optional ``padding`` layer in front of and behind the box
    (z direction).

    The bottom face is supported only under the webs (``bottom_fixed``). With
    ``load_width > 0`` a strip of that width centred at x = L/2 gets its own
    grid lines and the top face of the strip is the node set ``top_load``;
    pushing it down presses the upper plate onto the lower plate around the
    mid-length while the lower plate is free to sag between the supports.
    ``nx`` cells span the cavity outside the strip (split evenly on both
    sides), ``ny``, ``nz`` subdivide the rest of the cavity and walls get
    ``n_wall`` layers.
    """
    for name, value in (('L', L), ('H', H), ('W', W), ('t', t)):
        if not value > 0:
            raise ValueError(f'{name} must be positive, got {value}')
    if not t < H / 2.0:
        raise ValueError(f'Inconsistent dimensions: t={t} must be smaller than H/2={H / 2.0}')
    if not 2.0 * t + load_width < L:
        raise ValueError(f'Inconsistent dimensions: 2t + load_width must be smaller than L={L}')
    if g0 is not None and abs(g0 - (H - 2.0 * t)) > 1e-12 * max(H, 1.0):
        raise ValueError(f'Inconsistent dimensions: g0={g0} but H - 2t = {H - 2.0 * t}')
    if padding < 0 or load_width < 0:
        raise ValueError('padding and load_width must be non-negative')

    x0, x1 = 0.5 * (L - load_width), 0.5 * (L + load_width)
    if load_width > 0:
        if nx % 2:
            raise ValueError(f'nx must be even when a load strip is used, got {nx}')
        cavity_x = [(t, x0, nx // 2), (x0, x1, n_load), (x1, L - t, nx // 2)]
    else:
        cavity_x = [(t, L - t, nx)]
    xs = grid_lines((0.0, t, n_wall), *cavity_x, (L - t, L, n_wall))
    ys = grid_lines((0.0, t, n_wall), (t, H - t, ny), (H - t, H, n_wall))
    z_segments = [(-W / 2.0, W / 2.0, nz)]
    if padding > 0:
        z_segments = [(-W / 2.0 - padding, -W / 2.0, n_pad)] + z_segments + [(W / 2.0, W / 2.0 + padding, n_pad)]
    zs = grid_lines(*z_segments)

    solid = DomainTag.solid(0)
    cavity = DomainTag.medium('cavity')

    def classify(c):
        x, y, z = c
        if abs(z) > W / 2.0:
            return cavity
        if y < t or y > H - t or x < t or x > L - t:
            return solid
        return cavity

    coords, elements, side_sets = structured_hex20(xs, ys, zs, classify)
    X, Y, Z = coords.T
    scale = max(L, H, W)
    eps = 1e-9 * scale
    inside_z = np.abs(Z) <= W / 2.0 + eps
    under_webs = (X <= t + eps) | (X >= L - t - eps)
    node_sets = {
        'bottom_fixed': nodes_where(_near(Y, 0.0, scale) & under_webs & inside_z),
        'front_back_z': nodes_where(_near(np.abs(Z), W / 2.0, scale)),
        'left_end': nodes_where(_near(X, 0.0, scale)),
        'right_end': nodes_where(_near(X, L, scale)),
    }
    if load_width > 0:
        node_sets['top_load'] = nodes_where(_near(Y, H, scale) & (X >= x0 - eps) & (X <= x1 + eps) & inside_z)
    return Mesh(coords=coords, elements=elements, node_sets=node_sets, side_sets=side_sets)


def box_probe_points(L=2.0, H=0.5, W=0.3, t=0.1, **_):
    """Mid-length points of the lower and upper inner plate surfaces."""
    return (0.5 * L, t, 0.0), (0.5 * L, H - t, 0.0)


def box_surface_points(L=2.0, H=0.5, W=0.3, t=0.1, n_samples=9, **_):
    """Facing points on the lower and upper inner plate surfaces; the plates close along +y."""
    xs = np.linspace(t, L - t, n_samples + 2)[1:-1]
    lower = [(x, t, 0.0) for x in xs]
    upper = [(x, H - t, 0.0) for x in xs]
    return lower, upper, (0.0, 1.0, 0.0)


def build_pneumatic_box(L=1.0, H=1.0, W=1.0, t=0.5, nx=2, ny=2, nz=2, one_eighth=True, n_wall=1):
    """
    Cube-shaped box with a third-medium filled cavity, given by half lengths.

    The 1/8 model covers [0, L] x [0, H] x [0, W] with symmetry node sets
    ``sym_x``, ``sym_y``, ``sym_z`` on the coordinate planes. The full model
    mirrors it to [-L, L] x [-H, H] x [-W, W] and exposes the same planes as
    ``mid_x``, ``mid_y``, ``mid_z``. The load group of the cavity is
    ``cavity``.
    """
    for name, value in (('L', L), ('H', H), ('W', W), ('t', t)):
        if not value > 0:
            raise ValueError(f'{name} must be positive, got {value}')
    if not t < min(L, H, W):
        raise ValueError(f'Inconsistent dimensions: t={t} must be smaller than min(L, H, W)')

    def axis(half, n):
        if one_eighth:
            return grid_lines((0.0, half - t, n), (half - t, half, n_wall))
        return grid_lines((-half, -half + t, n_wall), (-half + t, 0.0, n), (0.0, half - t, n), (half - t, half, n_wall))

    xs, ys, zs = axis(L, nx), axis(H, ny), axis(W, nz)
    solid = DomainTag.solid(0)
    cavity = DomainTag.medium('cavity')

    def classify(c):
        x, y, z = np.abs(c)
        if x < L - t and y < H - t and z < W - t:
            return cavity
        return solid

    coords, elements, side_sets = structured_hex20(xs, ys, zs, classify)
    X, Y, Z = coords.T
    scale = max(L, H, W)
    prefix = 'sym' if one_eighth else 'mid'
    node_sets = {
        f'{prefix}_x': nodes_where(_near(X, 0.0, scale)),
        f'{prefix}_y': nodes_where(_near(Y, 0.0, scale)),
        f'{prefix}_z': nodes_where(_near(Z, 0.0, scale)),
        'outer_x': nodes_where(_near(X, L, scale)),
    }
    return Mesh(coords=coords, elements=elements, node_sets=node_sets, side_sets=side_sets)


def pneumatic_probe_points(L=1.0, H=1.0, W=1.0, t=0.5, **_):
    """Outer and inner face midpoints on the x axis (wall thickness gauge)."""
    return (L - t, 0.0, 0.0), (L, 0.0, 0.0)


def pneumatic_surface_points(L=1.0, H=1.0, W=1.0, t=0.5, one_eighth=True, n_samples=3, **_):
    """Inner x wall against the symmetry plane (1/8 model) or the opposite wall, sampled along y."""
    ys = np.linspace(0.0, H - t, n_samples + 1)[:-1]
    x_a = 0.0 if one_eighth else -(L - t)
    return [(x_a, y, 0.0) for y in ys], [(L - t, y, 0.0) for y in ys], (1.0, 0.0, 0.0)


def build_rotating_box(L=2.0, H=0.5, W=0.3, t=0.1, nx=8, ny=2, nz=1, n_wall=1, padding=0.1, n_pad=1):
    """Closed box with third medium in the cavity and in front/back padding layers."""
    return build_box_self_contact(L=L, H=H, W=W, t=t, nx=nx, ny=ny, nz=nz, n_wall=n_wall,
                                  load_width=0.0, padding=padding, n_pad=n_pad)


def rotating_probe_points(L=2.0, H=0.5, W=0.3, t=0.1, **_):
    return box_probe_points(L=L, H=H, W=W, t=t)


def build_punch(L=2.0, W=2.0, H=1.0, g0=0.5, Hp=1.0, R=1.0, a=0.5,
                nx=4, ny=4, n_block=2, n_gap=2, n_punch=2, n_out=2):
    """
    Quarter model of a block indented by a punch with a spherical bottom.

    The block (body 0) occupies [0, L] x [0, W] x [0, H]. The punch (body 1)
    has a square footprint [0, a]^2 and height ``Hp``; its bottom is the cap
    of a sphere of radius ``R`` whose apex sits ``g0`` above the block. Third
    medium (group ``gap``) fills the rest of the box above the block. The cap
    is produced by warping a structured grid, so the medium layer thins
    towards the punch axis.
    """
    for name, value in (('L', L), ('W', W), ('H', H), ('g0', g0), ('Hp', Hp), ('R', R), ('a', a)):
        if not value > 0:
            raise ValueError(f'{name} must be positive, got {value}')
    if not (a < L and a < W):
        raise ValueError('Punch footprint must fit inside the block')
    if not 2.0 * a * a < R * R:
        raise ValueError('Punch footprint corner lies outside the spherical cap')
    rise = R - np.sqrt(R * R - 2.0 * a * a)
    if not rise < g0:
        raise ValueError(f'Spherical cap rise {rise:.4g} must be smaller than g0={g0}')

    xs = grid_lines((0.0, a, nx), (a, L, n_out))
    ys = grid_lines((0.0, a, ny), (a, W, n_out))
    zb, zp, top = H, H + g0, H + g0 + Hp
    zs = grid_lines((0.0, zb, n_block), (zb, zp, n_gap), (zp, top, n_punch))

    block = DomainTag.solid(0)
    punch = DomainTag.solid(1)
    gap = DomainTag.medium('gap')

    def classify(c):
        x, y, z = c
        if z < zb:
            return block
        if z > zp and x < a and y < a:
            return punch
        return gap

    def warp(coords):
        X, Y, Z = coords.T
        cx, cy = np.minimum(X, a), np.minimum(Y, a)
        delta = R - np.sqrt(R * R - cx * cx - cy * cy)
        Znew = Z.copy()
        lower = (Z > zb) & (Z <= zp)
        Znew[lower] = Z[lower] + delta[lower] * (Z[lower] - zb) / g0
        upper = Z > zp
        Znew[upper] = Z[upper] + delta[upper] * (top - Z[upper]) / Hp
        return np.stack([X, Y, Znew], axis=-1)

    coords, elements, side_sets = structured_hex20(xs, ys, zs, classify, warp=warp)
    X, Y, Z = coords.T
    scale = max(L, W, top)
    punch_nodes = np.zeros(len(coords), dtype=bool)
    for el in elements:
        if el.tag == punch:
            punch_nodes[list(el.nodes)] = True
    node_sets = {
        'sym_x': nodes_where(_near(X, 0.0, scale)),
        'sym_y': nodes_where(_near(Y, 0.0, scale)),
        'block_bottom': nodes_where(_near(Z, 0.0, scale)),
        'punch_top': nodes_where(_near(Z, top, scale) & punch_nodes),
    }
    return Mesh(coords=coords, elements=elements, node_sets=node_sets, side_sets=side_sets)


def punch_probe_points(H=1.0, g0=0.5, **_):
    """Block top and punch apex on the symmetry axis."""
    return (0.0, 0.0, H), (0.0, 0.0, H + g0)


def punch_surface_points(H=1.0, g0=0.5, R=1.0, a=0.5, n_samples=4, **_):
    """Block top against the spherical punch bottom along the x symmetry edge."""
    xs = np.linspace(0.0, a, n_samples + 1)[:-1]
    cap = R - np.sqrt(R * R - xs * xs)
    return [(x, 0.0, H) for x in xs], [(x, 0.0, H + g0 + d) for x, d in zip(xs, cap)], (0.0, 0.0, 1.0)


def build_soft_actuator(n_cells=3, cell_length=1.0, gap=0.2, t=0.2, height=1.0, half_width=0.5,
                        base=0.2, n_chamber=2, n_wall=1, n_gap=1, n_height=2, n_width=2):
    """
    Half model (y >= 0) of a row of inflatable cells on a common base plate.

    Each cell is a solid shell around a chamber filled with third medium of
    group ``chamber_<k>``; the slots between neighbouring cells are third
    medium of group ``gap`` so the cells can come into contact.
    """
    if int(n_cells) < 1:
        raise ValueError('At least one cell is required')
    for name, value in (('cell_length', cell_length), ('gap', gap), ('t', t), ('height', height),
                        ('half_width', half_width), ('base', base)):
        if not value > 0:
            raise ValueError(f'{name} must be positive, got {value}')
    if not (2.0 * t < cell_length and t < half_width and base + t < height):
        raise ValueError('Inconsistent dimensions: walls leave no room for a chamber')

    segments = []
    chambers = []
    slots = []
    x0 = 0.0
    for k in range(int(n_cells)):
        segments += [(x0, x0 + t, n_wall), (x0 + t, x0 + cell_length - t, n_chamber),
                     (x0 + cell_length - t, x0 + cell_length, n_wall)]
        chambers.append((x0 + t, x0 + cell_length - t))
        x0 += cell_length
        if k < n_cells - 1:
            segments.append((x0, x0 + gap, n_gap))
            slots.append((x0, x0 + gap))
            x0 += gap
    xs = grid_lines(*segments)
    ys = grid_lines((0.0, half_width - t, n_width), (half_width - t, half_width, n_wall))
    zs = grid_lines((0.0, base, n_wall), (base, height - t, n_height), (height - t, height, n_wall))

    solid = DomainTag.solid(0)
    slot_tag = DomainTag.medium('gap')
    chamber_tags = [DomainTag.medium(f'chamber_{k}') for k in range(int(n_cells))]

    def classify(c):
        x, y, z = c
        if z < base:
            return solid
        for lo, hi in slots:
            if lo < x < hi:
                return slot_tag
        for k, (lo, hi) in enumerate(chambers):
            if lo < x < hi and y < half_width - t and z < height - t:
                return chamber_tags[k]
        return solid

    coords, elements, side_sets = structured_hex20(xs, ys, zs, classify)
    X, Y, Z = coords.T
    scale = max(x0, height, half_width)
    node_sets = {
        'fixed_end': nodes_where(_near(X, 0.0, scale)),
        'sym_y': nodes_where(_near(Y, 0.0, scale)),
        'free_end': nodes_where(_near(X, x0, scale)),
    }
    return Mesh(coords=coords, elements=elements, node_sets=node_sets, side_sets=side_sets)


def actuator_probe_points(n_cells=3, cell_length=1.0, gap=0.2, height=1.0, **_):
    """Facing walls of the first two cells at mid height."""
    z = 0.5 * height
    if n_cells < 2:
        return (0.0, 0.0, z), (cell_length, 0.0, z)
    return (cell_length, 0.0, z), (cell_length + gap, 0.0, z)


SCENARIOS = {
    'box_self_contact': Scenario('box_self_contact', build_box_self_contact, box_probe_points, box_surface_points),
    'pneumatic_box': Scenario('pneumatic_box', build_pneumatic_box, pneumatic_probe_points,
                              pneumatic_surface_points),
    'rotating_box': Scenario('rotating_box', build_rotating_box, rotating_probe_points),
    'punch': Scenario('punch', build_punch, punch_probe_points, punch_surface_points),
    'soft_actuator': Scenario('soft_actuator', build_soft_actuator, actuator_probe_points),
}
