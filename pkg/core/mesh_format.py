"""
Plain-text mesh interchange format (``.tmmesh``).

Grammar (one record per line, whitespace separated, ``#`` starts a comment
line)::

    TMMESH 1
    nodes <n>
    elements <m>
    node_sets <k>
    side_sets <s>
    node <id> <x> <y> <z>                      # n records, ids 0..n-1 in order
    element <id> <tag> <n0> ... <n19>          # m records, ids 0..m-1 in order
    node_set <name> <count> <id> ...           # k records
    side_set <name> <count> <elem>:<face> ...  # s records
    end

``<tag>`` is ``solid:<body id>`` or ``medium:<group>``. Element records must
carry exactly 20 node ids in VTK quadratic-hexahedron order. Unknown record
keywords and extra fields are rejected.
"""
import logging
from pathlib import Path

from .exceptions import MeshFormatError, MeshValidationError
from .mesh import DomainTag, Hex20Element, Mesh, validate_mesh

logger = logging.getLogger(__name__)

MAGIC = 'TMMESH'
VERSION = '1'
FORMATS = ('tmmesh',)
_HEADER = ('nodes', 'elements', 'node_sets', 'side_sets')


def _records(lines):
    for number, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text or text.startswith('#'):
            continue
        yield number, text.split()


def _int(token, line, what):
    try:
        return int(token)
    except ValueError:
        raise MeshFormatError(f'invalid {what} "{token}"', line=line) from None


def _float(token, line):
    try:
        return float(token)
    except ValueError:
        raise MeshFormatError(f'invalid coordinate "{token}"', line=line) from None


def parse_mesh(text):
    """Parse mesh text into a Mesh without validating geometry."""
    records = _records(text.splitlines())

    def expect(keyword):
        try:
            line, fields = next(records)
        except StopIteration:
            raise MeshFormatError(f'unexpected end of file, expected "{keyword}"') from None
        if fields[0] != keyword:
            raise MeshFormatError(f'expected "{keyword}" record, found "{fields[0]}"', line=line)
        return line, fields

    line, fields = expect(MAGIC)
    if fields[1:] != [VERSION]:
        raise MeshFormatError(f'unsupported format version {" ".join(fields[1:])}', line=line)

    counts = {}
    for key in _HEADER:
        line, fields = expect(key)
        if len(fields) != 2:
            raise MeshFormatError(f'"{key}" takes exactly one count', line=line)
        counts[key] = _int(fields[1], line, 'count')
        if counts[key] < 0:
            raise MeshFormatError(f'negative count for "{key}"', line=line)

    coords = []
    for expected_id in range(counts['nodes']):
        line, fields = expect('node')
        if len(fields) != 5:
            raise MeshFormatError(f'node record needs id and 3 coordinates, got {len(fields) - 1} fields', line=line)
        if _int(fields[1], line, 'node id') != expected_id:
            raise MeshFormatError(f'node ids must be dense and ordered, expected {expected_id}', line=line)
        coords.append([_float(tok, line) for tok in fields[2:]])

    elements = []
    for expected_id in range(counts['elements']):
        line, fields = expect('element')
        n_ids = len(fields) - 3
        if n_ids != 20:
            raise MeshFormatError(f'unsupported element type ({n_ids} nodes, expected 20)', line=line)
        if _int(fields[1], line, 'element id') != expected_id:
            raise MeshFormatError(f'element ids must be dense and ordered, expected {expected_id}', line=line)
        try:
            tag = DomainTag.from_token(fields[2])
        except ValueError as exc:
            raise MeshFormatError(str(exc), line=line) from None
        nodes = tuple(_int(tok, line, 'node id') for tok in fields[3:])
        elements.append(Hex20Element(id=expected_id, nodes=nodes, tag=tag))

    node_sets = {}
    for _ in range(counts['node_sets']):
        line, fields = expect('node_set')
        name, ids = _named_list(fields, line)
        node_sets[name] = [_int(tok, line, 'node id') for tok in ids]

    side_sets = {}
    for _ in range(counts['side_sets']):
        line, fields = expect('side_set')
        name, pairs = _named_list(fields, line)
        entries = []
        for tok in pairs:
            elem, sep, face = tok.partition(':')
            if not sep:
                raise MeshFormatError(f'side entry "{tok}" must be <element>:<face>', line=line)
            entries.append((_int(elem, line, 'element id'), _int(face, line, 'face index')))
        side_sets[name] = entries

    line, fields = expect('end')
    if len(fields) != 1:
        raise MeshFormatError('"end" takes no fields', line=line)
    for line, fields in records:
        raise MeshFormatError(f'unexpected record "{fields[0]}" after end', line=line)

    return Mesh(coords=coords, elements=elements, node_sets=node_sets, side_sets=side_sets)


def _named_list(fields, line):
    if len(fields) < 3:
        raise MeshFormatError(f'"{fields[0]}" record needs a name and a count', line=line)
    name = fields[1]
    count = _int(fields[2], line, 'count')
    items = fields[3:]
    if len(items) != count:
        raise MeshFormatError(f'set "{name}" declares {count} entries but lists {len(items)}', line=line)
    return name, items


def load_mesh(path, format=None, validate=True):
    """Read a mesh file; by default the result must pass validate_mesh."""
    path = Path(path)
    fmt = (format or path.suffix.lstrip('.') or 'tmmesh').lower()
    if fmt not in FORMATS:
        raise MeshFormatError(f'unsupported mesh format "{fmt}"')
    mesh = parse_mesh(path.read_text())
    logger.debug('Loaded %s: %d nodes, %d elements', path, mesh.n_nodes, mesh.n_elements)
    if validate:
        report = validate_mesh(mesh)
        if not report.ok:
            raise MeshValidationError('; '.join(report.failures), element_ids=report.failed_elements)
    return mesh


def format_mesh(mesh):
    lines = [f'{MAGIC} {VERSION}',
             f'nodes {mesh.n_nodes}',
             f'elements {mesh.n_elements}',
             f'node_sets {len(mesh.node_sets)}',
             f'side_sets {len(mesh.side_sets)}']
    for i, (x, y, z) in enumerate(mesh.coords):
        lines.append(f'node {i} {x:.17g} {y:.17g} {z:.17g}')
    for e in mesh.elements:
        lines.append(f'element {e.id} {e.tag.token} ' + ' '.join(str(n) for n in e.nodes))
    for name, ids in mesh.node_sets.items():
        lines.append(f'node_set {name} {len(ids)} ' + ' '.join(str(i) for i in ids))
    for name, pairs in mesh.side_sets.items():
        lines.append(f'side_set {name} {len(pairs)} ' + ' '.join(f'{e}:{f}' for e, f in pairs))
    lines.append('end')
    return '\n'.join(lines) + '\n'


def write_mesh(mesh, path):
    path = Path(path)
    path.write_text(format_mesh(mesh))
    return path
