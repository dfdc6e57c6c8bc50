"""
Legacy VTK (ASCII, version 3.0) writer for Hex20 meshes.

Points are written in the reference configuration with the displacement as
point data, so viewers can warp by vector. Cells use VTK_QUADRATIC_HEXAHEDRON.
Floats are printed with 17 significant digits; identical inputs give
identical bytes.
"""
from pathlib import Path

import numpy as np

VTK_QUADRATIC_HEXAHEDRON = 25


def _fmt(v):
    return f'{float(v):.17g}'


def format_vtk(mesh, fields=None, title='ThirdMedium output'):
    lines = ['# vtk DataFile Version 3.0', title.replace('\n', ' ')[:255], 'ASCII',
             'DATASET UNSTRUCTURED_GRID',
             f'POINTS {mesh.n_nodes} double']
    lines.extend(' '.join(_fmt(v) for v in x) for x in mesh.coords)

    m = mesh.n_elements
    lines.append(f'CELLS {m} {m * 21}')
    lines.extend('20 ' + ' '.join(str(int(n)) for n in nodes) for nodes in mesh.connectivity)
    lines.append(f'CELL_TYPES {m}')
    lines.extend(str(VTK_QUADRATIC_HEXAHEDRON) for _ in range(m))

    if fields is not None:
        lines.append(f'POINT_DATA {mesh.n_nodes}')
        lines.append('VECTORS displacement double')
        lines.extend(' '.join(_fmt(v) for v in d) for d in np.asarray(fields.displacement).reshape(-1, 3))

        lines.append(f'CELL_DATA {m}')
        for name, values in (('von_mises', fields.von_mises), ('j_min', fields.j_min)):
            lines += [f'SCALARS {name} double 1', 'LOOKUP_TABLE default']
            lines.extend(_fmt(v) for v in values)
        for name, values in (('domain_tag', fields.domain_tag), ('solid_mask', fields.solid_mask)):
            lines += [f'SCALARS {name} int 1', 'LOOKUP_TABLE default']
            lines.extend(str(int(v)) for v in values)
    return '\n'.join(lines) + '\n'


def export_vtk(mesh, fields, path, title='ThirdMedium output'):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_vtk(mesh, fields, title=title))
    return path
