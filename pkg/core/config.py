"""
Scenario configuration: loading, overrides, validation and problem assembly.

A config is a JSON document with the sections ``scenario``, ``materials``,
``third_medium``, ``bcs``, ``schedule``, ``outputs`` and optionally
``table1``. Built-in configs live in ``core/configs/<name>.json`` and can be
referenced by name. Every check that can be done before solving (forms,
node/side set names, body ids, medium groups, probe location) happens in
``build_problem`` so a bad config never produces partial output.
"""
import copy
import inspect
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from django.conf import settings

from .assembly import (
    Assembler, BoundaryConditions, DirichletBC, LoadGroup, MaterialSet, TractionBC,
)
from .exceptions import ConfigError, MeshFormatError, MeshValidationError, ProbeError, ThirdMediumError
from .forms import (
    DirichletForm, LoadGroupForm, OutputForm, ScenarioForm, ScheduleForm, SolidMaterialForm,
    Table1Form, ThirdMediumForm, TractionForm,
)
from .material import DerivativeProvider, SolidParams, ThirdMediumParams
from .mesh import validate_mesh
from .mesh_format import load_mesh
from .post import GapProbe, SeparationGauge
from .scenarios import SCENARIOS
from .solver import LoadSchedule, NewtonSettings

logger = logging.getLogger(__name__)

CONFIG_DIR = Path(__file__).resolve().parent / 'configs'
SECTIONS = ('name', 'scenario', 'materials', 'third_medium', 'bcs', 'schedule', 'outputs', 'table1')
ABS_TOL_SCALE = 1e-12


def builtin_configs():
    return sorted(p.stem for p in CONFIG_DIR.glob('*.json'))


def load_config(source):
    """Read a config from a JSON file path or a built-in config name."""
    path = Path(source)
    if not path.is_file():
        candidate = CONFIG_DIR / f'{source}.json'
        if not candidate.is_file():
            raise ConfigError(
                f'Config "{source}" is neither a file nor a built-in config '
                f'({", ".join(builtin_configs())})'
            )
        path = candidate
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f'Cannot read config {path}: {exc}') from exc
    if not isinstance(data, dict):
        raise ConfigError(f'Config {path} must contain a JSON object')
    data.setdefault('name', path.stem)
    data['_base_dir'] = str(path.parent)
    return data


def parse_override(text):
    """``key.path=value`` with the value decoded as JSON when possible, else kept as a string."""
    key, sep, raw = text.partition('=')
    key = key.strip()
    if not sep or not key:
        raise ConfigError(f'Override "{text}" must look like key=value')
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.split('.'), value


def apply_overrides(data, overrides):
    """Copy of ``data`` with each ``--set`` override applied; list items are addressed by index."""
    data = copy.deepcopy(data)
    for text in overrides or ():
        path, value = parse_override(text)
        node = data
        for depth, part in enumerate(path):
            last = depth == len(path) - 1
            if isinstance(node, list):
                try:
                    index = int(part)
                    node[index]
                except (ValueError, IndexError):
                    raise ConfigError(f'Override "{text}": no list item "{part}"') from None
                if last:
                    node[index] = value
                else:
                    node = node[index]
            elif isinstance(node, dict):
                if last:
                    node[part] = value
                else:
                    node = node.setdefault(part, {})
            else:
                raise ConfigError(f'Override "{text}": "{".".join(path[:depth])}" is not a section')
    return data


def _bind(form_class, data, where, errors):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        errors[where] = [f'Expected an object, got {type(data).__name__}']
        return None
    form = form_class(data=data)
    unknown = sorted(set(data) - set(form.fields))
    if unknown:
        errors[where] = [f'Unknown keys: {", ".join(unknown)}']
        return None
    if not form.is_valid():
        errors[where] = [
            f'{name}: {message}' if name != '__all__' else message
            for name, messages in form.errors.items() for message in messages
        ]
        return None
    return form.cleaned_data


def _bind_list(form_class, items, where, errors):
    if items is None:
        return []
    if not isinstance(items, list):
        errors[where] = [f'Expected a list, got {type(items).__name__}']
        return []
    return [_bind(form_class, item, f'{where}[{i}]', errors) for i, item in enumerate(items)]


def validate_config(data):
    """
    Validate every section with its form.

    Returns a dict of cleaned sections; raises ConfigError listing every
    problem found, keyed by section.
    """
    if not isinstance(data, dict):
        raise ConfigError('Config must be a JSON object')
    errors = {}
    unknown = sorted(k for k in data if k not in SECTIONS and not k.startswith('_'))
    if unknown:
        errors['config'] = [f'Unknown sections: {", ".join(unknown)}']

    cleaned = {'name': str(data.get('name') or 'run')}
    cleaned['scenario'] = _bind(ScenarioForm, data.get('scenario'), 'scenario', errors)

    materials = data.get('materials') or {}
    if not isinstance(materials, dict):
        errors['materials'] = ['Expected an object with a "solids" list']
        materials = {}
    cleaned['solids'] = _bind_list(SolidMaterialForm, materials.get('solids'), 'materials.solids', errors)
    if not cleaned['solids'] and 'materials.solids' not in errors:
        errors['materials.solids'] = ['At least one solid material is required']

    medium = data.get('third_medium')
    cleaned['groups'] = []
    cleaned['third_medium'] = None
    if medium is not None:
        if isinstance(medium, dict):
            medium = dict(medium)
            cleaned['groups'] = _bind_list(LoadGroupForm, medium.pop('groups', None), 'third_medium.groups', errors)
        cleaned['third_medium'] = _bind(ThirdMediumForm, medium, 'third_medium', errors)

    bcs = data.get('bcs') or {}
    if not isinstance(bcs, dict):
        errors['bcs'] = ['Expected an object with "dirichlet" and "tractions" lists']
        bcs = {}
    unknown = sorted(set(bcs) - {'dirichlet', 'tractions', 'body_force'})
    if unknown:
        errors['bcs'] = [f'Unknown keys: {", ".join(unknown)}']
    cleaned['dirichlet'] = _bind_list(DirichletForm, bcs.get('dirichlet'), 'bcs.dirichlet', errors)
    cleaned['tractions'] = _bind_list(TractionForm, bcs.get('tractions'), 'bcs.tractions', errors)
    body_force = bcs.get('body_force')
    if body_force is not None:
        if (not isinstance(body_force, list) or len(body_force) != 3
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in body_force)):
            errors['bcs.body_force'] = ['Expected a list of 3 numbers']
            body_force = None
    cleaned['body_force'] = body_force

    cleaned['schedule'] = _bind(ScheduleForm, data.get('schedule'), 'schedule', errors)
    cleaned['outputs'] = _bind(OutputForm, data.get('outputs'), 'outputs', errors)
    table1 = data.get('table1')
    cleaned['table1'] = _bind(Table1Form, table1, 'table1', errors) if table1 is not None else None

    if errors:
        raise ConfigError(_summary(errors), errors=errors)
    return cleaned


def _summary(errors):
    return 'Invalid config: ' + '; '.join(
        f'{where}: {", ".join(messages)}' for where, messages in sorted(errors.items())
    )


@dataclass
class Problem:
    """Everything a run needs, built from a validated config."""
    name: str
    scenario: str
    mesh: object
    materials: MaterialSet
    bcs: BoundaryConditions
    schedule: LoadSchedule
    settings: NewtonSettings
    points_per_axis: int = 3
    workers: int = 1
    probe: GapProbe = None
    gauge: SeparationGauge = None
    vtk_every: int = 1
    output_dir: str = ''
    table1: dict = None
    data: dict = field(default_factory=dict)

    def assembler(self):
        return Assembler(self.mesh, self.materials, self.bcs,
                         points_per_axis=self.points_per_axis, workers=self.workers)


def _build_mesh(section, base_dir):
    if section['mesh']:
        path = Path(section['mesh'])
        if not path.is_absolute():
            path = Path(base_dir) / path
        try:
            return load_mesh(path), None
        except OSError as exc:
            raise ConfigError(f'Cannot read mesh {path}: {exc}') from exc
        except (MeshFormatError, MeshValidationError) as exc:
            raise ConfigError(f'Mesh {path}: {exc}') from exc

    scenario = SCENARIOS[section['kind']]
    params = section['params']
    accepted = inspect.signature(scenario.build).parameters
    unknown = sorted(set(params) - set(accepted))
    if unknown:
        raise ConfigError(f'Unknown parameters for scenario "{scenario.name}": {", ".join(unknown)}',
                          errors={'scenario.params': unknown})
    try:
        mesh = scenario.build(**params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f'Scenario "{scenario.name}": {exc}') from exc
    report = validate_mesh(mesh)
    if not report.ok:
        raise ConfigError(f'Scenario "{scenario.name}" produced an invalid mesh: {"; ".join(report.failures)}')
    return mesh, scenario


def _check_references(mesh, cleaned):
    errors = {}
    for i, bc in enumerate(cleaned['dirichlet']):
        if bc['node_set'] not in mesh.node_sets:
            errors[f'bcs.dirichlet[{i}]'] = [
                f'Unknown node set "{bc["node_set"]}" (available: {", ".join(sorted(mesh.node_sets))})'
            ]
    for i, bc in enumerate(cleaned['tractions']):
        if bc['side_set'] not in mesh.side_sets:
            errors[f'bcs.tractions[{i}]'] = [
                f'Unknown side set "{bc["side_set"]}" (available: {", ".join(sorted(mesh.side_sets))})'
            ]

    bodies = {e.tag.body_id for e in mesh.solid_elements()}
    given = [s['body'] for s in cleaned['solids']]
    if len(set(given)) != len(given):
        errors['materials.solids'] = ['Duplicate body ids']
    missing = sorted(bodies - set(given))
    if missing:
        errors.setdefault('materials.solids', []).append(
            f'No material for solid bodies {", ".join(map(str, missing))}')

    groups = set(mesh.medium_groups())
    if groups and cleaned['third_medium'] is None:
        errors['third_medium'] = ['Mesh has third-medium elements but no "third_medium" section']
    names = [g['name'] for g in cleaned['groups']]
    if len(set(names)) != len(names):
        errors['third_medium.groups'] = ['Duplicate group names']
    for name in names:
        if name not in groups:
            errors.setdefault('third_medium.groups', []).append(
                f'Unknown third-medium group "{name}" (available: {", ".join(sorted(groups)) or "none"})')
    if errors:
        raise ConfigError(_summary(errors), errors=errors)


def _newton_settings(schedule, materials, mesh):
    defaults = settings.SOLVER
    tol_abs = schedule.get('tol_abs') or defaults.get('TOL_ABS')
    if tol_abs is None:
        # force scale K * Lc^2 with Lc the bounding-box diagonal
        stiffness = max(p.K for p in materials.solids.values())
        length = float(np.linalg.norm(np.ptp(mesh.coords, axis=0)))
        tol_abs = ABS_TOL_SCALE * stiffness * length ** 2
    return NewtonSettings(
        tol_rel=schedule.get('tol_rel') or defaults['TOL_REL'],
        tol_abs=tol_abs,
        max_iter=schedule.get('max_iter') or defaults['MAX_ITER'],
        max_bisections=(schedule['max_bisections'] if schedule.get('max_bisections') is not None
                        else defaults['MAX_BISECTIONS']),
    )


def build_problem(data):
    """Validate ``data`` and construct the mesh, materials, BCs, schedule and probe."""
    cleaned = validate_config(data)
    base_dir = data.get('_base_dir') or str(CONFIG_DIR)
    mesh, scenario = _build_mesh(cleaned['scenario'], base_dir)
    _check_references(mesh, cleaned)

    schedule = cleaned['schedule']
    provider = DerivativeProvider(schedule.get('provider') or settings.SOLVER['PROVIDER'])
    solids = {s['body']: SolidParams(K=s['K'], mu=s['mu']) for s in cleaned['solids']}
    medium = None
    if cleaned['third_medium'] is not None:
        tm = cleaned['third_medium']
        medium = ThirdMediumParams(K=tm['K'], mu=tm['mu'], gamma=tm['gamma'],
                                   alpha_r=tm['alpha_r'], reg_kind=tm['reg_kind'])
    groups = {g['name']: LoadGroup(g['name'], pbar=g['pbar'], start=g['start'], end=g['end'])
              for g in cleaned['groups']}
    materials = MaterialSet(solids=solids, medium=medium, groups=groups, provider=provider)

    dirichlet = tuple(
        DirichletBC(node_set=bc['node_set'], components=tuple(bc['components']), value=bc['value'],
                    kind=bc['kind'], axis=tuple(bc['axis'] or (1.0, 0.0, 0.0)),
                    center=tuple(bc['center']), angle=bc['angle'])
        for bc in cleaned['dirichlet']
    )
    tractions = tuple(TractionBC(bc['side_set'], tuple(bc['traction'])) for bc in cleaned['tractions'])
    bcs = BoundaryConditions(dirichlet=dirichlet, tractions=tractions,
                             body_force=tuple(cleaned['body_force']) if cleaned['body_force'] else None)
    try:
        bcs.prescribed(mesh, 1.0)
    except ValueError as exc:
        raise ConfigError(f'Boundary conditions: {exc}') from exc

    outputs = cleaned['outputs']
    probe = None
    points = None
    if outputs.get('probe_a') is not None:
        points = (outputs['probe_a'], outputs['probe_b'])
    elif scenario is not None and scenario.probe is not None:
        points = scenario.probe(**cleaned['scenario']['params'])
    if points is not None:
        try:
            probe = GapProbe.from_points(mesh, np.asarray(points[0], dtype=float),
                                         np.asarray(points[1], dtype=float))
        except ProbeError as exc:
            raise ConfigError(f'Gap probe: {exc}') from exc

    gauge = None
    if scenario is not None and scenario.surfaces is not None:
        points_a, points_b, direction = scenario.surfaces(**cleaned['scenario']['params'])
        try:
            gauge = SeparationGauge.from_points(mesh, points_a, points_b, direction)
        except ProbeError as exc:
            raise ConfigError(f'Separation gauge: {exc}') from exc

    try:
        newton = _newton_settings(schedule, materials, mesh)
        load_schedule = LoadSchedule(n_steps=schedule['n_steps'], max_steps=schedule.get('max_steps'))
    except ValueError as exc:
        raise ConfigError(f'Schedule: {exc}') from exc

    problem = Problem(
        name=cleaned['name'],
        scenario=scenario.name if scenario is not None else 'mesh',
        mesh=mesh,
        materials=materials,
        bcs=bcs,
        schedule=load_schedule,
        settings=newton,
        points_per_axis=schedule.get('points_per_axis') or 3,
        workers=schedule.get('workers') or settings.SOLVER['WORKERS'],
        probe=probe,
        gauge=gauge,
        vtk_every=outputs['vtk_every'],
        output_dir=outputs.get('directory') or '',
        table1=cleaned['table1'],
        data={k: v for k, v in data.items() if not k.startswith('_')},
    )
    logger.debug('Built problem "%s": %d nodes, %d elements, %d constrained dofs',
                  problem.name, mesh.n_nodes, mesh.n_elements,
                  len(bcs.prescribed(mesh, 1.0)[0]))
    return problem


def load_problem(source, overrides=None):
    """load_config + apply_overrides + build_problem; library errors surface as ConfigError."""
    data = apply_overrides(load_config(source), overrides)
    try:
        return build_problem(data)
    except ConfigError:
        raise
    except ThirdMediumError as exc:
        raise ConfigError(str(exc)) from exc
