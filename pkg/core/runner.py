"""
Batch drivers behind the management commands.

Contains:
- cli_run (scheduled solve with VTK series, probe CSV and report JSON)
- table1_harness (gap table over an alpha_r x gamma grid)
- record_run (store a finished run in the registry)
"""
import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from django.conf import settings
from django.db import transaction

from .config import apply_overrides, build_problem
from .exceptions import ConfigError, ThirdMediumError
from .models import SimulationRun, StepRecord
from .post import field_output, gap_measure, separations
from .solver import run_schedule
from .vtk import export_vtk

logger = logging.getLogger(__name__)

PROBE_COLUMNS = ['step', 'lambda', 'gap', 'newton_iters', 'bisections']
TABLE_COLUMNS = ['alpha_r', 'gamma', 'gap', 'status', 'final_lambda', 'total_iterations']
FAILED_CELL = 'Calculation failed'


def _fmt(value):
    return '' if value is None else f'{value:.17g}'


@dataclass
class RunResult:
    problem: object
    report: object
    displacement: object
    rows: list = field(default_factory=list)
    output_dir: Path = None
    vtk_files: list = field(default_factory=list)
    min_separation: float = None
    run_id: int = None

    @property
    def final_gap(self):
        return self.rows[-1]['gap'] if self.rows else None


def output_directory(problem, output_dir=None):
    if output_dir:
        return Path(output_dir)
    if problem.output_dir:
        return Path(problem.output_dir)
    return Path(settings.OUTPUT_DIR) / problem.name


def cli_run(problem, output_dir=None, record=False):
    """
    Solve ``problem`` over its schedule and write its artifacts.

    Writes ``<name>_<step>.vtk`` every ``vtk_every`` accepted steps (plus the
    reference state and the last accepted step), ``<name>.vtk.series``,
    ``probe.csv`` with one row per accepted step and ``report.json``. Problem
    definition errors found while setting up raise ConfigError before any
    file is written.
    """
    try:
        assembler = problem.assembler()
    except ThirdMediumError as exc:
        raise ConfigError(str(exc)) from exc

    out = output_directory(problem, output_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = RunResult(problem=problem, report=None, displacement=None, output_dir=out)
    mesh = problem.mesh

    def write_vtk(step, lam, u):
        path = out / f'{problem.name}_{step:04d}.vtk'
        export_vtk(mesh, field_output(assembler, u, lam), path,
                   title=f'{problem.name} step {step} lambda {lam:.17g}')
        result.vtk_files.append((path, lam))

    def add_row(step, lam, u, iterations, bisections):
        gap = gap_measure(mesh, u, problem.probe) if problem.probe is not None else None
        result.rows.append({'step': step, 'lambda': lam, 'gap': gap,
                            'newton_iters': iterations, 'bisections': bisections})
        if problem.gauge is not None:
            smallest = float(separations(mesh, u, problem.gauge).min())
            if smallest < 0.0:
                logger.warning('Run "%s": facing surfaces interpenetrate at lambda=%.6g (separation %.3e)',
                               problem.name, lam, smallest)
            if result.min_separation is None or smallest < result.min_separation:
                result.min_separation = smallest

    def on_step(step, lam, u, step_report):
        add_row(step, lam, u, step_report.iterations, step_report.bisections)
        if problem.vtk_every and (step % problem.vtk_every == 0 or lam == 1.0):
            write_vtk(step, lam, u)

    u0 = np.zeros(assembler.dofmap.n_dofs)
    add_row(0, 0.0, u0, 0, 0)
    if problem.vtk_every:
        write_vtk(0, 0.0, u0)

    u, report = run_schedule(assembler, problem.schedule, problem.settings, callback=on_step)
    result.report = report
    result.displacement = u
    if problem.vtk_every and report.steps and not any(lam == report.final_lambda for _, lam in result.vtk_files):
        write_vtk(report.steps[-1].step, report.final_lambda, u)

    _write_probe_csv(out / 'probe.csv', result.rows)
    _write_series(out / f'{problem.name}.vtk.series', result.vtk_files)
    _write_report(out / 'report.json', problem, report, result.min_separation)
    logger.info('Run "%s" %s at lambda=%.6g (%d steps, %d Newton iterations) -> %s',
                problem.name, report.status, report.final_lambda, len(report.steps),
                report.total_iterations, out)
    if record:
        result.run_id = record_run(result).pk
    return result


def _write_probe_csv(path, rows):
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(PROBE_COLUMNS)
        for row in rows:
            writer.writerow([row['step'], _fmt(row['lambda']), _fmt(row['gap']),
                             row['newton_iters'], row['bisections']])


def _write_series(path, files):
    series = {'file-series-version': '1.0',
              'files': [{'name': p.name, 'time': lam} for p, lam in files]}
    path.write_text(json.dumps(series, indent=2) + '\n')


def _write_report(path, problem, report, min_separation=None):
    summary = {
        'name': problem.name,
        'scenario': problem.scenario,
        'status': report.status,
        'completed': report.completed,
        'final_lambda': report.final_lambda,
        'steps': len(report.steps),
        'iterations': report.iterations,
        'total_iterations': report.total_iterations,
        'mean_iterations': report.mean_iterations,
        'residuals': [s.residuals for s in report.steps],
        'bisection_events': [
            {'lambda_from': e.lam_from, 'lambda_to': e.lam_to, 'reason': e.reason}
            for e in report.bisection_events
        ],
        'wall_time_s': report.wall_time,
        'message': report.message,
        'min_separation': min_separation,
        'mesh': {'nodes': problem.mesh.n_nodes, 'elements': problem.mesh.n_elements},
        'config': problem.data,
    }
    path.write_text(json.dumps(summary, indent=2) + '\n')


@transaction.atomic
def record_run(result):
    """Store a finished run and its probe rows; returns the SimulationRun."""
    report = result.report
    run = SimulationRun.objects.create(
        name=result.problem.name,
        scenario=result.problem.scenario,
        config=json.dumps(result.problem.data, indent=2),
        status=report.status,
        final_lambda=report.final_lambda,
        total_iterations=report.total_iterations,
        wall_time_s=report.wall_time,
        output_dir=str(result.output_dir or ''),
        message=report.message,
    )
    StepRecord.objects.bulk_create([
        StepRecord(run=run, step=row['step'], lam=row['lambda'], gap=row['gap'],
                   newton_iters=row['newton_iters'], bisections=row['bisections'])
        for row in result.rows
    ])
    return run


@dataclass
class TableCell:
    alpha_r: float
    gamma: float
    gap: float = None
    status: str = 'failed'
    final_lambda: float = 0.0
    total_iterations: int = 0
    message: str = ''
    min_separation: float = None

    @property
    def failed(self):
        return self.status != 'completed'


def table1_harness(data, alpha_r=None, gamma=None, output_dir=None, record=False):
    """
    Run the config ``data`` once per (alpha_r, gamma) pair.

    The grid defaults to the config's ``table1`` section. Each cell runs in
    its own subdirectory; a cell that does not reach lambda = 1 is flagged and
    the harness moves on. Writes ``table1.csv`` and ``table1.md`` and returns
    the cells in row-major order (alpha_r outer).
    """
    base = build_problem(data)
    grid = base.table1 or {}
    alpha_r = list(alpha_r or grid.get('alpha_r') or [])
    gamma = list(gamma or grid.get('gamma') or [])
    if not alpha_r or not gamma:
        raise ConfigError('Table needs non-empty alpha_r and gamma lists (config "table1" section or options)')
    if base.probe is None:
        raise ConfigError('Table needs a gap probe (scenario default or outputs.probe_a/probe_b)')

    out = output_directory(base, output_dir)
    cells = []
    for a in alpha_r:
        for g in gamma:
            cell = TableCell(alpha_r=float(a), gamma=float(g))
            cell_data = apply_overrides(data, [f'third_medium.alpha_r={a!r}', f'third_medium.gamma={g!r}'])
            cell_data['name'] = f'{base.name}_a{a:g}_g{g:g}'
            problem = build_problem(cell_data)
            try:
                result = cli_run(problem, output_dir=out / problem.name, record=record)
            except ThirdMediumError as exc:
                cell.message = str(exc)
                logger.error('Cell alpha_r=%g gamma=%g failed: %s', a, g, exc)
            else:
                report = result.report
                cell.status = report.status
                cell.final_lambda = report.final_lambda
                cell.total_iterations = report.total_iterations
                cell.message = report.message
                cell.min_separation = result.min_separation
                if report.completed:
                    cell.gap = result.final_gap
            cells.append(cell)

    out.mkdir(parents=True, exist_ok=True)
    _write_table_csv(out / 'table1.csv', cells)
    (out / 'table1.md').write_text(format_table_markdown(cells))
    return cells


def _write_table_csv(path, cells):
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(TABLE_COLUMNS)
        for c in cells:
            writer.writerow([_fmt(c.alpha_r), _fmt(c.gamma), _fmt(c.gap), c.status,
                             _fmt(c.final_lambda), c.total_iterations])


def format_table_markdown(cells):
    lines = ['| alpha_r | gamma | g |', '|---:|---:|---:|']
    previous = None
    for c in cells:
        label = f'{c.alpha_r:g}' if c.alpha_r != previous else ''
        previous = c.alpha_r
        value = FAILED_CELL if c.failed or c.gap is None else f'{c.gap:.4E}'
        lines.append(f'| {label} | {c.gamma:.0e} | {value} |')
    return '\n'.join(lines) + '\n'
