import csv
import json
import shutil
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase

from core.config import load_problem
from core.models import SimulationRun
from core.post import separations
from core.runner import FAILED_CELL, cli_run

# Small suction load on the coarse 1/8 box keeps every command run short.
QUICK = ['third_medium.groups.0.pbar=0.02', 'schedule.n_steps=2', 'schedule.points_per_axis=2',
         'outputs.vtk_every=1']

# Coarse box pushed past closure of its 0.3 gap.
BOX_CLOSING = ['bcs.dirichlet.2.value=-0.45', 'schedule.n_steps=8', 'third_medium.alpha_r=100',
               'third_medium.gamma=1e-4', 'outputs.vtk_every=0']


class CommandTestMixin:

    def setUp(self):
        super().setUp()
        self.tmp = Path(tempfile.mkdtemp())
        self.addCleanup(shutil.rmtree, self.tmp, ignore_errors=True)

    def call(self, *args, **kwargs):
        stdout, stderr = StringIO(), StringIO()
        call_command(*args, stdout=stdout, stderr=stderr, **kwargs)
        return stdout.getvalue(), stderr.getvalue()

    def overrides(self, extra=()):
        args = []
        for item in list(QUICK) + list(extra):
            args += ['--set', item]
        return args

    def read_probe(self, directory):
        with open(directory / 'probe.csv', newline='') as f:
            return list(csv.DictReader(f))


class ValidateCommandTests(CommandTestMixin, SimpleTestCase):

    def test_valid_builtin_config(self):
        out, _ = self.call('validate', 'box_self_contact')
        self.assertIn('box_self_contact (box_self_contact)', out)
        self.assertIn('nodes:', out)
        self.assertIn('Config is valid', out)

    def test_invalid_config_exits_with_config_error(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('validate', 'box_self_contact', '--set', 'bcs.dirichlet.0.node_set="nowhere"')
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn('bcs.dirichlet[0]', str(ctx.exception))


class RunCommandTests(CommandTestMixin, SimpleTestCase):

    def test_pneumatic_run_reaches_full_load(self):
        out_dir = self.tmp / 'suction'
        out, _ = self.call('run', 'pneumatic_box_suction', *self.overrides(), '--output', str(out_dir))
        self.assertIn('completed at lambda=1', out)
        rows = self.read_probe(out_dir)
        self.assertEqual([r['step'] for r in rows], ['0', '1', '2'])
        self.assertEqual(float(rows[-1]['lambda']), 1.0)
        self.assertNotEqual(float(rows[-1]['gap']), float(rows[0]['gap']))
        self.assertEqual(len(list(out_dir.glob('*.vtk'))), 3)
        series = json.loads((out_dir / 'pneumatic_box_suction.vtk.series').read_text())
        self.assertEqual([f['time'] for f in series['files']], [0.0, 0.5, 1.0])
        report = json.loads((out_dir / 'report.json').read_text())
        self.assertEqual(report['status'], 'completed')
        self.assertEqual(report['steps'], 2)

    def test_missing_node_set_writes_nothing(self):
        out_dir = self.tmp / 'bad'
        with self.assertRaises(CommandError) as ctx:
            self.call('run', 'pneumatic_box_suction',
                      *self.overrides(['bcs.dirichlet.0.node_set="nowhere"']), '--output', str(out_dir))
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertFalse(out_dir.exists())

    def test_unfinished_schedule_exits_with_three(self):
        out_dir = self.tmp / 'partial'
        with self.assertRaises(CommandError) as ctx:
            self.call('run', 'pneumatic_box_suction', *self.overrides(['schedule.max_steps=1']),
                      '--output', str(out_dir))
        self.assertEqual(ctx.exception.returncode, 3)
        self.assertIn('partial', str(ctx.exception))
        rows = self.read_probe(out_dir)
        self.assertEqual(float(rows[-1]['lambda']), 0.5)
        self.assertTrue((out_dir / 'pneumatic_box_suction_0001.vtk').exists())

    def test_repeated_runs_are_identical(self):
        first, second = self.tmp / 'first', self.tmp / 'second'
        for out_dir in (first, second):
            self.call('run', 'pneumatic_box_suction', *self.overrides(), '--output', str(out_dir))
        for name in ['probe.csv'] + sorted(p.name for p in first.glob('*.vtk')):
            self.assertEqual((first / name).read_bytes(), (second / name).read_bytes(), name)

    def test_default_output_directory_comes_from_settings(self):
        with self.settings(OUTPUT_DIR=self.tmp / 'default'):
            self.call('run', 'pneumatic_box_suction', *self.overrides(['outputs.vtk_every=0']))
        out_dir = self.tmp / 'default' / 'pneumatic_box_suction'
        self.assertTrue((out_dir / 'probe.csv').exists())
        self.assertEqual(list(out_dir.glob('*.vtk')), [])

    def test_box_plates_close_without_overlap(self):
        problem = load_problem('box_self_contact', BOX_CLOSING)
        result = cli_run(problem, output_dir=self.tmp / 'box')
        self.assertTrue(result.report.completed, result.report.message)
        gaps = [row['gap'] for row in result.rows]
        self.assertAlmostEqual(gaps[0], 0.3, places=12)
        self.assertTrue(all(b <= a + 1e-9 for a, b in zip(gaps, gaps[1:])), gaps)
        # pushed 0.45 against a 0.3 gap: the plates meet at mid-length but do not cross
        self.assertLess(gaps[-1], 0.1)
        self.assertGreater(gaps[-1], 0.0)
        values = separations(problem.mesh, result.displacement, problem.gauge)
        self.assertTrue(np.all(values >= 0.0), values)
        self.assertAlmostEqual(float(values[len(values) // 2]), result.final_gap, delta=1e-3)
        report = json.loads((result.output_dir / 'report.json').read_text())
        self.assertGreaterEqual(report['min_separation'], 0.0)
        self.assertLessEqual(report['min_separation'], float(values.min()) + 1e-12)


class Table1CommandTests(CommandTestMixin, SimpleTestCase):

    def test_single_cell_matches_direct_run(self):
        out, _ = self.call('table1', 'pneumatic_box_suction', *self.overrides(),
                           '--alpha-r', '100', '--gamma', '1e-5', '--output', str(self.tmp / 'table'))
        self.assertIn('| alpha_r | gamma | g |', out)
        self.assertIn('1 of 1 cells completed', out)

        problem = load_problem('pneumatic_box_suction', QUICK)
        direct = cli_run(problem, output_dir=self.tmp / 'direct')
        with open(self.tmp / 'table' / 'table1.csv', newline='') as f:
            (cell,) = list(csv.DictReader(f))
        self.assertEqual(cell['status'], 'completed')
        self.assertEqual(float(cell['gap']), direct.final_gap)
        self.assertTrue((self.tmp / 'table' / 'pneumatic_box_suction_a100_g1e-05' / 'probe.csv').exists())

    def test_failed_cells_are_flagged(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('table1', 'pneumatic_box_suction', *self.overrides(['schedule.max_steps=1']),
                      '--alpha-r', '100', '--gamma', '1e-5', '1e-4',
                      '--output', str(self.tmp / 'table'), '--strict')
        self.assertEqual(ctx.exception.returncode, 3)
        markdown = (self.tmp / 'table' / 'table1.md').read_text()
        self.assertEqual(markdown.count(FAILED_CELL), 2)

    def test_missing_grid_is_a_config_error(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('table1', 'pneumatic_box_suction', *self.overrides(), '--output', str(self.tmp / 'table'))
        self.assertEqual(ctx.exception.returncode, 2)


class RecordRunTests(CommandTestMixin, TestCase):

    def test_record_stores_run_and_probe_rows(self):
        out, _ = self.call('run', 'pneumatic_box_suction', *self.overrides(), '--record',
                           '--output', str(self.tmp / 'recorded'))
        run = SimulationRun.objects.get()
        self.assertIn(f'(run #{run.pk})', out)
        self.assertEqual(run.status, 'completed')
        self.assertEqual(run.final_lambda, 1.0)
        self.assertEqual(list(run.steps.values_list('step', flat=True)), [0, 1, 2])
        self.assertEqual(json.loads(run.config)['name'], 'pneumatic_box_suction')
