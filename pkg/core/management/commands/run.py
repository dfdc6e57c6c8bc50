"""
Run a scenario config over its load schedule.

    python manage.py run box_self_contact --set schedule.n_steps=40 --record

Exit status: 0 when lambda reaches 1, 2 for config errors (nothing is
written), 3 when the schedule stops early.
"""
from django.core.management.base import BaseCommand, CommandError

from core.config import load_problem
from core.exceptions import ConfigError
from core.runner import cli_run

CONFIG_ERROR = 2
UNFINISHED = 3


class Command(BaseCommand):
    help = 'Solve a scenario config and write VTK series, probe CSV and report'

    def add_arguments(self, parser):
        parser.add_argument('config', help='Config file path or built-in config name')
        parser.add_argument('--set', dest='overrides', action='append', default=[], metavar='KEY=VALUE',
                            help='Override a config key (dotted path, JSON value); repeatable')
        parser.add_argument('--output', help='Output directory (default: outputs.directory or TM_OUTPUT_DIR/<name>)')
        parser.add_argument('--record', action='store_true', help='Store the run in the registry')

    def handle(self, *args, **options):
        try:
            problem = load_problem(options['config'], options['overrides'])
            result = cli_run(problem, output_dir=options['output'], record=options['record'])
        except ConfigError as exc:
            raise CommandError(str(exc), returncode=CONFIG_ERROR)

        report = result.report
        summary = (f'{problem.name}: {report.status} at lambda={report.final_lambda:.6g}, '
                   f'{len(report.steps)} steps, {report.total_iterations} Newton iterations, '
                   f'{len(report.bisection_events)} bisections')
        if result.final_gap is not None:
            summary += f', gap={result.final_gap:.6e}'
        if result.run_id is not None:
            summary += f' (run #{result.run_id})'
        if not report.completed:
            raise CommandError(f'{summary}. {report.message}', returncode=UNFINISHED)
        self.stdout.write(self.style.SUCCESS(f'{summary} -> {result.output_dir}'))
