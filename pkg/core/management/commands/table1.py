"""
Gap table of the box self-contact benchmark over an alpha_r x gamma grid.
"""
from django.core.management.base import BaseCommand, CommandError

from core.config import apply_overrides, load_config
from core.exceptions import ConfigError
from core.runner import FAILED_CELL, format_table_markdown, table1_harness

from .run import CONFIG_ERROR, UNFINISHED


class Command(BaseCommand):
    help = 'Run a config once per (alpha_r, gamma) pair and tabulate the final gap'

    def add_arguments(self, parser):
        parser.add_argument('config', help='Config file path or built-in config name')
        parser.add_argument('--set', dest='overrides', action='append', default=[], metavar='KEY=VALUE',
                            help='Override a config key (dotted path, JSON value); repeatable')
        parser.add_argument('--alpha-r', dest='alpha_r', type=float, nargs='+',
                            help='alpha_r values (default: config table1.alpha_r)')
        parser.add_argument('--gamma', type=float, nargs='+', help='gamma values (default: config table1.gamma)')
        parser.add_argument('--output', help='Output directory')
        parser.add_argument('--record', action='store_true', help='Store every cell in the registry')
        parser.add_argument('--strict', action='store_true', help='Exit with status 3 when a cell fails')

    def handle(self, *args, **options):
        try:
            data = apply_overrides(load_config(options['config']), options['overrides'])
            cells = table1_harness(data, alpha_r=options['alpha_r'], gamma=options['gamma'],
                                   output_dir=options['output'], record=options['record'])
        except ConfigError as exc:
            raise CommandError(str(exc), returncode=CONFIG_ERROR)

        self.stdout.write(format_table_markdown(cells))
        failed = [c for c in cells if c.failed]
        for c in failed:
            self.stderr.write(self.style.ERROR(
                f'alpha_r={c.alpha_r:g} gamma={c.gamma:g}: {FAILED_CELL} at lambda={c.final_lambda:.6g} {c.message}'))
        if failed and options['strict']:
            raise CommandError(f'{len(failed)} of {len(cells)} cells failed', returncode=UNFINISHED)
        self.stdout.write(self.style.SUCCESS(f'{len(cells) - len(failed)} of {len(cells)} cells completed'))
