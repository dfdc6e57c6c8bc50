"""
Check a scenario config and its mesh without solving.
"""
from django.core.management.base import BaseCommand, CommandError

from core.config import load_problem
from core.exceptions import ConfigError, ThirdMediumError
from core.mesh import validate_mesh

from .run import CONFIG_ERROR


class Command(BaseCommand):
    help = 'Validate a scenario config: forms, mesh quality, set references and probe'

    def add_arguments(self, parser):
        parser.add_argument('config', help='Config file path or built-in config name')
        parser.add_argument('--set', dest='overrides', action='append', default=[], metavar='KEY=VALUE',
                            help='Override a config key (dotted path, JSON value); repeatable')

    def handle(self, *args, **options):
        try:
            problem = load_problem(options['config'], options['overrides'])
            assembler = problem.assembler()
        except ConfigError as exc:
            raise CommandError(str(exc), returncode=CONFIG_ERROR)
        except ThirdMediumError as exc:
            raise CommandError(f'Invalid problem: {exc}', returncode=CONFIG_ERROR)

        mesh = problem.mesh
        report = validate_mesh(mesh, points_per_axis=problem.points_per_axis)
        self.stdout.write(f'{problem.name} ({problem.scenario})')
        self.stdout.write(f'  nodes: {mesh.n_nodes}, elements: {mesh.n_elements} '
                          f'({len(mesh.solid_elements())} solid, {len(mesh.medium_elements())} third medium)')
        self.stdout.write(f'  dofs: {assembler.dofmap.n_dofs} ({len(assembler.dofmap.free)} free)')
        self.stdout.write(f'  min det(G): {report.min_detG.min():.6g}')
        self.stdout.write(f'  node sets: {", ".join(sorted(mesh.node_sets))}')
        if mesh.medium_groups():
            self.stdout.write(f'  third-medium groups: {", ".join(sorted(mesh.medium_groups()))}')
        self.stdout.write(f'  schedule: {problem.schedule.n_steps} steps, tol_rel={problem.settings.tol_rel:g}, '
                          f'tol_abs={problem.settings.tol_abs:g}')
        self.stdout.write(self.style.SUCCESS('Config is valid'))
