"""
Views for the run registry.

Read-only JSON endpoints:
- Run list (filter by scenario and status)
- Run detail with its probe rows
- CSV export of a run's probe rows (same columns as probe.csv)
"""
import csv
import json

from django.http import HttpResponse, JsonResponse
from django.views.generic import DetailView, ListView

from .models import SimulationRun
from .runner import PROBE_COLUMNS


def _run_summary(run):
    return {
        'id': run.pk,
        'name': run.name,
        'scenario': run.scenario,
        'status': run.status,
        'final_lambda': run.final_lambda,
        'total_iterations': run.total_iterations,
        'wall_time_s': run.wall_time_s,
        'output_dir': run.output_dir,
        'created_at': run.created_at.isoformat(),
    }


class RunListView(ListView):
    """
    List of recorded runs, newest first.
    Supports filtering by scenario and status.
    """
    model = SimulationRun

    def get_queryset(self):
        queryset = super().get_queryset()

        scenario = self.request.GET.get('scenario', '')
        if scenario:
            queryset = queryset.filter(scenario=scenario)

        status = self.request.GET.get('status', '')
        if status:
            queryset = queryset.filter(status=status)

        return queryset

    def render_to_response(self, context, **response_kwargs):
        runs = [_run_summary(run) for run in context['object_list']]
        return JsonResponse({'count': len(runs), 'runs': runs})


class RunDetailView(DetailView):
    """
    One run with its message, effective config and probe rows.
    """
    model = SimulationRun

    def render_to_response(self, context, **response_kwargs):
        run = context['object']
        data = _run_summary(run)
        data['message'] = run.message
        data['config'] = json.loads(run.config) if run.config else None
        data['steps'] = [
            {'step': s.step, 'lambda': s.lam, 'gap': s.gap,
             'newton_iters': s.newton_iters, 'bisections': s.bisections}
            for s in run.steps.all()
        ]
        return JsonResponse(data)


class ExportProbeView(DetailView):
    """
    Probe rows of a run as CSV.
    """
    model = SimulationRun

    def render_to_response(self, context, **response_kwargs):
        run = context['object']
        response = HttpResponse(content_type='text/csv')
        response['Content-Disposition'] = f'attachment; filename="{run.name}_probe.csv"'
        writer = csv.writer(response, lineterminator='\n')
        writer.writerow(PROBE_COLUMNS)
        for s in run.steps.all():
            writer.writerow([s.step, f'{s.lam:.17g}', '' if s.gap is None else f'{s.gap:.17g}',
                             s.newton_iters, s.bisections])
        return response
