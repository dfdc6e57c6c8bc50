"""
Admin configuration for the run registry.
"""
from django.contrib import admin
from .models import SimulationRun, StepRecord


class StepRecordInline(admin.TabularInline):
    """Probe rows shown on the run page."""
    model = StepRecord
    extra = 0
    readonly_fields = ['step', 'lam', 'gap', 'newton_iters', 'bisections']
    can_delete = False


@admin.register(SimulationRun)
class SimulationRunAdmin(admin.ModelAdmin):
    """Admin interface for SimulationRun model."""
    list_display = ['name', 'scenario', 'status', 'final_lambda', 'total_iterations', 'wall_time_s', 'created_at']
    list_filter = ['status', 'scenario']
    search_fields = ['name', 'scenario', 'message']
    readonly_fields = ['created_at']
    inlines = [StepRecordInline]
    date_hierarchy = 'created_at'


@admin.register(StepRecord)
class StepRecordAdmin(admin.ModelAdmin):
    """Admin interface for StepRecord model."""
    list_display = ['run', 'step', 'lam', 'gap', 'newton_iters', 'bisections']
    list_filter = ['run__scenario']
    search_fields = ['run__name']
