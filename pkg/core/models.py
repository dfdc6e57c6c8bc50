"""
Models for the run registry.

Contains models for:
- SimulationRun (one `manage.py run --record` invocation and its summary)
- StepRecord (one accepted load step: lambda, gap, Newton iterations)
"""
from django.core.validators import MinValueValidator, MaxValueValidator
from django.db import models


class SimulationRun(models.Model):
    """
    Summary of one scheduled solve.
    """
    STATUS_CHOICES = [
        ('completed', 'Completed'),
        ('partial', 'Partial'),
        ('failed', 'Failed'),
    ]

    name = models.CharField(max_length=200)
    scenario = models.CharField(max_length=100, help_text='Built-in scenario name or "mesh"')
    config = models.TextField(help_text='Effective JSON config, overrides applied')
    status = models.CharField(max_length=20, choices=STATUS_CHOICES)
    final_lambda = models.FloatField(
        validators=[MinValueValidator(0), MaxValueValidator(1)]
    )
    total_iterations = models.PositiveIntegerField(default=0)
    wall_time_s = models.FloatField(default=0.0, validators=[MinValueValidator(0)])
    output_dir = models.CharField(max_length=500, blank=True)
    message = models.TextField(blank=True, help_text='Diagnostic of unfinished runs')
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created_at', '-id']
        verbose_name = 'Simulation run'
        verbose_name_plural = 'Simulation runs'

    def __str__(self):
        return f"{self.name} ({self.get_status_display()}, lambda={self.final_lambda:g})"


class StepRecord(models.Model):
    """
    Probe row of one accepted load step; step 0 is the reference state.
    """
    run = models.ForeignKey(
        SimulationRun,
        on_delete=models.CASCADE,
        related_name='steps'
    )
    step = models.PositiveIntegerField()
    lam = models.FloatField(
        validators=[MinValueValidator(0), MaxValueValidator(1)]
    )
    gap = models.FloatField(null=True, blank=True)
    newton_iters = models.PositiveIntegerField(default=0)
    bisections = models.PositiveIntegerField(default=0)

    class Meta:
        ordering = ['run', 'step']
        unique_together = [('run', 'step')]
        verbose_name = 'Step record'
        verbose_name_plural = 'Step records'

    def __str__(self):
        return f"{self.run.name} step {self.step} (lambda={self.lam:g})"
