import django.core.validators
import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='SimulationRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('name', models.CharField(max_length=200)),
                ('scenario', models.CharField(help_text='Built-in scenario name or "mesh"', max_length=100)),
                ('config', models.TextField(help_text='Effective JSON config, overrides applied')),
                ('status', models.CharField(choices=[('completed', 'Completed'), ('partial', 'Partial'), ('failed', 'Failed')], max_length=20)),
                ('final_lambda', models.FloatField(validators=[django.core.validators.MinValueValidator(0), django.core.validators.MaxValueValidator(1)])),
                ('total_iterations', models.PositiveIntegerField(default=0)),
                ('wall_time_s', models.FloatField(default=0.0, validators=[django.core.validators.MinValueValidator(0)])),
                ('output_dir', models.CharField(blank=True, max_length=500)),
                ('message', models.TextField(blank=True, help_text='Diagnostic of unfinished runs')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'verbose_name': 'Simulation run',
                'verbose_name_plural': 'Simulation runs',
                'ordering': ['-created_at', '-id'],
            },
        ),
        migrations.CreateModel(
            name='StepRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('step', models.PositiveIntegerField()),
                ('lam', models.FloatField(validators=[django.core.validators.MinValueValidator(0), django.core.validators.MaxValueValidator(1)])),
                ('gap', models.FloatField(blank=True, null=True)),
                ('newton_iters', models.PositiveIntegerField(default=0)),
                ('bisections', models.PositiveIntegerField(default=0)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='steps', to='core.simulationrun')),
            ],
            options={
                'verbose_name': 'Step record',
                'verbose_name_plural': 'Step records',
                'ordering': ['run', 'step'],
                'unique_together': {('run', 'step')},
            },
        ),
    ]
