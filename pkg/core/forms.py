"""
Forms for scenario configurations.

Each section of a JSON scenario config is bound to one of these forms:
- ScenarioForm (built-in scenario or mesh file)
- SolidMaterialForm, ThirdMediumForm, LoadGroupForm (materials)
- DirichletForm, TractionForm (boundary conditions)
- ScheduleForm (load stepping and Newton settings)
- OutputForm (VTK cadence, gap probe)
- Table1Form (parameter grid for the gap table)
"""
from django import forms

from .assembly import DirichletKind
from .material import DerivativeProvider, RegKind
from .scenarios import SCENARIOS
from .validators import (
    PositiveListValidator, VectorValidator, validate_components, validate_load_window,
    validate_name, validate_params, validate_positive,
)


class ScenarioForm(forms.Form):
    """
    Form selecting the geometry: a built-in scenario (with builder parameters)
    or a ``.tmmesh`` file, but not both.
    """
    kind = forms.ChoiceField(
        choices=[('', '---')] + [(name, name) for name in SCENARIOS],
        required=False,
    )
    mesh = forms.CharField(required=False)
    params = forms.JSONField(required=False, validators=[validate_params])

    def clean(self):
        cleaned_data = super().clean()
        kind = cleaned_data.get('kind')
        mesh = cleaned_data.get('mesh')
        if bool(kind) == bool(mesh):
            raise forms.ValidationError('Give exactly one of "kind" and "mesh".')
        if mesh and cleaned_data.get('params'):
            raise forms.ValidationError('Builder parameters only apply to built-in scenarios.')
        cleaned_data['params'] = cleaned_data.get('params') or {}
        return cleaned_data


class SolidMaterialForm(forms.Form):
    """
    Neo-Hookean parameters of one solid body.
    """
    body = forms.IntegerField(min_value=0)
    K = forms.FloatField(validators=[validate_positive])
    mu = forms.FloatField(validators=[validate_positive])


class ThirdMediumForm(forms.Form):
    """
    Third-medium parameters shared by all medium groups.
    """
    K = forms.FloatField(validators=[validate_positive])
    mu = forms.FloatField(validators=[validate_positive])
    gamma = forms.FloatField(validators=[validate_positive])
    alpha_r = forms.FloatField(min_value=0, required=False)
    reg_kind = forms.ChoiceField(choices=[(k.value, k.name) for k in RegKind], required=False)

    def clean(self):
        cleaned_data = super().clean()
        if cleaned_data.get('alpha_r') is None:
            cleaned_data['alpha_r'] = 0.0
        cleaned_data['reg_kind'] = cleaned_data.get('reg_kind') or RegKind.SKEW_GRADIENT.value
        return cleaned_data


class LoadGroupForm(forms.Form):
    """
    Pneumatic pressure of one third-medium group and its lambda window.
    """
    name = forms.CharField(validators=[validate_name])
    pbar = forms.FloatField()
    start = forms.FloatField(required=False, validators=[validate_load_window])
    end = forms.FloatField(required=False, validators=[validate_load_window])

    def clean(self):
        cleaned_data = super().clean()
        start = cleaned_data.get('start')
        end = cleaned_data.get('end')
        cleaned_data['start'] = 0.0 if start is None else start
        cleaned_data['end'] = 1.0 if end is None else end
        if not cleaned_data['start'] < cleaned_data['end']:
            raise forms.ValidationError('Load window needs start < end.')
        return cleaned_data


class DirichletForm(forms.Form):
    """
    Prescribed displacement on a node set: fixed components or a rigid rotation.
    """
    node_set = forms.CharField(validators=[validate_name])
    kind = forms.ChoiceField(choices=[(k.value, k.name) for k in DirichletKind], required=False)
    components = forms.JSONField(required=False, validators=[validate_components])
    value = forms.FloatField(required=False)
    axis = forms.JSONField(required=False, validators=[VectorValidator(nonzero=True)])
    center = forms.JSONField(required=False, validators=[VectorValidator()])
    angle = forms.FloatField(required=False)

    def clean(self):
        cleaned_data = super().clean()
        kind = cleaned_data.get('kind') or DirichletKind.FIXED.value
        cleaned_data['kind'] = kind
        if kind == DirichletKind.ROTATION.value:
            if self.data.get('axis') is None or cleaned_data.get('angle') is None:
                raise forms.ValidationError('Rotation conditions need "axis" and "angle".')
            cleaned_data['components'] = [0, 1, 2]
        else:
            if self.data.get('angle') is not None or self.data.get('axis') is not None:
                raise forms.ValidationError('"axis" and "angle" only apply to rotation conditions.')
            cleaned_data['components'] = cleaned_data.get('components') or [0, 1, 2]
        if cleaned_data.get('value') is None:
            cleaned_data['value'] = 0.0
        cleaned_data['center'] = cleaned_data.get('center') or [0.0, 0.0, 0.0]
        cleaned_data['angle'] = cleaned_data.get('angle') or 0.0
        return cleaned_data


class TractionForm(forms.Form):
    """
    Constant traction (force per reference area) on a side set, ramped by lambda.
    """
    side_set = forms.CharField(validators=[validate_name])
    traction = forms.JSONField(validators=[VectorValidator()])


class ScheduleForm(forms.Form):
    """
    Load stepping and Newton settings; unset values fall back to settings.SOLVER.
    """
    n_steps = forms.IntegerField(min_value=1)
    max_steps = forms.IntegerField(min_value=1, required=False)
    tol_rel = forms.FloatField(required=False, validators=[validate_positive])
    tol_abs = forms.FloatField(required=False, validators=[validate_positive])
    max_iter = forms.IntegerField(min_value=1, required=False)
    max_bisections = forms.IntegerField(min_value=0, required=False)
    points_per_axis = forms.IntegerField(min_value=2, max_value=4, required=False)
    workers = forms.IntegerField(min_value=1, required=False)
    provider = forms.ChoiceField(choices=[(p.value, p.name) for p in DerivativeProvider], required=False)


class OutputForm(forms.Form):
    """
    Output controls: VTK cadence (0 disables the series) and gap probe points.
    """
    vtk_every = forms.IntegerField(min_value=0, required=False)
    probe_a = forms.JSONField(required=False, validators=[VectorValidator()])
    probe_b = forms.JSONField(required=False, validators=[VectorValidator()])
    directory = forms.CharField(required=False)

    def clean(self):
        cleaned_data = super().clean()
        if (cleaned_data.get('probe_a') is None) != (cleaned_data.get('probe_b') is None):
            raise forms.ValidationError('Give both probe points or neither.')
        if cleaned_data.get('vtk_every') is None:
            cleaned_data['vtk_every'] = 1
        return cleaned_data


class Table1Form(forms.Form):
    """
    Regularization weight and stiffness ratio grid for the gap table.
    """
    alpha_r = forms.JSONField(validators=[PositiveListValidator()])
    gamma = forms.JSONField(validators=[PositiveListValidator()])
