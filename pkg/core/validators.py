"""
Custom validators for scenario configurations.

Field-level checks used by the forms in ``core/forms.py``; cross-field and
mesh-dependent checks live in the forms' ``clean()`` and in ``core/config.py``.
"""
import math

from django.core.exceptions import ValidationError
from django.utils.deconstruct import deconstructible


@deconstructible
class VectorValidator:
    """
    Validator for fixed-length lists of finite numbers (points, axes, tractions).
    """
    def __init__(self, length=3, nonzero=False):
        self.length = length
        self.nonzero = nonzero

    def __call__(self, value):
        """
        Validate the list.

        Args:
            value: The decoded JSON value

        Raises:
            ValidationError: If it is not a list of ``length`` finite numbers
        """
        if not isinstance(value, (list, tuple)) or len(value) != self.length:
            raise ValidationError(
                f'Expected a list of {self.length} numbers. Got {value!r}.'
            )
        for item in value:
            if isinstance(item, bool) or not isinstance(item, (int, float)) or not math.isfinite(item):
                raise ValidationError(f'Vector entries must be finite numbers. Got {item!r}.')
        if self.nonzero and not any(value):
            raise ValidationError('Vector must not be zero.')
        return value


@deconstructible
class PositiveListValidator:
    """
    Validator for non-empty lists of positive numbers (parameter grids).
    """
    def __init__(self, allow_zero=False):
        self.allow_zero = allow_zero

    def __call__(self, value):
        if not isinstance(value, (list, tuple)) or not value:
            raise ValidationError(f'Expected a non-empty list of numbers. Got {value!r}.')
        for item in value:
            if isinstance(item, bool) or not isinstance(item, (int, float)) or not math.isfinite(item):
                raise ValidationError(f'Grid entries must be finite numbers. Got {item!r}.')
            if item < 0 or (item == 0 and not self.allow_zero):
                raise ValidationError(f'Grid entries must be positive. Got {item}.')
        return value


def validate_components(value):
    """Validate a list of distinct displacement components 0, 1, 2."""
    if not isinstance(value, (list, tuple)) or not value:
        raise ValidationError(f'Components must be a non-empty list. Got {value!r}.')
    if any(isinstance(c, bool) or c not in (0, 1, 2) for c in value):
        raise ValidationError(f'Components must be 0, 1 or 2. Got {value!r}.')
    if len(set(value)) != len(value):
        raise ValidationError(f'Components must not repeat. Got {value!r}.')


def validate_positive(value):
    """Validate a strictly positive modulus or scale."""
    if not value > 0:
        raise ValidationError(f'Value must be positive. Got {value}.')


def validate_load_window(value):
    """Validate a lambda value inside [0, 1]."""
    if not 0 <= value <= 1:
        raise ValidationError(f'Load factor must be between 0 and 1. Got {value}.')


def validate_name(value):
    """Validate set and group names: one whitespace-free token, usable in mesh files."""
    if not value or any(ch.isspace() for ch in value) or ':' in value:
        raise ValidationError(f'Names must be non-empty and contain no whitespace or ":". Got "{value}".')


def validate_params(value):
    """Validate scenario builder parameters (a JSON object)."""
    if not isinstance(value, dict):
        raise ValidationError(f'Scenario parameters must be an object. Got {value!r}.')
