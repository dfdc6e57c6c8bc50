"""
Exceptions raised by the ThirdMedium solver library.

Every error carries enough context (element id, quadrature point, line number,
pivot dof) for the CLI to print a useful message without a traceback.
"""


class ThirdMediumError(Exception):
    """Base class for all solver errors."""


class MeshFormatError(ThirdMediumError):
    """Malformed mesh file."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f'line {line}: {message}'
        super().__init__(message)


class MeshValidationError(ThirdMediumError):
    """Mesh failed validation (inverted or degenerate elements, broken sets)."""

    def __init__(self, message, element_ids=()):
        self.element_ids = tuple(element_ids)
        super().__init__(message)


class InvertedElementError(ThirdMediumError):
    """Reference Jacobian determinant is not positive."""

    def __init__(self, det, element=None):
        self.det = float(det)
        self.element = element
        where = f' in element {element}' if element is not None else ''
        super().__init__(f'Inverted element{where}: det(G) = {self.det:.6g}')


class BarrierViolation(ThirdMediumError):
    """Volume ratio J dropped to zero or below."""

    def __init__(self, J, element=None, qp=None):
        self.J = float(J)
        self.element = element
        self.qp = qp
        where = ''
        if element is not None:
            where = f' in element {element}'
            if qp is not None:
                where += f' at quadrature point {qp}'
        super().__init__(f'Barrier violation{where}: J = {self.J:.6g}')


class NonConvergenceError(ThirdMediumError):
    """Newton iteration did not reach the tolerance."""

    def __init__(self, iterations, residual):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f'Newton did not converge after {iterations} iterations '
            f'(|R| = {residual:.3e})'
        )


class SingularSystemError(ThirdMediumError):
    """Linear system could not be factorized."""

    def __init__(self, message, dof=None):
        self.dof = dof
        if dof is not None:
            message = f'{message} (pivot near dof {dof})'
        super().__init__(message)


class ProbeError(ThirdMediumError):
    """Probe point could not be located in the mesh."""


class InterpenetrationError(ThirdMediumError):
    """Facing surfaces crossed each other."""

    def __init__(self, separation, sample=None):
        self.separation = float(separation)
        self.sample = sample
        where = f' at sample {sample}' if sample is not None else ''
        super().__init__(f'Surfaces interpenetrate{where}: separation = {self.separation:.6g}')


class OracleError(ThirdMediumError):
    """Finite-difference stencil produced non-finite values."""

    def __init__(self, message, entry=None):
        self.entry = entry
        if entry is not None:
            message = f'{message} (entry {entry})'
        super().__init__(message)


class ConfigError(ThirdMediumError):
    """Invalid scenario configuration."""

    def __init__(self, message, errors=None):
        self.errors = errors or {}
        super().__init__(message)
