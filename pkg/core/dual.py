"""
Second-order forward-mode dual numbers ("jets").

A Jet carries a value together with its gradient and Hessian with respect to
``n`` seed variables. Arithmetic follows the usual dual-number rules extended
to second order, so an energy written with ordinary operators returns its
exact first and second derivatives. Values may be arrays: the leading axes are
a batch (typically quadrature points) and every operation broadcasts over it.

A Hessian of ``None`` stands for an exact zero and is only materialized once a
nonlinear operation produces curvature.
"""
import numpy as np


def _outer(a, b):
    return a[..., :, None] * b[..., None, :]


def _add_hess(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a + b


def _scale_hess(h, c):
    if h is None:
        return None
    return h * np.asarray(c)[..., None, None]


class Jet:
    """Value, gradient (..., n) and Hessian (..., n, n) of a scalar quantity."""

    __array_priority__ = 1000

    def __init__(self, val, grad, hess=None):
        self.val = np.asarray(val, dtype=float)
        self.grad = np.asarray(grad, dtype=float)
        self.hess = hess

    @classmethod
    def variables(cls, values):
        """Seed one Jet per entry of the last axis of ``values`` (shape (..., n))."""
        values = np.asarray(values, dtype=float)
        n = values.shape[-1]
        eye = np.eye(n)
        batch = values.shape[:-1]
        return [cls(values[..., a], np.broadcast_to(eye[a], batch + (n,))) for a in range(n)]

    @property
    def n(self):
        return self.grad.shape[-1]

    def hessian(self):
        if self.hess is None:
            return np.zeros(self.grad.shape + self.grad.shape[-1:])
        return np.broadcast_to(self.hess, self.grad.shape + self.grad.shape[-1:])

    def _chain(self, f0, f1, f2):
        """Compose with a scalar function given its value and first two derivatives."""
        grad = f1[..., None] * self.grad
        hess = _add_hess(_scale_hess(self.hess, f1), f2[..., None, None] * _outer(self.grad, self.grad))
        return Jet(f0, grad, hess)

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.val + other.val, self.grad + other.grad, _add_hess(self.hess, other.hess))
        return Jet(self.val + other, self.grad, self.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.val, -self.grad, _scale_hess(self.hess, -1.0))

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            grad = self.val[..., None] * other.grad + other.val[..., None] * self.grad
            cross = _outer(self.grad, other.grad)
            hess = _add_hess(_add_hess(_scale_hess(other.hess, self.val), _scale_hess(self.hess, other.val)),
                             cross + np.swapaxes(cross, -1, -2))
            return Jet(self.val * other.val, grad, hess)
        c = np.asarray(other, dtype=float)
        return Jet(self.val * c, self.grad * c[..., None], _scale_hess(self.hess, c))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other, dtype=float))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def reciprocal(self):
        v = self.val
        return self._chain(1.0 / v, -1.0 / v ** 2, 2.0 / v ** 3)

    def __pow__(self, p):
        if isinstance(p, Jet):
            raise TypeError('Jet exponents are not supported')
        v = self.val
        if p == 2:
            return self * self
        return self._chain(v ** p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))

    def log(self):
        v = self.val
        return self._chain(np.log(v), 1.0 / v, -1.0 / v ** 2)

    def exp(self):
        e = np.exp(self.val)
        return self._chain(e, e, e)

    def __repr__(self):
        return f'Jet(val={self.val!r}, n={self.n})'


def jet_sum(terms):
    total = None
    for t in terms:
        total = t if total is None else total + t
    return total


def det3(M):
    """Determinant of a 3x3 nested list of Jets (or arrays) by cofactor expansion."""
    return (M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1])
            - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0])
            + M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]))
