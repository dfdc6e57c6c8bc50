"""
Load-controlled Newton-Raphson continuation.

Contains:
- NewtonSettings, LoadSchedule
- StepReport, BisectionEvent, SolveReport
- linear_solve (sparse LU with pivot diagnostics)
- newton_solve_step (one load increment, prescribed-increment predictor)
- run_schedule (incremental loading with step bisection)

The load factor is tracked as a Fraction so halved increments add up to
exactly 1.
"""
import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .exceptions import BarrierViolation, NonConvergenceError, SingularSystemError

logger = logging.getLogger(__name__)

PIVOT_RTOL = 1e-12


@dataclass(frozen=True)
class NewtonSettings:
    tol_rel: float = 1e-8
    tol_abs: float = 1e-10
    max_iter: int = 25
    max_bisections: int = 8

    def __post_init__(self):
        if not (self.tol_rel > 0 and self.tol_abs > 0):
            raise ValueError('Newton tolerances must be positive')
        if self.max_iter < 1:
            raise ValueError('max_iter must be at least 1')
        if self.max_bisections < 0:
            raise ValueError('max_bisections must be non-negative')


@dataclass(frozen=True)
class LoadSchedule:
    """``n_steps`` equal increments of lambda; ``max_steps`` stops early after that many accepted steps."""
    n_steps: int = 10
    max_steps: int = None

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError('n_steps must be at least 1')
        if self.max_steps is not None and self.max_steps < 1:
            raise ValueError('max_steps must be at least 1')

    @property
    def increment(self):
        return Fraction(1, self.n_steps)


@dataclass
class StepReport:
    step: int
    lam: float
    iterations: int
    residuals: list
    bisections: int = 0


@dataclass
class BisectionEvent:
    lam_from: float
    lam_to: float
    reason: str


@dataclass
class SolveReport:
    steps: list = field(default_factory=list)
    bisection_events: list = field(default_factory=list)
    final_lambda: float = 0.0
    completed: bool = False
    wall_time: float = 0.0
    message: str = ''

    @property
    def iterations(self):
        return [s.iterations for s in self.steps]

    @property
    def total_iterations(self):
        return sum(self.iterations)

    @property
    def mean_iterations(self):
        return self.total_iterations / len(self.steps) if self.steps else 0.0

    @property
    def status(self):
        if self.completed:
            return 'completed'
        return 'partial' if self.steps else 'failed'


def linear_solve(K, rhs):
    """Direct sparse solve of K x = rhs; singular factorizations raise SingularSystemError."""
    rhs = np.asarray(rhs, dtype=float)
    n = rhs.shape[0]
    if n == 0:
        return np.zeros(0)
    K = sparse.csc_matrix(K)
    try:
        lu = splu(K)
    except RuntimeError as exc:
        raise SingularSystemError(f'Sparse factorization failed: {exc}') from exc

    pivots = np.abs(lu.U.diagonal())
    scale = pivots.max() if pivots.size else 0.0
    small = np.flatnonzero(pivots <= PIVOT_RTOL * scale)
    if scale == 0.0 or small.size:
        index = int(small[0]) if small.size else 0
        raise SingularSystemError('Tangent matrix is singular', dof=int(lu.perm_c[index]))

    x = lu.solve(rhs)
    if not np.all(np.isfinite(x)):
        raise SingularSystemError('Linear solve produced non-finite values')
    return x


def newton_solve_step(assembler, u, lam, settings):
    """
    Advance displacement ``u`` (all dofs) to load factor ``lam``.

    The first iteration moves the change of the prescribed values to the
    right-hand side through the free/constrained coupling block; afterwards
    plain Newton iterations run until
    ``|R| <= max(tol_abs, tol_rel * |R0|)`` with R0 the first right-hand side.
    Returns the new displacement and the residual history.
    """
    dm = assembler.dofmap
    free, con = dm.free, dm.constrained
    u = np.array(u, dtype=float)
    _, target = assembler.prescribed(lam)
    du_c = target - u[con]

    system = assembler.system(u, lam)
    rhs = -(system.R + system.K_fc @ du_c)
    r0 = float(np.linalg.norm(rhs))
    history = [r0]
    if r0 <= settings.tol_abs:
        u[con] = target
        return u, history

    tol = max(settings.tol_abs, settings.tol_rel * r0)
    for iteration in range(1, settings.max_iter + 1):
        du = linear_solve(system.K, rhs)
        u[free] += du
        u[con] = target
        system = assembler.system(u, lam)
        r = float(np.linalg.norm(system.R))
        history.append(r)
        logger.debug('lambda=%.6g iteration %d |R|=%.3e', float(lam), iteration, r)
        if r <= tol:
            return u, history
        rhs = -system.R
    raise NonConvergenceError(settings.max_iter, history[-1])


def run_schedule(assembler, schedule, settings, callback=None):
    """
    Ramp lambda from 0 to 1 in ``schedule.n_steps`` increments.

    A failed increment (nonconvergence, barrier violation, singular tangent)
    is halved and retried, at most ``settings.max_bisections`` times in a
    row; after a success the increment grows back towards the nominal one.
    ``callback(step, lam, u, step_report)`` runs after each accepted step.
    Returns the last accepted displacement and the SolveReport.
    """
    started = time.perf_counter()
    report = SolveReport()
    u = np.zeros(assembler.dofmap.n_dofs)
    lam = Fraction(0)
    nominal = schedule.increment
    inc = nominal
    depth = 0
    attempts = 0

    while lam < 1:
        if schedule.max_steps is not None and len(report.steps) >= schedule.max_steps:
            report.message = f'Stopped after {schedule.max_steps} steps'
            break
        target = min(lam + inc, Fraction(1))
        try:
            u_new, history = newton_solve_step(assembler, u, target, settings)
        except (NonConvergenceError, BarrierViolation, SingularSystemError) as exc:
            depth += 1
            attempts += 1
            report.bisection_events.append(BisectionEvent(float(lam), float(target), str(exc)))
            if depth > settings.max_bisections:
                report.message = (f'Bisections exhausted at lambda={float(target):.6g}; '
                                  f'last converged lambda={float(lam):.6g}: {exc}')
                logger.error(report.message)
                break
            inc = inc / 2
            logger.warning('Step to lambda=%.6g failed (%s); retrying with increment %.6g',
                           float(target), exc, float(inc))
            continue

        u, lam = u_new, target
        step = StepReport(step=len(report.steps) + 1, lam=float(lam),
                          iterations=len(history) - 1, residuals=history, bisections=attempts)
        report.steps.append(step)
        logger.info('Step %d: lambda=%.6g, %d iterations, |R|=%.3e',
                    step.step, step.lam, step.iterations, history[-1])
        if callback is not None:
            callback(step.step, float(lam), u, step)
        depth = 0
        attempts = 0
        inc = min(inc * 2, nominal)

    report.final_lambda = float(lam)
    report.completed = lam == 1
    report.wall_time = time.perf_counter() - started
    return u, report
