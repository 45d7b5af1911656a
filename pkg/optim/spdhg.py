"""
Scaled primal-dual hybrid gradient for

    min_{x >= 0}  KL(Hx + b; g) + beta TV(x)

The dual variable lives in a product of unit balls, one per pixel, with
beta kept explicit in the updates. The diagonal scaling comes from the
split gradient u = V(x) - U(x), whose positive part is tracked by the
recursive vectors p, q, r instead of materialising products of shrink
factors.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .exceptions import DimensionMismatchError, DivergenceError, DomainError, InfeasibleDualError, NonFiniteError, OperatorAssumptionError
from .imaging import BlurOperator, SplitGradient, check_image, div_op, grad_op, kl_split_gradient, kl_value, tv_value
from .metric import DiagMetric, energy_norm, project_nonneg_scaled
from .solver import (DEFAULT_NU1, DEFAULT_NU2, DEFAULT_RHO_MAX, StopRule, Trace, TraceRecord, StopMonitor,
                     effective_step, initial_level, level_alpha, ssl_update)
from .stepsize import PolySchedule

logger = logging.getLogger(__name__)

DUAL_TOLERANCE = 1e-12
GAP_TOLERANCE = 1e-10

MODE_SCHEDULE = 'schedule'
MODE_SSL = 'ssl'

# Method name -> (stepsize mode, scaled metric).
METHODS = {
    'PDHG': (MODE_SCHEDULE, False),
    'SPDHG': (MODE_SCHEDULE, True),
    'SL': (MODE_SSL, False),
    'SSL': (MODE_SSL, True),
}


class DualUpdate(NamedTuple):
    y: np.ndarray
    s: np.ndarray


def _check_finite(name, value):
    if not np.all(np.isfinite(value)):
        raise NonFiniteError(f'{name} contains non-finite entries.')


def block_norms(y):
    return np.hypot(y[0], y[1])


def check_dual_feasible(y, tol=DUAL_TOLERANCE):
    worst = float(block_norms(y).max())
    if worst > 1.0 + tol:
        raise InfeasibleDualError(f'Dual block norm {worst:.15g} exceeds 1.')


def dual_update(y, x, tau, beta, A=grad_op) -> DualUpdate:
    """
    y~ = y + beta tau A x, s_l = 1 / max(1, |y~_l|), y+_l = s_l y~_l.

    This is the resolvent of the indicator of the product of unit balls,
    i.e. a blockwise radial projection.
    """
    if not (tau > 0 and beta >= 0):
        raise ValueError(f'Need tau > 0 and beta >= 0, got tau={tau}, beta={beta}.')
    _check_finite('x', x)
    _check_finite('y', y)
    y_tilde = y + beta * tau * A(x)
    s = 1.0 / np.maximum(1.0, block_norms(y_tilde))
    return DualUpdate(y_tilde * s, s)


def epsilon_of_dual(x, y_plus, beta, A=grad_op):
    """
    sigma = beta TV(x) - beta <y+, Ax>, the accuracy of beta A^T y+ as a
    subgradient of beta TV at x. Nonnegative for feasible y+.
    """
    check_dual_feasible(y_plus)
    Ax = A(x)
    tv = float(np.sum(block_norms(Ax)))
    sigma = beta * (tv - float(np.sum(y_plus * Ax)))
    if sigma < -GAP_TOLERANCE * max(1.0, beta * tv):
        raise InfeasibleDualError(f'Negative dual gap {sigma:.6g}.')
    return max(sigma, 0.0)


@dataclass
class AuxDecomp:
    p: np.ndarray
    q: np.ndarray
    r: np.ndarray

    @classmethod
    def zeros(cls, shape):
        return cls(np.zeros(shape), np.zeros(shape), np.zeros(shape))

    @property
    def total(self):
        return 2.0 * self.p + self.q + self.r


def update_aux(aux: AuxDecomp, x, s, tau, beta) -> AuxDecomp:
    """
    p_ij = (p_ij + b^2 tau x_ij) s_ij,  q_ij = (q_ij + b^2 tau x_ij) s_{i-1,j},
    r_ij = (r_ij + b^2 tau x_ij) s_{i,j-1}, indices wrapping periodically.
    """
    increment = beta * beta * tau * np.asarray(x, dtype=float)
    return AuxDecomp(
        p=(aux.p + increment) * s,
        q=(aux.q + increment) * np.roll(s, 1, axis=0),
        r=(aux.r + increment) * np.roll(s, 1, axis=1),
    )


def positive_part(aux: AuxDecomp, Ht_e):
    V = Ht_e + aux.total
    if not np.all(V > 0):
        raise OperatorAssumptionError(f'Positive part V has {int(np.sum(V <= 0))} nonpositive entries; H^T e > 0 is required.')
    return V


def build_scaling(x, V, L) -> DiagMetric:
    """
    D_ll = min(L, max(1/L, x_l / V_l)).
    """
    if not np.all(V > 0):
        raise OperatorAssumptionError('Scaling needs a strictly positive V.')
    return DiagMetric(np.asarray(x, dtype=float) / V, L)


def subgradient(grad_f0, y_plus, beta, At=div_op):
    return grad_f0 + beta * At(y_plus)


def primal_update(x, D: DiagMetric, alpha, grad_f0, y_plus, beta, At=div_op):
    """
    x+ = max(0, x - alpha D (grad f0(x) + beta A^T y+)). Returns (x+, u).
    """
    _check_finite('grad f0', grad_f0)
    u = subgradient(grad_f0, y_plus, beta, At)
    return project_nonneg_scaled(x - alpha * D.apply(u), D), u


X0_POLICIES = ('data', 'flat')


@dataclass(frozen=True, eq=False)
class SPDHGProblem:
    """
    KL + beta TV deblurring instance. ``op.background`` holds b in the
    units of g.
    """
    g: np.ndarray
    op: BlurOperator
    beta: float
    x0_policy: str = 'data'
    eps_floor: float = 0.0

    def __post_init__(self):
        g = check_image(self.g)
        if g.shape != self.op.shape:
            raise DimensionMismatchError(f'Data shape {g.shape} does not match operator shape {self.op.shape}.')
        if np.any(g < 0):
            raise DomainError('Data g must be nonnegative.')
        if self.op.background == 0 and np.any(g <= 0):
            raise DomainError('With b = 0 the data must be strictly positive.')
        if not (math.isfinite(self.beta) and self.beta >= 0):
            raise ValueError(f'beta must be finite and nonnegative, got {self.beta}.')
        if self.x0_policy not in X0_POLICIES:
            raise ValueError(f'Unknown x0 policy {self.x0_policy!r}; choose one of {X0_POLICIES}.')
        if self.eps_floor < 0:
            raise ValueError('eps_floor must be nonnegative.')
        object.__setattr__(self, 'g', g)

    @property
    def shape(self):
        return self.g.shape

    @property
    def n(self):
        return self.g.size

    def initial_point(self):
        if self.x0_policy == 'flat':
            return np.full(self.shape, float(self.g.mean()))
        return self.g.copy()

    def objective(self, x):
        return kl_value(x, self.g, self.op) + self.beta * tv_value(x)

    def split_gradient(self, x) -> SplitGradient:
        return kl_split_gradient(x, self.g, self.op)


@dataclass(frozen=True)
class SPDHGParams:
    """
    ``schedule`` supplies tau_k and L_k in both modes and alpha_k in
    schedule mode. ``scaled=False`` forces L = 1 (D = I).
    """
    schedule: PolySchedule
    scaled: bool = True
    max_iter: int = 3000
    delta0: Optional[float] = None
    B: Optional[float] = None
    nu1: float = DEFAULT_NU1
    nu2: float = DEFAULT_NU2
    rho_max: float = DEFAULT_RHO_MAX
    stop: Optional[StopRule] = None
    log_every: int = 100


class IterationInfo(NamedTuple):
    """
    Everything computed in one iteration, handed to the optional callback.
    """
    k: int
    x: np.ndarray
    x_next: np.ndarray
    y_plus: np.ndarray
    s: np.ndarray
    aux: Optional[AuxDecomp]
    split: SplitGradient
    u: np.ndarray
    eps: float
    D: DiagMetric
    alpha: float
    step: float
    tau: float
    L: float
    f: float


@dataclass
class SPDHGResult:
    trace: Trace
    x: np.ndarray
    y: np.ndarray
    level_updates: int = 0


def spdhg_run(problem: SPDHGProblem, mode: str, params: SPDHGParams, y0=None,
              callback: Optional[Callable[[IterationInfo], None]] = None, label='') -> SPDHGResult:
    """
    Run the method from x0 = problem.initial_point() and y0 = 0.

    In ``schedule`` mode alpha_k comes from the schedule; in ``ssl`` mode
    from the level state machine with u = grad f0 + beta A^T y+ and
    eps_k = sigma_k.
    """
    if mode not in (MODE_SCHEDULE, MODE_SSL):
        raise ValueError(f'Unknown mode {mode!r}.')
    shape = problem.shape
    if y0 is not None and np.any(np.asarray(y0) != 0):
        raise ValueError('The recursive scaling requires y0 = 0.')

    schedule, beta = params.schedule, problem.beta
    x = problem.initial_point()
    y = np.zeros((2,) + shape)
    aux = AuxDecomp.zeros(shape) if params.scaled else None
    identity = DiagMetric.identity(shape)
    level = None
    trace = Trace(label=label)
    monitor = StopMonitor(params.stop)
    logger.info('Starting %s run (%s, %s), N=%d, beta=%g, max_iter=%d', label or 'SPDHG', mode,
                'scaled' if params.scaled else 'unscaled', shape[0], beta, params.max_iter)

    k = 0
    try:
        while k < params.max_iter:
            try:
                f_x = problem.objective(x)
                split = problem.split_gradient(x)
            except DomainError as exc:
                raise DomainError(f'Iteration {k}: {exc}') from exc
            if monitor.should_stop(f_x, x):
                logger.info('Stop rule fired at k=%d', k)
                break

            tau = float(schedule.tau(k))
            L = float(schedule.L(k)) if params.scaled else 1.0
            y_plus, s = dual_update(y, x, tau, beta)
            if params.scaled:
                aux = update_aux(aux, x, s, tau, beta)
                D = build_scaling(x, positive_part(aux, split.Ht_e), L)
            else:
                D = identity
            u = subgradient(split.value, y_plus, beta)
            eps = epsilon_of_dual(x, y_plus, beta)
            u_norm = float(np.linalg.norm(u))
            if u_norm > params.rho_max:
                trace.diverged_at = k
                logger.error('Divergence at k=%d: |u|=%g > %g', k, u_norm, params.rho_max)
                raise DivergenceError(k, u_norm, params.rho_max)

            record = TraceRecord(k=k, time_s=0.0, f=f_x, eps=eps, u_norm=u_norm)
            if mode == MODE_SCHEDULE:
                alpha = step = float(schedule.alpha(k))
            else:
                if level is None:
                    level = initial_level(f_x, u, D, params.delta0, params.B, params.nu1, params.nu2)
                level, _ = ssl_update(level, f_x, k)
                u_norm_D = energy_norm(u, D)
                alpha = level_alpha(f_x, level.f_lev, u_norm_D)
                step = effective_step(alpha, u_norm_D)
                record.delta, record.f_lev, record.level = level.delta, level.f_lev, level.l
                level = level.add_path(alpha)
            if not (math.isfinite(alpha) and alpha > 0):
                raise NonFiniteError(f'Invalid stepsize {alpha!r} at iteration {k}.')

            x_next, _ = primal_update(x, D, step, split.value, y_plus, beta)
            if problem.eps_floor > 0:
                x_next = np.maximum(x_next, problem.eps_floor)
            _check_finite('x', x_next)

            record.alpha = alpha
            record.time_s = trace.elapsed()
            trace.append(record)
            if callback is not None:
                callback(IterationInfo(k, x, x_next, y_plus, s, aux, split, u, eps, D, alpha, step, tau, L, f_x))
            if params.log_every and k % params.log_every == 0:
                logger.debug('k=%d f=%.10g eps=%.3g alpha=%.3g |u|=%.3g', k, f_x, eps, alpha, u_norm)

            x, y = x_next, y_plus
            k += 1
    except DivergenceError as exc:
        exc.trace = trace
        raise

    final = TraceRecord(k=k, time_s=trace.elapsed(), f=problem.objective(x))
    if level is not None:
        final.delta, final.f_lev, final.level = level.delta, level.f_lev, level.l
    trace.append(final)
    trace.x = x
    logger.info('Finished %s after %d iterations, f=%.10g', label or 'SPDHG', k, final.f)
    return SPDHGResult(trace=trace, x=x, y=y, level_updates=level.l if level else 0)


def run_method(problem: SPDHGProblem, method: str, schedule: PolySchedule, **kwargs) -> SPDHGResult:
    """
    Run one of PDHG, SPDHG, SL, SSL.
    """
    try:
        mode, scaled = METHODS[method]
    except KeyError:
        raise ValueError(f'Unknown method {method!r}; choose one of {tuple(METHODS)}.') from None
    callback = kwargs.pop('callback', None)
    params = SPDHGParams(schedule=schedule, scaled=scaled, **kwargs)
    return spdhg_run(problem, mode, params, callback=callback, label=method)
