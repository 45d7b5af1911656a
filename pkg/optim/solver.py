"""
Scaled epsilon-subgradient projection method and the adaptive level (SSL)
stepsize state machine, both written against a generic problem oracle.
"""
import logging
import math
import time
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .exceptions import DivergenceError, NonFiniteError, ScheduleError
from .metric import DiagMetric, energy_norm, project_nonneg_scaled
from .stepsize import ClassicRule, PolySchedule, classic_step

logger = logging.getLogger(__name__)

DEFAULT_RHO_MAX = 1e12


@dataclass(frozen=True)
class ProblemOracle:
    """
    Callbacks describing min f(x) over X.

    ``eps_subgradient(x, k)`` returns a pair (u, eps) with u an
    eps-subgradient of f at x; ``project(x, D)`` returns P_{X, D^-1}(x)
    and must accept D=None for the metric-free projection of the starting point.
    """
    f_value: Callable
    eps_subgradient: Callable
    project: Callable = project_nonneg_scaled
    f_star: Optional[float] = None


@dataclass
class TraceRecord:
    k: int
    time_s: float
    f: float
    eps: Optional[float] = None
    alpha: Optional[float] = None
    u_norm: Optional[float] = None
    delta: Optional[float] = None
    f_lev: Optional[float] = None
    level: Optional[int] = None


@dataclass
class Trace:
    label: str = ''
    heuristic: bool = False
    records: list = field(default_factory=list)
    started: float = field(default_factory=time.perf_counter)
    diverged_at: Optional[int] = None
    x: Optional[np.ndarray] = field(default=None, repr=False)

    def elapsed(self):
        return time.perf_counter() - self.started

    def append(self, record):
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, index):
        return self.records[index]

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records], dtype=float)


@dataclass(frozen=True)
class IterState:
    x: np.ndarray
    k: int = 0
    u: Optional[np.ndarray] = None
    eps: float = 0.0
    D: Optional[DiagMetric] = None
    trace: Trace = field(default_factory=Trace)


def _draw_subgradient(oracle, x, k):
    u, eps = oracle.eps_subgradient(x, k)
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise NonFiniteError(f'Oracle returned a non-finite subgradient at iteration {k}.')
    if not (math.isfinite(eps) and eps >= 0):
        raise NonFiniteError(f'Oracle returned an invalid epsilon {eps!r} at iteration {k}.')
    return u, float(eps)


def _check_alpha(alpha, k):
    if not math.isfinite(alpha):
        raise NonFiniteError(f'Non-finite stepsize at iteration {k}.')
    if not alpha > 0:
        raise ScheduleError(f'Stepsize must be positive, got {alpha} at iteration {k}.')


def effective_step(alpha, u_norm_D):
    """
    alpha / max(1, ||u||_D), the stepsize actually applied by the normalized variant.
    """
    return alpha / max(1.0, u_norm_D)


def _advance(state, alpha, step, D, oracle, f_x=None, **extra):
    x, k = state.x, state.k
    if f_x is None:
        f_x = oracle.f_value(x)
    u, eps = _draw_subgradient(oracle, x, k)
    scale = 1.0 if step is None else step
    x_next = oracle.project(x - scale * D.apply(u), D)
    if not np.all(np.isfinite(x_next)):
        raise NonFiniteError(f'Projection produced a non-finite iterate at iteration {k}.')
    state.trace.append(TraceRecord(
        k=k, time_s=state.trace.elapsed(), f=float(f_x), eps=eps, alpha=float(alpha),
        u_norm=float(np.linalg.norm(u)), **extra
    ))
    return replace(state, x=x_next, k=k + 1, u=u, eps=eps, D=D)


def step_scaled(state: IterState, alpha: float, D: DiagMetric, oracle: ProblemOracle, f_x=None) -> IterState:
    """
    x+ = P_{X, D^-1}(x - alpha D u).
    """
    _check_alpha(alpha, state.k)
    return _advance(state, alpha, alpha, D, oracle, f_x)


def step_normalized(state: IterState, alpha: float, D: DiagMetric, oracle: ProblemOracle, f_x=None) -> IterState:
    """
    x+ = P_{X, D^-1}(x - alpha D u / max(1, ||u||_D)).
    """
    _check_alpha(alpha, state.k)
    x, k = state.x, state.k
    if f_x is None:
        f_x = oracle.f_value(x)
    u, eps = _draw_subgradient(oracle, x, k)
    step = effective_step(alpha, energy_norm(u, D))
    fixed = ProblemOracle(oracle.f_value, lambda _x, _k: (u, eps), oracle.project, oracle.f_star)
    return _advance(state, alpha, step, D, fixed, f_x)


# Adaptive level stepsize.

class LevelUpdate(Enum):
    NONE = 'none'
    DESCENT = 'descent'
    PATH = 'path'


@dataclass(frozen=True)
class LevelState:
    """
    Bookkeeping of the level algorithm.

    ``f_rec`` is the best value seen so far, ``f_ref`` the best value at the
    iteration ``k_l`` of the last level update, ``sigma`` the path length
    travelled since then.
    """
    B: float
    nu1: float
    nu2: float
    f_rec: float
    f_ref: float
    delta: float
    l: int = 0
    k_l: int = 0
    sigma: float = 0.0
    f_lev: float = math.nan

    def __post_init__(self):
        if not self.B > 0:
            raise ValueError(f'Path bound B must be positive, got {self.B}.')
        if not (0 < self.nu1 < 1 and 0 < self.nu2 < 1):
            raise ValueError('nu1 and nu2 must lie in (0, 1).')
        if not self.delta > 0:
            raise ValueError(f'delta must be positive, got {self.delta}.')
        if math.isnan(self.f_lev):
            object.__setattr__(self, 'f_lev', self.f_ref - self.delta)

    def add_path(self, alpha):
        return replace(self, sigma=self.sigma + alpha)


DEFAULT_NU1 = 0.5
DEFAULT_NU2 = 0.5

# Smallest delta, in units of eps * max(1, |f|), so that f_ref - delta stays below f_ref.
LEVEL_RESOLUTION = 64


def level_resolution(f):
    return LEVEL_RESOLUTION * np.finfo(float).eps * max(1.0, abs(f))


def initial_level(f0, u0, D0, delta0=None, B=None, nu1=DEFAULT_NU1, nu2=DEFAULT_NU2) -> LevelState:
    """
    Level state at k = 0 with f_rec = f_ref = f(x0).

    Defaults: delta0 = 0.9 f(x0) and B = 0.9 ||u0|| ||D0||_inf^(1/2).
    delta0 is raised to level_resolution(f0) when smaller.
    """
    if delta0 is None:
        delta0 = max(0.9 * f0, level_resolution(f0))
    elif 0 < delta0 < level_resolution(f0):
        delta0 = level_resolution(f0)
    if B is None:
        B = 0.9 * float(np.linalg.norm(u0)) * math.sqrt(D0.norm())
    return LevelState(B=B, nu1=nu1, nu2=nu2, f_rec=f0, f_ref=f0, delta=delta0)


def ssl_update(level: LevelState, f_x: float, k: int):
    """
    Record f(x_k), apply the sufficient-descent and path-length tests and
    set the new target level. Returns the new state and what happened.

    A path update shrinks delta by nu2 but never below level_resolution(f_rec),
    so the target level stays strictly below f_ref in floating point.
    """
    f_rec = min(level.f_rec, f_x)
    if f_x < level.f_ref - level.nu1 * level.delta:
        flag = LevelUpdate.DESCENT
        level = replace(level, f_rec=f_rec, f_ref=f_rec, l=level.l + 1, k_l=k, sigma=0.0)
    elif level.sigma > level.B:
        flag = LevelUpdate.PATH
        delta = max(level.nu2 * level.delta, level_resolution(f_rec))
        level = replace(level, f_rec=f_rec, f_ref=f_rec, delta=delta, l=level.l + 1, k_l=k, sigma=0.0)
    else:
        flag = LevelUpdate.NONE
        level = replace(level, f_rec=f_rec)
    level = replace(level, f_lev=level.f_ref - level.delta)
    if flag is not LevelUpdate.NONE:
        logger.debug('Level update %d at k=%d (%s): delta=%g f_lev=%g', level.l, k, flag.value, level.delta, level.f_lev)
    return level, flag


def level_alpha(f_x, f_lev, u_norm_D):
    return (f_x - f_lev) / max(1.0, u_norm_D)


def ssl_step(state: IterState, level: LevelState, D: DiagMetric, oracle: ProblemOracle, f_x=None):
    """
    alpha_k = (f(x_k) - f_lev) / max(1, ||u||_D), then the normalized step,
    then sigma += alpha_k.
    """
    x, k = state.x, state.k
    if f_x is None:
        f_x = oracle.f_value(x)
    u, eps = _draw_subgradient(oracle, x, k)
    u_norm_D = energy_norm(u, D)
    alpha = level_alpha(f_x, level.f_lev, u_norm_D)
    _check_alpha(alpha, k)
    fixed = ProblemOracle(oracle.f_value, lambda _x, _k: (u, eps), oracle.project, oracle.f_star)
    state = _advance(state, alpha, effective_step(alpha, u_norm_D), D, fixed, f_x,
                     delta=level.delta, f_lev=level.f_lev, level=level.l)
    return state, level.add_path(alpha)


# Driver.

@dataclass(frozen=True)
class ScheduleStrategy:
    schedule: PolySchedule
    normalized: bool = False


@dataclass(frozen=True)
class LevelStrategy:
    delta0: Optional[float] = None
    B: Optional[float] = None
    nu1: float = DEFAULT_NU1
    nu2: float = DEFAULT_NU2
    gamma_schedule: Optional[PolySchedule] = None


@dataclass(frozen=True)
class ClassicStrategy:
    rule: ClassicRule


@dataclass(frozen=True)
class StopRule:
    """
    Stop when the relative change of f (or of x) across ``window``
    iterations drops below ``tol``.
    """
    tol: float
    window: int = 10
    quantity: str = 'f'

    def __post_init__(self):
        if self.quantity not in ('f', 'x'):
            raise ValueError(f"StopRule quantity must be 'f' or 'x', got {self.quantity!r}.")
        if self.window < 1:
            raise ValueError('StopRule window must be at least 1.')


class StopMonitor:
    def __init__(self, rule):
        self.rule = rule
        self.history = deque(maxlen=rule.window + 1) if rule else None

    def should_stop(self, f_x, x):
        if self.rule is None:
            return False
        self.history.append(f_x if self.rule.quantity == 'f' else np.array(x, copy=True))
        if len(self.history) <= self.rule.window:
            return False
        old, new = self.history[0], self.history[-1]
        if self.rule.quantity == 'f':
            change = abs(new - old) / max(abs(new), np.finfo(float).tiny)
        else:
            change = np.linalg.norm(new - old) / max(np.linalg.norm(new), np.finfo(float).tiny)
        return change < self.rule.tol


def identity_builder(x, k, L):
    return DiagMetric.identity(np.shape(x))


def run(oracle: ProblemOracle, strategy, x0, D_builder=identity_builder, max_iter=3000,
        stop: Optional[StopRule] = None, rho_max=DEFAULT_RHO_MAX, label='', log_every=100) -> Trace:
    """
    Iterate the chosen strategy from x0. The trace holds one record per
    step plus a final record for the last iterate.
    """
    heuristic = isinstance(strategy, ClassicStrategy)
    trace = Trace(label=label, heuristic=heuristic)
    state = IterState(x=oracle.project(np.asarray(x0, dtype=float), None), trace=trace)
    level = None
    monitor = StopMonitor(stop)
    logger.info('Starting %s run (%s), max_iter=%d', label or type(strategy).__name__,
                'heuristic' if heuristic else 'certified', max_iter)

    try:
        while state.k < max_iter:
            k = state.k
            f_x = oracle.f_value(state.x)
            if monitor.should_stop(f_x, state.x):
                logger.info('Stop rule fired at k=%d', k)
                break

            match strategy:
                case ScheduleStrategy(schedule=schedule, normalized=normalized):
                    D = D_builder(state.x, k, float(schedule.L(k)))
                    alpha = float(schedule.alpha(k))
                    step = step_normalized if normalized else step_scaled
                    state = step(state, alpha, D, oracle, f_x)
                case LevelStrategy():
                    L = float(strategy.gamma_schedule.L(k)) if strategy.gamma_schedule else 1.0
                    D = D_builder(state.x, k, L)
                    if level is None:
                        u0, _ = _draw_subgradient(oracle, state.x, k)
                        level = initial_level(f_x, u0, D, strategy.delta0, strategy.B, strategy.nu1, strategy.nu2)
                    level, _ = ssl_update(level, f_x, k)
                    state, level = ssl_step(state, level, D, oracle, f_x)
                case ClassicStrategy(rule=rule):
                    D = D_builder(state.x, k, 1.0)
                    u, _ = _draw_subgradient(oracle, state.x, k)
                    alpha = classic_step(rule, k, f_x, float(np.dot(u.ravel(), u.ravel())))
                    state = step_scaled(state, alpha, D, oracle, f_x)
                case _:
                    raise TypeError(f'Unknown strategy {strategy!r}.')

            u_norm = trace.records[-1].u_norm
            if u_norm > rho_max:
                trace.diverged_at = k
                logger.error('Divergence at k=%d: |u|=%g > %g', k, u_norm, rho_max)
                raise DivergenceError(k, u_norm, rho_max)
            if log_every and k % log_every == 0:
                logger.debug('k=%d f=%.10g eps=%.3g alpha=%.3g |u|=%.3g', k, f_x,
                             trace.records[-1].eps, trace.records[-1].alpha, u_norm)
    except DivergenceError as exc:
        exc.trace = trace
        raise

    final = TraceRecord(k=state.k, time_s=trace.elapsed(), f=float(oracle.f_value(state.x)))
    if level is not None:
        final.delta, final.f_lev, final.level = level.delta, level.f_lev, level.l
    trace.append(final)
    trace.x = state.x
    logger.info('Finished after %d iterations, f=%.10g', state.k, final.f)
    return trace


def quasi_fejer_gap(x_k, x_next, x_star, D_k: DiagMetric, D_next: DiagMetric,
                    gamma_k, gamma_next, alpha, eps, L, rho):
    """
    Slack of the per-iteration quasi-Fejer inequality

        ||x+ - x*||^2_{D+^-1} <= zeta ||x - x*||^2_{D^-1} + xi zeta alpha^2 + 2 L zeta alpha eps

    with zeta = sqrt((1 + gamma_k)(1 + gamma_next)) and xi = 5 L rho^2.
    Nonnegative when the inequality holds.
    """
    zeta = math.sqrt((1.0 + gamma_k) * (1.0 + gamma_next))
    xi = 5.0 * L * rho * rho
    lhs = energy_norm(x_next - x_star, D_next.inverse()) ** 2
    rhs = zeta * energy_norm(x_k - x_star, D_k.inverse()) ** 2 + xi * zeta * alpha ** 2 + 2.0 * L * zeta * alpha * eps
    return rhs - lhs
