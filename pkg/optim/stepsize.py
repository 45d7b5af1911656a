"""
Stepsize schedules for the scaled epsilon-subgradient methods.

Polynomial schedules follow the parametric family

    tau_k   = t1 + t2 k
    alpha_k = 1 / (t3 + t4 k)
    gamma_k = t5 / k^(1 + t6)      (gamma_0 = t5)

with scaling bound L_k = sqrt(1 + gamma_k). The classic rules (constant,
Polyak, Ermoliev, dynamic) are kept for comparison runs and carry no
convergence certificate.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Union

import numpy as np

from .exceptions import InconsistentOptimumError, ScheduleError


def _scalar(value):
    return float(value) if np.ndim(value) == 0 else value


class ScheduleValues(NamedTuple):
    alpha: float
    tau: float
    gamma: float
    L: float


@dataclass(frozen=True)
class PolySchedule:
    t1: float = 1.0
    t2: float = 0.0
    t3: float = 1.0
    t4: float = 0.0
    t5: float = 0.0
    t6: float = 0.0

    def __post_init__(self):
        for name in ('t1', 't2', 't3', 't4', 't5', 't6'):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ScheduleError(f'{name} must be a finite nonnegative number, got {value!r}.')

    @classmethod
    def from_sequence(cls, values):
        values = [float(v) for v in values]
        if len(values) != 6:
            raise ScheduleError(f'Expected six schedule parameters t1..t6, got {len(values)}.')
        return cls(*values)

    def as_tuple(self):
        return (self.t1, self.t2, self.t3, self.t4, self.t5, self.t6)

    # Values accept an int or an integer array.

    def tau(self, k):
        return _scalar(self.t1 + self.t2 * np.asarray(k, dtype=float))

    def alpha(self, k):
        with np.errstate(divide='ignore'):
            return _scalar(1.0 / (self.t3 + self.t4 * np.asarray(k, dtype=float)))

    def gamma(self, k):
        k = np.asarray(k, dtype=float)
        return _scalar(np.where(k == 0, self.t5, self.t5 / np.maximum(k, 1.0) ** (1.0 + self.t6)))

    def L(self, k):
        return _scalar(np.sqrt(1.0 + np.asarray(self.gamma(k))))

    # Exponents read off the parametric form.

    @property
    def alpha_exponent(self):
        return 1.0 if self.t4 > 0 else 0.0

    @property
    def tau_exponent(self):
        return 1.0 if self.t2 > 0 else 0.0

    @property
    def gamma_exponent(self):
        return 1.0 + self.t6 if self.t5 > 0 else math.inf


def eval_schedule(s: PolySchedule, k: int) -> ScheduleValues:
    if k < 0:
        raise ScheduleError(f'Iteration index must be nonnegative, got {k}.')
    alpha = float(s.alpha(k))
    tau = float(s.tau(k))
    gamma = float(s.gamma(k))
    L = math.sqrt(1.0 + gamma)
    if not all(math.isfinite(v) for v in (alpha, tau, gamma, L)):
        raise ScheduleError(f'Schedule {s.as_tuple()} is not finite at k={k}.')
    return ScheduleValues(alpha, tau, gamma, L)


@dataclass
class ValidationReport:
    """
    Named convergence conditions a schedule fails, empty when it passes.
    """
    violations: dict = field(default_factory=dict)

    @property
    def is_valid(self):
        return not self.violations

    def add(self, name, message):
        self.violations[name] = message

    def __str__(self):
        if self.is_valid:
            return 'valid'
        return '; '.join(f'{name}: {message}' for name, message in self.violations.items())


def validate_square_summable(s: PolySchedule) -> ValidationReport:
    """
    Structural check of the square-summable hypotheses on the parametric
    form: alpha_k = O(k^-p) with 1/2 < p <= 1, tau_k = O(k^p) diverging so
    that eps_k = O(1/tau_k), and gamma_k = O(k^-q) with q > 1.
    """
    report = ValidationReport()
    p = s.alpha_exponent

    if s.t3 <= 0 and s.t4 <= 0:
        report.add('alpha_positive', 'alpha_k is undefined when t3 = t4 = 0.')
    if s.t1 <= 0:
        report.add('tau_positive', 'tau_0 = t1 must be positive.')
    if not 0.5 < p <= 1.0:
        report.add('sum_alpha_squared_finite', 'alpha_k does not decay (t4 = 0), so sum alpha_k^2 diverges.')
    if s.tau_exponent > p:
        report.add('tau_growth', 'tau_k grows faster than 1/alpha_k.')
    if p + s.tau_exponent <= 1.0:
        report.add('sum_alpha_eps_finite', 'tau_k does not diverge (t2 = 0), so eps_k does not vanish and sum alpha_k eps_k diverges.')
    if s.gamma_exponent <= 1.0:
        report.add('sum_gamma_finite', 'gamma_k = t5/k^(1+t6) needs t6 > 0 to be summable.')
    return report


def validate_level_schedule(s: PolySchedule) -> ValidationReport:
    """
    Hypotheses for the level (SSL) variant: tau_k -> infinity and gamma_k
    summable; no alpha sequence is needed.
    """
    report = ValidationReport()
    if s.t1 <= 0:
        report.add('tau_positive', 'tau_0 = t1 must be positive.')
    if s.t2 <= 0:
        report.add('tau_diverges', 'tau_k must diverge (t2 > 0) so that eps_k -> 0.')
    if s.gamma_exponent <= 1.0:
        report.add('sum_gamma_finite', 'gamma_k = t5/k^(1+t6) needs t6 > 0 to be summable.')
    return report


@dataclass(frozen=True)
class ClassicRule:
    """
    One of the textbook stepsize rules. Build it with the named constructors.
    """
    KIND_CONSTANT = 'constant'
    KIND_POLYAK = 'polyak'
    KIND_ERMOLIEV = 'ermoliev'
    KIND_DYNAMIC = 'dynamic'

    kind: str
    alpha: Optional[float] = None
    c: Optional[float] = None
    f_star: Optional[float] = None
    schedule: Optional[PolySchedule] = None
    f_estimate: Union[float, Callable[[int], float], None] = None
    normalize: bool = True

    def __post_init__(self):
        match self.kind:
            case self.KIND_CONSTANT:
                if self.alpha is None or not self.alpha > 0:
                    raise ScheduleError('Constant rule needs alpha > 0.')
            case self.KIND_POLYAK:
                if self.c is None or not 0 < self.c < 2:
                    raise ScheduleError('Polyak rule needs c in (0, 2).')
                if self.f_star is None:
                    raise ScheduleError('Polyak rule needs the optimal value f_star.')
            case self.KIND_ERMOLIEV:
                if self.schedule is None:
                    raise ScheduleError('Ermoliev rule needs a schedule.')
            case self.KIND_DYNAMIC:
                if self.f_estimate is None:
                    raise ScheduleError('Dynamic rule needs an estimate f_k.')
            case _:
                raise ScheduleError(f'Unknown rule kind {self.kind!r}.')

    @classmethod
    def constant(cls, alpha):
        return cls(cls.KIND_CONSTANT, alpha=alpha)

    @classmethod
    def polyak(cls, c, f_star, normalize=True):
        return cls(cls.KIND_POLYAK, c=c, f_star=f_star, normalize=normalize)

    @classmethod
    def ermoliev(cls, schedule):
        return cls(cls.KIND_ERMOLIEV, schedule=schedule)

    @classmethod
    def dynamic(cls, f_estimate, normalize=True):
        return cls(cls.KIND_DYNAMIC, f_estimate=f_estimate, normalize=normalize)


def _denominator(rule, grad_norm_sq):
    if rule.normalize:
        return max(1.0, grad_norm_sq)
    if not grad_norm_sq > 0:
        raise ScheduleError('Unnormalized rule needs a nonzero subgradient.')
    return grad_norm_sq


def classic_step(rule: ClassicRule, k: int, f_x: float, grad_norm_sq: float) -> float:
    match rule.kind:
        case ClassicRule.KIND_CONSTANT:
            return float(rule.alpha)
        case ClassicRule.KIND_POLYAK:
            if f_x < rule.f_star:
                raise InconsistentOptimumError(f'f(x) = {f_x} is below f* = {rule.f_star}.')
            return rule.c * (f_x - rule.f_star) / _denominator(rule, grad_norm_sq)
        case ClassicRule.KIND_ERMOLIEV:
            return eval_schedule(rule.schedule, k).alpha
        case ClassicRule.KIND_DYNAMIC:
            f_k = rule.f_estimate(k) if callable(rule.f_estimate) else rule.f_estimate
            if f_x < f_k:
                raise InconsistentOptimumError(f'f(x) = {f_x} is below the estimate f_k = {f_k}.')
            return (f_x - f_k) / _denominator(rule, grad_norm_sq)


def theta_partial_product(gammas, K: int) -> float:
    """
    prod_{j=0..K} (1 + gamma_j), accumulated in log space.
    """
    gammas = np.asarray(gammas, dtype=float)[:K + 1]
    if np.any(gammas < 0):
        raise ScheduleError('gamma_k must be nonnegative.')
    log_theta = float(np.sum(np.log1p(gammas)))
    if log_theta >= math.log(np.finfo(float).max):
        raise ScheduleError(f'Partial product overflows (log theta = {log_theta:.6g}).')
    return math.exp(log_theta)


def epsilon_bound(n: int, tau: float, beta: float) -> float:
    """
    Upper bound on the dual gap sigma_k after one ball-projection dual step.

    The dual domain is a product of n balls of radius beta, of diameter
    D = 2 beta sqrt(n). With beta folded into the dual update the resolvent
    step acting on that domain is beta^2 tau, hence D^2 / (2 beta^2 tau).
    """
    if beta == 0:
        return 2.0 * n / tau
    D = 2.0 * beta * math.sqrt(n)
    return D * D / (2.0 * beta * beta * tau)


# Published parameter rows: (t1, t2, t3, t4, t5, t6). Level methods carry
# no alpha sequence (t3 = t4 = 0).
PRESET_SCHEDULES = {
    ('cameraman', 'PDHG'): (0.9, 1e-2, 0.04, 1e-5, 0.0, 0.0),
    ('micro', 'PDHG'): (0.9, 1e-3, 0.04, 1e-4, 0.0, 0.0),
    ('phantom', 'PDHG'): (0.9, 1e-3, 0.2, 1e-5, 0.0, 0.0),
    ('cameraman', 'SPDHG'): (0.5, 5e-3, 0.5, 5e-5, 1e13, 1.0),
    ('micro', 'SPDHG'): (0.4, 1e-5, 0.4, 1e-5, 1e13, 1.0),
    ('phantom', 'SPDHG'): (0.5, 1e-4, 0.5, 1e-5, 1e13, 1.0),
    ('cameraman', 'SL'): (0.5, 5e-2, 0.0, 0.0, 0.0, 0.0),
    ('micro', 'SL'): (0.9, 1e-1, 0.0, 0.0, 0.0, 0.0),
    ('phantom', 'SL'): (0.9, 1e-2, 0.0, 0.0, 0.0, 0.0),
    ('cameraman', 'SSL'): (0.7, 5e-2, 0.0, 0.0, 1e13, 1.0),
    ('micro', 'SSL'): (0.9, 1e-2, 0.0, 0.0, 1e13, 1.0),
    ('phantom', 'SSL'): (0.9, 1e-2, 0.0, 0.0, 1e13, 1.0),
}


def preset_schedule(problem: str, method: str) -> PolySchedule:
    try:
        return PolySchedule(*PRESET_SCHEDULES[(problem, method)])
    except KeyError:
        raise ScheduleError(f'No published parameters for problem {problem!r} and method {method!r}.') from None
