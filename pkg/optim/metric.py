"""
Energy norms, diagonal variable metrics and scaled projections onto the
nonnegative orthant.
"""
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatchError, NonFiniteError


@dataclass(frozen=True, eq=False)
class DiagMetric:
    """
    Diagonal scaling matrix D with entries clamped to [1/bound, bound].

    ``entries`` may have any shape (an image-shaped metric acts pixelwise).
    Proposed entries are clamped at construction, so ||D|| <= bound and
    ||D^-1|| <= bound always hold.
    """
    entries: np.ndarray
    bound: float = 1.0

    def __post_init__(self):
        bound = float(self.bound)
        if not np.isfinite(bound) or bound < 1.0:
            raise ValueError(f'Metric bound must be finite and >= 1, got {self.bound!r}.')
        entries = np.asarray(self.entries, dtype=float)
        if not np.all(np.isfinite(entries)):
            raise NonFiniteError('Metric entries must be finite.')
        entries = np.clip(entries, 1.0 / bound, bound)
        entries.setflags(write=False)
        object.__setattr__(self, 'entries', entries)
        object.__setattr__(self, 'bound', bound)

    @classmethod
    def identity(cls, shape):
        return cls(np.ones(shape), 1.0)

    @property
    def shape(self):
        return self.entries.shape

    def apply(self, x):
        _check_shape(x, self)
        return self.entries * x

    def inverse(self):
        return DiagMetric(1.0 / self.entries, self.bound)

    def norm(self):
        """
        Spectral norm, equal to the infinity norm for a diagonal matrix.
        """
        return float(self.entries.max())

    def is_identity(self):
        return bool(np.all(self.entries == 1.0))


def _check_shape(x, D):
    if np.shape(x) != D.shape:
        raise DimensionMismatchError(f'Vector shape {np.shape(x)} does not match metric shape {D.shape}.')


def energy_norm(x, D):
    """
    sqrt(x^T D x) for a diagonal D.
    """
    x = np.asarray(x, dtype=float)
    _check_shape(x, D)
    return float(np.sqrt(np.sum(D.entries * x * x)))


def project_nonneg_scaled(x, D=None):
    """
    P_{X, D^-1}(x) for X the nonnegative orthant.

    For diagonal D the minimiser of ||z - x||_{D^-1} over z >= 0 separates
    per coordinate, so the metric drops out and the result is max(0, x).
    """
    x = np.asarray(x, dtype=float)
    if D is not None:
        _check_shape(x, D)
    return np.maximum(x, 0.0)
