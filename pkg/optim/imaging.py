"""
Poisson/TV deblurring building blocks: periodic FFT blur, forward-difference
gradient and total variation, generalized Kullback-Leibler divergence,
Poisson data simulation and synthetic phantoms.

Images are square float arrays ``x[i, j]``. The linear pixel index runs
down the columns (l = i + j*N), so vectors in R^n are ``x.ravel(order='F')``
and a dual variable in R^2n is stored as a ``(2, N, N)`` array whose block
l is ``(y[0, i, j], y[1, i, j])``.
"""
import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import fft

from .exceptions import DimensionMismatchError, DomainError, OperatorAssumptionError

logger = logging.getLogger(__name__)

PHANTOM_KINDS = ('disks', 'blocks', 'ramp')


def check_image(x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != x.shape[1] or x.shape[0] < 2:
        raise DimensionMismatchError(f'Expected an N x N image with N >= 2, got shape {x.shape}.')
    return x


def to_vector(x):
    return np.asarray(x).ravel(order='F')


def from_vector(v, N):
    return np.asarray(v, dtype=float).reshape((N, N), order='F')


def as_blocks(y):
    """
    View a (2, N, N) dual array as the n x 2 matrix of its blocks y_l.
    """
    y = np.asarray(y)
    return np.stack([to_vector(y[0]), to_vector(y[1])], axis=1)


def rel_distance(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


# Blur.

def gaussian_psf(size=9, sigma=1.3):
    half = (size - 1) / 2.0
    grid = np.arange(size) - half
    kernel = np.exp(-(grid[:, None] ** 2 + grid[None, :] ** 2) / (2.0 * sigma ** 2))
    return kernel / kernel.sum()


def normalize_psf(psf):
    psf = np.asarray(psf, dtype=float)
    if psf.ndim != 2:
        raise OperatorAssumptionError('The psf must be a 2-D kernel.')
    if np.any(psf < 0) or not psf.sum() > 0:
        raise OperatorAssumptionError('The psf must be nonnegative with a positive sum.')
    return psf / psf.sum()


def delta_psf(size=1):
    psf = np.zeros((size, size))
    psf[size // 2, size // 2] = 1.0
    return psf


def embed_psf(psf, N):
    """
    Wrap a small centred kernel onto the N x N torus so its centre sits at (0, 0).
    """
    psf = np.asarray(psf, dtype=float)
    rows, cols = psf.shape
    i = (np.arange(rows) - rows // 2) % N
    j = (np.arange(cols) - cols // 2) % N
    kernel = np.zeros((N, N))
    np.add.at(kernel, (i[:, None], j[None, :]), psf)
    return kernel


@dataclass(frozen=True, eq=False)
class BlurOperator:
    """
    Periodic convolution with a normalized psf, applied through the FFT.

    Normalizing the psf to unit sum gives He = H^T e = e.
    """
    psf: np.ndarray
    N: int
    background: float = 0.0
    otf: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        psf = normalize_psf(self.psf)
        if self.N < 2:
            raise DimensionMismatchError(f'Image side must be at least 2, got {self.N}.')
        if self.background < 0:
            raise OperatorAssumptionError('The background must be nonnegative.')
        object.__setattr__(self, 'psf', psf)
        object.__setattr__(self, 'otf', fft.rfft2(embed_psf(psf, self.N)))

    @property
    def shape(self):
        return (self.N, self.N)

    def _check(self, x):
        if np.shape(x) != self.shape:
            raise DimensionMismatchError(f'Image shape {np.shape(x)} does not match operator shape {self.shape}.')

    def H(self, x):
        self._check(x)
        return fft.irfft2(fft.rfft2(x) * self.otf, s=self.shape)

    def Ht(self, x):
        self._check(x)
        return fft.irfft2(fft.rfft2(x) * np.conj(self.otf), s=self.shape)


def apply_H(op: BlurOperator, x):
    return op.H(x)


def apply_Ht(op: BlurOperator, x):
    return op.Ht(x)


# Gradient and total variation (periodic forward differences).

def grad_op(x):
    x = np.asarray(x, dtype=float)
    return np.stack([np.roll(x, -1, axis=0) - x, np.roll(x, -1, axis=1) - x])


def div_op(y):
    """
    A^T y for the forward-difference gradient A (minus the usual divergence).
    """
    y = np.asarray(y, dtype=float)
    return (np.roll(y[0], 1, axis=0) - y[0]) + (np.roll(y[1], 1, axis=1) - y[1])


def tv_value(x):
    gx, gy = grad_op(x)
    return float(np.sum(np.hypot(gx, gy)))


def power_norm_sq(apply, adjoint, shape, iterations=200, seed=0):
    """
    Estimate ||A||^2 = lambda_max(A^T A) by power iteration.
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(shape)
    x /= np.linalg.norm(x)
    estimate = 0.0
    for _ in range(iterations):
        z = adjoint(apply(x))
        estimate = float(np.linalg.norm(z))
        if estimate == 0.0:
            break
        x = z / estimate
    return estimate


# Kullback-Leibler data term.

class SplitGradient(NamedTuple):
    """
    grad f0(x) = Ht_e - Ht_v with both parts nonnegative.
    """
    Ht_e: np.ndarray
    Ht_v: np.ndarray

    @property
    def value(self):
        return self.Ht_e - self.Ht_v


def _denominator(x, g, op):
    z = op.H(x) + op.background
    bad = (z <= 0) & (g > 0)
    if np.any(bad):
        raise DomainError(f'(Hx+b)_i <= 0 at {int(bad.sum())} pixel(s) where g_i > 0.')
    return z


def kl_value(x, g, op: BlurOperator):
    g = np.asarray(g, dtype=float)
    z = _denominator(x, g, op)
    positive = g > 0
    log_term = np.zeros_like(g)
    log_term[positive] = g[positive] * np.log(g[positive] / z[positive])
    return float(np.sum(log_term + z - g))


def kl_split_gradient(x, g, op: BlurOperator) -> SplitGradient:
    g = np.asarray(g, dtype=float)
    z = _denominator(x, g, op)
    v = np.divide(g, z, out=np.zeros_like(g), where=g > 0)
    return SplitGradient(op.Ht(np.ones(op.shape)), op.Ht(v))


def kl_grad(x, g, op: BlurOperator):
    return kl_split_gradient(x, g, op).value


# Data simulation.

class SimulatedData(NamedTuple):
    """
    Noisy data ``g`` in image units together with the count scale used and
    the background as seen by the model (b / scale).
    """
    g: np.ndarray
    scale: float
    background: float


def simulate_data(x_true, op: BlurOperator, I_max, b, seed) -> SimulatedData:
    """
    Rescale x_true to peak I_max, blur, add b, draw Poisson counts from a
    PCG64 generator seeded with ``seed`` and scale back to image units.
    """
    x_true = check_image(x_true)
    if np.any(x_true < 0):
        raise DomainError('x_true must be nonnegative.')
    peak = float(x_true.max())
    scale = I_max / peak if peak > 0 else 1.0
    mean_counts = np.maximum(op.H(scale * x_true), 0.0) + b
    rng = np.random.Generator(np.random.PCG64(seed))
    counts = rng.poisson(mean_counts).astype(float)
    logger.debug('Simulated Poisson data: scale=%g, mean count=%g', scale, mean_counts.mean())
    return SimulatedData(counts / scale, scale, b / scale)


# Synthetic phantoms.

def _disk(N, ci, cj, radius):
    i, j = np.mgrid[0:N, 0:N]
    return (i - ci) ** 2 + (j - cj) ** 2 <= radius ** 2


def _ellipse(N, ci, cj, ri, rj):
    i, j = np.mgrid[0:N, 0:N]
    return ((i - ci) / ri) ** 2 + ((j - cj) / rj) ** 2 <= 1.0


def synth_phantom(kind, N, intensity_range=(0.0, 1000.0)):
    """
    Piecewise-constant test images.

    ``disks``: a bright elliptical skull, a mid-level interior with two dark
    ellipses and three small bright disks (head-phantom layout).
    ``blocks``: three rectangles at 1/3, 2/3 and full intensity.
    ``ramp``: eight horizontal steps from low to high intensity.
    """
    if N < 8:
        raise ValueError(f'Phantoms need N >= 8, got {N}.')
    lo, hi = (float(v) for v in intensity_range)
    if lo < 0 or not hi > lo:
        raise ValueError(f'Intensity range must satisfy 0 <= low < high, got {intensity_range!r}.')
    span = hi - lo
    c = (N - 1) / 2.0
    image = np.full((N, N), lo)

    match kind:
        case 'disks':
            image[_ellipse(N, c, c, 0.45 * N, 0.36 * N)] = hi
            image[_ellipse(N, c, c, 0.41 * N, 0.32 * N)] = lo + 0.2 * span
            image[_ellipse(N, c, c - 0.12 * N, 0.2 * N, 0.07 * N)] = lo
            image[_ellipse(N, c, c + 0.12 * N, 0.2 * N, 0.07 * N)] = lo + 0.05 * span
            image[_disk(N, c - 0.25 * N, c, 0.06 * N + 0.5)] = lo + 0.5 * span
            image[_disk(N, c + 0.25 * N, c - 0.06 * N, 0.04 * N + 0.5)] = lo + 0.4 * span
            image[_disk(N, c + 0.25 * N, c + 0.06 * N, 0.04 * N + 0.5)] = lo + 0.4 * span
        case 'blocks':
            q = N // 8
            image[q:3 * q, q:4 * q] = lo + span / 3.0
            image[4 * q:7 * q, q:3 * q] = lo + 2.0 * span / 3.0
            image[3 * q:6 * q, 5 * q:7 * q] = hi
        case 'ramp':
            steps = np.minimum(np.arange(N) * 8 // N, 7)
            image[:] = (lo + span * steps / 7.0)[:, None]
        case _:
            raise ValueError(f'Unknown phantom kind {kind!r}; choose one of {PHANTOM_KINDS}.')
    return image
