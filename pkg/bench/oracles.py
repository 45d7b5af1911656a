"""
Independent reference computations used by the test suite.

Nothing here calls into the code it checks: sums are explicit loops,
products of shrink factors are materialised, and the unscaled primal-dual
loop is written out from its update formulas.
"""
import itertools
import math

import numpy as np
from scipy import optimize


def energy_norm_loop(x, d):
    total = 0.0
    for x_i, d_i in zip(np.ravel(x), np.ravel(d)):
        total += d_i * x_i * x_i
    return math.sqrt(total)


def scaled_projection_qp(x, d):
    """
    argmin_{z >= 0} sum (z_i - x_i)^2 / d_i by a bounded quasi-Newton solve.
    """
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)

    def objective(z):
        r = z - x
        return float(np.sum(r * r / d)), 2.0 * r / d

    start = np.abs(x) + 1.0
    result = optimize.minimize(objective, start, jac=True, method='L-BFGS-B', bounds=[(0.0, None)] * x.size,
                               options={'ftol': 1e-15, 'gtol': 1e-12, 'maxiter': 1000})
    return result.x


def grid_minimize(f, lower, upper, steps=201, rounds=4):
    """
    Brute-force minimiser of f over a box in R^2, zooming in around the
    best grid point each round.
    """
    lower, upper = np.asarray(lower, dtype=float), np.asarray(upper, dtype=float)
    best = None
    for _ in range(rounds):
        axes = [np.linspace(lo, hi, steps) for lo, hi in zip(lower, upper)]
        for point in itertools.product(*axes):
            value = f(np.array(point))
            if best is None or value < best[1]:
                best = (np.array(point), value)
        span = (upper - lower) * 4.0 / (steps - 1)
        lower = np.maximum(best[0] - span, lower)
        upper = np.minimum(best[0] + span, upper)
    return best


def finite_difference_grad(f, x, h=1e-5):
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for index in np.ndindex(x.shape):
        step = np.zeros_like(x)
        step[index] = h
        grad[index] = (f(x + step) - f(x - step)) / (2.0 * h)
    return grad


def direct_split_parts(history, beta):
    """
    Positive and negative parts of beta A^T y(k+1) from the explicit sum

        beta^2 sum_j tau_j A^T W_j A x(j),  W_j = prod_{m=j..k} S_m,

    with ``history`` the list of (x(j), s(j), tau_j) for j = 0..k and y(0) = 0.
    Returns (V, U) with beta A^T y(k+1) = V - U.
    """
    N = history[0][0].shape[0]
    V = np.zeros((N, N))
    U = np.zeros((N, N))
    for j, (x, _, tau) in enumerate(history):
        w = np.ones((N, N))
        for _, s, _ in history[j:]:
            w = w * s
        c = beta * beta * tau
        for i in range(N):
            for l in range(N):
                up, down = (i - 1) % N, (i + 1) % N
                left, right = (l - 1) % N, (l + 1) % N
                V[i, l] += c * x[i, l] * (2.0 * w[i, l] + w[up, l] + w[i, left])
                U[i, l] += c * (w[up, l] * x[up, l] + w[i, l] * x[down, l] + w[i, left] * x[i, left] + w[i, l] * x[i, right])
    return V, U


def independent_pdhg(g, H, Ht, background, beta, schedule, max_iter, x0=None):
    """
    Unscaled primal-dual iteration written from its update formulas:

        y+ = P_B(y + beta tau_k grad x),  x+ = max(0, x - alpha_k (grad KL(x) + beta grad^T y+)).

    Returns the list of iterates x(0), ..., x(max_iter).
    """
    g = np.asarray(g, dtype=float)
    N = g.shape[0]
    down = (np.arange(N) + 1) % N
    up = (np.arange(N) - 1) % N
    x = g.copy() if x0 is None else np.asarray(x0, dtype=float).copy()
    y_rows, y_cols = np.zeros((N, N)), np.zeros((N, N))
    ones_back = Ht(np.ones((N, N)))
    iterates = [x.copy()]
    for k in range(max_iter):
        tau = schedule.t1 + schedule.t2 * k
        alpha = 1.0 / (schedule.t3 + schedule.t4 * k)
        d_rows = x[down, :] - x
        d_cols = x[:, down] - x
        a = y_rows + beta * tau * d_rows
        b = y_cols + beta * tau * d_cols
        shrink = 1.0 / np.maximum(1.0, np.sqrt(a * a + b * b))
        y_rows, y_cols = a * shrink, b * shrink
        ratio = np.where(g > 0, g / np.where(g > 0, H(x) + background, 1.0), 0.0)
        grad = ones_back - Ht(ratio)
        adjoint = (y_rows[up, :] - y_rows) + (y_cols[:, up] - y_cols)
        x = np.maximum(x - alpha * (grad + beta * adjoint), 0.0)
        iterates.append(x.copy())
    return iterates


def poisson_mean_band(mean, samples):
    """
    Three-standard-error band for the sample mean of ``samples`` Poisson draws.
    """
    half = 3.0 * math.sqrt(mean / samples)
    return mean - half, mean + half
