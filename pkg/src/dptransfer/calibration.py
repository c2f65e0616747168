"""Auto-calibrated uncertainty losses.

Classification uses a softmax over logits scaled by a learned inverse
temperature ``alpha``; regression uses a Gaussian negative log-likelihood
with a learned per-output standard deviation ``sigma`` clamped from below
at ``sigma_min``. All functions work in float64 and return analytic
gradients.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

DEFAULT_SIGMA_MIN = 0.01
LOG_2PI = math.log(2.0 * math.pi)


def _logits(z, alpha):
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1 or len(z) < 2:
        raise ValidationError(f"logits must be a vector with K >= 2 entries, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise ValidationError("logits must be finite")
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha < 0:
        raise ValidationError(f"alpha must be finite and >= 0, got {alpha}")
    return z, alpha


def log_scaled_softmax(z, alpha):
    z, alpha = _logits(z, alpha)
    s = alpha * z
    s = s - s.max()
    return s - math.log(np.exp(s).sum())


def scaled_softmax(z, alpha):
    """``exp(alpha z_y) / sum_k exp(alpha z_k)``, shifted by the max for overflow safety."""
    z, alpha = _logits(z, alpha)
    s = alpha * z
    e = np.exp(s - s.max())
    return e / e.sum()


@dataclass(frozen=True)
class CELoss:
    loss: float
    grad_z: np.ndarray
    grad_alpha: float


def calibrated_ce(z, alpha, label):
    """Cross-entropy ``-log scaled_softmax(z, alpha)[label]`` for a 1-based label."""
    z, alpha = _logits(z, alpha)
    if not isinstance(label, (int, np.integer)) or not 1 <= label <= len(z):
        raise ValidationError(f"label {label!r} outside 1..{len(z)}")
    s = alpha * z
    y = label - 1
    top = s.max()
    e = np.exp(s - top)
    if s[y] == top:
        # log1p keeps precision when the labelled class dominates and the loss is tiny
        loss = math.log1p(np.delete(e, y).sum())
    else:
        loss = top - s[y] + math.log(e.sum())
    resid = e / e.sum()
    resid[y] -= 1.0
    return CELoss(float(loss), alpha * resid, float(np.dot(z, resid)))


@dataclass(frozen=True)
class NLLLoss:
    loss: float
    grad_yhat: np.ndarray
    grad_sigma: np.ndarray


def gaussian_nll(y_hat, sigma, truth, sigma_min=DEFAULT_SIGMA_MIN):
    """Gaussian negative log-likelihood with diagonal standard deviations.

    Inputs have shape ``(..., D)``; leading axes are independent instances
    and ``loss`` has the leading shape (a float for a single vector).
    ``sigma`` must already respect the clamp (see :func:`positive_reparam`).
    Where ``sigma`` sits on the floor and the gradient would push it lower,
    the sigma gradient is projected to zero.
    """
    y_hat = np.atleast_1d(np.asarray(y_hat, dtype=np.float64))
    sigma = np.atleast_1d(np.asarray(sigma, dtype=np.float64))
    truth = np.atleast_1d(np.asarray(truth, dtype=np.float64))
    if y_hat.shape[-1] < 1:
        raise ValidationError("prediction must be a non-empty vector")
    if sigma.shape != y_hat.shape or truth.shape != y_hat.shape:
        raise ValidationError(
            f"dimension mismatch: y_hat {y_hat.shape}, sigma {sigma.shape}, truth {truth.shape}")
    if not sigma_min > 0:
        raise ValidationError(f"sigma_min must be > 0, got {sigma_min}")
    if not (np.all(np.isfinite(y_hat)) and np.all(np.isfinite(sigma)) and np.all(np.isfinite(truth))):
        raise ValidationError("inputs must be finite")
    if (sigma < sigma_min).any():
        raise ValidationError(f"sigma below sigma_min={sigma_min}")
    r = y_hat - truth
    var = sigma * sigma
    loss = 0.5 * y_hat.shape[-1] * LOG_2PI + 0.5 * np.sum(np.log(var) + r * r / var, axis=-1)
    grad_yhat = r / var
    grad_sigma = 1.0 / sigma - r * r / (var * sigma)
    grad_sigma[(sigma == sigma_min) & (grad_sigma > 0)] = 0.0
    return NLLLoss(float(loss) if loss.ndim == 0 else loss, grad_yhat, grad_sigma)


def softplus(x):
    return np.logaddexp(0.0, x)


def positive_reparam(raw, sigma_min=None):
    """Softplus of an unconstrained value, optionally raised to ``sigma_min``."""
    out = softplus(np.asarray(raw, dtype=np.float64))
    if sigma_min is not None:
        out = np.maximum(out, sigma_min)
    return float(out) if out.ndim == 0 else out


def entropy(p):
    p = np.asarray(p, dtype=np.float64)
    nz = p > 0
    return float(-np.sum(p[nz] * np.log(p[nz])))


# --- numerical self-checks, used by ``dptransfer calib-check`` ---------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def central_difference(f, x, h=1e-6):
    x = np.array(x, dtype=np.float64)
    g = np.empty_like(x)
    for i in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp.flat[i] += h
        xm.flat[i] -= h
        g.flat[i] = (f(xp) - f(xm)) / (2 * h)
    return g


def relative_error(a, b):
    a, b = np.atleast_1d(a), np.atleast_1d(b)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), np.finfo(float).tiny))


def run_checks(seed=0, sigma_min=DEFAULT_SIGMA_MIN, n=1000):
    rng = np.random.default_rng(seed)
    results = []

    worst = 0.0
    for _ in range(n):
        k = int(rng.integers(2, 10))
        z = rng.normal(size=k) * 3
        alpha = float(rng.uniform(0, 10))
        worst = max(worst, abs(scaled_softmax(z, alpha).sum() - 1.0))
    results.append(CheckResult("softmax_normalization", worst <= 1e-12, f"max |sum-1| = {worst:.3e}"))

    worst = 0.0
    for _ in range(n):
        k = int(rng.integers(2, 10))
        z = rng.normal(size=k) * 3
        worst = max(worst, float(np.abs(scaled_softmax(z, 0.0) - 1.0 / k).max()))
    results.append(CheckResult("alpha_zero_uniform", worst <= 1e-12, f"max dev = {worst:.3e}"))

    worst = 0.0
    for _ in range(n):
        z = rng.normal(size=int(rng.integers(2, 10)))
        alpha = float(rng.uniform(0, 5))
        c = float(rng.normal() * 100)
        worst = max(worst, float(np.abs(scaled_softmax(z + c, alpha) - scaled_softmax(z, alpha)).max()))
    results.append(CheckResult("translation_invariance", worst <= 1e-12, f"max dev = {worst:.3e}"))

    ok = True
    alphas = np.linspace(0, 10, 100)
    for _ in range(100):
        z = rng.normal(size=int(rng.integers(2, 10)))
        h = [entropy(scaled_softmax(z, a)) for a in alphas]
        ok &= bool(np.all(np.diff(h) <= 1e-12))
    results.append(CheckResult("entropy_monotone_in_alpha", ok, "100 logit vectors x 100 alphas"))

    ok = True
    for _ in range(n):
        z = rng.normal(size=int(rng.integers(2, 10)))
        alpha = float(10 ** rng.uniform(-3, 2))
        ok &= int(np.argmax(scaled_softmax(z, alpha))) == int(np.argmax(z))
    results.append(CheckResult("argmax_invariance", ok, f"{n} instances"))

    worst = 0.0
    for _ in range(n):
        k = int(rng.integers(2, 10))
        z = rng.normal(size=k)
        alpha = float(rng.uniform(0.1, 3))
        y = int(rng.integers(1, k + 1))
        out = calibrated_ce(z, alpha, y)
        fz = central_difference(lambda zz: calibrated_ce(zz, alpha, y).loss, z)
        fa = central_difference(lambda aa: calibrated_ce(z, aa[0], y).loss, [alpha])
        worst = max(worst, relative_error(np.append(out.grad_z, out.grad_alpha), np.append(fz, fa)))
    results.append(CheckResult("ce_gradients", worst <= 1e-6, f"max rel err = {worst:.3e}"))

    worst = 0.0
    for _ in range(n):
        d = int(rng.integers(1, 6))
        truth = rng.normal(size=d)
        y_hat = truth + rng.normal(size=d)
        sigma = rng.uniform(0.1, 2.0, size=d)
        out = gaussian_nll(y_hat, sigma, truth, sigma_min)
        fy = central_difference(lambda yy: gaussian_nll(yy, sigma, truth, sigma_min).loss, y_hat)
        fs = central_difference(lambda ss: gaussian_nll(y_hat, ss, truth, sigma_min).loss, sigma)
        worst = max(worst, relative_error(np.concatenate([out.grad_yhat, out.grad_sigma]),
                                          np.concatenate([fy, fs])))
    results.append(CheckResult("nll_gradients", worst <= 1e-6, f"max rel err = {worst:.3e}"))

    grid = np.linspace(sigma_min, 10.0, 10_000)
    step = grid[1] - grid[0]
    ok = True
    for _ in range(100):
        e = float(rng.uniform(sigma_min, 10.0))
        losses = gaussian_nll(np.full((len(grid), 1), e), grid[:, None], np.zeros((len(grid), 1)), sigma_min).loss
        ok &= abs(grid[np.argmin(losses)] - e) <= step
    results.append(CheckResult("nll_minimizer_at_abs_error", ok, f"100 errors, grid step {step:.2e}"))
    return results
