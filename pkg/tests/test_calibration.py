import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dptransfer.calibration import (calibrated_ce, entropy, gaussian_nll, positive_reparam,
                                    run_checks, scaled_softmax)
from dptransfer.errors import ValidationError


def fd(f, x, h=1e-6):
    x = np.array(x, dtype=float)
    out = np.empty_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        out[i] = (f(x + e) - f(x - e)) / (2 * h)
    return out


def test_softmax_examples():
    np.testing.assert_allclose(scaled_softmax([0, 0], 1.0), [0.5, 0.5], rtol=0, atol=1e-15)
    np.testing.assert_allclose(scaled_softmax([3.0, -1.0, 7.0], 0.0), [1 / 3] * 3, atol=1e-15)
    np.testing.assert_allclose(scaled_softmax([1, 0], math.log(3)), [0.75, 0.25], atol=1e-15)


def test_softmax_overflow_safe():
    p = scaled_softmax([1000.0, 0.0, -1000.0], 5.0)
    assert np.all(np.isfinite(p)) and p[0] == 1.0


@pytest.mark.parametrize("z, alpha", [([1.0], 1.0), ([1.0, np.inf], 1.0), ([1.0, 2.0], -0.5),
                                      ([1.0, 2.0], np.nan), ([[1.0, 2.0]], 1.0)])
def test_softmax_invalid(z, alpha):
    with pytest.raises(ValidationError):
        scaled_softmax(z, alpha)


_logits = st.lists(st.floats(-50, 50), min_size=2, max_size=12)


@settings(max_examples=300, deadline=None)
@given(_logits, st.floats(0, 20))
def test_softmax_normalized(z, alpha):
    p = scaled_softmax(z, alpha)
    assert (p >= 0).all() and abs(p.sum() - 1) <= 1e-12


@settings(max_examples=300, deadline=None)
@given(_logits, st.floats(0, 5), st.floats(-100, 100))
def test_softmax_translation(z, alpha, c):
    a = scaled_softmax(np.array(z) + c, alpha)
    np.testing.assert_allclose(a, scaled_softmax(z, alpha), rtol=0, atol=1e-12)


def test_entropy_non_increasing(rng):
    alphas = np.linspace(0, 10, 100)
    for _ in range(100):
        z = rng.normal(size=int(rng.integers(2, 10)))
        h = np.array([entropy(scaled_softmax(z, a)) for a in alphas])
        assert h[0] == pytest.approx(math.log(len(z)), rel=1e-12)
        assert np.all(np.diff(h) <= 1e-12)


def test_argmax_invariant(rng):
    for _ in range(500):
        z = rng.normal(size=int(rng.integers(2, 10)))
        for a in (1e-3, 0.5, 3.0, 100.0):
            assert np.argmax(scaled_softmax(z, a)) == np.argmax(z)


# --- cross-entropy -------------------------------------------------------------

@pytest.mark.parametrize("k", [2, 5, 24])
def test_ce_uniform(k):
    out = calibrated_ce(np.full(k, 0.3), 2.5, 1)
    assert out.loss == pytest.approx(math.log(k), rel=1e-12)


def test_ce_confident():
    out = calibrated_ce([10.0, 0.0], 1.0, 1)
    assert out.loss == pytest.approx(math.log1p(math.exp(-10)), rel=1e-9)
    assert out.loss == pytest.approx(4.5398899216870535e-05, rel=1e-9)


def test_ce_grad_alpha_fd():
    out = calibrated_ce([1.0, 0.0], 1.0, 1)
    num = fd(lambda a: calibrated_ce([1.0, 0.0], a[0], 1).loss, [1.0])[0]
    assert out.grad_alpha == pytest.approx(num, rel=1e-7)
    # closed form: -(1 - p_1) with p_1 = e / (1 + e)
    assert out.grad_alpha == pytest.approx(-1 / (1 + math.e), rel=1e-12)


def test_ce_gradients_random(rng):
    for _ in range(300):
        k = int(rng.integers(2, 10))
        z, alpha, y = rng.normal(size=k), float(rng.uniform(0.1, 3)), int(rng.integers(1, k + 1))
        out = calibrated_ce(z, alpha, y)
        gz = fd(lambda zz: calibrated_ce(zz, alpha, y).loss, z)
        ga = fd(lambda aa: calibrated_ce(z, aa[0], y).loss, [alpha])
        a, b = np.append(out.grad_z, out.grad_alpha), np.append(gz, ga)
        assert np.linalg.norm(a - b) <= 1e-6 * np.linalg.norm(b)


def test_ce_label_range():
    for y in (0, 3, 1.0):
        with pytest.raises(ValidationError):
            calibrated_ce([1.0, 2.0], 1.0, y)


# --- Gaussian NLL ----------------------------------------------------------------

def test_nll_unit():
    out = gaussian_nll([0.3], [1.0], [0.3])
    assert out.loss == pytest.approx(0.5 * math.log(2 * math.pi), rel=1e-12)
    assert out.loss == pytest.approx(0.918938533204672, rel=1e-12)


def test_nll_formula_multi():
    y_hat, sigma, y = np.array([1.0, -2.0, 0.5]), np.array([0.5, 2.0, 1.5]), np.array([0.0, 0.0, 0.0])
    expected = 1.5 * math.log(2 * math.pi) + 0.5 * sum(
        math.log(s * s) + (a - b) ** 2 / (s * s) for a, s, b in zip(y_hat, sigma, y))
    assert gaussian_nll(y_hat, sigma, y).loss == pytest.approx(expected, rel=1e-14)


def test_nll_minimizer_grid():
    sigma_min = 0.01
    grid = np.linspace(sigma_min, 10, 10_000)
    losses = [gaussian_nll([0.5], [s], [0.0], sigma_min).loss for s in grid]
    assert abs(grid[int(np.argmin(losses))] - 0.5) <= grid[1] - grid[0]


def test_nll_batch_matches_single(rng):
    y_hat, sigma, y = rng.normal(size=(7, 3)), rng.uniform(0.1, 2, size=(7, 3)), rng.normal(size=(7, 3))
    batch = gaussian_nll(y_hat, sigma, y)
    assert batch.loss.shape == (7,)
    for i in range(7):
        single = gaussian_nll(y_hat[i], sigma[i], y[i])
        assert batch.loss[i] == single.loss
        assert np.array_equal(batch.grad_sigma[i], single.grad_sigma)


def test_nll_zero_error_minimized_at_floor():
    sigma_min = 0.01
    grid = np.linspace(sigma_min, 10, 10_000)
    losses = [gaussian_nll([0.2], [s], [0.2], sigma_min).loss for s in grid]
    assert int(np.argmin(losses)) == 0
    assert losses[0] == pytest.approx(0.5 * math.log(2 * math.pi) + math.log(0.01), rel=1e-12)


def test_nll_gradients_random(rng):
    for _ in range(300):
        d = int(rng.integers(1, 6))
        y = rng.normal(size=d)
        y_hat = y + rng.normal(size=d)
        sigma = rng.uniform(0.1, 2.0, size=d)
        out = gaussian_nll(y_hat, sigma, y)
        gy = fd(lambda v: gaussian_nll(v, sigma, y).loss, y_hat)
        gs = fd(lambda s: gaussian_nll(y_hat, s, y).loss, sigma)
        a, b = np.concatenate([out.grad_yhat, out.grad_sigma]), np.concatenate([gy, gs])
        assert np.linalg.norm(a - b) <= 1e-6 * np.linalg.norm(b)


def test_nll_clamp_projection():
    # at the floor with small error the loss still decreases downward: gradient projected to 0
    out = gaussian_nll([0.001, 0.5], [0.01, 0.01], [0.0, 0.0], sigma_min=0.01)
    assert out.grad_sigma[0] == 0.0
    # large error pulls sigma up: gradient negative, kept
    assert out.grad_sigma[1] == pytest.approx(1 / 0.01 - 0.25 / 0.01 ** 3)
    assert out.grad_sigma[1] < 0
    # just above the floor nothing is projected
    out = gaussian_nll([0.001], [0.0100001], [0.0], sigma_min=0.01)
    assert out.grad_sigma[0] > 0


@pytest.mark.parametrize("args", [
    ([0.0], [0.005], [0.0]),
    ([0.0, 1.0], [1.0], [0.0, 1.0]),
    ([0.0], [1.0], [0.0, 1.0]),
    ([np.nan], [1.0], [0.0]),
    ([], [], []),
    ([[0.0]], [1.0], [0.0]),
])
def test_nll_invalid(args):
    with pytest.raises(ValidationError):
        gaussian_nll(*args, sigma_min=0.01)


# --- softplus ----------------------------------------------------------------------

def test_positive_reparam():
    assert positive_reparam(0.0) == pytest.approx(math.log(2), rel=1e-15)
    assert positive_reparam(30.0) - 30.0 < 1e-12
    assert positive_reparam(-30.0, sigma_min=0.01) == 0.01
    assert positive_reparam(-30.0) > 0
    assert positive_reparam(1000.0) == 1000.0
    np.testing.assert_allclose(positive_reparam(np.array([0.0, -40.0]), 0.01), [math.log(2), 0.01])


def test_run_checks_all_pass():
    results = run_checks(seed=3, n=200)
    assert [r.name for r in results if not r.passed] == []
