import math

import numpy as np
import pytest
import scipy.integrate
from scipy.special import gamma, hyp1f1

from fraclap.closed_forms import ball_solution
from fraclap.functions import FunctionHandle, constant, dilated, shifted
from fraclap.operator import (
    DEFAULT_SPEC,
    NonIntegrableTail,
    NonSmoothEvaluationPoint,
    QuadratureError,
    QuadratureSpec,
    bilinear_I,
    c_constant,
    frac_laplacian,
    product_rule_residual,
)


def gaussian(n):
    if n == 1:
        return FunctionHandle(lambda x: np.exp(-x**2))
    return FunctionHandle(lambda x: np.exp(-np.sum(x**2, axis=-1)), dim=2, profile=lambda r: np.exp(-r**2))


def gaussian_oracle(n, s, r):
    """(-Lap)^s exp(-|x|^2) via its Fourier representation (Kummer function)."""
    return 4**s * gamma(n / 2 + s) / gamma(n / 2) * hyp1f1(n / 2 + s, n / 2, -r * r)


def bump(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


def brute_force_1d(f, s, x):
    """Direct quad of c * int_0^inf (2f(x) - f(x+z) - f(x-z)) z^{-1-2s} dz."""
    g = lambda z: (2 * f(x) - f(x + z) - f(x - z)) * z ** (-1 - 2 * s)
    pts = sorted({abs(1 - x), abs(1 + x)})
    val = scipy.integrate.quad(g, 0, pts[-1], points=pts[:-1], limit=400, epsabs=1e-13)[0]
    val += 2 * f(x) * pts[-1] ** (-2 * s) / (2 * s)
    return c_constant(1, s) * val


def test_constant_for_half_order_is_one_over_pi():
    assert c_constant(1, 0.5) == pytest.approx(1 / math.pi, rel=1e-14)


@pytest.mark.parametrize("n", [1, 2])
def test_constant_matches_gamma_formula(n):
    s = 0.3
    ref = s * 4**s * gamma(n / 2 + s) / (math.pi ** (n / 2) * gamma(1 - s))
    assert c_constant(n, s) == pytest.approx(ref, rel=1e-14)


@pytest.mark.parametrize("s", [0.1, 0.25, 0.5, 0.75, 0.9])
@pytest.mark.parametrize("x", [0.0, 0.4, 1.3, 3.0])
def test_gaussian_1d_against_fourier_oracle(s, x):
    assert frac_laplacian(gaussian(1), 1, s, x) == pytest.approx(gaussian_oracle(1, s, x), abs=1e-8)


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
@pytest.mark.parametrize("pt", [(0.0, 0.0), (0.5, 0.2), (1.5, -1.0)])
def test_gaussian_2d_against_fourier_oracle(s, pt):
    r = math.hypot(*pt)
    assert frac_laplacian(gaussian(2), 2, s, np.array(pt)) == pytest.approx(gaussian_oracle(2, s, r), abs=1e-7)


@pytest.mark.parametrize("s", [0.3, 0.6])
@pytest.mark.parametrize("x", [0.0, 0.5, -0.8, 1.7])
def test_smooth_bump_against_direct_quad(s, x):
    f = FunctionHandle(bump, breakpoints=(-1.0, 1.0), support=(-1.0, 1.0))
    ref = brute_force_1d(lambda y: float(bump(np.array([y]))[0]), s, x)
    assert frac_laplacian(f, 1, s, x) == pytest.approx(ref, rel=1e-6, abs=1e-9)


def test_constants_are_annihilated():
    assert frac_laplacian(constant(3.0), 1, 0.4, 0.2) == pytest.approx(0.0, abs=1e-12)
    assert frac_laplacian(constant(3.0, 2), 2, 0.4, np.array([0.2, 0.1])) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("lam", [0.5, 2.0, 3.0])
def test_scaling(lam):
    s, x = 0.35, 0.3
    u = ball_solution(1, s)
    lhs = frac_laplacian(dilated(u, lam), 1, s, x)
    assert lhs == pytest.approx(lam ** (2 * s) * frac_laplacian(u, 1, s, lam * x), rel=1e-9)


def test_translation_invariance():
    u = ball_solution(1, 0.6)
    assert frac_laplacian(shifted(u, 5.0), 1, 0.6, 5.3) == pytest.approx(frac_laplacian(u, 1, 0.6, 0.3), rel=1e-10)


def test_refined_spec_agrees():
    u = ball_solution(1, 0.7)
    a = frac_laplacian(u, 1, 0.7, 0.9)
    b = frac_laplacian(u, 1, 0.7, 0.9, DEFAULT_SPEC.refined(2))
    assert a == pytest.approx(b, rel=1e-8)


def test_growth_beyond_2t_is_rejected():
    f = FunctionHandle(lambda x: np.abs(x) ** 0.8, growth_exponent=0.8, breakpoints=(0.0,))
    with pytest.raises(NonIntegrableTail):
        frac_laplacian(f, 1, 0.4, 1.0)


def test_evaluation_on_a_kink_is_rejected():
    with pytest.raises(NonSmoothEvaluationPoint):
        frac_laplacian(ball_solution(1, 0.5), 1, 0.5, 1.0)


def test_split_radius_beyond_smoothness_rejected_for_holder_data():
    f = FunctionHandle(lambda x: (np.abs(x) < 0.5).astype(float), breakpoints=(-0.5, 0.5),
                       support=(-0.5, 0.5), smoothness_hint="Calpha_only")
    with pytest.raises(NonSmoothEvaluationPoint):
        frac_laplacian(f, 1, 0.5, 0.7, QuadratureSpec(split_radius=0.5))


@pytest.mark.parametrize("t", [0.0, 1.0, -0.2])
def test_order_outside_unit_interval(t):
    with pytest.raises(QuadratureError):
        frac_laplacian(gaussian(1), 1, t, 0.0)


def test_bilinear_form_properties():
    s = 0.4
    g, u = gaussian(1), ball_solution(1, s)
    for x in (0.0, 0.45, 2.0):
        assert bilinear_I(g, u, 1, s, x) == pytest.approx(bilinear_I(u, g, 1, s, x), rel=1e-10)
        assert bilinear_I(g, g, 1, s, x) > 0
        assert bilinear_I(g, constant(2.0), 1, s, x) == pytest.approx(0.0, abs=1e-12)


def test_bilinear_form_of_linear_pair_is_explicit():
    # w1 = w2 = Gaussian at x = 0: I = c int (1 - e^{-z^2})^2 |z|^{-1-2s}
    s = 0.5
    ref = 2 * c_constant(1, s) * scipy.integrate.quad(
        lambda z: (1 - np.exp(-z * z)) ** 2 * z ** (-1 - 2 * s), 0, np.inf, limit=200)[0]
    assert bilinear_I(gaussian(1), gaussian(1), 1, s, 0.0) == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize("n", [1, 2])
def test_product_rule_residual(n):
    s = 0.5
    u = ball_solution(n, s)
    x = 0.3 if n == 1 else np.array([0.3, -0.2])
    assert product_rule_residual(u, u, n, s, x) <= 10 * DEFAULT_SPEC.target_tol
    assert product_rule_residual(gaussian(n), u, n, s, x) <= 10 * DEFAULT_SPEC.target_tol
