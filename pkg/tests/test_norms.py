import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraclap.functions import GridFunction
from fraclap.norms import (
    DegenerateData,
    GridTooCoarse,
    HolderSpec,
    NormError,
    derivative,
    extension_E,
    holder_seminorm,
    rate_fit,
    sample_seminorm,
    weighted_norm,
    weighted_seminorm,
)


def grid(f, a, b, num, endpoints=False):
    return GridFunction.sample(f, a, b, num, endpoints=endpoints)


@pytest.mark.parametrize("beta, k, frac", [(0.3, 0, 0.3), (1.0, 0, 1.0), (1.5, 1, 0.5), (2.0, 1, 1.0), (2.7, 2, 0.7)])
def test_holder_spec_decomposition(beta, k, frac):
    spec = HolderSpec(beta)
    assert spec.k == k
    assert spec.frac == pytest.approx(frac)


@pytest.mark.parametrize("beta, sigma", [(0.0, 0.0), (-1.0, 0.0), (0.5, -0.6), (3.5, 0.0)])
def test_holder_spec_rejects(beta, sigma):
    with pytest.raises(NormError):
        HolderSpec(beta, sigma)


def test_linear_function_half_holder():
    for num in (101, 401):
        est = holder_seminorm(grid(lambda x: x, 0, 1, num, endpoints=True), 0.5)
        assert est.seminorm_value == pytest.approx(1.0, rel=0.02)
        x, y = est.argmax_pair
        assert abs(x - y) >= est.min_separation


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_power_function_holder(s):
    est = holder_seminorm(grid(lambda x: x**s, 0, 1, 801, endpoints=True), s)
    assert est.seminorm_value == pytest.approx(1.0, rel=0.02)


@pytest.mark.parametrize("beta", [0.4, 1.0, 1.6])
def test_constants_have_zero_seminorm(beta):
    f = grid(lambda x: 3 + 0 * x, 0, 1, 200)
    assert holder_seminorm(f, beta).seminorm_value == 0.0
    assert weighted_seminorm(f, HolderSpec(beta, 0.2)).seminorm_value == 0.0


def test_weighted_linear_example_is_one_half():
    vals = [weighted_seminorm(grid(lambda x: x, 0, 1, n), HolderSpec(1.0)).seminorm_value for n in (200, 800)]
    assert vals[0] <= vals[1] <= 0.5
    assert vals[1] == pytest.approx(0.5, rel=0.02)


def test_weighted_norm_examples():
    assert weighted_norm(grid(lambda x: 1 + 0 * x, 0, 1, 400), HolderSpec(0.5)) == pytest.approx(1.0)
    # beta = 1 means k = 0: sup |x| plus the weighted seminorm 1/2
    assert weighted_norm(grid(lambda x: x, 0, 1, 800), HolderSpec(1.0)) == pytest.approx(1.5, rel=0.02)


def test_negative_sigma_branch_is_stable():
    s = 0.5
    vals = [weighted_norm(grid(lambda x: x**s, 0, 1, n, endpoints=True), HolderSpec(1.0, -s))
            for n in (400, 800, 1600)]
    assert np.all(np.isfinite(vals))
    assert max(vals) / min(vals) <= 1.02


def test_weighted_norm_needs_sigma_above_minus_one():
    with pytest.raises(NormError):
        weighted_norm(grid(lambda x: x, 0, 1, 100), HolderSpec(1.5, -1.2))


@pytest.mark.parametrize("f", [np.sin, lambda x: x**2 * (1 - x), lambda x: np.sqrt(x)], ids=["sin", "cubic", "sqrt"])
@pytest.mark.parametrize("beta, sigma", [(0.5, 0.0), (1.0, -0.3), (1.5, 0.5)])
def test_rescale_order(f, beta, sigma):
    # g(x) = f(x / lam) on lam * U has seminorm lam^sigma times that of f on U
    lam, num = 2.0, 1201
    spec = HolderSpec(beta, sigma)
    base = grid(f, 0, 1, num)
    scaled = grid(lambda x: f(x / lam), 0, lam, num)
    a = weighted_seminorm(base, spec).seminorm_value
    b = weighted_seminorm(scaled, spec, min_separation=lam * 4 * base.spacing).seminorm_value
    assert b == pytest.approx(lam**sigma * a, rel=0.05)


def test_monotone_in_the_set():
    f = grid(np.sin, 0, 3, 600)
    full = holder_seminorm(f, 0.7).seminorm_value
    sub = holder_seminorm(f.restrict(f.nodes < 1.5), 0.7).seminorm_value
    assert sub <= full


def test_interpolation_sanity_bound():
    f = grid(np.sin, 0, 2, 800, endpoints=True)
    b1, b2, diam = 0.4, 0.9, 2.0
    lo = holder_seminorm(f, b1).seminorm_value
    hi = holder_seminorm(f, b2).seminorm_value
    sup = np.max(np.abs(f.values))
    bound = 2 * sup ** (1 - b1 / b2) * (hi * diam**b2) ** (b1 / b2) * diam ** (-b1)
    assert lo <= 4 * bound


def test_too_few_pairs():
    with pytest.raises(GridTooCoarse):
        holder_seminorm(grid(lambda x: x, 0, 1, 6), 0.5)


def test_derivative_needs_uniform_grid():
    f = GridFunction(np.array([0.0, 0.1, 0.3, 0.6]), np.zeros(4))
    with pytest.raises(NormError):
        derivative(f, 1)


def test_second_derivative_of_quadratic():
    d2 = derivative(grid(lambda x: x**2, 0, 1, 50), 2)
    np.testing.assert_allclose(d2.values, 2.0, rtol=1e-8)


def test_weighted_seminorm_needs_distance():
    f = GridFunction(np.linspace(0, 1, 50), np.zeros(50))
    with pytest.raises(NormError):
        weighted_seminorm(f, HolderSpec(0.5))


def test_extension_linear_example():
    z = np.linspace(0, 1, 201)
    E = extension_E(z, z, 1.0)
    np.testing.assert_array_equal(E(z), z)
    assert E(np.array([2.0]))[0] == pytest.approx(1.0)
    assert E(np.array([-1.0]))[0] == pytest.approx(1.0)


def test_extension_of_constant():
    z = np.linspace(0, 1, 50)
    E = extension_E(z, 0 * z + 2.5, 0.5)
    np.testing.assert_array_equal(E(np.linspace(-3, 4, 101)), 2.5)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from([0.3, 0.5, 1.0]))
def test_extension_properties(seed, alpha):
    rng = np.random.default_rng(seed)
    z = np.sort(rng.uniform(-1, 1, 60))
    z = z[np.concatenate([[True], np.diff(z) > 1e-6])]
    w = np.sin(3 * z) + 0.3 * rng.normal(size=z.size)
    E = extension_E(z, w, alpha)
    np.testing.assert_array_equal(E(z), w)
    fresh = np.linspace(-2, 2, 901)
    ev = E(fresh)
    assert np.max(np.abs(ev)) <= np.max(np.abs(w))
    assert sample_seminorm(fresh, ev, alpha) <= 1.05 * sample_seminorm(z, w, alpha)


def test_rate_fit_exact_power():
    rho = np.geomspace(1e-4, 1, 9)
    fit = rate_fit(rho, rho**-0.5)
    assert fit.slope == pytest.approx(-0.5, abs=1e-10)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert not fit.degenerate


def test_rate_fit_constant_is_flagged():
    fit = rate_fit(np.geomspace(1e-3, 1, 5), np.full(5, 4.0))
    assert fit.slope == 0.0
    assert fit.degenerate
    assert np.isnan(fit.r_squared)


@pytest.mark.parametrize("rho, vals", [([1.0], [1.0]), ([1.0, 2.0], [1.0, -1.0]), ([0.0, 1.0], [1.0, 2.0])])
def test_rate_fit_rejects(rho, vals):
    with pytest.raises(DegenerateData):
        rate_fit(rho, vals)


def test_rate_fit_ball_derivative_oracle():
    # sup |u'| on {delta >= rho} for u = (1 - x^2)^{1/2} grows like rho^{-1/2}
    s = 0.5
    rho = 2.0 ** -np.arange(2, 12)
    sups = [2 * s * (1 - r) * (1 - (1 - r) ** 2) ** (s - 1) for r in rho]
    assert rate_fit(rho, np.array(sups)).slope == pytest.approx(s - 1, abs=0.1)
