import numpy as np
import pytest

from fraclap.closed_forms import ball_coefficient
from fraclap.functions import FunctionHandle
from fraclap.geometry import Domain
from fraclap.norms import rate_fit
from fraclap.operator import frac_laplacian
from fraclap.solver import (
    ReferenceUnavailable,
    SolverError,
    apply_operator,
    assemble,
    closed_form_reference,
    convergence_study,
    solve_dirichlet,
)

from conftest import one


def bump(x):
    return np.clip(1.0 - (np.asarray(x, dtype=float) / 0.6) ** 2, 0.0, None) ** 4


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_residual_and_symmetry(solutions, s):
    sol = solutions(s, 256)
    assert sol.achieved_residual <= 1e-10
    np.testing.assert_allclose(sol.values, sol.values[::-1], rtol=0, atol=1e-10)


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_max_principle(solutions, s):
    assert np.all(solutions(s, 256).values > 0)


def test_linearity_and_zero_data(unit_interval):
    u1 = solve_dirichlet(unit_interval, 0.4, one, 128).values
    u2 = solve_dirichlet(unit_interval, 0.4, lambda x: 2 * one(x), 128).values
    np.testing.assert_allclose(u2, 2 * u1, rtol=1e-12)
    u0 = solve_dirichlet(unit_interval, 0.4, lambda x: 0 * one(x), 128).values
    np.testing.assert_array_equal(u0, 0.0)


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_close_to_exact_solution(solutions, unit_interval, s):
    sol = solutions(s, 256)
    exact = closed_form_reference(unit_interval, s, one)
    assert np.max(np.abs(sol.values - exact(sol.nodes))) <= 1e-2


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_converges_at_least_at_order_min_s(unit_interval, s):
    study = convergence_study(unit_interval, s, one, [32, 64, 128, 256])
    assert study.monotone
    assert study.fit.slope >= min(s, 1 - s)
    assert study.fit.r_squared >= 0.95


def test_self_convergence_interior(solutions):
    # successive differences at shared interior nodes shrink
    s = 0.5
    diffs = []
    for N in (64, 128, 256):
        a, b = solutions(s, N), solutions(s, 2 * N)
        diffs.append(np.max(np.abs(a.values - b.values[1::2])))
    assert diffs[0] > diffs[1] > diffs[2]


@pytest.mark.parametrize("seed", range(5))
def test_sup_bound_by_comparison_with_ball_solution(unit_interval, seed):
    rng = np.random.default_rng(seed)
    coef = rng.normal(size=4)
    s = rng.uniform(0.2, 0.8)
    g = lambda x: np.polynomial.chebyshev.chebval(np.asarray(x), coef)
    sol = solve_dirichlet(unit_interval, s, g, 256)
    gmax = np.max(np.abs(g(np.linspace(-1, 1, 2001))))
    assert np.max(np.abs(sol.values)) <= 1.05 * ball_coefficient(1, s) * gmax


def test_toeplitz_part_is_an_m_matrix(unit_interval):
    A = assemble(unit_interval, 0.6, 64, boundary_model=False).matrix
    assert np.all(np.diag(A) > 0)
    off = A - np.diag(np.diag(A))
    assert np.all(off <= 0)
    assert np.all(A.sum(axis=1) > 0)
    np.testing.assert_allclose(A, A.T)


def test_full_matrix_has_positive_diagonal_and_mirror_symmetry(unit_interval):
    A = assemble(unit_interval, 0.6, 64).matrix
    assert np.all(np.diag(A) > 0)
    np.testing.assert_allclose(A, A[::-1, ::-1], rtol=1e-13, atol=1e-10)


@pytest.mark.parametrize("s", [0.3, 0.5, 0.7])
def test_rows_are_consistent_on_smooth_data(unit_interval, s):
    # the piecewise-linear far field is accurate to O(h^{2-2s}) on C^2 data
    f = FunctionHandle(bump, breakpoints=(-0.6, 0.6), support=(-0.6, 0.6))
    errs = []
    for N in (64, 128, 256, 512):
        system = assemble(unit_interval, s, N)
        inner = np.abs(system.nodes) <= 0.75
        exact = np.array([frac_laplacian(f, 1, s, x) for x in system.nodes[inner]])
        approx = apply_operator(system, bump(system.nodes))[inner]
        errs.append(np.max(np.abs(approx - exact)))
    assert np.all(np.diff(errs) < 0)
    assert np.log2(errs[-2] / errs[-1]) >= 0.8 * (2 - 2 * s)


def test_boundary_window_improves_quotient(unit_interval):
    s, N = 0.5, 256
    exact = ball_coefficient(1, s)
    with_window = solve_dirichlet(unit_interval, s, one, N)
    A = assemble(unit_interval, s, N, boundary_model=False).matrix
    plain = np.linalg.solve(A, np.ones(N - 1))
    x, d, q = with_window.quotient()
    q_plain = plain / d ** s
    # the exact quotient is coeff * (2 - d)^s
    target = exact * (2 - d) ** s
    assert np.max(np.abs(q - target)) < 0.5 * np.max(np.abs(q_plain - target))


def test_shifted_interval(solutions):
    dom = Domain.interval(2.0, 6.0)
    sol = solve_dirichlet(dom, 0.5, one, 128)
    # scaling: u_{(2,6)}(2 + 2(x+1)) = 2^{2s} u_{(-1,1)}(x)
    np.testing.assert_allclose(sol.values, 2.0 * solutions(0.5, 128).values, rtol=1e-10)


@pytest.mark.parametrize("s, N", [(0.0, 64), (1.0, 64), (0.5, 4)])
def test_invalid_parameters(unit_interval, s, N):
    with pytest.raises(SolverError):
        assemble(unit_interval, s, N)


def test_reference_requires_constant_data(unit_interval):
    assert closed_form_reference(unit_interval, 0.5, lambda x: np.asarray(x)) is None
    with pytest.raises(ReferenceUnavailable):
        convergence_study(unit_interval, 0.5, lambda x: np.asarray(x), [32, 64, 128])


@pytest.mark.parametrize("g", [lambda x: x**2, bump, lambda x: (x > 0.3).astype(float)], ids=["square", "bump", "step"])
def test_max_principle_surrogate_for_nonnegative_data(unit_interval, g):
    gmax = np.max(np.abs(g(np.linspace(-1, 1, 2001))))
    for s in (0.2, 0.5, 0.8):
        sol = solve_dirichlet(unit_interval, s, g, 128)
        assert np.min(sol.values) >= -1e-8 * gmax


def test_center_value_half_order(solutions):
    sol = solutions(0.5, 256)
    assert sol.values[sol.nodes.size // 2] == pytest.approx(1.0, abs=0.01)
    assert sol.nodes[sol.nodes.size // 2] == 0.0


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_nested_consistency_from_coarse_grids(unit_interval, s):
    # coarse-to-fine gaps at shared nodes shrink with h; steps below N = 64 can
    # be out of order while the boundary window covers a large part of the grid
    Ns = (8, 16, 32, 64, 128, 256, 512)
    sols = [solve_dirichlet(unit_interval, s, one, N) for N in Ns]
    gaps = np.array([np.max(np.abs(a.values - b.values[1::2])) for a, b in zip(sols, sols[1:])])
    assert gaps[-1] < gaps[0]
    fit = rate_fit(2.0 / np.array(Ns[2:-1]), gaps[2:])
    assert fit.slope > 0
