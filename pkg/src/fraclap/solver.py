"""Collocation solver for ``(-Δ)^s u = g`` on an interval with ``u = 0`` outside.

The unknowns are nodal values on a uniform grid with ``N`` cells.  At node
``x_i`` the operator is discretised as::

    c ∫_0^h  -u''(x_i) z^{1-2s} dz            (second difference for u'')
  + c ∫_h^∞ (2u_i - I_h u(x_i+z) - I_h u(x_i-z)) z^{-1-2s} dz

where ``I_h u`` is the piecewise-linear interpolant, zero outside the
interval.  Both pieces integrate in closed form against the kernel, which
gives a symmetric Toeplitz matrix.

Solutions behave like ``δ^s`` at the boundary, which piecewise-linear
interpolation resolves poorly: the scheme then converges, but the quotient
``u_h/δ^s`` carries an error of fixed size in the first few cells.  Within
``BOUNDARY_WINDOW`` cells of each end point the solution is therefore
represented as ``δ^s`` times the piecewise-linear interpolant of ``u_j/δ_j^s``.
On the window the far-field integrals are taken with Gauss rules on cells
(exact up to round-off, since every cell is at least one cell away from the
singularity), and the near field of each window node uses the local quadratic
interpolant of the quotient.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.integrate
import scipy.linalg
from scipy.special import roots_jacobi

from .closed_forms import ball_coefficient
from .functions import FunctionHandle, GridFunction
from .geometry import Domain, distance
from .norms import RateFit, rate_fit
from .operator import c_constant

BOUNDARY_WINDOW = 4
_CELL_ORDER = 24


class SolverError(RuntimeError):
    pass


class SingularSystem(SolverError):
    pass


class ReferenceUnavailable(SolverError):
    pass


def _kernel_moments(s, m):
    """``∫_k^{k+1} ζ^{-1-2s} dζ`` and ``∫_k^{k+1} ζ^{-2s} dζ`` for ``k = 1..m``."""
    k = np.arange(1, m + 1, dtype=float)
    m0 = (k ** (-2.0 * s) - (k + 1.0) ** (-2.0 * s)) / (2.0 * s)
    if abs(1.0 - 2.0 * s) < 1e-12:
        m1 = np.log1p(1.0 / k)
    else:
        m1 = ((k + 1.0) ** (1.0 - 2.0 * s) - k ** (1.0 - 2.0 * s)) / (1.0 - 2.0 * s)
    return k, m0, m1


def stencil_weights(s: float, h: float, m: int) -> np.ndarray:
    """Toeplitz weights ``w_0 .. w_m`` of the discrete operator at spacing ``h``."""
    k, m0, m1 = _kernel_moments(s, m)
    # hat at offset k picks up (k+1)M0(k) - M1(k) from [k, k+1] and M1(k-1) - (k-1)M0(k-1) from [k-1, k]
    left = (k + 1.0) * m0 - m1
    right = np.zeros(m)
    right[1:] = m1[:-1] - (k[:-1]) * m0[:-1]
    a = left + right
    scale = c_constant(1, s) * h ** (-2.0 * s)
    w = np.empty(m + 1)
    w[0] = 2.0 / (2.0 - 2.0 * s) + 2.0 / (2.0 * s)
    w[1:] = -a
    w[1] -= 1.0 / (2.0 - 2.0 * s)
    return scale * w


@lru_cache(maxsize=64)
def _near_boundary_constant(s, p):
    """``∫_0^1 (2 - (1+z)^p - (1-z)^p) z^{-1-2s} dz``."""
    def ratio(z):
        # divided by z^2, with its Taylor series where cancellation bites
        z = np.asarray(z, dtype=float)
        series = p * (1 - p) * (1 + (2 - p) * (3 - p) * z**2 / 12)
        with np.errstate(divide="ignore", invalid="ignore"):
            direct = (2.0 - (1.0 + z) ** p - (1.0 - z) ** p) / z**2
        return np.where(z < 1e-3, series, direct)

    tol = dict(epsabs=1e-12, epsrel=1e-11)
    lo = scipy.integrate.quad(ratio, 0.0, 0.5, weight="alg", wvar=(1.0 - 2.0 * s, 0.0), **tol)[0]
    hi = scipy.integrate.quad(lambda z: (2.0 - (1.0 + z) ** p) * z ** (-1.0 - 2.0 * s), 0.5, 1.0, **tol)[0]
    # (1-z)^p goes into the algebraic weight
    hi -= scipy.integrate.quad(lambda z: z ** (-1.0 - 2.0 * s), 0.5, 1.0, weight="alg", wvar=(0.0, p), **tol)[0]
    return lo + hi


@lru_cache(maxsize=8)
def _cell_rule(wpow):
    """Gauss rule on ``[0, 1]`` for the weight ``τ^wpow``."""
    if wpow == 0.0:
        x, w = np.polynomial.legendre.leggauss(_CELL_ORDER)
        return 0.5 * (x + 1.0), 0.5 * w
    x, w = roots_jacobi(_CELL_ORDER, 0.0, wpow)
    return 0.5 * (x + 1.0), w * 0.5 ** (1.0 + wpow)


def boundary_window(s: float, n_rows: int, window: int = BOUNDARY_WINDOW) -> np.ndarray:
    """Corrections near the left end point, in units ``h = 1`` and without ``c_{1,s}``.

    Returns an ``(n_rows, window + 1)`` block to be added to the first
    ``window + 1`` columns.  Row ``i`` is node ``i`` (distance ``i`` cells).
    """
    C = np.zeros((n_rows, window + 1))
    rows = np.arange(1, n_rows + 1, dtype=float)
    expo = -1.0 - 2.0 * s

    def kernel_moments(t, w, f):
        return np.abs(rows[:, None] - t[None, :]) ** expo @ (w * f)

    for j in range(window):
        far = (rows <= j - 1) | (rows >= j + 2)
        t, w = _cell_rule(0.0)
        t = t + j
        # remove the piecewise-linear interpolant on [j, j+1]
        if j >= 1:
            C[:, j - 1] += far * kernel_moments(t, w, j + 1 - t)
        C[:, j] += far * kernel_moments(t, w, t - j)
        # and put back τ^s times the interpolated quotient
        if j == 0:
            t, w = _cell_rule(s)
            C[:, 0] -= far * kernel_moments(t, w, 2.0 - t)
            C[:, 1] -= far * kernel_moments(t, w, t - 1.0) * 2.0**-s
        else:
            ts = t**s
            C[:, j - 1] -= far * kernel_moments(t, w, ts * (j + 1 - t)) * j**-s
            C[:, j] -= far * kernel_moments(t, w, ts * (t - j)) * (j + 1) ** -s

    # near field of node 1: τ^s (A + B τ) through the first two quotients
    second = 1.0 / (2.0 - 2.0 * s)
    js, js1 = _near_boundary_constant(s, s), _near_boundary_constant(s, s + 1.0)
    C[0, 0] += 2.0 * js - js1 - 2.0 * second
    C[0, 1] += 2.0**-s * (js1 - js) + second

    # near field of nodes 2 .. window-1: τ^s times the local quadratic in the quotient
    zj, wj = roots_jacobi(_CELL_ORDER, 0.0, 1.0 - 2.0 * s)
    z, wz = 0.5 * (zj + 1.0), wj * 0.5 ** (2.0 - 2.0 * s)
    for i in range(2, window):
        nodes = np.array([i - 1.0, i, i + 1.0])
        for k in range(3):
            others = np.delete(nodes, k)

            def m(tau):
                return tau**s * np.prod([(tau - o) / (nodes[k] - o) for o in others], axis=0)

            val = float(np.sum(wz * (2.0 * m(float(i)) - m(i + z) - m(i - z)) / z**2))
            C[i - 1, int(nodes[k]) - 1] += val * nodes[k] ** -s
        C[i - 1, i - 2 : i + 1] += second * np.array([1.0, -2.0, 1.0])
    return C


@dataclass(frozen=True)
class CollocationSystem:
    nodes: np.ndarray
    matrix: np.ndarray
    s: float
    domain: Domain
    h: float


@dataclass(frozen=True)
class NumericalSolution:
    u: GridFunction
    s: float
    domain: Domain
    achieved_residual: float
    N: int

    @property
    def nodes(self):
        return self.u.nodes[1:-1]

    @property
    def values(self):
        return self.u.values[1:-1]

    def quotient(self, min_distance: float | None = None):
        """Nodes, distances and ``u_h / δ^s`` at nodes with ``δ ≥ min_distance`` (default one cell)."""
        h = (self.domain.bounds[1] - self.domain.bounds[0]) / self.N
        dmin = h * (1 - 1e-9) if min_distance is None else min_distance
        d = distance(self.domain, self.nodes)
        keep = d >= dmin
        return self.nodes[keep], d[keep], self.values[keep] / d[keep] ** self.s


def assemble(dom: Domain, s: float, N: int, boundary_model: bool = True) -> CollocationSystem:
    """Dense system on ``N`` uniform cells (``N - 1`` interior unknowns).

    ``boundary_model=False`` gives the plain symmetric Toeplitz scheme.
    """
    if not 0 < s < 1:
        raise SolverError("s must lie in (0, 1)")
    if N < 8:
        raise SolverError("need N >= 8")
    a, b = dom.bounds
    h = (b - a) / N
    nodes = a + h * np.arange(1, N)
    A = scipy.linalg.toeplitz(stencil_weights(s, h, N - 2))
    if boundary_model:
        C = c_constant(1, s) * h ** (-2.0 * s) * boundary_window(s, N - 1)
        width = C.shape[1]
        A[:, :width] += C
        A[:, -width:] += C[::-1, ::-1]
    return CollocationSystem(nodes, A, s, dom, h)


def apply_operator(system: CollocationSystem, values) -> np.ndarray:
    return system.matrix @ np.asarray(values, dtype=float)


def solve_dirichlet(dom: Domain, s: float, g, N: int) -> NumericalSolution:
    """Solve ``(-Δ)^s u = g`` in ``dom`` with ``u = 0`` outside, by dense LU."""
    system = assemble(dom, s, N)
    rhs = np.asarray(g(system.nodes), dtype=float) * np.ones_like(system.nodes)
    if not np.all(np.isfinite(rhs)):
        raise SolverError("g must be bounded on the domain")
    try:
        u = scipy.linalg.solve(system.matrix, rhs, check_finite=True)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise SingularSystem(f"collocation matrix is singular (this is a bug): {exc}") from exc
    res = float(np.max(np.abs(system.matrix @ u - rhs))) if rhs.size else 0.0
    a, b = dom.bounds
    full_nodes = np.concatenate([[a], system.nodes, [b]])
    full_vals = np.concatenate([[0.0], u, [0.0]])
    grid = GridFunction(full_nodes, full_vals, distance(dom, full_nodes))
    return NumericalSolution(grid, s, dom, res, N)


def closed_form_reference(dom: Domain, s: float, g) -> FunctionHandle | None:
    """Exact solution when ``g`` is a constant; ``None`` otherwise."""
    probe = np.asarray(g(np.linspace(*dom.bounds, 7)[1:-1]), dtype=float) * np.ones(5)
    if not np.allclose(probe, probe[0], rtol=0, atol=0):
        return None
    a, b = dom.bounds
    r, c = 0.5 * (b - a), 0.5 * (a + b)
    coeff = ball_coefficient(1, s) * probe[0]
    return FunctionHandle(
        lambda x: coeff * np.clip(r**2 - (np.asarray(x) - c) ** 2, 0.0, None) ** s,
        breakpoints=(a, b), support=(a, b),
    )


@dataclass(frozen=True)
class ConvergenceStudy:
    N: np.ndarray
    h: np.ndarray
    errors: np.ndarray
    interior_errors: np.ndarray
    fit: RateFit
    interior_fit: RateFit
    monotone: bool


def convergence_study(dom: Domain, s: float, g, N_list, reference=None,
                      interior_distance: float = 0.25) -> ConvergenceStudy:
    """Max nodal error versus ``h`` with log-log fits, globally and on ``{δ ≥ interior_distance}``."""
    N_list = sorted(int(n) for n in N_list)
    if len(N_list) < 3:
        raise ReferenceUnavailable("need at least three grid sizes")
    ref = reference if reference is not None else closed_form_reference(dom, s, g)
    if ref is None:
        raise ReferenceUnavailable("no closed form for this right-hand side; pass reference=")
    hs, errs, ierrs = [], [], []
    for N in N_list:
        sol = solve_dirichlet(dom, s, g, N)
        x = sol.nodes
        e = np.abs(sol.values - ref(x))
        inner = distance(dom, x) >= interior_distance
        hs.append((dom.bounds[1] - dom.bounds[0]) / N)
        errs.append(float(e.max()))
        ierrs.append(float(e[inner].max()))
    hs, errs, ierrs = map(np.asarray, (hs, errs, ierrs))
    return ConvergenceStudy(
        np.asarray(N_list), hs, errs, ierrs,
        rate_fit(hs, errs), rate_fit(hs, ierrs),
        bool(np.all(np.diff(errs) <= 0)),
    )
