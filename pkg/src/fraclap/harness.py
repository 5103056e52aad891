"""Named experiments that confront solver output and quadrature with closed forms.

Each experiment returns an :class:`ExperimentReport` whose verdict is decided
by declared tolerances only.  Every tolerance has a default that can be
overridden by name; the report records which value was used and where it came
from.  Hard tolerances decide between PASS and FAIL, soft ones between PASS and
WARN.  All grids are fixed, so reports are reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .closed_forms import (
    ball_coefficient,
    ball_solution,
    subsolution_psi,
    supersolution_phi1,
)
from .functions import FunctionHandle, GridFunction
from .geometry import BoundaryPoint, Domain, KrylovSetSpec, delta0_pow, distance, in_DR
from .norms import (
    GridTooCoarse,
    extension_E,
    holder_seminorm,
    rate_fit,
    sample_seminorm,
)
from .operator import DEFAULT_SPEC, QuadratureSpec, bilinear_I, frac_laplacian, product_rule_residual
from .solver import NumericalSolution, closed_form_reference, convergence_study, solve_dirichlet

PASS, WARN, FAIL = "PASS", "WARN", "FAIL"


class UnknownTolerance(KeyError):
    pass


@dataclass(frozen=True)
class Series:
    x: np.ndarray
    y: np.ndarray
    x_label: str
    y_label: str


@dataclass(frozen=True)
class ExperimentReport:
    name: str
    params: dict
    metrics: dict
    verdict: str
    series: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS


@dataclass(frozen=True)
class QuotientFunction:
    """``u_h / δ^s`` at nodes at least one cell from the boundary, plus its Hölder extension."""

    nodes: np.ndarray
    values: np.ndarray
    distances: np.ndarray
    alpha: float
    extension: FunctionHandle

    @classmethod
    def from_solution(cls, sol: NumericalSolution, alpha: float | None = None) -> "QuotientFunction":
        x, d, v = sol.quotient()
        if alpha is None:
            alpha = min(sol.s, 1.0 - sol.s)
        if not np.all(np.isfinite(v)):
            raise ValueError("quotient is not finite")
        return cls(x, v, d, alpha, extension_E(x, v, alpha))


class _Tolerances:
    """Declared thresholds with provenance, and the outcome of each check."""

    def __init__(self, defaults: dict, overrides: dict | None):
        overrides = dict(overrides or {})
        unknown = sorted(set(overrides) - set(defaults))
        if unknown:
            raise UnknownTolerance(f"unknown tolerance(s) {unknown}; known: {sorted(defaults)}")
        self._entries = {}
        for name, (value, hard) in defaults.items():
            src = "override" if name in overrides else "default"
            self._entries[name] = {
                "value": float(overrides.get(name, value)),
                "source": src,
                "hard": hard,
                "observed": None,
                "met": None,
            }

    def __getitem__(self, name):
        return self._entries[name]["value"]

    def record(self, name, observed, met):
        e = self._entries[name]
        e["observed"] = observed
        e["met"] = bool(met)

    def verdict(self):
        missing = [k for k, e in self._entries.items() if e["met"] is None]
        if missing:
            raise RuntimeError(f"tolerances never checked: {missing}")
        if any(e["hard"] and not e["met"] for e in self._entries.values()):
            return FAIL
        if any(not e["met"] for e in self._entries.values()):
            return WARN
        return PASS

    def as_dict(self):
        return {k: dict(v) for k, v in self._entries.items()}


def _report(name, params, metrics, tol, series):
    return ExperimentReport(name, params, metrics, tol.verdict(), series, tol.as_dict())


def _unit_interval():
    return Domain.interval(-1.0, 1.0)


def _one(x):
    return np.ones_like(np.asarray(x, dtype=float))


def _check_s(s):
    if not 0.0 < s < 1.0:
        raise ValueError("s must be in (0,1)")


# --- quadrature identities -------------------------------------------------


def exp_ball_identity(s: float = 0.5, n: int = 1, tolerances=None, q: QuadratureSpec | None = None,
                      points: int = 50) -> ExperimentReport:
    """Apply the quadrature to the ball solution at interior points; the result should be 1."""
    _check_s(s)
    tol = _Tolerances({"max_deviation": (1e-3 if n == 1 else 5e-3, True)}, tolerances)
    u = ball_solution(n, s)
    radii = np.linspace(-0.98, 0.98, points) if n == 1 else np.linspace(0.02, 0.98, points)
    if n == 1:
        pts = radii
    else:
        # spread the radial points over angles so no direction is special
        theta = np.arange(points) * math.pi * (3.0 - math.sqrt(5.0))
        pts = np.stack([radii * np.cos(theta), radii * np.sin(theta)], axis=-1)
    dev = np.array([frac_laplacian(u, n, s, p, q) for p in pts]) - 1.0
    worst = float(np.max(np.abs(dev)))
    tol.record("max_deviation", worst, worst <= tol["max_deviation"])
    series = {"deviation": Series(np.abs(radii), dev, "|x|", "Lu - 1")}
    return _report("exp_ball_identity", {"s": s, "n": n, "points": points},
                   {"max_deviation": worst}, tol, series)


# --- solver experiments ----------------------------------------------------


def exp_convergence(s: float = 0.5, N: int = 256, tolerances=None) -> ExperimentReport:
    """Max nodal error of the collocation solver for g = 1 against the closed form."""
    _check_s(s)
    tol = _Tolerances(
        {
            "max_error": (1e-2, True),
            "min_order": (min(s, 1.0 - s), True),
            "min_r_squared": (0.95, True),
            "interior_order_gain": (0.0, False),
            "monotone": (0.0, False),
        },
        tolerances,
    )
    dom = _unit_interval()
    N_list = [m for m in (32, 64, 128, 256, 512, 1024, 2048, 4096) if m <= N]
    if len(N_list) < 3:
        raise GridTooCoarse("need N >= 128 for three grid sizes")
    st = convergence_study(dom, s, _one, N_list)
    gain = st.interior_fit.slope - st.fit.slope
    rises = float(np.max(np.diff(st.errors), initial=0.0))
    tol.record("max_error", float(st.errors[-1]), st.errors[-1] <= tol["max_error"])
    tol.record("min_order", st.fit.slope, st.fit.slope > tol["min_order"])
    tol.record("min_r_squared", st.fit.r_squared, st.fit.r_squared >= tol["min_r_squared"])
    tol.record("interior_order_gain", gain, gain > tol["interior_order_gain"])
    tol.record("monotone", rises, rises <= tol["monotone"])
    metrics = {
        "errors": st.errors.tolist(),
        "interior_errors": st.interior_errors.tolist(),
        "order": st.fit.slope,
        "r_squared": st.fit.r_squared,
        "interior_order": st.interior_fit.slope,
        "interior_r_squared": st.interior_fit.r_squared,
    }
    series = {
        "error": Series(st.h, st.errors, "h", "max nodal error"),
        "interior_error": Series(st.h, st.interior_errors, "h", "max nodal error on delta>=0.25"),
    }
    return _report("exp_convergence", {"s": s, "N": N, "N_list": N_list}, metrics, tol, series)


def _krylov_oscillation(sol: NumericalSolution):
    dom = sol.domain
    h = (dom.bounds[1] - dom.bounds[0]) / sol.N
    x, _, v = sol.quotient()
    x0 = BoundaryPoint.on(dom, dom.bounds[1])
    rho1 = dom.rho0
    R, osc = [], []
    k = 0
    while rho1 * 4.0**-k >= 8.0 * h:
        Rk = rho1 * 4.0**-k
        inside = in_DR(KrylovSetSpec(x0, Rk), dom, x)
        R.append(Rk)
        osc.append(float(np.ptp(v[inside])))
        k += 1
    if len(R) < 3:
        raise GridTooCoarse(f"only {len(R)} Krylov scales with R >= 8h; use N >= 256")
    return np.array(R), np.array(osc), float(np.max(v))


def _exact_oscillation_fit(sol, R):
    """Fitted exponent of the exact quotient ``coeff (1+x)^s`` over the same node sets."""
    dom = sol.domain
    x, _, _ = sol.quotient()
    coeff = ball_coefficient(1, sol.s)
    x0 = BoundaryPoint.on(dom, dom.bounds[1])
    osc = [np.ptp(coeff * (1.0 + x[in_DR(KrylovSetSpec(x0, r), dom, x)]) ** sol.s) for r in R]
    return rate_fit(R, np.array(osc))


def _quotient_error(sol, min_distance=1.0 / 16.0):
    """Max error of ``u_h/δ^s`` on ``{δ ≥ min_distance}``; near the boundary it does not converge."""
    x, d, v = sol.quotient(min_distance)
    return float(np.max(np.abs(v - ball_coefficient(1, sol.s) * (1.0 + np.abs(x)) ** sol.s)))


def exp_boundary_behavior(s: float = 0.5, N: int = 1024, tolerances=None) -> ExperimentReport:
    """Boundary bounds and oscillation decay of ``u_h/δ^s`` over Krylov sets ``D_{R_k}``."""
    _check_s(s)
    tol = _Tolerances(
        {
            "exponent_min": (0.0, True),
            "exponent_max": (1.2, True),
            "monotone_slack": (0.05, True),
            "sup_factor": (1.05, True),
            "sup_stability": (0.2, True),
            "linf_constant": (1.0, True),
            "richardson_direction": (0.0, False),
        },
        tolerances,
    )
    dom = _unit_interval()
    coeff = ball_coefficient(1, s)
    sol = solve_dirichlet(dom, s, _one, N)
    coarse = solve_dirichlet(dom, s, _one, N // 2)
    R, osc, sup_q = _krylov_oscillation(sol)
    Rc, oscc, sup_qc = _krylov_oscillation(coarse)
    fit = rate_fit(R, osc)
    fitc = rate_fit(Rc, oscc)
    ratio = float(np.max(osc[1:] / osc[:-1]))
    linf = float(np.max(np.abs(sol.values)))
    linf_bound = coeff * dom.diameter ** (2.0 * s)
    exact_fit = _exact_oscillation_fit(sol, R)
    approach = _quotient_error(coarse) - _quotient_error(sol)
    stab = abs(sup_q - sup_qc) / sup_q

    tol.record("exponent_min", fit.slope, fit.slope > tol["exponent_min"])
    tol.record("exponent_max", fit.slope, fit.slope <= tol["exponent_max"])
    tol.record("monotone_slack", ratio, ratio <= 1.0 + tol["monotone_slack"])
    tol.record("sup_factor", sup_q / (coeff * 2.0**s), sup_q <= tol["sup_factor"] * coeff * 2.0**s)
    tol.record("sup_stability", stab, stab <= tol["sup_stability"])
    tol.record("linf_constant", linf / linf_bound, linf <= tol["linf_constant"] * linf_bound)
    tol.record("richardson_direction", approach, approach >= -tol["richardson_direction"])
    metrics = {
        "exponent": fit.slope,
        "exponent_r_squared": fit.r_squared,
        "exponent_coarse": fitc.slope,
        "exponent_exact_nodes": exact_fit.slope,
        "scales": len(R),
        "oscillations": osc.tolist(),
        "sup_quotient": sup_q,
        "sup_quotient_coarse": sup_qc,
        "linf": linf,
        "linf_bound": linf_bound,
    }
    qx, qd, qv = sol.quotient()
    series = {
        "oscillation": Series(R, osc, "R", "osc of u_h/delta^s over D_R"),
        "quotient": Series(qx, qv, "x", "u_h/delta^s"),
    }
    return _report("exp_boundary_behavior", {"s": s, "N": N, "rho1": dom.rho0}, metrics, tol, series)


def _graded_nodes(rho_min, per_side=900):
    d = np.geomspace(rho_min, 1.0, per_side)
    return np.concatenate([-1.0 + d, (1.0 - d[:-1])[::-1]])


def _oracle_seminorms(s, beta, rhos, coeff):
    """[u]_{C^beta({δ ≥ ρ})} of the exact ball solution, sampled on a boundary-graded grid."""
    x = _graded_nodes(min(rhos) / 2.0)
    d = 1.0 - np.abs(x)
    if beta <= 1.0:
        f, expo = coeff * (d * (2.0 - d)) ** s, beta
    else:
        f, expo = -2.0 * s * coeff * x * (d * (2.0 - d)) ** (s - 1.0), beta - 1.0
    return np.array([sample_seminorm(x[d >= r * (1 - 1e-12)], f[d >= r * (1 - 1e-12)], expo) for r in rhos])


def _solver_seminorm(grid: GridFunction, beta, rho):
    return holder_seminorm(grid.restrict(grid.distance >= rho), beta).seminorm_value


def exp_interior_blowup(s: float = 0.5, N: int = 1024, beta_list=None, tolerances=None) -> ExperimentReport:
    """Growth of ``[u]_{C^β({δ ≥ ρ})}`` as ``ρ → 0`` against the rate ``ρ^{s-β}``.

    The exponents are fitted on the exact solution sampled on a grid graded
    towards the boundary, over ``ρ = 2^-8 .. 2^-16``; for ``β = s`` the
    seminorm saturates only slowly, so smaller scales than any uniform solver
    grid resolves are needed.  The solver is tied in by comparing its
    seminorms with the exact ones at the scales it resolves, at ``N`` and
    ``N/2``.
    """
    _check_s(s)
    betas = [s, 1.0] if beta_list is None else [float(b) for b in beta_list]
    if any(not (0.0 < b < 1.0 + 2.0 * s) or b > 2.0 for b in betas):
        raise ValueError("each beta must lie in (0, 1+2s) and be at most 2")
    defaults = {
        "slope_band": (0.1, True),
        "solver_agreement": (0.1, True),
        "quotient_slope_min": (-0.1, True),
        "richardson_direction": (0.0, False),
    }
    tol = _Tolerances(defaults, tolerances)
    coeff = ball_coefficient(1, s)
    dom = _unit_interval()
    fine_rhos = 2.0 ** -np.arange(8, 17)
    sol = solve_dirichlet(dom, s, _one, N)
    coarse = solve_dirichlet(dom, s, _one, N // 2)
    h = 2.0 / N
    solver_rhos = np.array([2.0**-k for k in range(1, 40) if 2.0**-k >= 32.0 * h])

    metrics, series = {"betas": betas}, {}
    worst_band, worst_agree, worst_dir = 0.0, 0.0, math.inf
    for beta in betas:
        oracle = _oracle_seminorms(s, beta, fine_rhos, coeff)
        fit = rate_fit(fine_rhos, oracle)
        worst_band = max(worst_band, abs(fit.slope - (s - beta)))
        exact = _oracle_seminorms(s, beta, solver_rhos, coeff)
        num = np.array([_solver_seminorm(sol.u, beta, r) for r in solver_rhos])
        numc = np.array([_solver_seminorm(coarse.u, beta, r) for r in solver_rhos])
        rel = np.abs(num - exact) / exact
        relc = np.abs(numc - exact) / exact
        worst_agree = max(worst_agree, float(np.max(rel)))
        worst_dir = min(worst_dir, float(np.max(relc) - np.max(rel)))
        key = f"beta_{beta:g}"
        metrics[key] = {
            "slope": fit.slope,
            "expected_slope": s - beta,
            "r_squared": fit.r_squared,
            "solver_relative_gap": float(np.max(rel)),
            "solver_relative_gap_coarse": float(np.max(relc)),
            "solver_slope": rate_fit(solver_rhos, num).slope,
        }
        series[key] = Series(fine_rhos, oracle, "rho", f"[u]_C^{beta:g} on delta>=rho")
        series[key + "_solver"] = Series(solver_rhos, num, "rho", f"[u_h]_C^{beta:g} on delta>=rho")

    q = QuotientFunction.from_solution(sol)
    qgrid = GridFunction(q.nodes, q.values, q.distances)
    qvals = np.array([_solver_seminorm(qgrid, 1.0, r) for r in solver_rhos])
    qfit = rate_fit(solver_rhos, qvals)
    metrics["quotient_lipschitz"] = qvals.tolist()
    metrics["quotient_slope"] = qfit.slope
    series["quotient_lipschitz"] = Series(solver_rhos, qvals, "rho", "[u_h/delta^s]_C^1 on delta>=rho")

    tol.record("slope_band", worst_band, worst_band <= tol["slope_band"])
    tol.record("solver_agreement", worst_agree, worst_agree <= tol["solver_agreement"])
    tol.record("quotient_slope_min", qfit.slope,
               qfit.slope >= tol["quotient_slope_min"] and bool(np.all(np.isfinite(qvals))))
    tol.record("richardson_direction", worst_dir, worst_dir >= -tol["richardson_direction"])
    return _report("exp_interior_blowup", {"s": s, "N": N, "beta_list": betas}, metrics, tol, series)


# --- distance function and the quotient equation --------------------------


def _delta_power(dom, p):
    lo, hi = dom.bounds
    mid = 0.5 * (lo + hi)
    return FunctionHandle(lambda y: delta0_pow(dom, p, y), breakpoints=(lo, mid, hi), support=(lo, hi))


def exp_lapsdeltas(s: float = 0.5, N_pts: int = 20, tolerances=None,
                   q: QuadratureSpec | None = None) -> ExperimentReport:
    """``(-Δ)^s δ₀^s`` stays bounded up to the boundary; ``δ₀^{s/2}`` does not."""
    _check_s(s)
    tol = _Tolerances(
        {
            "slope_min": (-0.05, True),
            "refine_variation": (0.1, True),
            "contrast_slope_offset": (0.1, True),
            "separation": (0.2, True),
        },
        tolerances,
    )
    dom = _unit_interval()
    q = q or DEFAULT_SPEC
    d = np.geomspace(1e-3, 0.9, N_pts)
    x = dom.bounds[1] - d
    target, contrast = _delta_power(dom, s), _delta_power(dom, 0.5 * s)
    vals = np.array([frac_laplacian(target, 1, s, p, q) for p in x])
    fine = np.array([frac_laplacian(target, 1, s, p, q.refined(2)) for p in x])
    cvals = np.array([frac_laplacian(contrast, 1, s, p, q) for p in x])
    fit = rate_fit(d, np.abs(vals))
    cfit = rate_fit(d, np.abs(cvals))
    var = float(np.max(np.abs(vals - fine) / np.abs(fine)))
    sep = fit.slope - cfit.slope
    tol.record("slope_min", fit.slope, fit.slope >= tol["slope_min"] and bool(np.all(np.isfinite(vals))))
    tol.record("refine_variation", var, var <= tol["refine_variation"])
    tol.record("contrast_slope_offset", cfit.slope, cfit.slope <= -0.5 * s + tol["contrast_slope_offset"])
    tol.record("separation", sep, sep >= tol["separation"])
    metrics = {
        "sup": float(np.max(np.abs(vals))),
        "slope": fit.slope,
        "contrast_slope": cfit.slope,
        "contrast_homogeneity": -1.5 * s,
        "refine_variation": var,
        "separation": sep,
    }
    series = {
        "lap_delta_s": Series(d, vals, "delta", "(-Lap)^s delta0^s"),
        "lap_delta_half_s": Series(d, cvals, "delta", "(-Lap)^s delta0^(s/2)"),
    }
    return _report("exp_lapsdeltas", {"s": s, "N_pts": N_pts}, metrics, tol, series)


def exp_v_equation(s: float = 0.5, N: int = 400, tolerances=None,
                   q: QuadratureSpec | None = None) -> ExperimentReport:
    """Check ``(-Δ)^s v = δ₀^{-s}(g - v (-Δ)^s δ₀^s + I_s(v, δ₀^s))`` for ``u`` the ball solution.

    ``v = u/δ₀^s`` is used in closed form inside the interval and through the
    Hölder extension of ``N`` samples outside.  Points avoid the kink of
    ``δ₀`` at the midpoint.
    """
    _check_s(s)
    tol = _Tolerances({"relative_residual": (0.05, True), "product_rule": (1e-6, True),
                       "constant_v": (1e-6, True)}, tolerances)
    dom = _unit_interval()
    coeff = ball_coefficient(1, s)
    nodes = np.linspace(-1.0, 1.0, N + 1)
    ext = extension_E(nodes, coeff * (1.0 + np.abs(nodes)) ** s, 1.0)

    def v_eval(x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) < 1.0, coeff * (1.0 + np.abs(x)) ** s, ext(x))

    v = FunctionHandle(v_eval, breakpoints=(-1.0, 0.0, 1.0))
    dz = _delta_power(dom, s)
    unit = FunctionHandle(_one)
    d = np.geomspace(0.05, 0.95, 20)
    x = 1.0 - d
    lhs, rhs, prod, const = [], [], [], []
    for p in x:
        ld = frac_laplacian(dz, 1, s, p, q)
        vp = float(v_eval(p))
        lhs.append(frac_laplacian(v, 1, s, p, q))
        rhs.append((1.0 - vp * ld + bilinear_I(v, dz, 1, s, p, q)) / float(delta0_pow(dom, s, p)))
        prod.append(product_rule_residual(v, dz, 1, s, p, q))
        # v = 1: the equation collapses to 0 = 0 up to quadrature
        const.append(abs(frac_laplacian(unit, 1, s, p, q)
                         - (ld - ld + bilinear_I(unit, dz, 1, s, p, q)) / float(delta0_pow(dom, s, p))))
    lhs, rhs = np.array(lhs), np.array(rhs)
    resid = float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs)))
    tol.record("relative_residual", resid, resid <= tol["relative_residual"])
    tol.record("product_rule", max(prod), max(prod) <= tol["product_rule"])
    tol.record("constant_v", max(const), max(const) <= tol["constant_v"])
    metrics = {"relative_residual": resid, "max_rhs": float(np.max(np.abs(rhs))),
               "product_rule_residual": max(prod), "constant_v_residual": max(const)}
    series = {"lhs": Series(d, lhs, "delta", "(-Lap)^s v"), "rhs": Series(d, rhs, "delta", "rhs")}
    return _report("exp_v_equation", {"s": s, "N": N, "points": 20}, metrics, tol, series)


def exp_half_order_log(s: float = 0.5, N_pts: int = 14, tolerances=None,
                       q: QuadratureSpec | None = None) -> ExperimentReport:
    """``(-Δ)^{s/2}`` of the ball solution grows at most like ``1 + |log δ|``.

    Values behave like ``a + b|log δ|``, which can change sign, so a power fit
    of the values themselves is meaningless.  Instead the dyadic increments
    ``|w(2^-k) - w(2^-k+1)|`` are fitted: they are constant under logarithmic
    growth and scale like ``δ^{-p}`` under power growth ``δ^{-p}``.
    """
    _check_s(s)
    tol = _Tolerances({"increment_slope_min": (-0.05, True), "interior_refine": (1e-6, True)}, tolerances)
    q = q or DEFAULT_SPEC
    w = ball_solution(1, s)
    d = 2.0 ** -np.arange(1, N_pts + 1)
    vals = np.array([frac_laplacian(w, 1, 0.5 * s, 1.0 - dd, q) for dd in d])
    inc = np.abs(np.diff(vals))
    fit = rate_fit(d[1:], inc)
    logs = 1.0 + np.abs(np.log(d))
    b, a = np.polyfit(logs, vals, 1)
    resid = vals - (a + b * logs)
    r2 = 1.0 - float(np.sum(resid**2) / np.sum((vals - vals.mean()) ** 2))
    interior = frac_laplacian(w, 1, 0.5 * s, 0.5, q)
    interior_fine = frac_laplacian(w, 1, 0.5 * s, 0.5, q.refined(2))
    irel = abs(interior - interior_fine) / abs(interior_fine)
    tol.record("increment_slope_min", fit.slope, fit.slope >= tol["increment_slope_min"])
    tol.record("interior_refine", irel, irel <= tol["interior_refine"])
    metrics = {"increment_slope": fit.slope, "log_coefficient": b, "log_intercept": a,
               "log_fit_r_squared": r2, "interior_value": interior, "interior_refine": irel}
    series = {"values": Series(d, vals, "delta", "(-Lap)^(s/2) u"),
              "increments": Series(d[1:], inc, "delta", "dyadic increment")}
    return _report("exp_half_order_log", {"s": s, "N_pts": N_pts}, metrics, tol, series)


# --- barriers ---------------------------------------------------------------


def exp_barriers(s: float = 0.5, n: int = 1, tolerances=None,
                 q: QuadratureSpec | None = None) -> ExperimentReport:
    """Calibrated super- and subsolution and their envelopes against ``| |x| - 1 |^s``."""
    _check_s(s)
    tol = _Tolerances({"super_slack": (1e-3, True), "sub_slack": (1e-3, True),
                       "envelope_slack": (1e-6, True)}, tolerances)
    phi, phi_f = supersolution_phi1(n, s, q)
    psi, psi_f = subsolution_psi(n, s, q)

    def pts(r):
        return r if n == 1 else np.stack([r, np.zeros_like(r)], axis=-1)

    # envelopes re-checked on grids staggered against the ones they were fitted on
    r_out = 1.0 + 3.0 * (np.arange(997) + 0.5) / 997
    up = phi_f(pts(r_out)) - phi.envelope * (r_out - 1.0) ** s
    r_in = (np.arange(997) + 0.5) / 997
    low = psi.envelope * (1.0 - r_in) ** s - psi_f(pts(r_in))
    env_violation = float(max(np.max(up) / phi.envelope, np.max(low) / psi.envelope))

    tol.record("super_slack", float(np.min(phi.check_values)),
               np.min(phi.check_values) >= 1.0 - tol["super_slack"])
    tol.record("sub_slack", float(np.max(psi.check_values)), np.max(psi.check_values) <= tol["sub_slack"])
    tol.record("envelope_slack", env_violation,
               env_violation <= tol["envelope_slack"] and phi.envelope > 0 and psi.envelope > 0)
    metrics = {
        "phi1_amplitude": phi.amplitude,
        "phi1_min": float(np.min(phi.check_values)),
        "phi1_envelope": phi.envelope,
        "psi_amplitude": psi.amplitude,
        "psi_max": float(np.max(psi.check_values)),
        "psi_envelope": psi.envelope,
        "amplitude_cap": phi.amplitude_cap,
    }
    series = {
        "phi1": Series(phi.check_radii, phi.check_values, "|x|", "(-Lap)^s phi1"),
        "psi": Series(psi.check_radii, psi.check_values, "|x|", "(-Lap)^s psi"),
    }
    return _report("exp_barriers", {"s": s, "n": n, "points": len(phi.check_radii)}, metrics, tol, series)


# --- registry ----------------------------------------------------------------


@dataclass(frozen=True)
class Experiment:
    name: str
    run: Callable[..., ExperimentReport]
    summary: str
    defaults: dict


EXPERIMENTS = {
    e.name: e
    for e in (
        Experiment("exp_ball_identity", exp_ball_identity,
                   "quadrature of the explicit ball solution returns 1", {"s": 0.5, "n": 1}),
        Experiment("exp_convergence", exp_convergence,
                   "solver error and fitted order for g = 1 against the closed form", {"s": 0.5, "N": 256}),
        Experiment("exp_boundary_behavior", exp_boundary_behavior,
                   "u/delta^s bounds and oscillation decay over D_R, R_k = rho1 4^-k", {"s": 0.5, "N": 1024}),
        Experiment("exp_interior_blowup", exp_interior_blowup,
                   "[u]_C^beta on {delta >= rho} grows like rho^(s - beta)", {"s": 0.5, "N": 1024}),
        Experiment("exp_lapsdeltas", exp_lapsdeltas,
                   "(-Lap)^s delta0^s is bounded up to the boundary", {"s": 0.5, "N_pts": 20}),
        Experiment("exp_v_equation", exp_v_equation,
                   "the equation satisfied by v = u/delta^s", {"s": 0.5, "N": 400}),
        Experiment("exp_half_order_log", exp_half_order_log,
                   "(-Lap)^(s/2) u grows at most like 1 + |log delta|", {"s": 0.5, "N_pts": 14}),
        Experiment("exp_barriers", exp_barriers,
                   "supersolution outside B_1 and subsolution in B_1 minus B_1/4", {"s": 0.5, "n": 1}),
    )
}


def run_experiment(name: str, tolerances=None, **params) -> ExperimentReport:
    if name not in EXPERIMENTS:
        raise KeyError(name)
    exp = EXPERIMENTS[name]
    kwargs = dict(exp.defaults)
    kwargs.update({k: v for k, v in params.items() if v is not None})
    unknown = set(kwargs) - set(exp.defaults)
    if unknown:
        raise TypeError(f"{name} does not take {sorted(unknown)}")
    return exp.run(tolerances=tolerances, **kwargs)
