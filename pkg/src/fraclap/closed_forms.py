"""Explicit solutions and barrier functions.

* the torsion-type solution of ``(-Δ)^s u = 1`` in a ball, zero outside;
* the one-dimensional half-line profile ``(x_+)^s``;
* the fractional Kelvin transform;
* a supersolution outside ``B_1`` and a subsolution in ``B_1 \\ B_{1/4}``,
  whose amplitudes are calibrated numerically on verification grids.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma

from .functions import C_ALPHA_ONLY, FunctionHandle, linear_combination
from .operator import QuadratureSpec, frac_laplacian


class CalibrationFailed(RuntimeError):
    pass


class EvaluationAtOrigin(ValueError):
    pass


def ball_coefficient(n: int, s: float) -> float:
    return 2.0 ** (-2.0 * s) * gamma(0.5 * n) / (gamma(0.5 * (n + 2.0 * s)) * gamma(1.0 + s))


def _radius(x, n, center=None):
    x = np.asarray(x, dtype=float)
    if center is not None:
        x = x - (center if n == 2 else center[0])
    return np.abs(x) if n == 1 else np.linalg.norm(x, axis=-1)


@dataclass(frozen=True)
class BallSolution:
    n: int
    s: float
    r: float
    x0: tuple
    coeff: float

    def __call__(self, x):
        rho = _radius(x, self.n, np.asarray(self.x0))
        return self.coeff * (np.clip(self.r - rho, 0.0, None) * (self.r + rho)) ** self.s


def ball_solution(n: int, s: float, r: float = 1.0, x0=None) -> FunctionHandle:
    """Solution of ``(-Δ)^s u = 1`` in ``B_r(x0)``, ``u = 0`` outside."""
    if not 0 < s < 1 or r <= 0 or n not in (1, 2):
        raise ValueError("need s in (0,1), r > 0 and n in {1, 2}")
    x0 = tuple(np.zeros(n) if x0 is None else np.atleast_1d(np.asarray(x0, dtype=float)))
    sol = BallSolution(n, s, float(r), x0, ball_coefficient(n, s))
    if n == 1:
        c = x0[0]
        return FunctionHandle(sol, dim=1, breakpoints=(c - r, c + r), support=(c - r, c + r))
    prof = lambda rho: sol.coeff * (np.clip(r - rho, 0.0, None) * (r + rho)) ** s
    return FunctionHandle(sol, dim=2, breakpoints=(r,), support=(0.0, r), center=x0, profile=prof)


def halfspace_profile(s: float) -> FunctionHandle:
    """``(x_+)^s``, which is ``s``-harmonic on the positive half-line."""
    if not 0 < s < 1:
        raise ValueError("s must lie in (0, 1)")
    return FunctionHandle(
        lambda x: np.clip(x, 0.0, None) ** s, dim=1, growth_exponent=s, breakpoints=(0.0,)
    )


def kelvin_transform(u: FunctionHandle, n: int, s: float) -> FunctionHandle:
    """``x -> |x|^{2s-n} u(x / |x|^2)``; 2-D handles must be centered at the origin."""
    if u.dim != n:
        raise ValueError("dimension mismatch")
    if n == 2 and any(c != 0.0 for c in u.center):
        raise ValueError("the 2-D Kelvin transform needs a handle radial about the origin")

    # a compactly supported u has a transform vanishing near the origin
    bounded = u.support is not None and all(np.isfinite(u.support))

    def ev(x):
        x = np.asarray(x, dtype=float)
        rho = np.abs(x) if n == 1 else np.linalg.norm(x, axis=-1)
        out = np.zeros(rho.shape)
        ok = rho > 0.0
        if not np.all(ok) and not bounded:
            raise EvaluationAtOrigin("the Kelvin transform is undefined at the origin")
        xo, ro = x[ok], rho[ok]
        star = xo / ro**2 if n == 1 else xo / (ro**2)[..., None]
        out[ok] = ro ** (2.0 * s - n) * u(star)
        return out

    if n == 1:
        bps = {1.0 / b for b in u.breakpoints if b != 0.0}
        if u.support is not None:
            bps.update(1.0 / b for b in u.support if b != 0.0)
        bps.add(0.0)
    else:
        bps = {1.0 / b for b in u.breakpoints if b > 0.0}
        if u.support is not None and u.support[1] > 0:
            bps.add(1.0 / u.support[1])
    return FunctionHandle(
        ev,
        dim=n,
        growth_exponent=max(2.0 * s - n, 0.0),
        smoothness_hint=u.smoothness_hint,
        breakpoints=tuple(bps),
        support=None,
        center=u.center,
        profile=_kelvin_profile(u, s) if n == 2 else None,
    )


def _kelvin_profile(u, s):
    def prof(r):
        r = np.asarray(r, dtype=float)
        at_origin = r == 0.0
        if np.any(at_origin) and u.support is None:
            raise EvaluationAtOrigin("the Kelvin transform is undefined at the origin")
        safe = np.where(at_origin, 1.0, r)
        # u vanishes near infinity, so its transform vanishes near the origin
        return np.where(at_origin, 0.0, safe ** (2.0 * s - 2.0) * u.radial_profile(1.0 / safe))

    return prof


def smoothstep_cutoff(n: int, inner: float = 4.0, outer: float = 5.0) -> FunctionHandle:
    """Radial C^2 cutoff: 0 in ``B_inner``, 1 outside ``B_outer``, quintic in between."""

    def prof(rho):
        tau = np.clip((rho - inner) / (outer - inner), 0.0, 1.0)
        return tau**3 * (10.0 - 15.0 * tau + 6.0 * tau**2)

    bps = (-outer, -inner, inner, outer) if n == 1 else (inner, outer)
    return FunctionHandle(lambda x: prof(_radius(x, n)), dim=n, growth_exponent=0.0, breakpoints=bps,
                          profile=prof if n == 2 else None)


def _radial_points(radii, n):
    radii = np.asarray(radii, dtype=float)
    if n == 1:
        return radii
    return np.stack([radii, np.zeros_like(radii)], axis=-1)


def _apply(f, n, s, pts, q):
    return np.array([frac_laplacian(f, n, s, p, q) for p in pts])


@dataclass(frozen=True)
class Barrier:
    """A calibrated barrier.

    ``amplitude`` multiplies the Kelvin part (supersolution) or the indicator
    of ``B_{1/4}`` (subsolution).  ``envelope`` is the fitted constant of the
    pointwise bound against ``| |x| - 1 |^s``.
    """

    kind: str
    n: int
    s: float
    amplitude: float
    envelope: float
    calibration_radii: np.ndarray = field(repr=False)
    check_radii: np.ndarray = field(repr=False)
    check_values: np.ndarray = field(repr=False)

    @property
    def amplitude_cap(self) -> float:
        return 10.0 * 4.0 ** (2.0 * self.s + self.n)


def supersolution_phi1(n: int, s: float, q: QuadratureSpec | None = None, npts: int = 200,
                       margin: float = 1.01):
    """Supersolution with ``(-Δ)^s φ_1 ≥ 1`` in ``B_4 \\ B_1``, vanishing in ``B_1``.

    Returns ``(barrier, handle)``.  The amplitude of the Kelvin part is the
    smallest one making the sampled inequality hold, times ``margin``; the
    inequality is then checked on a staggered grid.
    """
    kelvin = kelvin_transform(ball_solution(n, s), n, s)
    cutoff = smoothstep_cutoff(n)
    cap = 10.0 * 4.0 ** (2.0 * s + n)

    radii = 1.0 + 3.0 * (np.arange(npts) + 0.5) / npts
    pts = _radial_points(radii, n)
    lk = _apply(kelvin, n, s, pts, q)
    lx = _apply(cutoff, n, s, pts, q)
    if np.any(lk <= 0):
        raise CalibrationFailed("Kelvin part is not a strict supersolution on the grid")
    amp = margin * float(np.max((1.0 - lx) / lk))
    if not amp <= cap:
        raise CalibrationFailed(f"amplitude {amp:.4g} exceeds cap {cap:.4g}")

    phi1 = linear_combination(amp, kelvin, 1.0, cutoff)
    check = 1.0 + 3.0 * (np.arange(npts) + 1.0) / (npts + 1)
    vals = _apply(phi1, n, s, _radial_points(check, n), q)

    # the sup of the ratio may sit at |x| -> 1, so the grid is graded towards it
    env_r = np.unique(np.concatenate([1.0 + np.geomspace(1e-9, 3.0, 1200), np.linspace(1.0, 4.0, 601)[1:]]))
    env = float(np.max(phi1(_radial_points(env_r, n)) / (env_r - 1.0) ** s))
    far = phi1(_radial_points(np.linspace(4.0, 12.0, 401), n))
    barrier = Barrier("supersolution_phi1", n, s, amp, max(env, float(np.max(far))),
                      radii, check, vals)
    return barrier, phi1


def subsolution_psi(n: int, s: float, q: QuadratureSpec | None = None, npts: int = 200,
                    margin: float = 1.01):
    """Subsolution ``(1-|x|^2)_+^s + C 1_{|x| ≤ 1/4}`` with ``(-Δ)^s ψ ≤ 0`` in ``B_1 \\ B_{1/4}``.

    The grid stays in ``0.3 ≤ |x| ≤ 0.95``, away from the jump at ``|x| = 1/4``.
    """
    inner = 0.25
    bump_prof = lambda r: np.clip(1.0 - r**2, 0.0, None) ** s
    ind_prof = lambda r: (r <= inner).astype(float)
    bump_ev = lambda x: bump_prof(_radius(x, n))
    ind_ev = lambda x: ind_prof(_radius(x, n))
    if n == 1:
        bump = FunctionHandle(bump_ev, dim=1, breakpoints=(-1.0, 1.0), support=(-1.0, 1.0))
        ind = FunctionHandle(ind_ev, dim=1, breakpoints=(-inner, inner), support=(-inner, inner),
                             smoothness_hint=C_ALPHA_ONLY)
    else:
        bump = FunctionHandle(bump_ev, dim=2, breakpoints=(1.0,), support=(0.0, 1.0), profile=bump_prof)
        ind = FunctionHandle(ind_ev, dim=2, breakpoints=(inner,), support=(0.0, inner),
                             smoothness_hint=C_ALPHA_ONLY, profile=ind_prof)
    cap = 10.0 * 4.0 ** (2.0 * s + n)

    radii = np.linspace(0.3, 0.95, npts)
    pts = _radial_points(radii, n)
    lb = _apply(bump, n, s, pts, q)
    li = _apply(ind, n, s, pts, q)
    if np.any(li >= 0):
        raise CalibrationFailed("indicator term is not negative on the grid")
    amp = margin * float(np.max(-lb / li))
    if not amp <= cap:
        raise CalibrationFailed(f"amplitude {amp:.4g} exceeds cap {cap:.4g}")

    psi = linear_combination(1.0, bump, amp, ind)
    check = 0.3 + 0.65 * (np.arange(npts) + 0.5) / npts
    vals = _apply(psi, n, s, _radial_points(check, n), q)

    # the inf may sit at |x| -> 1 or just outside the jump at |x| = 1/4
    env_r = np.unique(np.concatenate([
        1.0 - np.geomspace(1e-9, 1.0, 1200),
        inner + np.geomspace(1e-10, 1.0 - inner, 400),
        np.linspace(0.0, 1.0, 801)[:-1],
    ]))
    env_r = env_r[env_r < 1.0]
    env = float(np.min(psi(_radial_points(env_r, n)) / (1.0 - env_r) ** s))
    barrier = Barrier("subsolution_psi", n, s, amp, env, radii, check, vals)
    return barrier, psi
