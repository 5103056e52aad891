"""Principal-value quadrature for the fractional Laplacian of order ``t`` in 1-D and 2-D.

Every evaluation reduces to a one-dimensional integral in the distance
``z = |x - y|``::

    (-Δ)^t f(x) = c_{n,t} ∫_0^∞ N(z) z^{-1-2t} dz

with ``N(z) = 2 f(x) - f(x+z) - f(x-z)`` in 1-D and ``N(ρ) = 2π (f(x) - <f>_ρ)``
in 2-D, where ``<f>_ρ`` is the mean of ``f`` over the circle of radius ρ about
``x``.  ``N(z) = O(z^2)`` for ``f`` smooth near ``x``, so the near field
``[0, r]`` is handled by Gauss-Jacobi quadrature with weight ``z^{1-2t}``
applied to ``N(z)/z^2``.  The far field is split at every distance where the
integrand loses smoothness, panels are graded geometrically towards those
points, and the tail beyond the support is integrated in closed form.  For
functions without compact support the tail is covered by dyadic panels plus a
geometric-series remainder fitted to the declared growth exponent.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gamma, roots_jacobi

from .functions import C_ALPHA_ONLY, FunctionHandle, product


class QuadratureError(ValueError):
    pass


class NonIntegrableTail(QuadratureError):
    pass


class NonSmoothEvaluationPoint(QuadratureError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    """Parameters of the PV quadrature.

    split_radius
        Radius of the near field.  ``None`` uses half the distance from ``x``
        to the closest non-smooth point of the integrand.
    near_panels
        Number of Gauss-Jacobi nodes on the near field.
    panel_order
        Gauss-Legendre nodes per far-field panel.
    grading_levels
        Geometric refinement levels towards each non-smooth point.  The
        innermost panel must stay well above round-off relative to ``|x|``,
        so more than 12 levels at the default ratio is not useful.
    far_truncation
        Start of the tail.  ``None`` places it at the edge of the support.
    tail_panels
        Dyadic panels used before the tail remainder is extrapolated
        (non-compact functions only).
    """

    split_radius: float | None = None
    near_panels: int = 24
    panel_order: int = 12
    grading_levels: int = 10
    grading_ratio: float = 0.15
    far_truncation: float | None = None
    tail_panels: int = 64
    angular_order: int = 8
    angular_levels: int = 8
    target_tol: float = 1e-4

    def __post_init__(self):
        if self.split_radius is not None and not self.split_radius > 0:
            raise QuadratureError("split_radius must be positive")
        if not self.target_tol > 0:
            raise QuadratureError("target_tol must be positive")
        if self.near_panels < 2 or self.panel_order < 2:
            raise QuadratureError("need at least two nodes per rule")

    def refined(self, factor: int = 2) -> "QuadratureSpec":
        """A copy with every resolution parameter multiplied by ``factor``."""
        return QuadratureSpec(
            split_radius=self.split_radius,
            near_panels=self.near_panels * factor,
            panel_order=self.panel_order * factor,
            grading_levels=min(self.grading_levels + 2 * factor, 12),
            grading_ratio=self.grading_ratio,
            far_truncation=self.far_truncation,
            tail_panels=self.tail_panels * factor,
            angular_order=self.angular_order * factor,
            angular_levels=self.angular_levels * factor,
            target_tol=self.target_tol,
        )


DEFAULT_SPEC = QuadratureSpec()


def _check_order(t):
    if not 0.0 < t < 1.0:
        raise QuadratureError(f"order must lie in (0, 1), got {t}")


def c_constant(n: int, t: float) -> float:
    """Normalisation ``c_{n,t}`` matching the Fourier symbol ``|ξ|^{2t}``."""
    _check_order(t)
    if n not in (1, 2):
        raise QuadratureError("only n=1 and n=2 are supported")
    return t * 4.0**t * gamma(0.5 * n + t) / (np.pi ** (0.5 * n) * gamma(1.0 - t))


# --- rules ----------------------------------------------------------------


@lru_cache(maxsize=64)
def _legendre(p):
    return np.polynomial.legendre.leggauss(p)


@lru_cache(maxsize=256)
def _jacobi(p, beta):
    u, w = roots_jacobi(p, 0.0, beta)
    return u, w


def _graded_breaks(a, b, left, right, levels, ratio):
    """Panel end points on ``[a, b]``, graded geometrically towards flagged ends."""
    if not left and not right:
        return np.array([a, b])
    if left and right:
        m = 0.5 * (a + b)
        lo = _graded_breaks(a, m, True, False, levels, ratio)
        hi = _graded_breaks(m, b, False, True, levels, ratio)
        return np.concatenate([lo, hi[1:]])
    k = ratio ** np.arange(levels, -1, -1)
    if left:
        return np.concatenate([[a], a + (b - a) * k])
    return np.concatenate([(b - (b - a) * k)[::-1], [b]])


def _panel_rule(breaks, p):
    """Composite Gauss-Legendre nodes and weights on consecutive panels."""
    x, w = _legendre(p)
    lo, hi = breaks[:-1], breaks[1:]
    half = 0.5 * (hi - lo)
    nodes = (0.5 * (hi + lo))[:, None] + half[:, None] * x[None, :]
    weights = half[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def _far_rule(z0, z1, sing_left, sing_right, q):
    """Rule on ``[z0, z1]``: dyadic in ``z`` then graded at singular ends."""
    if z1 <= z0:
        return np.empty(0), np.empty(0)
    m = max(1, int(np.ceil(np.log2(z1 / z0))))
    dy = z0 * (z1 / z0) ** (np.arange(m + 1) / m)
    pieces = []
    for i in range(m):
        left = sing_left and i == 0
        right = sing_right and i == m - 1
        pieces.append(_graded_breaks(dy[i], dy[i + 1], left, right, q.grading_levels, q.grading_ratio))
    nodes, weights = zip(*(_panel_rule(b, q.panel_order) for b in pieces))
    return np.concatenate(nodes), np.concatenate(weights)


# --- radial PV core ---------------------------------------------------------


def _pv_radial(const, var, t, singular, support_end, growth, q, r_near):
    """``∫_0^∞ (const + var(z)) z^{-1-2t} dz`` with ``const + var(z) = O(z^2)``.

    ``singular`` lists distances where ``var`` is not smooth.  ``support_end``
    is the distance beyond which ``var`` vanishes (``None`` if it never does);
    then ``var(z) = O(z^growth)`` is assumed.
    """
    # near field: Gauss-Jacobi with weight z^{1-2t} on N(z)/z^2
    u, w = _jacobi(q.near_panels, 1.0 - 2.0 * t)
    zn = 0.5 * r_near * (1.0 + u)
    near = (0.5 * r_near) ** (2.0 - 2.0 * t) * np.sum(w * (const + var(zn)) / zn**2)

    sing = sorted(z for z in set(singular) if z > r_near * (1 + 1e-12))
    if support_end is not None:
        end = max(support_end, r_near)
        if q.far_truncation is not None:
            end = max(end, q.far_truncation)
        sing = [z for z in sing if z < end * (1 - 1e-14)]
        stops = [r_near] + sing + [end]
        flags = [False] + [True] * len(sing) + [support_end >= r_near]
    else:
        end = max(sing[-1] if sing else r_near, q.far_truncation or 0.0, r_near) * 2.0
        stops = [r_near] + sing + [end]
        flags = [False] + [True] * len(sing) + [False]

    nodes, weights = [], []
    for i in range(len(stops) - 1):
        zz, ww = _far_rule(stops[i], stops[i + 1], flags[i], flags[i + 1], q)
        nodes.append(zz)
        weights.append(ww)
    z = np.concatenate(nodes)
    wz = np.concatenate(weights)
    far = np.sum(wz * (const + var(z)) * z ** (-1.0 - 2.0 * t))

    tail = const * end ** (-2.0 * t) / (2.0 * t)
    if support_end is None:
        if growth >= 2.0 * t:
            raise NonIntegrableTail(f"growth exponent {growth} >= 2t = {2 * t}")
        x, w = _legendre(q.panel_order)
        k = np.arange(q.tail_panels)
        lo = end * 2.0**k
        zz = lo[:, None] * (1.5 + 0.5 * x[None, :])
        ww = (0.5 * lo)[:, None] * w[None, :]
        panels = np.sum(ww * var(zz.ravel()).reshape(zz.shape) * zz ** (-1.0 - 2.0 * t), axis=1)
        ratio = 2.0 ** (max(growth, 0.0) - 2.0 * t)
        tail += panels.sum() + panels[-1] * ratio / (1.0 - ratio)
    return near + far + tail


# --- 1-D and 2-D drivers ------------------------------------------------------


def _near_radius(dists, q, hint):
    d_min = min(dists) if dists else np.inf
    if d_min < 1e-14:
        raise NonSmoothEvaluationPoint("evaluation point coincides with a non-smooth point")
    auto = 0.5 * d_min if np.isfinite(d_min) else 1.0
    if q.split_radius is None:
        return auto
    if q.split_radius >= d_min:
        if hint == C_ALPHA_ONLY:
            raise NonSmoothEvaluationPoint(
                f"non-smooth point at distance {d_min:.3g} inside split radius {q.split_radius:.3g}"
            )
        return auto
    return q.split_radius


def _distances_1d(handles, x):
    bps = set()
    for h in handles:
        bps.update(h.breakpoints)
        if h.support is not None:
            bps.update(h.support)
    return sorted(abs(b - x) for b in bps)


def _support_end_1d(handles, x, how):
    sups = [h.support for h in handles]
    if how == "any" and all(s is not None for s in sups):
        return max(max(abs(s[0] - x), abs(s[1] - x)) for s in sups)
    if how == "product" and any(s is not None for s in sups):
        return min(max(abs(s[0] - x), abs(s[1] - x)) for s in sups if s is not None)
    return None


def _circle_mean(prof, xi, rho, breaks, q):
    """Mean of a radial function over circles of radii ``rho`` about a point at radius ``xi``.

    ``prof`` maps the distance from the symmetry center to function values.
    """
    rho = np.asarray(rho, dtype=float)
    if xi == 0.0:
        return prof(rho)

    # circles of radius rho about x cross the break circle b iff |b - xi| < rho < b + xi;
    # the crossing pattern is constant between consecutive radial stops, so group by it
    br = np.asarray([b for b in breaks if b > 0.0], dtype=float)
    crosses = (np.abs(br[None, :] - xi) < rho[:, None]) & (rho[:, None] < br[None, :] + xi)
    ref = _graded_breaks(0.0, 1.0, True, True, q.angular_levels, q.grading_ratio)
    xr, wr = _panel_rule(ref, q.angular_order)
    out = np.empty(rho.size)
    patterns, inverse = np.unique(crosses, axis=0, return_inverse=True)
    for k, pattern in enumerate(patterns):
        idx = np.flatnonzero(inverse.ravel() == k)
        rk = rho[idx]
        bk = br[pattern]
        cosang = (bk[None, :] ** 2 - xi**2 - rk[:, None] ** 2) / (2.0 * xi * rk[:, None])
        ang = np.arccos(np.clip(cosang, -1.0, 1.0))
        cuts = np.sort(np.concatenate([np.zeros((rk.size, 1)), ang, np.full((rk.size, 1), np.pi)], axis=1), axis=1)
        a, b = cuts[:, :-1], cuts[:, 1:]
        theta = a[..., None] + (b - a)[..., None] * xr[None, None, :]
        wt = (b - a)[..., None] * wr[None, None, :]
        # (xi - rho)^2 + 4 xi rho cos^2(θ/2) keeps the distance accurate near θ = π
        r2 = (xi - rk[:, None, None]) ** 2 + 4.0 * xi * rk[:, None, None] * np.cos(0.5 * theta) ** 2
        vals = prof(np.sqrt(r2).ravel()).reshape(theta.shape)
        out[idx] = np.sum(vals * wt, axis=(1, 2)) / np.pi
    return out


def _radial_breaks(handles):
    br = set()
    for h in handles:
        br.update(h.breakpoints)
        if h.support is not None:
            br.add(float(h.support[1]))
    return sorted(br)


def _singular_rho(breaks, xi):
    out = set()
    for b in breaks:
        out.add(abs(b - xi))
        out.add(b + xi)
    return sorted(z for z in out if z > 0)


def _prepare(f, t, x, q):
    _check_order(t)
    q = q or DEFAULT_SPEC
    if f.support is None and f.growth_exponent >= 2.0 * t:
        raise NonIntegrableTail(f"growth exponent {f.growth_exponent} >= 2t = {2 * t}")
    return q


def frac_laplacian(f: FunctionHandle, n: int, t: float, x, q: QuadratureSpec | None = None) -> float:
    """``(-Δ)^t f(x)`` by principal-value quadrature."""
    q = _prepare(f, t, x, q)
    if n != f.dim:
        raise QuadratureError(f"handle is {f.dim}-D but n={n}")
    c = c_constant(n, t)
    if n == 1:
        x = float(np.asarray(x).reshape(()))
        fx = float(f(np.array([x]))[0])
        dists = _distances_1d([f], x)
        r = _near_radius(dists, q, f.smoothness_hint)
        var = lambda z: -(f(x + z) + f(x - z))
        return c * _pv_radial(2.0 * fx, var, t, dists, _support_end_1d([f], x, "any"),
                              f.growth_exponent, q, r)

    x = np.asarray(x, dtype=float)
    fx = float(f(x[None, :])[0])
    breaks = _radial_breaks([f])
    xi = float(f.radius_of(x))
    dists = _singular_rho(breaks, xi)
    r = _near_radius([abs(b - xi) for b in breaks], q, f.smoothness_hint)
    var = lambda rho: -2.0 * np.pi * _circle_mean(f.radial_profile, xi, rho, breaks, q)
    end = None if f.support is None else f.support[1] + xi
    return c * _pv_radial(2.0 * np.pi * fx, var, t, dists, end, f.growth_exponent, q, r)


def bilinear_I(w1: FunctionHandle, w2: FunctionHandle, n: int, s: float, x,
               q: QuadratureSpec | None = None) -> float:
    """``c ∫ (w1(x)-w1(y)) (w2(x)-w2(y)) |x-y|^{-n-2s} dy``."""
    _check_order(s)
    q = q or DEFAULT_SPEC
    if w1.dim != n or w2.dim != n:
        raise QuadratureError("dimension mismatch")
    growth = w1.growth_exponent + w2.growth_exponent
    compact = w1.support is not None and w2.support is not None
    if not compact and growth >= 2.0 * s:
        raise NonIntegrableTail(f"combined growth {growth} >= 2s = {2 * s}")
    c = c_constant(n, s)
    hint = C_ALPHA_ONLY if C_ALPHA_ONLY in (w1.smoothness_hint, w2.smoothness_hint) else None
    if n == 1:
        x = float(np.asarray(x).reshape(()))
        a, b = float(w1(np.array([x]))[0]), float(w2(np.array([x]))[0])
        dists = _distances_1d([w1, w2], x)
        r = _near_radius(dists, q, hint)

        def var(z):
            p1 = a * w2(x + z) + b * w1(x + z) - w1(x + z) * w2(x + z)
            p2 = a * w2(x - z) + b * w1(x - z) - w1(x - z) * w2(x - z)
            return -(p1 + p2)

        end = _support_end_1d([w1, w2], x, "any")
        return c * _pv_radial(2.0 * a * b, var, s, dists, end, growth, q, r)

    if tuple(w1.center) != tuple(w2.center):
        raise QuadratureError("2-D handles must share their center")
    x = np.asarray(x, dtype=float)
    a, b = float(w1(x[None, :])[0]), float(w2(x[None, :])[0])
    breaks = _radial_breaks([w1, w2])
    xi = float(w1.radius_of(x))
    dists = _singular_rho(breaks, xi)
    r = _near_radius([abs(bb - xi) for bb in breaks], q, hint)

    def cross(r):
        p1, p2 = w1.radial_profile(r), w2.radial_profile(r)
        return a * p2 + b * p1 - p1 * p2

    var = lambda rho: -2.0 * np.pi * _circle_mean(cross, xi, rho, breaks, q)
    end = None
    if compact:
        end = max(w1.support[1], w2.support[1]) + xi
    return c * _pv_radial(2.0 * np.pi * a * b, var, s, dists, end, growth, q, r)


def product_rule_residual(w1: FunctionHandle, w2: FunctionHandle, n: int, s: float, x,
                          q: QuadratureSpec | None = None) -> float:
    """``|(-Δ)^s(w1 w2) - w1 (-Δ)^s w2 - w2 (-Δ)^s w1 + I_s(w1, w2)|`` at ``x``."""
    pt = np.asarray(x, dtype=float).reshape(1, -1) if n == 2 else np.array([float(np.asarray(x).reshape(()))])
    a, b = float(w1(pt)[0]), float(w2(pt)[0])
    lhs = frac_laplacian(product(w1, w2), n, s, x, q)
    rhs = a * frac_laplacian(w2, n, s, x, q) + b * frac_laplacian(w1, n, s, x, q)
    return abs(lhs - rhs + bilinear_I(w1, w2, n, s, x, q))
