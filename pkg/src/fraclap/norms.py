"""Hölder seminorms of sampled functions, their distance-weighted versions, and a Hölder extension.

All seminorms are brute-force scans over node pairs at least ``min_separation``
apart, so each estimate is a lower bound for the supremum over the continuum.
Derivatives of order ``k ≤ 2`` are taken by second-order finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .functions import FunctionHandle, GridFunction

MAX_NODES = 4000


class NormError(ValueError):
    pass


class GridTooCoarse(NormError):
    pass


class DegenerateData(NormError):
    pass


@dataclass(frozen=True)
class HolderSpec:
    beta: float
    sigma: float = 0.0

    def __post_init__(self):
        if not self.beta > 0:
            raise NormError("beta must be positive")
        if self.sigma < -self.beta:
            raise NormError("sigma must be >= -beta")
        if self.k > 2:
            raise NormError("derivatives above order 2 are not supported")

    @property
    def k(self) -> int:
        # greatest integer strictly below beta, so the fractional part lies in (0, 1]
        return int(math.ceil(self.beta) - 1)

    @property
    def frac(self) -> float:
        return self.beta - self.k


@dataclass(frozen=True)
class HolderEstimate:
    seminorm_value: float
    argmax_pair: tuple
    pairs_scanned: int
    min_separation: float


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    degenerate: bool = False


def derivative(f: GridFunction, k: int) -> GridFunction:
    """``k``-th derivative on the nodes where a centered stencil fits."""
    if k == 0:
        return f
    x, v = f.nodes, f.values
    h = np.diff(x)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise NormError("derivatives need a uniform grid")
    h = h[0]
    d = None if f.distance is None else f.distance[1:-1]
    if k == 1:
        vals = (v[2:] - v[:-2]) / (2 * h)
    elif k == 2:
        vals = (v[2:] - 2 * v[1:-1] + v[:-2]) / h**2
    else:
        raise NormError("derivatives above order 2 are not supported")
    return GridFunction(x[1:-1], vals, d)


def _stratified(n, limit=MAX_NODES):
    if n <= limit:
        return np.arange(n)
    return np.unique(np.linspace(0, n - 1, limit).round().astype(int))


def _pair_scan(x, v, expo, weight, min_sep):
    """max over pairs ``|x_i - x_j| ≥ min_sep`` of ``weight_ij |v_i - v_j| / |x_i - x_j|^expo``."""
    idx = _stratified(x.size)
    x, v = x[idx], v[idx]
    w = None if weight is None else weight[idx]
    best, arg, count = 0.0, (float("nan"), float("nan")), 0
    block = 512
    for start in range(0, x.size, block):
        xi = x[start:start + block, None]
        sep = np.abs(xi - x[None, :])
        ok = sep >= min_sep * (1 - 1e-12)
        count += int(ok.sum())
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.abs(v[start:start + block, None] - v[None, :]) / sep**expo
            if w is not None:
                q = q * np.minimum(w[start:start + block, None], w[None, :])
        q = np.where(ok, q, -np.inf)
        j = np.unravel_index(np.argmax(q), q.shape)
        if q[j] > best:
            best, arg = float(q[j]), (float(x[start + j[0]]), float(x[j[1]]))
    return best, arg, count // 2


def holder_seminorm(f: GridFunction, beta: float, min_separation: float | None = None) -> HolderEstimate:
    """Estimate ``sup |D^k f(x) - D^k f(y)| / |x - y|^{beta - k}``."""
    spec = HolderSpec(beta, 0.0)
    g = derivative(f, spec.k)
    sep = 4 * f.spacing if min_separation is None else min_separation
    val, arg, count = _pair_scan(g.nodes, g.values, spec.frac, None, sep)
    if count < 10:
        raise GridTooCoarse(f"only {count} admissible pairs")
    return HolderEstimate(val, arg, count, sep)


def weighted_seminorm(f: GridFunction, spec: HolderSpec, min_separation: float | None = None) -> HolderEstimate:
    """Estimate ``sup d_{x,y}^{beta+sigma} |D^k f(x) - D^k f(y)| / |x - y|^{beta'}``."""
    if f.distance is None:
        raise NormError("weighted seminorms need the distance to the boundary of U")
    g = derivative(f, spec.k)
    sep = 4 * f.spacing if min_separation is None else min_separation
    weight = g.distance ** (spec.beta + spec.sigma)
    val, arg, count = _pair_scan(g.nodes, g.values, spec.frac, weight, sep)
    if count < 10:
        raise GridTooCoarse(f"only {count} admissible pairs")
    return HolderEstimate(val, arg, count, sep)


def weighted_norm(f: GridFunction, spec: HolderSpec, min_separation: float | None = None) -> float:
    """Full weighted norm; for ``-1 < sigma < 0`` the order-0 term is the ``C^{-sigma}`` norm."""
    if not spec.sigma > -1:
        raise NormError("the weighted norm needs sigma > -1")
    total = weighted_seminorm(f, spec, min_separation).seminorm_value
    if spec.sigma >= 0:
        first = 0
    else:
        total += float(np.max(np.abs(f.values)))
        total += holder_seminorm(f, -spec.sigma, min_separation).seminorm_value
        first = 1
    for l in range(first, spec.k + 1):
        g = derivative(f, l)
        total += float(np.max(g.distance ** (l + spec.sigma) * np.abs(g.values)))
    return total


def extension_E(nodes, values, alpha: float, seminorm: float | None = None) -> FunctionHandle:
    """Hölder extension ``min(min_z {w(z) + L |z - x|^alpha}, sup |w|)`` of samples ``w``.

    ``L`` is the ``C^alpha`` seminorm of the samples over all pairs (computed
    if not given).  The result agrees with the samples at the sample points.
    """
    if not 0 < alpha <= 1:
        raise NormError("alpha must lie in (0, 1]")
    z = np.asarray(nodes, dtype=float).ravel()
    w = np.asarray(values, dtype=float).ravel()
    if seminorm is None:
        seminorm = sample_seminorm(z, w, alpha)
    cap = float(np.max(np.abs(w)))
    L = float(seminorm)
    order = np.argsort(z)
    zs, ws = z[order], w[order]

    def ev(x):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.empty(flat.size)
        for start in range(0, flat.size, 2048):
            xs = flat[start:start + 2048, None]
            out[start:start + 2048] = np.min(w[None, :] + L * np.abs(z[None, :] - xs) ** alpha, axis=1)
        out = np.minimum(out, cap)
        # at a sample the z = x term attains the min; return it free of round-off
        pos = np.clip(np.searchsorted(zs, flat), 0, zs.size - 1)
        hit = zs[pos] == flat
        out[hit] = ws[pos[hit]]
        return out.reshape(x.shape)

    return FunctionHandle(ev, dim=1, growth_exponent=0.0, breakpoints=())


def sample_seminorm(x, v, alpha: float) -> float:
    """``max |v_i - v_j| / |x_i - x_j|^alpha`` over all distinct sample pairs."""
    x = np.asarray(x, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    val, _, _ = _pair_scan(x, v, alpha, None, 0.0 if x.size < 2 else np.min(np.diff(np.sort(x))))
    return val


def rate_fit(rho, values) -> RateFit:
    """Least-squares fit ``log(value) = slope * log(rho) + intercept``."""
    rho = np.asarray(rho, dtype=float)
    values = np.asarray(values, dtype=float)
    if rho.size < 2 or rho.shape != values.shape:
        raise DegenerateData("need matching arrays with at least two samples")
    if np.any(rho <= 0) or np.any(values <= 0):
        raise DegenerateData("log-log fits need positive data")
    lx, ly = np.log(rho), np.log(values)
    if np.ptp(ly) == 0.0:
        return RateFit(0.0, float(ly[0]), float("nan"), degenerate=True)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    r2 = 1.0 - float(np.sum(resid**2)) / float(np.sum((ly - ly.mean()) ** 2))
    return RateFit(float(slope), float(intercept), r2)
