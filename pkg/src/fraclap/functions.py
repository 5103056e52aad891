"""Function handles consumed by the singular-integral quadrature, and sampled grid functions.

A :class:`FunctionHandle` couples a vectorised evaluator with the metadata the
quadrature needs to place its panels: the points where the function fails to
be smooth, its support, and its growth at infinity.  In two dimensions only
functions that are radial about ``center`` are supported; ``breakpoints`` are
then radii.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

C2_NEAR_X = "C2_near_x"
C_ALPHA_ONLY = "Calpha_only"


@dataclass(frozen=True)
class FunctionHandle:
    evaluator: Callable[[np.ndarray], np.ndarray]
    dim: int = 1
    growth_exponent: float = 0.0
    smoothness_hint: str = C2_NEAR_X
    breakpoints: tuple = ()
    support: tuple | None = None
    center: tuple = (0.0, 0.0)
    profile: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("only n=1 and n=2 are supported")
        if self.smoothness_hint not in (C2_NEAR_X, C_ALPHA_ONLY):
            raise ValueError(f"unknown smoothness hint {self.smoothness_hint!r}")
        object.__setattr__(self, "breakpoints", tuple(sorted(float(b) for b in self.breakpoints)))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.asarray(self.evaluator(x), dtype=float)

    @property
    def compact(self) -> bool:
        return self.support is not None

    def radius_of(self, x):
        """Distance from ``center`` (2-D handles only)."""
        return np.linalg.norm(np.asarray(x, dtype=float) - np.asarray(self.center), axis=-1)

    def radial_profile(self, r):
        """Values at distance ``r`` from ``center`` (2-D handles only)."""
        r = np.asarray(r, dtype=float)
        if self.profile is not None:
            return np.asarray(self.profile(r), dtype=float)
        pts = np.asarray(self.center) + r[..., None] * np.array([1.0, 0.0])
        return self(pts)


def constant(value: float, dim: int = 1) -> FunctionHandle:
    if dim == 1:
        return FunctionHandle(lambda x: np.full(np.shape(x), float(value)))
    return FunctionHandle(lambda x: np.full(np.shape(x)[:-1], float(value)), dim=2,
                          profile=lambda r: np.full(np.shape(r), float(value)))


def _merge_support(f, g, how):
    if f.support is None or g.support is None:
        if how == "product" and (f.support is not None or g.support is not None):
            return f.support if f.support is not None else g.support
        return None
    if f.dim == 1:
        if how == "product":
            return (max(f.support[0], g.support[0]), min(f.support[1], g.support[1]))
        return (min(f.support[0], g.support[0]), max(f.support[1], g.support[1]))
    if how == "product":
        return (0.0, min(f.support[1], g.support[1]))
    return (0.0, max(f.support[1], g.support[1]))


def _check_same_frame(f, g):
    if f.dim != g.dim:
        raise ValueError("handles live in different dimensions")
    if f.dim == 2 and tuple(f.center) != tuple(g.center):
        raise ValueError("2-D handles must share their center")


def _hint(f, g):
    return C_ALPHA_ONLY if C_ALPHA_ONLY in (f.smoothness_hint, g.smoothness_hint) else C2_NEAR_X


def linear_combination(a: float, f: FunctionHandle, b: float, g: FunctionHandle) -> FunctionHandle:
    _check_same_frame(f, g)
    return FunctionHandle(
        lambda x: a * f(x) + b * g(x),
        dim=f.dim,
        growth_exponent=max(f.growth_exponent, g.growth_exponent),
        smoothness_hint=_hint(f, g),
        breakpoints=tuple(set(f.breakpoints) | set(g.breakpoints)),
        support=_merge_support(f, g, "sum"),
        center=f.center,
        profile=(lambda r: a * f.radial_profile(r) + b * g.radial_profile(r)) if f.dim == 2 else None,
    )


def product(f: FunctionHandle, g: FunctionHandle) -> FunctionHandle:
    _check_same_frame(f, g)
    return FunctionHandle(
        lambda x: f(x) * g(x),
        dim=f.dim,
        growth_exponent=f.growth_exponent + g.growth_exponent,
        smoothness_hint=_hint(f, g),
        breakpoints=tuple(set(f.breakpoints) | set(g.breakpoints)),
        support=_merge_support(f, g, "product"),
        center=f.center,
        profile=(lambda r: f.radial_profile(r) * g.radial_profile(r)) if f.dim == 2 else None,
    )


def shifted(f: FunctionHandle, h: float) -> FunctionHandle:
    """``x -> f(x - h)`` for 1-D handles."""
    if f.dim != 1:
        raise ValueError("shifts are only supported in 1-D")
    sup = None if f.support is None else (f.support[0] + h, f.support[1] + h)
    return replace(
        f,
        evaluator=lambda x: f(np.asarray(x) - h),
        breakpoints=tuple(b + h for b in f.breakpoints),
        support=sup,
    )


def dilated(f: FunctionHandle, lam: float) -> FunctionHandle:
    """``x -> f(lam * x)`` for 1-D handles, ``lam > 0``."""
    if f.dim != 1 or lam <= 0:
        raise ValueError("dilation needs a 1-D handle and lam > 0")
    sup = None if f.support is None else (f.support[0] / lam, f.support[1] / lam)
    return replace(
        f,
        evaluator=lambda x: f(lam * np.asarray(x)),
        breakpoints=tuple(b / lam for b in f.breakpoints),
        support=sup,
    )


@dataclass(frozen=True)
class GridFunction:
    """Samples of a scalar function at ordered 1-D nodes.

    ``distance`` holds ``dist(x, boundary of U)`` for the set ``U`` the samples
    are taken on; it drives the weighted norms.
    """

    nodes: np.ndarray
    values: np.ndarray
    distance: np.ndarray | None = None

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if nodes.ndim != 1 or nodes.shape != values.shape:
            raise ValueError("nodes and values must be 1-D arrays of equal length")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        if self.distance is not None:
            object.__setattr__(self, "distance", np.asarray(self.distance, dtype=float))

    @classmethod
    def sample(cls, f, a: float, b: float, num: int, *, endpoints: bool = False):
        """Sample ``f`` on ``num`` uniform nodes of ``(a, b)`` with distance to ``{a, b}``."""
        if endpoints:
            x = np.linspace(a, b, num)
        else:
            x = np.linspace(a, b, num + 2)[1:-1]
        return cls(x, f(x), np.minimum(x - a, b - x))

    @property
    def spacing(self) -> float:
        return float(np.min(np.diff(self.nodes)))

    def restrict(self, mask) -> "GridFunction":
        mask = np.asarray(mask, dtype=bool)
        d = None if self.distance is None else self.distance[mask]
        return GridFunction(self.nodes[mask], self.values[mask], d)

    def extended(self, x):
        """Linear interpolation inside the node range, zero outside it."""
        x = np.asarray(x, dtype=float)
        return np.interp(x, self.nodes, self.values, left=0.0, right=0.0)
