"""Bounded domains, distance functions and the boundary-anchored Krylov sets.

Only intervals (n=1) and balls (n=1 or n=2) are supported; both have closed
form distance functions and boundary projections.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

KAPPA = 1.0 / 16.0
KAPPA_PRIME = 5.0 / 8.0


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class Domain:
    """An interval ``(a, b)`` or an open ball ``B_radius(center)`` in R^dim."""

    kind: str
    dim: int
    a: float = 0.0
    b: float = 0.0
    center: tuple = (0.0,)
    radius: float = 0.0

    def __post_init__(self):
        if self.kind == "interval":
            if self.dim != 1:
                raise GeometryError("intervals live in dimension 1")
            if not self.a < self.b:
                raise GeometryError(f"need a < b, got a={self.a}, b={self.b}")
        elif self.kind == "ball":
            if self.dim not in (1, 2):
                raise GeometryError("only n=1 and n=2 are supported")
            if not self.radius > 0:
                raise GeometryError("ball radius must be positive")
            if len(self.center) != self.dim:
                raise GeometryError("center has wrong dimension")
        else:
            raise GeometryError(f"unknown domain kind {self.kind!r}")

    @classmethod
    def interval(cls, a: float, b: float) -> "Domain":
        return cls(kind="interval", dim=1, a=float(a), b=float(b))

    @classmethod
    def ball(cls, center=0.0, radius: float = 1.0, dim: int | None = None) -> "Domain":
        c = tuple(float(v) for v in np.atleast_1d(center))
        if dim is None:
            dim = len(c)
        if len(c) == 1 and dim == 2:
            if c[0] != 0.0:
                raise GeometryError("a scalar center is only accepted for the origin")
            c = (0.0, 0.0)
        return cls(kind="ball", dim=dim, center=c, radius=float(radius))

    @property
    def rho0(self) -> float:
        """Interior/exterior ball radius (exact for these shapes)."""
        if self.kind == "interval":
            return 0.5 * (self.b - self.a)
        return self.radius

    @property
    def diameter(self) -> float:
        return 2.0 * self.rho0

    @property
    def bounds(self) -> tuple[float, float]:
        """End points of the 1-D domain (interval or 1-D ball)."""
        if self.dim != 1:
            raise GeometryError("bounds only defined in 1-D")
        if self.kind == "interval":
            return self.a, self.b
        return self.center[0] - self.radius, self.center[0] + self.radius

    def _radial(self, x):
        x = np.asarray(x, dtype=float)
        c = np.asarray(self.center)
        if self.dim == 1:
            return np.abs(x - c[0])
        return np.linalg.norm(x - c, axis=-1)

    def signed_distance(self, x):
        """Negative inside, positive outside."""
        if self.dim == 1:
            lo, hi = self.bounds
            mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
            return np.abs(np.asarray(x, dtype=float) - mid) - half
        return self._radial(x) - self.radius

    def contains(self, x):
        return self.signed_distance(x) < 0.0

    def project(self, x):
        """Closest boundary point of ``x`` (unique away from the center)."""
        x = np.asarray(x, dtype=float)
        if self.dim == 1:
            lo, hi = self.bounds
            return np.where(x <= 0.5 * (lo + hi), lo, hi)
        c = np.asarray(self.center)
        d = x - c
        r = np.linalg.norm(d, axis=-1, keepdims=True)
        r = np.where(r == 0.0, 1.0, r)
        return c + self.radius * d / r

    def outward_normal(self, x0):
        x0 = np.asarray(x0, dtype=float)
        if self.dim == 1:
            lo, hi = self.bounds
            return np.where(np.isclose(x0, hi), 1.0, -1.0)
        d = x0 - np.asarray(self.center)
        return d / np.linalg.norm(d, axis=-1, keepdims=True)


def distance(dom: Domain, x):
    """``dist(x, boundary)``, valid inside and outside the domain."""
    return np.abs(dom.signed_distance(x))


def delta0_pow(dom: Domain, s: float, x):
    """The distance to the boundary raised to ``s`` inside, zero outside."""
    sd = dom.signed_distance(x)
    inside = sd < 0.0
    return np.where(inside, np.abs(np.where(inside, sd, 0.0)) ** s, 0.0)


@dataclass(frozen=True)
class BoundaryPoint:
    x0: np.ndarray
    nu: np.ndarray

    @classmethod
    def on(cls, dom: Domain, x0) -> "BoundaryPoint":
        x0 = np.asarray(x0, dtype=float)
        if abs(float(np.max(dom.signed_distance(x0)))) > 1e-12:
            raise GeometryError("x0 is not on the boundary")
        return cls(x0=x0, nu=np.asarray(dom.outward_normal(x0), dtype=float))


@dataclass(frozen=True)
class KrylovSetSpec:
    x0: BoundaryPoint
    R: float
    kappa: float = KAPPA
    kappa_prime: float = field(default=KAPPA_PRIME)

    def __post_init__(self):
        if not self.R > 0:
            raise GeometryError("R must be positive")
        if abs(self.kappa_prime - (0.5 + 2 * self.kappa)) > 1e-14:
            raise GeometryError("kappa_prime must equal 1/2 + 2 kappa")


def _check_scale(spec: KrylovSetSpec, dom: Domain):
    if spec.R > dom.rho0 * (1 + 1e-14):
        raise GeometryError(
            f"R={spec.R} exceeds rho0={dom.rho0}; the set inclusions are not guaranteed"
        )


def _offset(spec, x):
    d = np.asarray(x, dtype=float) - spec.x0.x0
    if np.ndim(spec.x0.nu) == 0:
        return np.abs(d), -d * spec.x0.nu
    return np.linalg.norm(d, axis=-1), -(d @ spec.x0.nu)


def in_DR(spec: KrylovSetSpec, dom: Domain, x):
    """Membership in ``B_R(x0) ∩ Ω``."""
    _check_scale(spec, dom)
    dist, _ = _offset(spec, x)
    return (dist < spec.R) & dom.contains(x)


def in_DR_plus(spec: KrylovSetSpec, dom: Domain, x):
    """Membership in ``B_{κ'R}(x0) ∩ Ω`` at inward depth at least ``2κR``."""
    _check_scale(spec, dom)
    dist, depth = _offset(spec, x)
    return (dist < spec.kappa_prime * spec.R) & dom.contains(x) & (depth >= 2 * spec.kappa * spec.R)
