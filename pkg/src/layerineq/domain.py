"""Geometric descriptors, admissibility checks and inequality constants of a layer."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize

from .quadrature import angular_rule
from .surface import (
    AWAY,
    RadialSurface,
    curvature_sum,
    hessian_negative_semidefinite,
    surface_frame,
    surface_jet,
    surface_normal,
)

DEFAULT_EXTREMA = (128, 256)
_POLE_GUARD = 1e-6


@dataclass(frozen=True)
class LayerDomain:
    inner: RadialSurface
    outer: RadialSurface

    @classmethod
    def spheres(cls, r_inner: float, r_outer: float) -> "LayerDomain":
        return cls(RadialSurface(r_inner), RadialSurface(r_outer))

    def gap(self, theta, phi):
        return self.outer.radius(theta, phi) - self.inner.radius(theta, phi)

    def to_dict(self) -> dict:
        return {"inner": self.inner.to_dict(), "outer": self.outer.to_dict()}


@dataclass
class GeometryReport:
    R1: float
    R2: float
    R3: float
    deltaR: float
    xi1: float
    xi2: float
    R_curv: float
    convex_outer: bool
    admissibility_fraction: float
    admissible: bool
    C1: float
    C2: float
    C3: float
    C4: float
    resolution: tuple[int, int]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["resolution"] = list(self.resolution)
        return d


def _extremum(func, grid, mode: str) -> float:
    """Grid extremum of func(theta, phi) followed by one bounded local refinement.

    mode is "min" or "max".
    """
    n_theta, n_phi = grid
    T, P, _ = angular_rule(n_theta, n_phi)
    sign = 1.0 if mode == "min" else -1.0
    vals = sign * func(T, P)
    i, k = np.unravel_index(np.argmin(vals), vals.shape)
    best = float(vals[i, k])

    t_lo = T[max(i - 1, 0), 0] if i > 0 else _POLE_GUARD
    t_hi = T[min(i + 1, n_theta - 1), 0] if i < n_theta - 1 else np.pi - _POLE_GUARD
    dp = 2 * np.pi / n_phi
    x0 = np.array([T[i, k], P[i, k]])

    def obj(x):
        return float(sign * func(np.asarray(x[0]), np.asarray(x[1])))

    res = minimize(
        obj,
        x0,
        method="L-BFGS-B",
        bounds=[(t_lo, t_hi), (x0[1] - dp, x0[1] + dp)],
        options={"ftol": 1e-15, "gtol": 1e-13},
    )
    if np.isfinite(res.fun):
        best = min(best, float(res.fun))
    return sign * best


def radial_bounds(domain: LayerDomain, grid=DEFAULT_EXTREMA):
    """Return (R1, R2, R3, deltaR): min/max of the inner radius, max outer radius, max gap."""
    T, P, _ = angular_rule(*grid)
    r_in = domain.inner.radius(T, P)
    if np.any(r_in <= 0) or np.any(domain.outer.radius(T, P) <= 0):
        raise ValueError("radius function not positive")
    if np.any(domain.gap(T, P) <= 0):
        raise ValueError("layers intersect")
    R1 = _extremum(domain.inner.radius, grid, "min")
    R2 = _extremum(domain.inner.radius, grid, "max")
    R3 = _extremum(domain.outer.radius, grid, "max")
    dR = _extremum(domain.gap, grid, "max")
    return R1, R2, R3, dR


def _radial_normal_component(surface: RadialSurface):
    def f(theta, phi):
        j = surface_jet(surface, theta, phi)
        a = j.R_t / j.R
        b = j.R_p / (j.R * np.sin(theta))
        return 1.0 / np.sqrt(1.0 + a * a + b * b)

    return f


def normal_lower_bound(domain: LayerDomain, grid=DEFAULT_EXTREMA) -> float:
    """xi1: smallest radial component of either boundary normal, both oriented away from the origin."""
    xi1 = min(
        _extremum(_radial_normal_component(domain.outer), grid, "min"),
        _extremum(_radial_normal_component(domain.inner), grid, "min"),
    )
    if not xi1 > 0:
        raise ValueError("surface not star-admissible")
    return xi1


def ray_normal_product(domain: LayerDomain, grid=DEFAULT_EXTREMA) -> float:
    """xi2: smallest n_outer . n_inner on a common ray (both away from the origin)."""

    def f(theta, phi):
        a = surface_normal(domain.outer, theta, phi, AWAY)
        b = surface_normal(domain.inner, theta, phi, AWAY)
        return np.sum(a * b, axis=-1)

    xi2 = _extremum(f, grid, "min")
    if not xi2 > 0:
        raise ValueError("normal product nonpositive")
    return xi2


def curvature_radius(domain: LayerDomain, grid=DEFAULT_EXTREMA) -> float:
    """R such that |hxx + hyy| <= 2/R everywhere on the inner surface."""

    def f(theta, phi):
        return np.abs(curvature_sum(surface_frame(domain.inner, theta, phi, AWAY)))

    kmax = _extremum(f, grid, "max")
    if kmax < 1e-14:
        raise ValueError("flat inner surface")
    return 2.0 / kmax


def outer_is_convex(domain: LayerDomain, grid=DEFAULT_EXTREMA, tol: float = 1e-9) -> bool:
    T, P, _ = angular_rule(*grid)
    return bool(np.all(hessian_negative_semidefinite(surface_frame(domain.outer, T, P, AWAY), tol)))


def admissibility_fraction(R1, R2, deltaR, xi1, xi2, R_curv) -> float:
    return 2 * R2**2 * deltaR / (xi1 * xi2**2 * R1**2 * R_curv)


def constants(R1, R2, R3, deltaR, xi1, xi2, R_curv) -> dict:
    frac = admissibility_fraction(R1, R2, deltaR, xi1, xi2, R_curv)
    return {
        "C1": 3 * (deltaR * R3 / (xi2 * R1)) ** 2,
        "C2": 1 - frac,
        "C3": R2**2 * deltaR / (R1**2 * xi1 * xi2**2),
        "C4": deltaR * R3**2 / (R1**2 * xi1 * xi2**2),
    }


def geometry_report(domain: LayerDomain, grid=DEFAULT_EXTREMA) -> GeometryReport:
    grid = tuple(int(n) for n in grid)
    R1, R2, R3, dR = radial_bounds(domain, grid)
    xi1 = normal_lower_bound(domain, grid)
    xi2 = ray_normal_product(domain, grid)
    Rc = curvature_radius(domain, grid)
    frac = admissibility_fraction(R1, R2, dR, xi1, xi2, Rc)
    c = constants(R1, R2, R3, dR, xi1, xi2, Rc)
    return GeometryReport(
        R1=R1,
        R2=R2,
        R3=R3,
        deltaR=dR,
        xi1=xi1,
        xi2=xi2,
        R_curv=Rc,
        convex_outer=outer_is_convex(domain, grid),
        admissibility_fraction=frac,
        admissible=bool(frac < 1),
        resolution=grid,
        **c,
    )
