"""Tensor-product quadrature on the layer and on its boundary surfaces.

Gauss-Legendre in r (mapped per ray onto [R_inner, R_outer]), Gauss-Legendre
in cos(theta) and the periodic trapezoidal rule in phi.  Nodes never touch
the poles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .surface import AWAY, RadialSurface, SurfaceFrame, spherical_basis, surface_frame

DEFAULT_VOLUME = (16, 24, 48)
DEFAULT_SURFACE = (24, 48)


def angular_rule(n_theta: int, n_phi: int):
    """Return (theta, phi, w) on an (n_theta, n_phi) grid; w includes sin(theta)."""
    if n_theta < 2 or n_phi < 4:
        raise ValueError("angular grid needs n_theta >= 2 and n_phi >= 4")
    x, wx = np.polynomial.legendre.leggauss(n_theta)
    # descending cos -> ascending theta
    theta = np.arccos(x[::-1])
    wx = wx[::-1]
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    T, P = np.meshgrid(theta, phi, indexing="ij")
    W = np.outer(wx, np.full(n_phi, 2 * np.pi / n_phi))
    return T, P, W


@dataclass(frozen=True)
class VolumeGrid:
    r: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    points: np.ndarray
    weights: np.ndarray
    resolution: tuple[int, int, int]

    @property
    def size(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class SurfaceGrid:
    theta: np.ndarray
    phi: np.ndarray
    frame: SurfaceFrame
    weights: np.ndarray
    resolution: tuple[int, int]

    @property
    def points(self) -> np.ndarray:
        return self.frame.point


def volume_grid(domain, n_r: int, n_theta: int, n_phi: int) -> VolumeGrid:
    if n_r < 2:
        raise ValueError("volume grid needs n_r >= 2")
    T, P, W = angular_rule(n_theta, n_phi)
    r_in = domain.inner.radius(T, P)
    r_out = domain.outer.radius(T, P)
    if np.any(r_out - r_in <= 0):
        raise ValueError("layers intersect")
    x, wx = np.polynomial.legendre.leggauss(n_r)
    half = 0.5 * (r_out - r_in)
    mid = 0.5 * (r_out + r_in)
    r = mid[..., None] + half[..., None] * x  # (nt, np, nr)
    w = (W * half)[..., None] * wx * r**2
    T3 = np.broadcast_to(T[..., None], r.shape)
    P3 = np.broadcast_to(P[..., None], r.shape)
    e_r = spherical_basis(T3, P3)[0]
    pts = r[..., None] * e_r
    return VolumeGrid(
        r=r.ravel(),
        theta=T3.ravel(),
        phi=P3.ravel(),
        points=pts.reshape(-1, 3),
        weights=w.ravel(),
        resolution=(n_r, n_theta, n_phi),
    )


def surface_grid(surface: RadialSurface, n_theta: int, n_phi: int, orientation: str = AWAY) -> SurfaceGrid:
    T, P, W = angular_rule(n_theta, n_phi)
    T, P, W = T.ravel(), P.ravel(), W.ravel()
    frame = surface_frame(surface, T, P, orientation)
    R = surface.radius(T, P)
    return SurfaceGrid(
        theta=T, phi=P, frame=frame, weights=W * R**2 * frame.area_ratio, resolution=(n_theta, n_phi)
    )


def _weighted_sum(weights, values):
    values = np.asarray(values, dtype=float)
    bad = ~np.isfinite(values)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise ValueError(f"non-finite integrand at node {i}")
    return float(np.dot(weights, values))


def integrate_volume(grid: VolumeGrid, f) -> float:
    """Integrate ``f`` (callable on (N, 3) points, or node values) over the layer."""
    values = f(grid.points) if callable(f) else f
    return _weighted_sum(grid.weights, values)


def integrate_surface(grid: SurfaceGrid, f) -> float:
    values = f(grid.points) if callable(f) else f
    return _weighted_sum(grid.weights, values)
