"""Radial-graph boundary surfaces r = R(theta, phi).

Surface harmonics use the unnormalized real convention

    S_lm(theta, phi) = P_l^|m|(cos theta) * cos(m phi)     (m >= 0)
    S_lm(theta, phi) = P_l^|m|(cos theta) * sin(|m| phi)   (m < 0)

with P_l^m the associated Legendre function *without* the Condon-Shortley
phase, so that S_10 = cos(theta), S_11 = sin(theta) cos(phi),
S_20 = (3 cos^2(theta) - 1) / 2, S_21 = 3 sin(theta) cos(theta) cos(phi),
S_22 = 3 sin^2(theta) cos(2 phi).

All functions broadcast over array-valued ``theta`` and ``phi``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import Legendre, Polynomial

AWAY = "away_from_origin"
TOWARD = "toward_origin"
ORIENTATIONS = (AWAY, TOWARD)


@lru_cache(maxsize=None)
def _legendre_factor(l: int, m: int) -> tuple[Polynomial, Polynomial, Polynomial]:
    # d^m P_l / dx^m and its first two derivatives, in power form
    q = Legendre.basis(l).deriv(m).convert(kind=Polynomial) if m <= l else Polynomial([0.0])
    return q, q.deriv(1), q.deriv(2)


def harmonic_jet(l: int, m: int, theta, phi):
    """Value and first/second angular derivatives of S_lm.

    Returns ``(S, S_t, S_p, S_tt, S_tp, S_pp)``.
    """
    if l < 0 or abs(m) > l:
        raise ValueError(f"invalid harmonic degree/order ({l}, {m})")
    k = abs(m)
    q, dq, ddq = _legendre_factor(l, k)
    s, c = np.sin(theta), np.cos(theta)
    Q, Q1, Q2 = q(c), dq(c), ddq(c)

    sk = s**k
    th = sk * Q
    th_t = -(s ** (k + 1)) * Q1
    th_tt = -k * sk * Q - (2 * k + 1) * sk * c * Q1 + s ** (k + 2) * Q2
    if k >= 1:
        th_t = th_t + k * s ** (k - 1) * c * Q
    if k >= 2:
        th_tt = th_tt + k * (k - 1) * s ** (k - 2) * c**2 * Q

    if m >= 0:
        a, a_p, a_pp = np.cos(k * phi), -k * np.sin(k * phi), -(k**2) * np.cos(k * phi)
    else:
        a, a_p, a_pp = np.sin(k * phi), k * np.cos(k * phi), -(k**2) * np.sin(k * phi)

    return th * a, th_t * a, th * a_p, th_tt * a, th_t * a_p, th * a_pp


@dataclass(frozen=True)
class SurfaceJet2:
    R: np.ndarray
    R_t: np.ndarray
    R_p: np.ndarray
    R_tt: np.ndarray
    R_tp: np.ndarray
    R_pp: np.ndarray


@dataclass(frozen=True)
class SurfaceFrame:
    """Local orthonormal frame and height-function Hessian at surface points.

    ``hxx, hxy, hyy`` are second derivatives of z = f(x, y) where the surface
    is written as a graph over its tangent plane, x along ``tangent1``,
    y along ``tangent2`` and z along ``normal``.
    """

    point: np.ndarray
    normal: np.ndarray
    tangent1: np.ndarray
    tangent2: np.ndarray
    hxx: np.ndarray
    hxy: np.ndarray
    hyy: np.ndarray
    area_ratio: np.ndarray
    orientation: str = AWAY

    @property
    def normal_radial(self) -> np.ndarray:
        rhat = self.point / np.linalg.norm(self.point, axis=-1, keepdims=True)
        return np.sum(self.normal * rhat, axis=-1)


@dataclass(frozen=True)
class RadialSurface:
    """Star-shaped surface r = R0 + sum(amp * S_lm).

    ``terms`` is a tuple of ``(l, m, amplitude)``; an empty tuple is a sphere.
    """

    r0: float
    terms: tuple[tuple[int, int, float], ...] = field(default=())

    def __post_init__(self):
        if not self.r0 > 0:
            raise ValueError("r0 must be positive")
        terms = tuple((int(l), int(m), float(a)) for l, m, a in self.terms)
        for l, m, _ in terms:
            if l < 0 or abs(m) > l:
                raise ValueError(f"invalid harmonic degree/order ({l}, {m})")
        if sum(abs(a) for _, _, a in terms) >= self.r0 / 4:
            raise ValueError("perturbation too large: sum |amplitude| must be < r0/4")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def sphere(cls, r0: float) -> "RadialSurface":
        return cls(r0)

    @property
    def kind(self) -> str:
        return "harmonic" if self.terms else "sphere"

    def radius(self, theta, phi):
        theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
        out = np.full(theta.shape, float(self.r0))
        for l, m, amp in self.terms:
            out = out + amp * harmonic_jet(l, m, theta, phi)[0]
        return out

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "r0": self.r0}
        if self.terms:
            d["terms"] = [list(t) for t in self.terms]
        return d


def surface_jet(surface: RadialSurface, theta, phi) -> SurfaceJet2:
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    parts = [np.full(theta.shape, float(surface.r0))] + [np.zeros(theta.shape) for _ in range(5)]
    for l, m, amp in surface.terms:
        for i, v in enumerate(harmonic_jet(l, m, theta, phi)):
            parts[i] = parts[i] + amp * v
    return SurfaceJet2(*parts)


def spherical_basis(theta, phi):
    """Unit vectors (e_r, e_theta, e_phi), each with a trailing axis of length 3."""
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    zero = np.zeros_like(st * sp)
    e_r = np.stack(np.broadcast_arrays(st * cp, st * sp, ct), axis=-1)
    e_t = np.stack(np.broadcast_arrays(ct * cp, ct * sp, -st), axis=-1)
    e_p = np.stack(np.broadcast_arrays(-sp, cp, zero), axis=-1)
    return e_r, e_t, e_p


def surface_normal(surface: RadialSurface, theta, phi, orientation: str = AWAY) -> np.ndarray:
    """Unit normal only; cheaper than a full frame."""
    j = surface_jet(surface, theta, phi)
    e_r, e_t, e_p = spherical_basis(theta, phi)
    return _unit_normal(j, np.sin(theta), e_r, e_t, e_p, orientation)


def _unit_normal(j, st, e_r, e_t, e_p, orientation):
    a = (j.R_t / j.R)[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        b = (j.R_p / (j.R * st))[..., None]
    n = e_r - a * e_t - b * e_p
    norm = np.linalg.norm(n, axis=-1, keepdims=True)
    if np.any(~np.isfinite(norm) | (norm < 1e-14)):
        raise ValueError("degenerate surface jet")
    n = n / norm
    if orientation == TOWARD:
        n = -n
    elif orientation != AWAY:
        raise ValueError(f"unknown orientation {orientation!r}")
    return n


def surface_frame(surface: RadialSurface, theta, phi, orientation: str = AWAY) -> SurfaceFrame:
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    j = surface_jet(surface, theta, phi)
    st, ct = np.sin(theta), np.cos(theta)
    e_r, e_t, e_p = spherical_basis(theta, phi)
    n = _unit_normal(j, st, e_r, e_t, e_p, orientation)

    R, Rt, Rp = (x[..., None] for x in (j.R, j.R_t, j.R_p))
    Rtt, Rtp, Rpp = (x[..., None] for x in (j.R_tt, j.R_tp, j.R_pp))
    s, c = st[..., None], ct[..., None]
    # de_r/dt = e_t, de_r/dp = s e_p, de_t/dt = -e_r, de_t/dp = c e_p,
    # de_p/dp = -(s e_r + c e_t)
    X_t = Rt * e_r + R * e_t
    X_p = Rp * e_r + R * s * e_p
    X_tt = (Rtt - R) * e_r + 2 * Rt * e_t
    X_tp = Rtp * e_r + Rp * e_t + (Rt * s + R * c) * e_p
    X_pp = (Rpp - R * s * s) * e_r - R * s * c * e_t + 2 * Rp * s * e_p

    t1 = X_t / np.linalg.norm(X_t, axis=-1, keepdims=True)
    t2 = np.cross(n, t1)

    # map (dtheta, dphi) -> (dx, dy) in the tangent frame
    a11 = np.sum(X_t * t1, axis=-1)
    a12 = np.sum(X_p * t1, axis=-1)
    a22 = np.sum(X_p * t2, axis=-1)  # X_t . t2 == 0 by construction
    L = np.sum(X_tt * n, axis=-1)
    M = np.sum(X_tp * n, axis=-1)
    N = np.sum(X_pp * n, axis=-1)
    # H = A^{-T} II A^{-1} with A = [[a11, a12], [0, a22]] upper triangular
    i11, i12, i22 = 1.0 / a11, -a12 / (a11 * a22), 1.0 / a22
    hxx = i11 * i11 * L
    hxy = i11 * (i12 * L + i22 * M)
    hyy = i12 * i12 * L + 2 * i12 * i22 * M + i22 * i22 * N

    n_r = np.sum(n * e_r, axis=-1)
    return SurfaceFrame(
        point=R * e_r,
        normal=n,
        tangent1=t1,
        tangent2=t2,
        hxx=hxx,
        hxy=hxy,
        hyy=hyy,
        area_ratio=1.0 / np.abs(n_r),
        orientation=orientation,
    )


def curvature_sum(frame: SurfaceFrame):
    return frame.hxx + frame.hyy


def hessian_negative_semidefinite(frame: SurfaceFrame, tol: float = 1e-9):
    """Pointwise check hxx <= tol, hyy <= tol, hxy^2 <= hxx*hyy + tol^2."""
    return (
        (frame.hxx <= tol)
        & (frame.hyy <= tol)
        & (frame.hxy**2 <= frame.hxx * frame.hyy + tol**2)
    )
