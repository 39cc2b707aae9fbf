"""Quadrature evaluation of the layer inequalities and of the div-curl identity.

The identity checked is

    int (rot P)^2 + (div P)^2  =  int |grad P|^2  +  sum over both boundaries of
                                   oint (div P) P_n - (P . grad) P_n

with n the unit normal pointing out of the layer on each boundary (away from
the origin on the outer surface, toward it on the inner one).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from dataclasses import field as dc_field

import numpy as np

from .domain import GeometryReport, LayerDomain
from .fields import VectorField, boundary_residuals, invariants_from_jacobian
from .quadrature import DEFAULT_SURFACE, DEFAULT_VOLUME, SurfaceGrid, VolumeGrid, surface_grid, volume_grid
from .surface import AWAY, TOWARD, SurfaceFrame

INEQUALITIES = ("poincare", "div_curl", "trace_inner", "trace_outer")
CHUNK = 1 << 15


@dataclass(frozen=True)
class Grids:
    volume: VolumeGrid
    outer: SurfaceGrid
    inner: SurfaceGrid

    @property
    def resolutions(self) -> dict:
        return {"volume": list(self.volume.resolution), "surface": list(self.outer.resolution)}


def make_grids(domain: LayerDomain, volume=DEFAULT_VOLUME, surface=DEFAULT_SURFACE) -> Grids:
    return Grids(
        volume=volume_grid(domain, *volume),
        outer=surface_grid(domain.outer, *surface, orientation=AWAY),
        inner=surface_grid(domain.inner, *surface, orientation=TOWARD),
    )


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def _frame_components(P, J, frame: SurfaceFrame):
    t1, t2, n = frame.tangent1, frame.tangent2, frame.normal
    Px, Py, Pz = _dot(P, t1), _dot(P, t2), _dot(P, n)
    Jt1 = np.einsum("...ij,...j->...i", J, t1)
    Jt2 = np.einsum("...ij,...j->...i", J, t2)
    h11, h12, h22 = frame.hxx, frame.hxy, frame.hyy
    # derivatives along the surface of the components in the moving frame
    dxPx = _dot(t1, Jt1) + h11 * Pz
    dyPy = _dot(t2, Jt2) + h22 * Pz
    dxPz = _dot(n, Jt1) - h11 * Px - h12 * Py
    dyPz = _dot(n, Jt2) - h12 * Px - h22 * Py
    return Px, Py, Pz, dxPx, dyPy, dxPz, dyPz


def boundary_integrand_parts(P, J, frame: SurfaceFrame):
    """Split the boundary integrand into its curvature part and its derivative part."""
    Px, Py, Pz, dxPx, dyPy, dxPz, dyPz = _frame_components(P, J, frame)
    h11, h12, h22 = frame.hxx, frame.hxy, frame.hyy
    curv = -(h11 + h22) * Pz**2 - h11 * Px**2 - 2 * h12 * Px * Py - h22 * Py**2
    deriv = (dxPx + dyPy) * Pz - dxPz * Px - dyPz * Py
    return curv, deriv


def boundary_integrand(field: VectorField, frame: SurfaceFrame):
    """(div P) P_n - (P . grad) P_n written in the local tangent frame of the surface."""
    pts = frame.point
    curv, deriv = boundary_integrand_parts(field.value(pts), field.jacobian(pts), frame)
    return curv + deriv


@dataclass
class IntegralBundle:
    vol_P2: float
    vol_grad2: float
    vol_divrot2: float
    surf_gamma_P2: float
    surf_Gamma_P2: float
    bnd_Gamma: float
    bnd_gamma: float
    bnd_scale: float = 0.0  # oint |curvature part| + |derivative part| over both boundaries

    def to_dict(self) -> dict:
        return asdict(self)


def integral_bundle(field: VectorField, grids: Grids) -> IntegralBundle:
    vg = grids.volume
    vol = np.zeros(3)
    for lo in range(0, vg.size, CHUNK):
        pts, w = vg.points[lo : lo + CHUNK], vg.weights[lo : lo + CHUNK]
        inv = invariants_from_jacobian(field.jacobian(pts))
        P = field.value(pts)
        vol += [_integrate(w, v) for v in (np.sum(P**2, axis=-1), inv.grad_norm_sq, inv.divrot_sq)]

    surf = {}
    for key, sg in (("Gamma", grids.outer), ("gamma", grids.inner)):
        Ps = field.value(sg.points)
        Js = field.jacobian(sg.points)
        curv, deriv = boundary_integrand_parts(Ps, Js, sg.frame)
        surf[key] = (
            _integrate(sg.weights, np.sum(Ps**2, axis=-1)),
            _integrate(sg.weights, curv + deriv),
            _integrate(sg.weights, np.abs(curv) + np.abs(deriv)),
        )

    return IntegralBundle(
        vol_P2=float(vol[0]),
        vol_grad2=float(vol[1]),
        vol_divrot2=float(vol[2]),
        surf_gamma_P2=surf["gamma"][0],
        surf_Gamma_P2=surf["Gamma"][0],
        bnd_Gamma=surf["Gamma"][1],
        bnd_gamma=surf["gamma"][1],
        bnd_scale=surf["Gamma"][2] + surf["gamma"][2],
    )


def _integrate(w, v):
    if not np.all(np.isfinite(v)):
        i = int(np.flatnonzero(~np.isfinite(v))[0])
        raise ValueError(f"non-finite integrand at node {i}")
    return float(np.dot(w, v))


def identity_residual(bundle: IntegralBundle) -> dict:
    """Relative mismatch of the identity.

    Normalized by the volume terms, or by the boundary-term magnitude when the
    volume terms vanish (constant fields); identically zero fields give 0.
    """
    lhs = bundle.vol_divrot2
    rhs = bundle.vol_grad2 + bundle.bnd_Gamma + bundle.bnd_gamma
    denom = max(bundle.vol_grad2, bundle.vol_divrot2, bundle.bnd_scale)
    if denom == 0:
        return {"lhs": lhs, "rhs_sum": rhs, "residual": 0.0}
    return {"lhs": lhs, "rhs_sum": rhs, "residual": abs(lhs - rhs) / denom}


def verify_identity(field: VectorField, grids: Grids) -> float:
    """Relative residual of the div-curl identity; no boundary conditions required."""
    return identity_residual(integral_bundle(field, grids))["residual"]


def _record(name, lhs, rhs, constant, rtol, applicable=True):
    rec = {"name": name, "lhs": lhs, "rhs": rhs, "constant": constant, "applicable": applicable}
    if not applicable:
        rec.update(ratio=None, passed=None, margin=None)
        return rec
    if rhs == 0:
        if lhs == 0:
            rec.update(ratio=0.0, passed=True, margin=1.0, note="0/0 pass by convention")
        else:
            rec.update(ratio=float("inf"), passed=False, margin=float("-inf"))
        return rec
    ratio = lhs / rhs
    rec.update(ratio=ratio, passed=bool(ratio <= 1 + rtol), margin=1 - ratio)
    return rec


@dataclass
class VerificationReport:
    field: str
    bundle: IntegralBundle
    records: list
    identity: dict
    bc_compliant: bool
    bc_residuals: dict
    inconsistent: bool
    rtol: float
    resolutions: dict = dc_field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.inconsistent and all(r["passed"] for r in self.records if r["applicable"])

    def record(self, name: str) -> dict:
        return next(r for r in self.records if r["name"] == name)

    def to_dict(self) -> dict:
        return {
            "field": self.field,
            "bundle": self.bundle.to_dict(),
            "records": self.records,
            "identity": self.identity,
            "bc_compliant": self.bc_compliant,
            "bc_residuals": self.bc_residuals,
            "inconsistent": self.inconsistent,
            "rtol": self.rtol,
            "resolutions": self.resolutions,
            "passed": self.passed,
        }


def verify_inequalities(
    field: VectorField,
    domain: LayerDomain,
    report: GeometryReport,
    grids: Grids,
    rtol: float = 1e-9,
    bc_tol: float = 1e-8,
) -> VerificationReport:
    """Evaluate both sides of the four inequalities for one field.

    Fields that violate the mixed boundary conditions get non-applicable
    records; the div_curl record is also non-applicable on inadmissible domains.
    """
    b = integral_bundle(field, grids)
    res = boundary_residuals(field, domain, 32, 64)
    bc_ok = max(res["outer_normal"], res["inner_tangential"]) <= bc_tol * res["scale"]
    g = b.vol_grad2
    records = [
        _record("poincare", b.vol_P2, report.C1 * g, report.C1, rtol, bc_ok),
        _record("div_curl", report.C2 * g, b.vol_divrot2, report.C2, rtol, bc_ok and report.admissible),
        _record("trace_inner", b.surf_gamma_P2, report.C3 * g, report.C3, rtol, bc_ok),
        _record("trace_outer", b.surf_Gamma_P2, report.C4 * g, report.C4, rtol, bc_ok),
    ]
    return VerificationReport(
        field=getattr(field, "name", "field"),
        bundle=b,
        records=records,
        identity=identity_residual(b),
        bc_compliant=bool(bc_ok),
        bc_residuals=res,
        inconsistent=bool(g == 0 and b.vol_P2 > 0),
        rtol=rtol,
        resolutions=grids.resolutions,
    )
