"""Extremal Rayleigh quotients over finite subspaces of boundary-compliant fields.

For a basis {P_k} the three Gram matrices are

    A_ij = int P_i . P_j,   G_ij = int grad P_i : grad P_j,
    D_ij = int div P_i div P_j + rot P_i . rot P_j

and the subspace extrema of int|P|^2 / int|grad P|^2 and of
int((rot P)^2 + (div P)^2) / int|grad P|^2 are the extreme generalized
eigenvalues of (A, G) and (D, G).  Because every basis member satisfies the
boundary conditions exactly, the max is a lower bound on the sharp C1-type
constant and the min an upper bound on the sharp C2-type constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domain import GeometryReport, LayerDomain
from .fields import field_from_spec, invariants_from_jacobian
from .quadrature import VolumeGrid


@dataclass(frozen=True)
class SubspaceSpec:
    generators: tuple
    name: str = "subspace"

    def __post_init__(self):
        if len(self.generators) < 1:
            raise ValueError("subspace needs at least one generator")

    @property
    def n(self) -> int:
        return len(self.generators)

    def fields(self, domain):
        return [field_from_spec(g, domain) for g in self.generators]


def _is_concentric_spheres(domain: LayerDomain) -> bool:
    return not domain.inner.terms and not domain.outer.terms


def radial_polynomial_spec(domain: LayerDomain, n: int) -> SubspaceSpec:
    """g_k(r) = (R_out - r)(r - R_in)^k e_r, k < n; concentric spheres only."""
    if not _is_concentric_spheres(domain):
        raise ValueError("radial polynomial basis requires concentric spheres")
    a, b = domain.inner.r0, domain.outer.r0
    gens = []
    for k in range(n):
        g = np.polynomial.Polynomial([b, -1.0]) * np.polynomial.Polynomial([-a, 1.0]) ** k
        gens.append({"kind": "radial", "coeffs": [float(c) for c in g.coef]})
    return SubspaceSpec(tuple(gens), name=f"radial[{n}]")


TANGENTIAL_GENERATORS = (
    {"kind": "constant", "value": [1.0, 0.0, 0.0]},
    {"kind": "constant", "value": [0.0, 1.0, 0.0]},
    {"kind": "constant", "value": [0.0, 0.0, 1.0]},
    {"kind": "rotation"},
)


def blend_basis_spec(n_radial: int, tangential: bool = True, p: int = 2) -> SubspaceSpec:
    """Blend-based basis usable on any admissible layer.

    The tangential generators (V in {e_x, e_y, e_z, (-y, x, 0)}) come first when
    requested, followed by normal generators t^k n_in for k < n_radial, so
    specs with growing ``n_radial`` are nested.
    """
    gens = []
    if tangential:
        gens += [{"kind": "blend", "g": 0.0, "V": V, "p": p} for V in TANGENTIAL_GENERATORS]
    gens += [{"kind": "blend", "g": {"kind": "t_power", "k": k}, "p": p} for k in range(n_radial)]
    return SubspaceSpec(tuple(gens), name=f"blend[{n_radial}{'+t' if tangential else ''}]")


def assemble_gram(basis, grid: VolumeGrid, sym_tol: float = 1e-10):
    """Return the symmetric Gram matrices (A, G, D) of the basis fields."""
    pts, w = grid.points, grid.weights
    vals = np.stack([f.value(pts) for f in basis])  # (n, N, 3)
    jacs = np.stack([f.jacobian(pts) for f in basis])  # (n, N, 3, 3)
    inv = invariants_from_jacobian(jacs)
    A = np.einsum("n,inc,jnc->ij", w, vals, vals)
    G = np.einsum("n,inab,jnab->ij", w, jacs, jacs)
    D = np.einsum("n,in,jn->ij", w, inv.div, inv.div) + np.einsum("n,inc,jnc->ij", w, inv.rot, inv.rot)
    return tuple(symmetrized(M, sym_tol) for M in (A, G, D))


def symmetrized(M, sym_tol: float = 1e-10):
    """(M + M^T) / 2, refusing matrices whose asymmetry exceeds sym_tol relative to max|M|."""
    M = np.asarray(M, dtype=float)
    scale = max(np.max(np.abs(M)), 1e-300)
    if np.max(np.abs(M - M.T)) > sym_tol * scale:
        raise ValueError("assembly asymmetry")
    return 0.5 * (M + M.T)


@dataclass
class SharpnessResult:
    n: int
    quotient_max: float
    quotient_min: float
    rank: int
    gram_condition: float
    comparisons: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.comparisons if c["applicable"])

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "quotient_max": self.quotient_max,
            "quotient_min": self.quotient_min,
            "rank": self.rank,
            "gram_condition": self.gram_condition,
            "comparisons": self.comparisons,
            "passed": self.passed,
        }


def extremal_quotients(A, G, D, threshold: float = 1e-10) -> SharpnessResult:
    """Extreme generalized eigenvalues of (A, G) and (D, G) on the range of G."""
    lam, U = np.linalg.eigh(G)
    lmax = lam[-1] if lam.size else 0.0
    if not lmax > 0 or lmax < 1e-300:
        raise ValueError("degenerate subspace")
    keep = lam > threshold * lmax
    W = U[:, keep] / np.sqrt(lam[keep])
    a = np.linalg.eigvalsh(W.T @ A @ W)
    d = np.linalg.eigvalsh(W.T @ D @ W)
    return SharpnessResult(
        n=G.shape[0],
        quotient_max=float(a[-1]),
        quotient_min=float(d[0]),
        rank=int(keep.sum()),
        gram_condition=float(lmax / lam[keep][0]),
    )


def compare_constants(result: SharpnessResult, report: GeometryReport, eps: float = 1e-6) -> SharpnessResult:
    result.comparisons = [
        {
            "name": "max |P|^2/|grad P|^2 <= C1",
            "constant": report.C1,
            "value": result.quotient_max,
            "applicable": True,
            "passed": bool(result.quotient_max <= report.C1 + eps),
        },
        {
            "name": "min (rot^2+div^2)/|grad P|^2 >= C2",
            "constant": report.C2,
            "value": result.quotient_min,
            "applicable": bool(report.admissible),
            "passed": bool(result.quotient_min >= report.C2 - eps) if report.admissible else None,
        },
    ]
    return result


def subspace_quotients(spec: SubspaceSpec, domain: LayerDomain, grid: VolumeGrid, threshold: float = 1e-10):
    return extremal_quotients(*assemble_gram(spec.fields(domain), grid), threshold=threshold)


@dataclass
class SweepResult:
    rows: list
    nested: bool
    monotone_max: bool | None
    monotone_min: bool | None

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows) and self.monotone_max is not False and self.monotone_min is not False

    def to_dict(self) -> dict:
        return {
            "rows": [r.to_dict() for r in self.rows],
            "nested": self.nested,
            "monotone_max": self.monotone_max,
            "monotone_min": self.monotone_min,
            "passed": self.passed,
        }


def _nested(specs) -> bool:
    return all(
        b.n >= a.n and tuple(b.generators[: a.n]) == tuple(a.generators) for a, b in zip(specs, specs[1:])
    )


def sharpness_sweep(
    domain: LayerDomain,
    report: GeometryReport,
    specs,
    grid: VolumeGrid,
    eps: float = 1e-6,
    threshold: float = 1e-10,
    mono_tol: float = 1e-9,
) -> SweepResult:
    """Extremal quotients for a family of subspaces, checked against C1 and C2.

    Monotonicity is only asserted when each spec extends the previous one.
    """
    specs = list(specs)
    rows = [compare_constants(subspace_quotients(s, domain, grid, threshold), report, eps) for s in specs]
    nested = _nested(specs)
    mono_max = mono_min = None
    if nested:
        qmax = [r.quotient_max for r in rows]
        qmin = [r.quotient_min for r in rows]
        mono_max = all(b >= a - mono_tol * max(abs(a), 1.0) for a, b in zip(qmax, qmax[1:]))
        mono_min = all(b <= a + mono_tol * max(abs(a), 1.0) for a, b in zip(qmin, qmin[1:]))
    return SweepResult(rows, nested, mono_max, mono_min)
