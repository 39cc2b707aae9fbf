"""Vector fields with Jacobians, first-order invariants and boundary-condition blends.

Every field maps Cartesian points of shape (..., 3) to values of shape (..., 3)
and Jacobians of shape (..., 3, 3) with ``J[..., i, j] = dP_i / dx_j``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from .quadrature import angular_rule
from .surface import AWAY, RadialSurface, spherical_basis, surface_normal

FD_STEP = 1e-5
# fourth-order rule: h ~ eps^(1/5) balances truncation against rounding
RICHARDSON_STEP = 1e-3
MAX_DEGREE = 3


def finite_difference_jacobian(value, points, h: float = FD_STEP, richardson: bool = False):
    """Central-difference Jacobian of ``value`` at ``points``.

    With ``richardson=True`` the steps h and h/2 are combined to cancel the h^2 term.
    """
    points = np.asarray(points, dtype=float)

    def central(step):
        offs = step * np.eye(3)
        plus = value(points[..., None, :] + offs)
        minus = value(points[..., None, :] - offs)
        # plus[..., j, i] = P_i(x + h e_j)
        return np.swapaxes((plus - minus) / (2 * step), -1, -2)

    J = central(h)
    if richardson:
        J = (4 * central(h / 2) - J) / 3
    return J


class VectorField:
    """A vector field P(x) with its Jacobian.

    ``jacobian`` may be omitted, in which case central differences with step
    ``fd_step`` (Richardson-extrapolated if ``richardson``) are used and
    ``provenance`` records it.
    """

    def __init__(
        self, value, jacobian=None, name: str = "field", fd_step: float = FD_STEP, richardson: bool = False
    ):
        self._value = value
        self._jacobian = jacobian
        self.name = name
        self.fd_step = fd_step
        self.richardson = richardson

    @property
    def provenance(self) -> str:
        if self._jacobian is not None:
            return "analytic"
        return f"finite_difference({self.fd_step:g}{', richardson' if self.richardson else ''})"

    def with_richardson(self, step: float = RICHARDSON_STEP) -> "VectorField":
        """Same field; a finite-difference Jacobian switches to the fourth-order rule."""
        if self._jacobian is not None:
            return self
        return VectorField(self._value, None, self.name, step, richardson=True)

    def value(self, points):
        return self._value(np.asarray(points, dtype=float))

    def jacobian(self, points):
        points = np.asarray(points, dtype=float)
        if self._jacobian is not None:
            return self._jacobian(points)
        return finite_difference_jacobian(self._value, points, self.fd_step, self.richardson)

    def scaled(self, s: float) -> "VectorField":
        jac = None if self._jacobian is None else (lambda x: s * self._jacobian(x))
        return VectorField(lambda x: s * self._value(x), jac, f"{s:g}*{self.name}", self.fd_step, self.richardson)

    def __repr__(self):
        return f"VectorField({self.name!r}, {self.provenance})"


@dataclass(frozen=True)
class FirstOrderInvariants:
    div: np.ndarray
    rot: np.ndarray
    grad_norm_sq: np.ndarray

    @property
    def divrot_sq(self):
        return self.div**2 + np.sum(self.rot**2, axis=-1)


def invariants_from_jacobian(J) -> FirstOrderInvariants:
    div = J[..., 0, 0] + J[..., 1, 1] + J[..., 2, 2]
    rot = np.stack(
        [J[..., 2, 1] - J[..., 1, 2], J[..., 0, 2] - J[..., 2, 0], J[..., 1, 0] - J[..., 0, 1]],
        axis=-1,
    )
    return FirstOrderInvariants(div, rot, np.sum(J**2, axis=(-1, -2)))


def invariants_at(field: VectorField, points) -> FirstOrderInvariants:
    return invariants_from_jacobian(field.jacobian(points))


def pointwise_bound_check(field: VectorField, points) -> float:
    """Largest (div^2 + |rot|^2) / |grad P|^2 over the points; at most 3 for any field."""
    inv = invariants_at(field, points)
    keep = inv.grad_norm_sq > 1e-30
    if not np.any(keep):
        return 0.0
    return float(np.max(inv.divrot_sq[keep] / inv.grad_norm_sq[keep]))


# ---------------------------------------------------------------------------
# polynomial and built-in fields


def _monomial_mask(degree: int) -> np.ndarray:
    a = np.arange(degree + 1)
    return (a[:, None, None] + a[None, :, None] + a[None, None, :]) <= degree


def _powers(x, degree):
    p = [np.ones_like(x)]
    for _ in range(degree):
        p.append(p[-1] * x)
    return p


class PolynomialField(VectorField):
    """Components are polynomials of total degree <= 3 in (x, y, z).

    ``coeffs[i, a, b, c]`` multiplies x^a y^b z^c in component i.
    """

    def __init__(self, coeffs, name: str = "polynomial"):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.ndim != 4 or coeffs.shape[0] != 3 or len(set(coeffs.shape[1:])) != 1:
            raise ValueError("coefficient table must have shape (3, d+1, d+1, d+1)")
        degree = coeffs.shape[1] - 1
        if degree > MAX_DEGREE:
            raise ValueError(f"unsupported polynomial degree {degree} (max {MAX_DEGREE})")
        if np.any(coeffs[:, ~_monomial_mask(degree)] != 0):
            raise ValueError("coefficients above the total degree must be zero")
        self.coeffs = coeffs
        self.degree = degree
        self._exps = [tuple(e) for e in np.argwhere(_monomial_mask(degree))]
        self._C = np.stack([coeffs[:, a, b, c] for a, b, c in self._exps])  # (K, 3)
        super().__init__(self._eval, self._jac, name)

    def _monomials(self, x, wrt=None):
        px, py, pz = (_powers(x[..., i], self.degree) for i in range(3))
        cols = []
        for a, b, c in self._exps:
            if wrt is None:
                cols.append(px[a] * py[b] * pz[c])
            elif wrt == 0:
                cols.append(a * px[a - 1] * py[b] * pz[c] if a else np.zeros_like(px[0]))
            elif wrt == 1:
                cols.append(b * px[a] * py[b - 1] * pz[c] if b else np.zeros_like(px[0]))
            else:
                cols.append(c * px[a] * py[b] * pz[c - 1] if c else np.zeros_like(px[0]))
        return np.stack(cols, axis=-1)

    def _eval(self, x):
        return self._monomials(x) @ self._C

    def _jac(self, x):
        return np.stack([self._monomials(x, j) @ self._C for j in range(3)], axis=-1)


def random_coefficients(rng: np.random.Generator, degree: int, components: int = 3) -> np.ndarray:
    if not 0 <= degree <= MAX_DEGREE:
        raise ValueError(f"unsupported polynomial degree {degree} (max {MAX_DEGREE})")
    C = rng.uniform(-1.0, 1.0, size=(components, degree + 1, degree + 1, degree + 1))
    C[:, ~_monomial_mask(degree)] = 0.0
    return C


def seeded_random(seed: int, degree: int = 3) -> PolynomialField:
    rng = np.random.default_rng(seed)
    return PolynomialField(random_coefficients(rng, degree), name=f"random(seed={seed}, degree={degree})")


def constant_field(c) -> PolynomialField:
    C = np.zeros((3, 1, 1, 1))
    C[:, 0, 0, 0] = np.asarray(c, dtype=float)
    return PolynomialField(C, name=f"constant({list(map(float, c))})")


def zero_field() -> PolynomialField:
    return PolynomialField(np.zeros((3, 1, 1, 1)), name="zero")


def identity_field() -> PolynomialField:
    C = np.zeros((3, 2, 2, 2))
    C[0, 1, 0, 0] = C[1, 0, 1, 0] = C[2, 0, 0, 1] = 1.0
    return PolynomialField(C, name="identity")


def rotation_field() -> PolynomialField:
    """Rigid rotation (-y, x, 0) about the z axis."""
    C = np.zeros((3, 2, 2, 2))
    C[0, 0, 1, 0] = -1.0
    C[1, 1, 0, 0] = 1.0
    return PolynomialField(C, name="rotation")


def radial_field(coeffs) -> VectorField:
    """P = g(r) x / r with g given by power-series coefficients in r."""
    g = Polynomial(np.asarray(coeffs, dtype=float))
    dg = g.deriv()

    def value(x):
        r = np.linalg.norm(x, axis=-1)
        return (g(r) / r)[..., None] * x

    def jac(x):
        r = np.linalg.norm(x, axis=-1)
        xx = x[..., :, None] * x[..., None, :]
        a = (g(r) / r)[..., None, None]
        b = ((dg(r) - g(r) / r) / r**2)[..., None, None]
        return a * np.eye(3) + b * xx

    return VectorField(value, jac, name=f"radial({list(g.coef)})")


def builtin_field(spec: dict) -> VectorField:
    """Construct a field from a plain-dict spec (the config ``fields`` entries)."""
    kind = spec["kind"]
    if kind == "radial":
        return radial_field(spec["coeffs"])
    if kind == "constant":
        return constant_field(spec["value"])
    if kind == "zero":
        return zero_field()
    if kind == "identity":
        return identity_field()
    if kind == "rotation":
        return rotation_field()
    if kind == "polynomial":
        degree = int(spec["degree"])
        if not 0 <= degree <= MAX_DEGREE:
            raise ValueError(f"unsupported polynomial degree {degree} (max {MAX_DEGREE})")
        C = np.zeros((3, degree + 1, degree + 1, degree + 1))
        for comp, a, b, c, v in spec["terms"]:
            C[int(comp), int(a), int(b), int(c)] = float(v)
        return PolynomialField(C)
    if kind == "random":
        return seeded_random(int(spec["seed"]), int(spec.get("degree", 3)))
    raise ValueError(f"unknown field kind {kind!r}")


# ---------------------------------------------------------------------------
# boundary-condition blends


def to_spherical(points):
    x, y, z = points[..., 0], points[..., 1], points[..., 2]
    r = np.sqrt(x * x + y * y + z * z)
    theta = np.arccos(np.clip(z / r, -1.0, 1.0))
    phi = np.arctan2(y, x)
    return r, theta, phi


def layer_coordinate(domain, points):
    """t = (r - R_inner) / (R_outer - R_inner) along the ray through each point."""
    r, theta, phi = to_spherical(points)
    r_in = domain.inner.radius(theta, phi)
    r_out = domain.outer.radius(theta, phi)
    return (r - r_in) / (r_out - r_in), theta, phi


def bc_blend_field(domain, g, V: VectorField, p: int = 2, name: str = "blend") -> VectorField:
    """Field with zero tangential part on the inner surface and zero normal part on the outer.

    P = (1 - t)^p g n_in + t^p (V - (V . n_out) n_out), where n_in, n_out are the
    unit normals (away from the origin) frozen along each radial ray.
    ``g`` is a scalar callable on points or a number.
    """
    if int(p) != p or p < 1:
        raise ValueError("blend exponent p must be an integer >= 1")
    p = int(p)

    def value(x):
        t, theta, phi = layer_coordinate(domain, x)
        if np.any((t < -0.1) | (t > 1.1)):
            raise ValueError("outside layer")
        nu = surface_normal(domain.inner, theta, phi, AWAY)
        n = surface_normal(domain.outer, theta, phi, AWAY)
        gv = g(x) if callable(g) else np.full(t.shape, float(g))
        v = V.value(x)
        v_tan = v - np.sum(v * n, axis=-1, keepdims=True) * n
        return ((1 - t) ** p * gv)[..., None] * nu + (t**p)[..., None] * v_tan

    return VectorField(value, None, name=name)


class ScalarPolynomial:
    """Scalar polynomial of total degree <= 3; callable on (..., 3) points."""

    def __init__(self, coeffs):
        self.field = PolynomialField(np.concatenate([coeffs, np.zeros((2,) + coeffs.shape[1:])]))

    def __call__(self, x):
        return self.field.value(x)[..., 0]


def random_blend(domain, seed: int, p: int = 2) -> VectorField:
    """Blend with a seeded random cubic g and a seeded random cubic V."""
    rng = np.random.default_rng(seed)
    g = ScalarPolynomial(random_coefficients(rng, 3, components=1))
    V = PolynomialField(random_coefficients(rng, 3))
    return bc_blend_field(domain, g, V, p, name=f"random_blend(seed={seed}, p={p})")


def boundary_residuals(field: VectorField, domain, n_theta: int = 64, n_phi: int = 128) -> dict:
    """Max |P . n| on the outer surface and max |P_tangential| on the inner surface.

    ``scale`` is the largest |P| seen on either surface or on the mid-layer
    surface (1 if the field vanishes at all of them), so fields that vanish on
    both boundaries are still measured against their interior size.
    """
    T, Pp, _ = angular_rule(n_theta, n_phi)
    out = _on_surface(field, domain.outer, T, Pp)
    inn = _on_surface(field, domain.inner, T, Pp)
    normal = np.abs(np.sum(out["P"] * out["n"], axis=-1))
    Pi, ni = inn["P"], inn["n"]
    tang = np.linalg.norm(Pi - np.sum(Pi * ni, axis=-1, keepdims=True) * ni, axis=-1)
    r_mid = 0.5 * (domain.inner.radius(T, Pp) + domain.outer.radius(T, Pp))
    P_mid = field.value(r_mid[..., None] * spherical_basis(T, Pp)[0])
    scale = max(np.max(np.linalg.norm(P, axis=-1)) for P in (out["P"], Pi, P_mid))
    return {
        "outer_normal": float(np.max(normal)),
        "inner_tangential": float(np.max(tang)),
        "scale": float(scale) if scale > 0 else 1.0,
    }


def _on_surface(field, surface: RadialSurface, T, Pp):
    R = surface.radius(T, Pp)
    pts = R[..., None] * spherical_basis(T, Pp)[0]
    return {"P": field.value(pts), "n": surface_normal(surface, T, Pp, AWAY)}


def satisfies_bc(field: VectorField, domain, tol: float = 1e-8, n_theta: int = 32, n_phi: int = 64) -> bool:
    res = boundary_residuals(field, domain, n_theta, n_phi)
    return max(res["outer_normal"], res["inner_tangential"]) <= tol * res["scale"]


def scalar_from_spec(spec, domain):
    """Scalar weight for a blend: a number or a dict spec."""
    if isinstance(spec, (int, float)):
        return float(spec)
    kind = spec["kind"]
    if kind == "constant":
        return float(spec["value"])
    if kind == "t_power":
        k = int(spec["k"])
        return lambda x: layer_coordinate(domain, x)[0] ** k
    if kind == "random":
        rng = np.random.default_rng(int(spec["seed"]))
        return ScalarPolynomial(random_coefficients(rng, int(spec.get("degree", 3)), components=1))
    if kind == "polynomial":
        degree = int(spec["degree"])
        C = np.zeros((1, degree + 1, degree + 1, degree + 1))
        for a, b, c, v in spec["terms"]:
            C[0, int(a), int(b), int(c)] = float(v)
        return ScalarPolynomial(C)
    raise ValueError(f"unknown scalar kind {kind!r}")


def field_from_spec(spec: dict, domain=None) -> VectorField:
    """Built-in fields plus the domain-dependent ``blend`` and ``random_blend`` kinds."""
    kind = spec["kind"]
    if kind in ("blend", "random_blend") and domain is None:
        raise ValueError(f"field kind {kind!r} needs a domain")
    if kind == "blend":
        g = scalar_from_spec(spec.get("g", 0.0), domain)
        V = builtin_field(spec["V"]) if "V" in spec else zero_field()
        return bc_blend_field(domain, g, V, int(spec.get("p", 2)), name=spec.get("name", "blend"))
    if kind == "random_blend":
        return random_blend(domain, int(spec["seed"]), int(spec.get("p", 2)))
    f = builtin_field(spec)
    if "name" in spec:
        f.name = spec["name"]
    return f
