"""Material constants and constitutive laws for the swelling foam model.

All quantities are nondimensional. The laws are plain frozen dataclasses so a
single ``MaterialSystem`` can be shared between concurrent runs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class DomainError(ValueError):
    """Raised when a law is evaluated outside its domain (e.g. u_x <= 0)."""


class AssumptionError(ValueError):
    """A material law violates one of the structural assumptions."""


def _logcosh(z):
    # log cosh(z) without overflow for large |z|
    a = np.abs(z)
    return a + np.log1p(np.exp(-2.0 * a)) - math.log(2.0)


# --------------------------------------------------------------------------
# elastic response
# --------------------------------------------------------------------------

def _sech2(z):
    # sech^2 without overflow: 4 e^{-2|z|} / (1 + e^{-2|z|})^2
    e = np.exp(-2.0 * np.abs(z))
    return 4.0 * e / (1.0 + e) ** 2


def _check_positive_strain(g):
    g = np.asarray(g, dtype=float)
    if np.any(~(g > 0.0)):
        raise DomainError(
            f"deformation gradient must be > 0 (min {np.min(g):.3e}); "
            "the deformation is no longer injective"
        )
    return g


def elastic_response(g, k: float):
    """Singular elastic stress ``(k/2)(g - 1/2 - 1/(2 g^3))`` for ``g = u_x > 0``."""
    g = _check_positive_strain(g)
    out = 0.5 * k * (g - 0.5 - 0.5 / g**3)
    return out if out.ndim else float(out)


def elastic_response_derivative(g, k: float):
    g = _check_positive_strain(g)
    out = 0.5 * k * (1.0 + 1.5 / g**4)
    return out if out.ndim else float(out)


def elastic_energy_density(g, k: float):
    """Primitive of the elastic response: ``(k/4)(g^2 - g) + k/(8 g^2)``.

    Its integral over a state is the stored elastic energy
    ``(k/4)(|u_x|^2 - |u_x|_{L^1}) + (k/8) int 1/u_x^2``.
    """
    g = _check_positive_strain(g)
    out = 0.25 * k * (g * g - g) + k / (8.0 * g * g)
    return out if out.ndim else float(out)


def elastic_response_averaged(g0, g1, k: float):
    """Energy-consistent average of the elastic stress between two strains.

    Returns ``(W(g1) - W(g0)) / (g1 - g0)`` for the primitive ``W`` in closed
    form, so no division by ``g1 - g0`` is needed. Reduces to the elastic
    response when ``g0 == g1``.
    """
    g0 = np.asarray(g0, dtype=float)
    g1 = np.asarray(g1, dtype=float)
    gs = g0 + g1
    return 0.5 * k * (0.5 * gs - 0.5) - 0.125 * k * gs / (g0 * g0 * g1 * g1)


def elastic_response_averaged_derivative(g0, g1, k: float):
    """Derivative of :func:`elastic_response_averaged` with respect to ``g1``."""
    g0 = np.asarray(g0, dtype=float)
    g1 = np.asarray(g1, dtype=float)
    q = g0 * g0 * g1 * g1
    return 0.25 * k - 0.125 * k / q + 0.25 * k * (g0 + g1) / (q * g1)


# --------------------------------------------------------------------------
# parameter containers
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PhysicalConstants:
    m: float = 1.0
    gamma: float = 0.01
    k: float = 1.0
    k_v: float = 0.5
    kappa: float = 1.0

    def __post_init__(self):
        for name in ("m", "gamma", "k", "k_v", "kappa"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0.0):
                raise ValueError(f"{name} must be a positive number, got {val!r}")


@dataclass(frozen=True)
class DensityLaw:
    """Liquid density as a function of pressure, ``rho(p) = a p + b tanh(p/l) + w0``.

    ``family='linear'`` forces ``b = 0``. The inverse ``beta`` is computed by
    safeguarded Newton iteration.
    """

    a: float = 1.0
    b: float = 0.0
    scale: float = 1.0
    w0: float = 0.0
    family: str = "linear"

    def __post_init__(self):
        if self.family not in ("linear", "tanh-augmented"):
            raise ValueError(f"unknown density family {self.family!r}")
        if self.family == "linear" and self.b != 0.0:
            raise ValueError("linear density law requires b = 0")
        if not self.a > 0.0:
            raise ValueError("density slope a must be > 0")
        if self.b < 0.0:
            raise ValueError("density amplitude b must be >= 0")
        if not self.scale > 0.0:
            raise ValueError("density scale must be > 0")

    def __call__(self, p):
        p = np.asarray(p, dtype=float)
        return self.a * p + self.b * np.tanh(p / self.scale) + self.w0

    def derivative(self, p):
        p = np.asarray(p, dtype=float)
        return self.a + (self.b / self.scale) * _sech2(p / self.scale)

    def second_derivative(self, p):
        p = np.asarray(p, dtype=float)
        t = np.tanh(p / self.scale)
        return -2.0 * self.b / self.scale**2 * (1.0 - t * t) * t

    def inverse(self, w, tol: float = 1e-14, max_iter: int = 100):
        """``beta(w)``: the unique ``p`` with ``rho(p) = w``."""
        w = np.asarray(w, dtype=float)
        # rho(p) - w0 lies between a p and a p + b sign(p); bracket accordingly
        lo = (w - self.w0 - self.b) / self.a
        hi = (w - self.w0 + self.b) / self.a
        p = (w - self.w0) / self.a
        for _ in range(max_iter):
            r = self(p) - w
            lo = np.where(r < 0.0, p, lo)
            hi = np.where(r > 0.0, p, hi)
            step = p - r / self.derivative(p)
            outside = (step <= lo) | (step >= hi)
            p_new = np.where(outside, 0.5 * (lo + hi), step)
            if np.all(np.abs(p_new - p) <= tol * (1.0 + np.abs(p))):
                p = p_new
                break
            p = p_new
        return p if p.ndim else float(p)

    @property
    def mu(self) -> float:
        """Infimum of ``rho'``."""
        return self.a

    @property
    def sup_derivative(self) -> float:
        return self.a + self.b / self.scale

    @property
    def sup_abs_second_derivative(self) -> float:
        # max of sech^2(z) tanh(z) is 2/(3 sqrt 3), at tanh z = 1/sqrt 3
        return 4.0 * self.b / (3.0 * math.sqrt(3.0) * self.scale**2)

    @property
    def C_rho(self) -> float:
        """Upper bound of ``|rho'|_inf + |beta'|_inf + Lip(beta')``."""
        lip_beta_prime = self.sup_abs_second_derivative / self.a**3
        return self.sup_derivative + 1.0 / self.a + lip_beta_prime


@dataclass(frozen=True)
class BoundedLipschitzLaw:
    """``c tanh((r - shift)/scale)``; bounded by ``|c|``, Lipschitz ``|c|/scale``."""

    c: float = 0.0
    scale: float = 1.0
    shift: float = 0.0

    def __post_init__(self):
        if self.c < 0.0:
            raise ValueError("law amplitude c must be >= 0")
        if not self.scale > 0.0:
            raise ValueError("law scale must be > 0")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = self.c * np.tanh((r - self.shift) / self.scale)
        return out if out.ndim else float(out)

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        out = (self.c / self.scale) * _sech2((r - self.shift) / self.scale)
        return out if out.ndim else float(out)

    def primitive(self, r):
        r = np.asarray(r, dtype=float)
        out = self.c * self.scale * _logcosh((r - self.shift) / self.scale)
        return out if out.ndim else float(out)

    def averaged(self, r0: float, r1: float) -> float:
        """Difference quotient of the primitive between ``r0`` and ``r1``."""
        dr = r1 - r0
        if abs(dr) < 1e-7 * max(1.0, self.scale):
            # two-point Gauss is exact to O(dr^4) here
            mid, half = 0.5 * (r0 + r1), 0.5 * dr / math.sqrt(3.0)
            return 0.5 * (self(mid - half) + self(mid + half))
        return (self.primitive(r1) - self.primitive(r0)) / dr

    def averaged_derivative(self, r0: float, r1: float) -> float:
        """Derivative of :meth:`averaged` with respect to ``r1``."""
        dr = r1 - r0
        if abs(dr) < 1e-7 * max(1.0, self.scale):
            return 0.5 * self.derivative(0.5 * (r0 + r1))
        return (self(r1) - self.averaged(r0, r1)) / dr

    @property
    def bound(self) -> float:
        return abs(self.c)

    @property
    def lipschitz(self) -> float:
        return abs(self.c) / self.scale

    @property
    def w1inf_norm(self) -> float:
        return self.bound + self.lipschitz


@dataclass(frozen=True)
class BoundarySource:
    """Clamped piecewise-linear table ``[(t_i, h_i)]`` for the inflow datum."""

    times: tuple = (0.0,)
    values: tuple = (0.0,)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or len(t) == 0 or len(t) != len(self.values):
            raise ValueError("boundary source table needs matching, non-empty times/values")
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("boundary source knots must be strictly increasing")
        object.__setattr__(self, "times", tuple(float(x) for x in t))
        object.__setattr__(self, "values", tuple(float(x) for x in self.values))

    @classmethod
    def constant(cls, value: float = 0.0) -> "BoundarySource":
        return cls((0.0,), (float(value),))

    def __call__(self, t):
        out = np.interp(t, self.times, self.values)
        return out if np.ndim(out) else float(out)

    @property
    def is_zero(self) -> bool:
        return all(v == 0.0 for v in self.values)

    @property
    def seminorm_w11(self) -> float:
        """Total variation ``int |h0'| dt`` of the table."""
        return float(np.sum(np.abs(np.diff(self.values))))

    def integral(self, t0: float, t1: float) -> float:
        """Exact integral of the clamped table over ``[t0, t1]``."""
        if t1 < t0:
            return -self.integral(t1, t0)
        knots = np.array(self.times)
        inner = knots[(knots > t0) & (knots < t1)]
        pts = np.concatenate(([t0], inner, [t1]))
        vals = np.interp(pts, self.times, self.values)
        return float(np.sum(0.5 * (vals[1:] + vals[:-1]) * np.diff(pts)))


@dataclass(frozen=True)
class MaterialSystem:
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    rho: DensityLaw = field(default_factory=DensityLaw)
    nu: BoundedLipschitzLaw = field(default_factory=BoundedLipschitzLaw)
    phi: BoundedLipschitzLaw = field(default_factory=BoundedLipschitzLaw)
    psi: BoundedLipschitzLaw = field(default_factory=BoundedLipschitzLaw)
    h0: BoundarySource = field(default_factory=BoundarySource)


@dataclass
class AssumptionReport:
    mu: float
    C_rho: float
    C_phi: float
    C_psi: float
    C_nu: float
    sampled: dict


def validate_assumptions(system: MaterialSystem, lo: float = -50.0, hi: float = 50.0,
                         n_samples: int = 10_001) -> AssumptionReport:
    """Return the structural constants of ``system`` after checking them by sampling.

    The closed-form constants are compared against dense sampling on
    ``[lo, hi]``; any sampled value exceeding its claimed bound raises
    :class:`AssumptionError` naming the assumption.
    """
    r = np.linspace(lo, hi, n_samples)
    rho = system.rho
    problems = []
    sampled = {}

    d = rho.derivative(r)
    sampled["min_rho_prime"] = float(d.min())
    sampled["max_rho_prime"] = float(d.max())
    if not rho.mu > 0.0:
        problems.append("density law: inf rho' must be positive")
    if d.min() < rho.mu - 1e-12:
        problems.append(f"density law: sampled rho' {d.min():.3e} below mu = {rho.mu:.3e}")
    if d.max() > rho.sup_derivative + 1e-12:
        problems.append("density law: sampled rho' exceeds its claimed sup")
    w = rho(r)
    inv_err = float(np.max(np.abs(rho.inverse(w) - r)))
    sampled["beta_rho_error"] = inv_err
    if inv_err > 1e-10 * max(1.0, abs(lo), abs(hi)):
        problems.append(f"density law: beta(rho(r)) != r (max error {inv_err:.3e})")
    lip_beta = np.abs(rho.second_derivative(r)) / d**3
    sampled["lip_beta_prime"] = float(lip_beta.max())
    if sampled["max_rho_prime"] + 1.0 / sampled["min_rho_prime"] + lip_beta.max() > rho.C_rho + 1e-12:
        problems.append("density law: sampled C_rho exceeds its closed-form bound")

    for label, law in (("phi", system.phi), ("psi", system.psi), ("nu", system.nu)):
        vals = law(r)
        slopes = np.abs(np.diff(vals)) / np.diff(r)
        sampled[f"max_abs_{label}"] = float(np.max(np.abs(vals)))
        sampled[f"lip_{label}"] = float(slopes.max()) if len(slopes) else 0.0
        if np.max(np.abs(vals)) > law.bound + 1e-12:
            problems.append(f"{label} law: |{label}| exceeds its bound {law.bound}")
        if slopes.max() > law.lipschitz * (1.0 + 1e-9) + 1e-12:
            problems.append(f"{label} law: slope exceeds its Lipschitz constant {law.lipschitz}")

    if problems:
        raise AssumptionError("; ".join(problems))

    return AssumptionReport(
        mu=rho.mu,
        C_rho=rho.C_rho,
        C_phi=system.phi.w1inf_norm,
        C_psi=system.psi.w1inf_norm,
        C_nu=system.nu.w1inf_norm,
        sampled=sampled,
    )
