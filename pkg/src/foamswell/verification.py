"""Verification suites: manufactured-solution ladders, lemma fuzzing, Galerkin cross-check.

Each suite returns a list of :class:`OrderRow`; a suite passes iff every row
passes. Spatial orders are measured against the exact manufactured solution,
temporal orders by self-convergence (differences of successive dt-halvings),
which removes the fixed spatial error from the measurement.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import constitutive as cl
from .beam import BeamProblem, InitialDeformation, compatible_velocity_slope, initial_snapshot, step_beam
from .deformation import DeformationSnapshot
from .diagnostics import check_gn_inequality, check_strain_bound, l2_norm
from .galerkin import build_basis, integrate_galerkin
from .pore import DiffusionProblem, step_diffusion

SUITES = ("mms-beam", "mms-pore", "lemmas", "galerkin-cross")
LADDER = (32, 64, 128, 256)


@dataclass
class OrderRow:
    suite: str
    check: str
    level: str
    value: float
    slope: float
    lower: float
    upper: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _step_count(t_final: float, dt: float) -> int:
    n = int(round(t_final / dt))
    if not math.isclose(n * dt, t_final, rel_tol=1e-9):
        raise ValueError(f"dt={dt} does not divide t_final={t_final}")
    return n


def observed_slopes(values) -> list[float]:
    """``log2`` ratios of successive errors on a halving ladder."""
    v = np.asarray(values, dtype=float)
    return [float(math.log2(a / b)) if a > 0 and b > 0 else float("nan")
            for a, b in zip(v[:-1], v[1:])]


def _ladder_rows(suite, check, levels, errors, target, band=0.3):
    rows = [OrderRow(suite, check, str(levels[0]), float(errors[0]), float("nan"),
                     target - band, target + band, True)]
    for lev, err, p in zip(levels[1:], errors[1:], observed_slopes(errors)):
        ok = bool(np.isfinite(p) and abs(p - target) <= band)
        rows.append(OrderRow(suite, check, str(lev), float(err), p,
                             target - band, target + band, ok))
    return rows


# --------------------------------------------------------------------------
# beam: u* = x + A sin(w t) (x/2 + sin(pi x)); satisfies u(0)=0, u_xx(0)=u_xx(1)=0
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BeamMMS:
    constants: cl.PhysicalConstants = cl.PhysicalConstants(m=1.0, gamma=0.01, k=1.0, k_v=0.5, kappa=1.0)
    phi: cl.BoundedLipschitzLaw = cl.BoundedLipschitzLaw(0.1, 1.0, 1.0)
    amplitude: float = 0.1
    omega: float = 2.0

    def _shape(self, x, order):
        pi = math.pi
        return [0.5 * x + np.sin(pi * x), 0.5 + pi * np.cos(pi * x),
                -pi**2 * np.sin(pi * x), -pi**3 * np.cos(pi * x),
                pi**4 * np.sin(pi * x)][order]

    def _time(self, t, order):
        A, w = self.amplitude, self.omega
        return A * [math.sin(w * t), w * math.cos(w * t), -w * w * math.sin(w * t)][order]

    def u(self, t, x):
        return x + self._time(t, 0) * self._shape(x, 0)

    def v(self, t, x):
        return self._time(t, 1) * self._shape(x, 0)

    def load(self, t, x):
        """Interior body force ``Q`` and end traction ``q`` making ``u*`` exact."""
        c = self.constants
        T0, T1, T2 = (self._time(t, k) for k in range(3))
        ux = 1.0 + T0 * self._shape(x, 1)
        uxx = T0 * self._shape(x, 2)
        Q = (c.m * T2 * self._shape(x, 0) + c.gamma * T0 * self._shape(x, 4)
             - cl.elastic_response_derivative(ux, c.k) * uxx - c.k_v * T1 * self._shape(x, 2))
        q = (-c.gamma * T0 * self._shape(1.0, 3)
             + cl.elastic_response(1.0 + T0 * self._shape(1.0, 1), c.k)
             + c.k_v * T1 * self._shape(1.0, 1) + float(self.phi(self.u(t, 1.0))))
        return Q, q

    def solve(self, n_cells: int, dt: float, t_final: float) -> DeformationSnapshot:
        x = np.linspace(0.0, 1.0, n_cells + 1)
        prob = BeamProblem(self.constants, self.phi, cl.BoundedLipschitzLaw(0.0), n_cells, dt)
        snap = DeformationSnapshot(self.u(0.0, x), self.v(0.0, x))
        zero = np.zeros(n_cells + 1)
        n_steps = _step_count(t_final, dt)
        for i in range(n_steps):
            snap = step_beam(snap, zero, prob, load=self.load((i + 0.5) * dt, x)).next
        return snap


def beam_ladders(t_final: float = 0.5, dt_spatial: float = 5e-4, n_temporal: int = 64,
                 dts=(0.05, 0.025, 0.0125, 0.00625), ladder=LADDER) -> list[OrderRow]:
    mms = BeamMMS()
    errs = []
    for n in ladder:
        snap = mms.solve(n, dt_spatial, t_final)
        errs.append(float(np.max(np.abs(snap.u - mms.u(t_final, snap.x)))))
    rows = _ladder_rows("mms-beam", "spatial", list(ladder), errs, 2.0)
    sols = [mms.solve(n_temporal, dt, t_final).u for dt in dts]
    diffs = [float(np.max(np.abs(a - b))) for a, b in zip(sols[:-1], sols[1:])]
    rows += _ladder_rows("mms-beam", "temporal", list(dts[1:]), diffs, 2.0)
    return rows


# --------------------------------------------------------------------------
# pore: s = 1 + 0.1 t, p* = cos(pi x)(1 + t), v_bar = s' x (affine deformation)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PoreMMS:
    constants: cl.PhysicalConstants = cl.PhysicalConstants()
    rho: cl.DensityLaw = cl.DensityLaw(a=1.0, b=0.5, family="tanh-augmented")
    growth: float = 0.1

    def s(self, t):
        return 1.0 + self.growth * t

    def p(self, t, x):
        return np.cos(np.pi * x) * (1.0 + t)

    def source(self, t, x):
        """Right-hand side of the nonconservative form that makes ``p*`` exact."""
        p, s = self.p(t, x), self.s(t)
        kappa = self.constants.kappa
        return (self.rho.derivative(p) * np.cos(np.pi * x)
                + kappa / s**2 * np.pi**2 * p + self.growth * self.rho(p) / s)

    def solve(self, n_cells: int, dt: float, t_final: float) -> np.ndarray:
        x = np.linspace(0.0, 1.0, n_cells + 1)
        prob = DiffusionProblem(self.constants, self.rho, cl.BoundedLipschitzLaw(0.0),
                                cl.BoundarySource.constant(0.0), n_cells, dt)
        p = self.p(0.0, x)
        n_steps = _step_count(t_final, dt)
        sd = self.growth
        for i in range(n_steps):
            t1 = (i + 1) * dt
            p = step_diffusion(p, self.s(t1), sd, sd * x, t1, prob, s_prev=self.s(i * dt),
                               source=self.source(t1, x)).next
        return p


def pore_ladders(t_final: float = 0.2, dt_factor: float = 0.8, n_temporal: int = 64,
                 dts=(0.02, 0.01, 0.005, 0.0025), ladder=LADDER) -> list[OrderRow]:
    """Spatial ladder runs with ``dt = dt_factor h^2`` so the O(dt) error tracks h^2."""
    mms = PoreMMS()
    errs = []
    for n in ladder:
        dt = t_final / math.ceil(t_final * n * n / dt_factor)
        p = mms.solve(n, dt, t_final)
        errs.append(float(np.max(np.abs(p - mms.p(t_final, np.linspace(0, 1, n + 1))))))
    rows = _ladder_rows("mms-pore", "spatial", list(ladder), errs, 2.0)
    sols = [mms.solve(n_temporal, dt, t_final) for dt in dts]
    diffs = [float(np.max(np.abs(a - b))) for a, b in zip(sols[:-1], sols[1:])]
    rows += _ladder_rows("mms-pore", "temporal", list(dts[1:]), diffs, 1.0)
    return rows


# --------------------------------------------------------------------------
# lemma fuzzing
# --------------------------------------------------------------------------

def random_smooth(rng: np.random.Generator, x: np.ndarray, modes: int = 6) -> np.ndarray:
    """Random trigonometric polynomial with decaying coefficients."""
    z = rng.normal() * np.ones_like(x) + rng.normal() * x
    for j in range(1, modes + 1):
        z += rng.normal() / j**2 * np.sin(j * np.pi * x + rng.uniform(0, 2 * np.pi))
    return z


def random_monotone(rng: np.random.Generator, x: np.ndarray, modes: int = 6) -> np.ndarray:
    """``u(x) = int_0^x exp(smooth)``, so ``u(0) = 0`` and ``u_x > 0``."""
    g = np.exp(0.7 * random_smooth(rng, x, modes))
    h = x[1] - x[0]
    u = np.concatenate([[0.0], np.cumsum(0.5 * (g[1:] + g[:-1]) * h)])
    return u


def lemma_fuzz(samples: int = 100, n_cells: int = 256, seed: int = 12345) -> list[OrderRow]:
    rng = np.random.default_rng(seed)
    x = np.linspace(0.0, 1.0, n_cells + 1)
    fails = {"strain_bound": 0, "gn_z0": 0, "gn": 0}
    worst = {k: math.inf for k in fails}
    for _ in range(samples):
        e = check_strain_bound(random_monotone(rng, x))
        fails["strain_bound"] += not e.passed
        worst["strain_bound"] = min(worst["strain_bound"], e.margin)
        z = random_smooth(rng, x)
        e = check_gn_inequality(z - z[0], vanishes_at_zero=True)
        fails["gn_z0"] += not e.passed
        worst["gn_z0"] = min(worst["gn_z0"], e.margin)
        e = check_gn_inequality(z, vanishes_at_zero=False)
        fails["gn"] += not e.passed
        worst["gn"] = min(worst["gn"], e.margin)
    return [OrderRow("lemmas", f"{k}_violations", f"{samples} samples", float(v),
                     worst[k], 0.0, 0.0, v == 0) for k, v in fails.items()]


# --------------------------------------------------------------------------
# Galerkin vs finite differences with frozen pressure load
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CrossScenario:
    constants: cl.PhysicalConstants = cl.PhysicalConstants(m=1.0, gamma=0.01, k=1.0, k_v=0.5, kappa=1.0)
    nu: cl.BoundedLipschitzLaw = cl.BoundedLipschitzLaw(0.1, 1.0, 0.0)
    phi: cl.BoundedLipschitzLaw = cl.BoundedLipschitzLaw(0.1, 1.0, 1.0)
    u0: InitialDeformation = InitialDeformation(1.0, 0.1)
    pressure_amplitude: float = 0.5

    def p_hat(self, x):
        return self.pressure_amplitude * np.cos(np.pi * np.asarray(x, dtype=float))

    @property
    def velocity_slope(self) -> float:
        return compatible_velocity_slope(self.u0, float(self.p_hat(1.0)), self.constants,
                                         self.phi, self.nu)


def galerkin_cross(modes: int = 16, n_cells: int = 256, dt: float = 1e-3,
                   t_final: float = 0.5, tol: float = 1e-3,
                   scenario: CrossScenario | None = None) -> tuple[list[OrderRow], dict]:
    sc = scenario or CrossScenario()
    beta = sc.velocity_slope
    prob = BeamProblem(sc.constants, sc.phi, sc.nu, n_cells, dt)
    snap = initial_snapshot(sc.u0, beta, n_cells)
    ph = sc.p_hat(snap.x)
    for _ in range(_step_count(t_final, dt)):
        snap = step_beam(snap, ph, prob).next
    basis = build_basis(modes)
    traj = integrate_galerkin(
        basis, (sc.u0.u, sc.u0.ux, sc.u0.uxx),
        (lambda x: beta * x, lambda x: beta + 0.0 * x, lambda x: 0.0 * x),
        sc.constants, dt, t_final, load=lambda t, x: sc.nu(sc.p_hat(x)), phi=sc.phi)
    ug, _ = traj.to_grid(n_cells)
    rel = l2_norm(ug - snap.u) / l2_norm(snap.u)
    energy_ok = bool(np.all(traj.energy_lhs <= traj.energy_rhs * (1 + 1e-12)))
    rows = [OrderRow("galerkin-cross", "relative_l2_u", f"n={modes},N={n_cells}", rel,
                     float("nan"), 0.0, tol, rel <= tol),
            OrderRow("galerkin-cross", "energy_estimate_violations", f"{len(traj.times)} steps",
                     float(np.sum(traj.energy_lhs > traj.energy_rhs * (1 + 1e-12))),
                     float(np.min(traj.energy_rhs - traj.energy_lhs)), 0.0, 0.0, energy_ok)]
    return rows, {"fd": snap, "galerkin": traj, "relative_l2": rel}


def run_suite(name: str) -> list[OrderRow]:
    if name == "mms-beam":
        return beam_ladders()
    if name == "mms-pore":
        return pore_ladders()
    if name == "lemmas":
        return lemma_fuzz()
    if name == "galerkin-cross":
        return galerkin_cross()[0]
    raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
