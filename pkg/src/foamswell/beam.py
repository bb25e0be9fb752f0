"""Implicit time stepping of the viscoelastic beam with a singular elastic law.

Spatial scheme: uniform nodes ``x_j = j h``. The stress
``sigma = f(u_x) + k_v u_xt + nu(p_hat)`` lives on cells, the bending
operator is ``gamma h D2^T D2`` where ``D2`` holds the nodal second
differences at interior nodes; the end values of ``u_xx`` are zero, which is
the ghost-node reflection ``u_{-1} = 2u_0 - u_1``, ``u_{N+1} = 2u_N - u_{N-1}``.
Node ``N`` carries a half cell and the natural end condition, with the
swelling force ``phi(s)`` applied as the boundary traction.

Time scheme: average-acceleration Newmark written in trapezoidal form,
``u1 = u0 + dt (v0 + v1)/2``, with all forces at the step midpoint and the
elastic and swelling terms replaced by their energy-consistent averages, so
the discrete energy balance holds exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import constitutive as cl
from .deformation import DeformationSnapshot, SingularConfigurationError, grid
from .newton import StepError, banded_newton

BANDS = (2, 2)


@dataclass
class BeamProblem:
    constants: cl.PhysicalConstants
    phi: cl.BoundedLipschitzLaw
    nu: cl.BoundedLipschitzLaw
    n_cells: int
    dt: float
    newton_tol: float = 1e-11
    newton_max_iter: int = 30
    gradient_floor: float = 1e-8

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if not self.newton_tol > 0.0:
            raise ValueError("newton_tol must be positive")
        grid(self.n_cells)

    @property
    def h(self) -> float:
        return 1.0 / self.n_cells

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoid weights of the nodes (lumped mass per unit density)."""
        w = np.full(self.n_cells + 1, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w

    @cached_property
    def _bending_band(self) -> np.ndarray:
        """``gamma h D2^T D2`` in (2, 2) banded layout."""
        n, h = self.n_cells, self.h
        D2 = np.zeros((n - 1, n + 1))
        rows = np.arange(n - 1)
        D2[rows, rows] = 1.0
        D2[rows, rows + 1] = -2.0
        D2[rows, rows + 2] = 1.0
        K = self.constants.gamma * h * (D2.T @ D2) / h**4
        return dense_to_band(K, *BANDS)

    def with_dt(self, dt: float) -> "BeamProblem":
        return BeamProblem(self.constants, self.phi, self.nu, self.n_cells, dt,
                           self.newton_tol, self.newton_max_iter, self.gradient_floor)


@dataclass
class BeamStepResult:
    next: DeformationSnapshot
    newton_iters: int
    residual_norm: float
    dissipation: float = 0.0  # dt * k_v |u_xt|^2 over the step
    load_work: float = 0.0    # -dt * (nu(p_hat), u_xt) over the step


def dense_to_band(A: np.ndarray, lower: int, upper: int) -> np.ndarray:
    n = A.shape[0]
    ab = np.zeros((lower + upper + 1, n))
    for d in range(-lower, upper + 1):
        diag = np.diagonal(A, d)
        if d >= 0:
            ab[upper - d, d:] = diag
        else:
            ab[upper - d, : n + d] = diag
    return ab


def second_differences(u: np.ndarray, h: float) -> np.ndarray:
    """Nodal ``u_xx`` with the end values fixed at zero (ghost reflection)."""
    d2 = np.zeros_like(u)
    d2[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (h * h)
    return d2


def cell_load(p_hat: np.ndarray, nu: cl.BoundedLipschitzLaw) -> np.ndarray:
    """Pressure contribution ``nu(p_hat)`` to the stress, averaged onto cells."""
    nv = nu(np.asarray(p_hat, dtype=float))
    return 0.5 * (nv[1:] + nv[:-1])


class _BeamSystem:
    """Residual and banded Jacobian of one beam step in force (weak) units."""

    def __init__(self, previous: DeformationSnapshot, p_hat, prob: BeamProblem,
                 load=None):
        if len(previous.u) != prob.n_cells + 1:
            raise ValueError("snapshot grid does not match the problem grid")
        self.prob = prob
        self.u0 = previous.u
        self.v0 = previous.v
        self.g0 = np.diff(self.u0) / prob.h
        self.nu_c = cell_load(p_hat, prob.nu)
        c = prob.constants
        self.mass_diag = 2.0 * c.m * prob.weights / prob.dt**2
        if load is None:
            self.Q = None
            self.q = 0.0
        else:
            Q, q = load
            self.Q = prob.weights * np.asarray(Q, dtype=float)
            self.q = float(q)

    def velocities(self, U):
        dt = self.prob.dt
        vm = (U - self.u0) / dt
        return vm, 2.0 * vm - self.v0

    def forces(self, U):
        prob, c = self.prob, self.prob.constants
        h, dt = prob.h, prob.dt
        vm = (U - self.u0) / dt
        acc = 2.0 * (vm - self.v0) / dt
        g1 = np.diff(U) / h
        sig = (cl.elastic_response_averaged(self.g0, g1, c.k)
               + c.k_v * np.diff(vm) / h + self.nu_c)
        d2 = second_differences(0.5 * (U + self.u0), h)
        bend = np.zeros_like(U)
        bend[1:-1] = d2[:-2] - 2.0 * d2[1:-1] + d2[2:]
        bend[-1] = d2[-2]
        bend *= c.gamma / h
        G = c.m * prob.weights * acc + bend
        G[1:-1] -= sig[1:] - sig[:-1]
        G[-1] += sig[-1] + prob.phi.averaged(self.u0[-1], U[-1]) - self.q
        if self.Q is not None:
            G -= self.Q
        G[0] = self.mass_diag[1] * U[0]
        return G, g1

    def __call__(self, U):
        prob, c = self.prob, self.prob.constants
        h, dt = prob.h, prob.dt
        G, g1 = self.forces(U)
        kap = cl.elastic_response_averaged_derivative(self.g0, g1, c.k) / h + c.k_v / (h * dt)
        ab = 0.5 * prob._bending_band
        ab[2] += self.mass_diag
        # cell couplings: -(sig_i - sig_{i-1}) for interior rows, +sig_{N-1} at row N
        ab[2, :-1] += kap
        ab[2, 1:] += kap
        ab[1, 1:] -= kap   # (i, i+1)
        ab[3, :-1] -= kap  # (i+1, i)
        ab[2, -1] += prob.phi.averaged_derivative(self.u0[-1], U[-1])
        # Dirichlet row 0
        ab[2, 0] = self.mass_diag[1]
        ab[1, 1] = 0.0
        ab[0, 2] = 0.0
        return G, ab, ab[2].copy()


def beam_residual(candidate: DeformationSnapshot, previous: DeformationSnapshot,
                  p_hat, prob: BeamProblem, load=None) -> np.ndarray:
    """Nodal residual of the discrete beam equations for a candidate ``u^{n+1}``.

    Interior rows are in equation units (force per length), the last row in
    boundary-traction units, row 0 is ``u(0)`` scaled. The candidate velocity
    is implied by the time scheme and is not read. ``load`` optionally injects
    a manufactured body force and end traction ``(Q, q)``.
    """
    previous.require_monotone()
    candidate.require_monotone()
    system = _BeamSystem(previous, p_hat, prob, load)
    G, _ = system.forces(candidate.u)
    R = G / prob.h
    R[-1] = G[-1]
    R[0] = candidate.u[0]
    return R


def beam_jacobian_dense(candidate: DeformationSnapshot, previous: DeformationSnapshot,
                        p_hat, prob: BeamProblem) -> np.ndarray:
    """Dense Jacobian of the force-unit residual (for testing)."""
    _, ab, _ = _BeamSystem(previous, p_hat, prob)(candidate.u)
    n = ab.shape[1]
    J = np.zeros((n, n))
    for d in range(-2, 3):
        row = 2 - d
        for j in range(n):
            i = j - d
            if 0 <= i < n:
                J[i, j] = ab[row, j]
    return J


def beam_forces(candidate_u: np.ndarray, previous: DeformationSnapshot, p_hat,
                prob: BeamProblem, load=None) -> np.ndarray:
    """Force-unit residual (the quantity Newton drives to zero)."""
    return _BeamSystem(previous, p_hat, prob, load).forces(np.asarray(candidate_u, float))[0]


def step_beam(previous: DeformationSnapshot, p_hat, prob: BeamProblem,
              load=None, guess: np.ndarray | None = None) -> BeamStepResult:
    """Advance the beam by one step with ``p_hat`` frozen over the step."""
    previous.require_monotone()
    system = _BeamSystem(previous, p_hat, prob, load)
    floor = prob.gradient_floor
    n = prob.n_cells

    def feasible(U):
        return bool(np.min(np.diff(U)) * n > floor)

    def infeasible(U):
        return SingularConfigurationError(
            f"line search could not keep cell gradients above {floor:g}"
        )

    if guess is None:
        guess = previous.u + prob.dt * previous.v
        if not feasible(guess):
            guess = previous.u.copy()
    try:
        res = banded_newton(system, guess, BANDS, prob.newton_tol, prob.newton_max_iter,
                            feasible, infeasible)
    except FloatingPointError as exc:  # pragma: no cover - defensive
        raise StepError(str(exc)) from exc
    U = res.x
    U[0] = 0.0
    vm, v1 = system.velocities(U)
    v1[0] = 0.0
    vx = np.diff(vm) / prob.h
    h, dt = prob.h, prob.dt
    dissipation = dt * prob.constants.k_v * h * float(np.sum(vx * vx))
    work = -dt * h * float(np.sum(system.nu_c * vx))
    return BeamStepResult(DeformationSnapshot(U, v1), res.iterations, res.residual_norm,
                          dissipation, work)


def beam_energy(snap: DeformationSnapshot, prob: BeamProblem) -> float:
    """Kinetic + bending + elastic + swelling-potential energy of a state."""
    snap.require_monotone()
    c, h = prob.constants, snap.h
    w = np.full(len(snap.u), h)
    w[0] = w[-1] = 0.5 * h
    kinetic = 0.5 * c.m * float(np.sum(w * snap.v**2))
    d2 = second_differences(snap.u, h)
    bending = 0.5 * c.gamma * float(np.sum(w * d2**2))
    elastic = h * float(np.sum(cl.elastic_energy_density(snap.gradients, c.k)))
    return kinetic + bending + elastic + float(prob.phi.primitive(snap.s))


# --------------------------------------------------------------------------
# initial data
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class InitialDeformation:
    """``u0(x) = stretch * x + amplitude * sin(pi x)``.

    Every member satisfies ``u0(0) = 0`` and ``u0_xx(0) = u0_xx(1) = 0``;
    it is strictly increasing iff ``|amplitude| * pi < stretch``.
    """

    stretch: float = 1.0
    amplitude: float = 0.0

    def u(self, x):
        return self.stretch * x + self.amplitude * np.sin(np.pi * x)

    def ux(self, x):
        return self.stretch + self.amplitude * np.pi * np.cos(np.pi * x)

    def uxx(self, x):
        return -self.amplitude * np.pi**2 * np.sin(np.pi * x)

    def uxxx(self, x):
        return -self.amplitude * np.pi**3 * np.cos(np.pi * x)

    @property
    def min_gradient(self) -> float:
        return self.stretch - abs(self.amplitude) * np.pi

    @property
    def s0(self) -> float:
        return float(self.u(1.0))


def compatibility_residual(u0: InitialDeformation, v0_slope: float, p0_at_s0: float,
                           constants: cl.PhysicalConstants, phi: cl.BoundedLipschitzLaw,
                           nu: cl.BoundedLipschitzLaw) -> float:
    """End-traction balance of the initial data at ``x = 1`` for ``v0 = beta x``.

    ``-gamma u0_xxx(1) + f(u0_x(1)) + k_v v0_x(1) + nu(p0(s0)) + phi(s0)``.
    """
    g1 = float(u0.ux(1.0))
    return (-constants.gamma * float(u0.uxxx(1.0))
            + cl.elastic_response(g1, constants.k)
            + constants.k_v * v0_slope
            + nu(p0_at_s0) + phi(u0.s0))


def compatible_velocity_slope(u0: InitialDeformation, p0_at_s0: float,
                              constants: cl.PhysicalConstants, phi: cl.BoundedLipschitzLaw,
                              nu: cl.BoundedLipschitzLaw) -> float:
    """Slope ``beta`` of ``v0 = beta x`` making the initial data compatible."""
    r0 = compatibility_residual(u0, 0.0, p0_at_s0, constants, phi, nu)
    return -r0 / constants.k_v


def initial_snapshot(u0: InitialDeformation, v0_slope: float, n_cells: int) -> DeformationSnapshot:
    x = grid(n_cells)
    return DeformationSnapshot(u0.u(x), v0_slope * x)


__all__ = [
    "BeamProblem", "BeamStepResult", "beam_residual", "step_beam", "beam_energy",
    "InitialDeformation", "compatibility_residual", "compatible_velocity_slope",
    "initial_snapshot", "second_differences", "cell_load", "StepError",
]
