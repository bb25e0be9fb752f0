"""Backward-Euler solver for the liquid pressure on the rescaled domain [0, 1].

On the reference interval the mass balance reads, after multiplying by ``s``,

    (s rho(p))_t + J_x = 0,    J = (v_bar - s' x) rho(p) - (kappa / s) p_x,

which is the rescaled Darcy equation with its advection and domain-motion
drift combined into a single flux. The boundary fluxes are ``J(0) = -h0`` and
``J(1) = s' psi(s)``. Nodes carry dual cells (half cells at the ends), so the
discrete liquid mass changes only through the two boundary fluxes.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import constitutive as cl
from .constitutive import DomainError
from .deformation import grid
from .newton import banded_newton

BANDS = (1, 1)


@dataclass
class DiffusionProblem:
    constants: cl.PhysicalConstants
    rho: cl.DensityLaw
    psi: cl.BoundedLipschitzLaw
    h0: cl.BoundarySource
    n_cells: int
    dt: float
    newton_tol: float = 1e-11
    newton_max_iter: int = 30
    advection_scheme: str = "central"

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if not self.newton_tol > 0.0:
            raise ValueError("newton_tol must be positive")
        if self.advection_scheme not in ("central", "upwind"):
            raise ValueError("advection_scheme must be 'central' or 'upwind'")
        grid(self.n_cells)

    @property
    def h(self) -> float:
        return 1.0 / self.n_cells

    @cached_property
    def weights(self) -> np.ndarray:
        w = np.full(self.n_cells + 1, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w

    @cached_property
    def x_faces(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.h

    def with_dt(self, dt: float) -> "DiffusionProblem":
        return DiffusionProblem(self.constants, self.rho, self.psi, self.h0, self.n_cells,
                                dt, self.newton_tol, self.newton_max_iter,
                                self.advection_scheme)


@dataclass
class PressureStepResult:
    next: np.ndarray
    newton_iters: int
    residual_norm: float


class _PoreSystem:
    def __init__(self, previous, s, s_dot, v_bar, t_new, prob: DiffusionProblem,
                 s_prev=None, source=None):
        if not s > 0.0:
            raise DomainError(f"degenerate liquid domain: s = {s!r}")
        previous = np.asarray(previous, dtype=float)
        if len(previous) != prob.n_cells + 1:
            raise ValueError("pressure grid does not match the problem grid")
        self.prob = prob
        self.s1 = float(s)
        self.s0 = float(s - prob.dt * s_dot) if s_prev is None else float(s_prev)
        if not self.s0 > 0.0:
            raise DomainError(f"degenerate liquid domain: s_prev = {self.s0!r}")
        self.s_dot = float(s_dot)
        v_bar = np.asarray(v_bar, dtype=float)
        self.a = 0.5 * (v_bar[1:] + v_bar[:-1]) - s_dot * prob.x_faces
        self.D = prob.constants.kappa / (self.s1 * prob.h)
        self.old_mass = self.s0 * prob.rho(previous)
        self.flux_left = -float(prob.h0(t_new))
        self.flux_right = self.s_dot * float(prob.psi(self.s1))
        self.source = None if source is None else np.asarray(source, dtype=float)
        self.upwind = prob.advection_scheme == "upwind"

    def __call__(self, P):
        prob = self.prob
        w, dt = prob.weights, prob.dt
        r = prob.rho(P)
        dr = prob.rho.derivative(P)
        a = self.a
        if self.upwind:
            pos = a >= 0.0
            r_face = np.where(pos, r[:-1], r[1:])
            dJ_left = np.where(pos, a * dr[:-1], 0.0)   # dJ_{j+1/2}/dP_j
            dJ_right = np.where(pos, 0.0, a * dr[1:])   # dJ_{j+1/2}/dP_{j+1}
        else:
            r_face = 0.5 * (r[:-1] + r[1:])
            dJ_left = 0.5 * a * dr[:-1]
            dJ_right = 0.5 * a * dr[1:]
        J = a * r_face - self.D * np.diff(P)
        dJ_left = dJ_left + self.D
        dJ_right = dJ_right - self.D

        G = w * (self.s1 * r - self.old_mass) / dt
        G[:-1] += J
        G[1:] -= J
        G[0] -= self.flux_left
        G[-1] += self.flux_right
        if self.source is not None:
            G -= self.s1 * w * self.source

        ab = np.zeros((3, len(P)))
        ab[1] = w * self.s1 * dr / dt
        ab[1, :-1] += dJ_left
        ab[1, 1:] -= dJ_right
        ab[0, 1:] = dJ_right     # (j, j+1)
        ab[2, :-1] = -dJ_left    # (j+1, j)
        return G, ab, ab[1].copy()


def diffusion_residual(candidate, previous, s: float, s_dot: float, v_bar, t_new: float,
                       prob: DiffusionProblem, s_prev: float | None = None,
                       source=None) -> np.ndarray:
    """Nodal residual of the backward-Euler pressure step, in equation units.

    ``s_prev`` is the domain length at the start of the step; when omitted it
    is reconstructed as ``s - dt * s_dot``. ``source`` optionally adds a
    manufactured right-hand side.
    """
    system = _PoreSystem(previous, s, s_dot, v_bar, t_new, prob, s_prev, source)
    G, _, _ = system(np.asarray(candidate, dtype=float))
    return G / (system.s1 * prob.weights)


def diffusion_jacobian_dense(candidate, previous, s, s_dot, v_bar, t_new, prob,
                             s_prev=None) -> np.ndarray:
    """Dense Jacobian of the (weighted) residual, for testing."""
    system = _PoreSystem(previous, s, s_dot, v_bar, t_new, prob, s_prev)
    _, ab, _ = system(np.asarray(candidate, dtype=float))
    n = ab.shape[1]
    J = np.diag(ab[1])
    J[np.arange(n - 1), np.arange(1, n)] = ab[0, 1:]
    J[np.arange(1, n), np.arange(n - 1)] = ab[2, :-1]
    return J


def diffusion_weighted_residual(candidate, previous, s, s_dot, v_bar, t_new, prob,
                                s_prev=None) -> np.ndarray:
    system = _PoreSystem(previous, s, s_dot, v_bar, t_new, prob, s_prev)
    return system(np.asarray(candidate, dtype=float))[0]


def step_diffusion(previous, s: float, s_dot: float, v_bar, t_new: float,
                   prob: DiffusionProblem, s_prev: float | None = None,
                   source=None, guess=None) -> PressureStepResult:
    system = _PoreSystem(previous, s, s_dot, v_bar, t_new, prob, s_prev, source)
    x0 = np.array(previous if guess is None else guess, dtype=float)
    res = banded_newton(system, x0, BANDS, prob.newton_tol, prob.newton_max_iter)
    return PressureStepResult(res.x, res.iterations, res.residual_norm)


def liquid_mass(p_bar, s: float, rho: cl.DensityLaw, psi_hat_of_s: float) -> float:
    """Total liquid: ``s * int_0^1 rho(p_bar) dx`` (trapezoid) plus the pore store."""
    if not s > 0.0:
        raise DomainError("domain length s must be positive")
    w = rho(np.asarray(p_bar, dtype=float))
    h = 1.0 / (len(w) - 1)
    integral = h * (float(np.sum(w)) - 0.5 * (w[0] + w[-1]))
    return s * integral + float(psi_hat_of_s)
