"""Picard coupling of the beam and pore-pressure solvers, and whole runs.

Each time step alternates: beam step with the current pressure guess, pull
the velocity back to the rescaled grid, pressure step on the new domain,
pull the pressure back to material points, relax. The loop stops once the
pressure load seen by the beam no longer changes, at which point another
sweep would reproduce the same ``(u, p_bar)``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, fields

import numpy as np

from .beam import BeamProblem, beam_energy, step_beam
from .deformation import DeformationSnapshot, pull_back_pressure, pull_back_velocity
from .diagnostics import lemma_strain_bound
from .pore import DiffusionProblem, liquid_mass, step_diffusion

log = logging.getLogger(__name__)


class CouplingError(RuntimeError):
    def __init__(self, message: str, history=()):
        super().__init__(message)
        self.history = list(history)


class SimulationError(RuntimeError):
    """A step failed; ``report`` holds every row completed before the failure."""

    def __init__(self, message: str, report: "RunReport", cause: Exception):
        super().__init__(message)
        self.report = report
        self.cause = cause


@dataclass(frozen=True)
class CouplingConfig:
    picard_tol: float = 1e-8
    picard_max_iter: int = 30
    relaxation: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.relaxation <= 1.0:
            raise ValueError("relaxation must lie in (0, 1]")
        if not self.picard_tol > 0.0:
            raise ValueError("picard_tol must be positive")
        if self.picard_max_iter < 1:
            raise ValueError("picard_max_iter must be >= 1")


@dataclass(frozen=True)
class CoupledState:
    t: float
    beam: DeformationSnapshot
    p_bar: np.ndarray
    p_hat: np.ndarray
    v_bar: np.ndarray

    @classmethod
    def build(cls, t: float, beam: DeformationSnapshot, p_bar) -> "CoupledState":
        """State with the pull-back caches computed from ``beam`` and ``p_bar``."""
        beam.require_monotone()
        p_bar = np.asarray(p_bar, dtype=float)
        return cls(t, beam, p_bar, pull_back_pressure(p_bar, beam),
                   pull_back_velocity(beam, len(p_bar) - 1))

    def caches_consistent(self, tol: float = 1e-12) -> bool:
        ph = pull_back_pressure(self.p_bar, self.beam)
        vb = pull_back_velocity(self.beam, len(self.p_bar) - 1)
        return bool(np.max(np.abs(ph - self.p_hat)) <= tol
                    and np.max(np.abs(vb - self.v_bar)) <= tol)


@dataclass
class CouplingReport:
    iterations: int
    residuals: list
    changes: list
    relaxation: float
    newton_iters_beam: int
    newton_iters_pore: int
    dissipation: float
    load_work: float


def _rel_change(a, b) -> float:
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))


def coupled_step(state: CoupledState, beam_prob: BeamProblem, diff_prob: DiffusionProblem,
                 cfg: CouplingConfig) -> tuple[CoupledState, CouplingReport]:
    """Advance ``state`` by ``beam_prob.dt`` (the two problems must share dt)."""
    dt = beam_prob.dt
    if not math.isclose(dt, diff_prob.dt, rel_tol=1e-14):
        raise ValueError("beam and pore problems must use the same dt")
    nu = beam_prob.nu
    t_new = state.t + dt
    scale = max(nu.bound, 1e-300)
    omega = cfg.relaxation
    p_guess = state.p_hat
    residuals, changes = [], []
    nb = npr = 0
    prev_u = prev_p = None
    for k in range(1, cfg.picard_max_iter + 1):
        b = step_beam(state.beam, 0.5 * (state.p_hat + p_guess), beam_prob, guess=prev_u)
        snap = b.next
        v_bar = pull_back_velocity(snap, diff_prob.n_cells)
        d = step_diffusion(state.p_bar, snap.s, snap.s_dot, v_bar, t_new, diff_prob,
                           s_prev=state.beam.s, guess=prev_p)
        p_new = pull_back_pressure(d.next, snap)
        nb += b.newton_iters
        npr += d.newton_iters
        if prev_u is not None:
            changes.append(max(_rel_change(snap.u, prev_u), _rel_change(d.next, prev_p)))
        prev_u, prev_p = snap.u, d.next
        res = float(np.max(np.abs(nu(p_new) - nu(p_guess)))) / scale if nu.bound > 0 else 0.0
        residuals.append(res)
        if res <= cfg.picard_tol:
            new_state = CoupledState(t_new, snap, d.next, p_new, v_bar)
            return new_state, CouplingReport(k, residuals, changes, omega, nb, npr,
                                              b.dissipation, b.load_work)
        if k >= 2 and res >= residuals[-2] and omega > 0.5:
            omega = 0.5
            log.info("t=%.6g: Picard residual stalled (%.3e), relaxing to omega=0.5",
                     t_new, res)
        p_guess = omega * p_new + (1.0 - omega) * p_guess
    raise CouplingError(
        f"Picard iteration did not converge in {cfg.picard_max_iter} iterations at "
        f"t={t_new:.6g} (last residual {residuals[-1]:.3e})",
        residuals,
    )


# --------------------------------------------------------------------------
# runs
# --------------------------------------------------------------------------

@dataclass
class StepRecord:
    t: float
    s: float
    s_dot: float
    mass: float
    energy: float
    min_strain: float
    strain_bound: float
    picard_iters: int
    newton_iters_beam: int
    newton_iters_pore: int


COLUMNS = tuple(f.name for f in fields(StepRecord))


@dataclass
class RunReport:
    dt: float
    h_beam: float
    h_pore: float
    rows: list = field(default_factory=list)
    dissipation: list = field(default_factory=list)  # cumulative
    load_work: list = field(default_factory=list)    # cumulative
    meta: dict = field(default_factory=dict)
    error: str | None = None

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)


def record_state(state: CoupledState, beam_prob: BeamProblem, diff_prob: DiffusionProblem,
                 picard: int = 0, nb: int = 0, npr: int = 0) -> StepRecord:
    snap = state.beam
    bound, _, _ = lemma_strain_bound(snap.u)
    return StepRecord(
        t=state.t,
        s=snap.s,
        s_dot=snap.s_dot,
        mass=liquid_mass(state.p_bar, snap.s, diff_prob.rho, diff_prob.psi.primitive(snap.s)),
        energy=beam_energy(snap, beam_prob),
        min_strain=snap.min_strain,
        strain_bound=bound,
        picard_iters=picard,
        newton_iters_beam=nb,
        newton_iters_pore=npr,
    )


def run_simulation(initial: CoupledState, T_final: float, beam_prob: BeamProblem,
                   diff_prob: DiffusionProblem, cfg: CouplingConfig,
                   on_step=None) -> RunReport:
    """March from ``initial`` to ``T_final``; the last step is shortened to land on it.

    ``on_step(index, state)`` is called after the initial state and after every
    accepted step. A failing step raises :class:`SimulationError` carrying the
    partial report.
    """
    if not T_final > initial.t:
        raise ValueError("T_final must exceed the initial time")
    dt = beam_prob.dt
    n_steps = max(1, math.ceil((T_final - initial.t) / dt - 1e-9))
    report = RunReport(dt=dt, h_beam=beam_prob.h, h_pore=diff_prob.h)
    state = initial
    report.rows.append(record_state(state, beam_prob, diff_prob))
    report.dissipation.append(0.0)
    report.load_work.append(0.0)
    if on_step is not None:
        on_step(0, state)
    bp, dp = beam_prob, diff_prob
    for n in range(1, n_steps + 1):
        step = min(dt, T_final - state.t) if n == n_steps else dt
        if step != bp.dt:
            bp, dp = beam_prob.with_dt(step), diff_prob.with_dt(step)
        try:
            state, rep = coupled_step(state, bp, dp, cfg)
        except Exception as exc:
            report.error = f"{type(exc).__name__}: {exc}"
            raise SimulationError(f"step {n} failed: {exc}", report, exc) from exc
        if n == n_steps:
            state = CoupledState(T_final, state.beam, state.p_bar, state.p_hat, state.v_bar)
        report.rows.append(record_state(state, bp, dp, rep.iterations,
                                        rep.newton_iters_beam, rep.newton_iters_pore))
        report.dissipation.append(report.dissipation[-1] + rep.dissipation)
        report.load_work.append(report.load_work[-1] + rep.load_work)
        if on_step is not None:
            on_step(n, state)
    return report
