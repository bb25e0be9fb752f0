"""Runtime checks of the interpolation and strain lemmas and of the balance laws.

Every check returns an :class:`InvariantEntry`; ``margin >= 0`` means pass.
For lower-bound checks ``margin = measured - bound``, for upper-bound checks
``margin = bound - measured``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

SLACK_FACTOR = 10.0


@dataclass(frozen=True)
class InvariantEntry:
    name: str
    passed: bool
    measured: float
    bound: float
    margin: float
    kind: str = "lower"
    detail: str = ""

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["status"] = self.status
        return d


def _entry(name, measured, bound, kind, detail=""):
    margin = measured - bound if kind == "lower" else bound - measured
    return InvariantEntry(name, bool(margin >= 0.0), float(measured), float(bound),
                          float(margin), kind, detail)


# --------------------------------------------------------------------------
# grid-function norms (piecewise-linear interpolant on a uniform grid)
# --------------------------------------------------------------------------

def l2_norm(z) -> float:
    """Exact L2 norm of the piecewise-linear interpolant."""
    z = np.asarray(z, dtype=float)
    h = 1.0 / (len(z) - 1)
    a, b = z[:-1], z[1:]
    return math.sqrt(h * float(np.sum(a * a + a * b + b * b)) / 3.0)


def derivative_l2_norm(z) -> float:
    z = np.asarray(z, dtype=float)
    n = len(z) - 1
    return math.sqrt(float(np.sum(np.diff(z) ** 2)) * n)


def second_derivative_nodes(z) -> np.ndarray:
    """Nodal second differences; end values by linear extrapolation."""
    z = np.asarray(z, dtype=float)
    n = len(z) - 1
    d2 = np.empty_like(z)
    d2[1:-1] = (z[2:] - 2.0 * z[1:-1] + z[:-2]) * n * n
    d2[0] = 2.0 * d2[1] - d2[2]
    d2[-1] = 2.0 * d2[-2] - d2[-3]
    return d2


def x_norm(z) -> float:
    """Discrete ``|z|_X`` with the full H2 inner product."""
    d2 = second_derivative_nodes(z)
    h = 1.0 / (len(d2) - 1)
    w = np.full(len(d2), h)
    w[0] = w[-1] = 0.5 * h
    return math.sqrt(l2_norm(z) ** 2 + derivative_l2_norm(z) ** 2 + float(np.sum(w * d2 * d2)))


def inverse_square_strain_integral(z) -> float:
    """``int_0^1 1/|z_x|^2`` for the piecewise-linear interpolant."""
    z = np.asarray(z, dtype=float)
    n = len(z) - 1
    g = np.diff(z) * n
    return float(np.sum(1.0 / (g * g))) / n


def strain_lower_bound(r1: float, r2: float) -> float:
    """``(r2 / sqrt 2) exp(-r1 r2^2)``."""
    return r2 / math.sqrt(2.0) * math.exp(-r1 * r2 * r2)


def lemma_strain_bound(u) -> tuple[float, float, float]:
    """Return ``(bound, r1, r2)`` computed from the state itself."""
    r1 = inverse_square_strain_integral(u)
    r2 = x_norm(u)
    return strain_lower_bound(r1, r2), r1, r2


# --------------------------------------------------------------------------
# lemma checks
# --------------------------------------------------------------------------

def check_strain_bound(snap) -> InvariantEntry:
    u = np.asarray(getattr(snap, "u", snap), dtype=float)
    n = len(u) - 1
    g = np.diff(u) * n
    measured = float(g.min())
    if measured <= 0.0:
        return InvariantEntry("strain_bound", False, measured, 0.0, measured, "lower",
                              "deformation is not strictly monotone")
    bound, r1, r2 = lemma_strain_bound(u)
    slack = SLACK_FACTOR * r2 / n**2
    return _entry("strain_bound", measured, bound - slack, "lower",
                  f"r1={r1:.6g} r2={r2:.6g}")


def check_gn_inequality(z, vanishes_at_zero: bool) -> InvariantEntry:
    """Sup norm against the interpolation bound of the Gagliardo-Nirenberg type."""
    z = np.asarray(z, dtype=float)
    n = len(z) - 1
    lhs = float(np.max(np.abs(z)))
    zh, zxh = l2_norm(z), derivative_l2_norm(z)
    rhs = 2.0 * math.sqrt(zxh * zh)
    if not vanishes_at_zero:
        rhs += 2.0 * zh
    slack = SLACK_FACTOR * (zh + zxh) / n**2
    name = "gn_inequality_z0" if vanishes_at_zero else "gn_inequality"
    return _entry(name, lhs, rhs + slack, "upper")


# --------------------------------------------------------------------------
# run-history checks
# --------------------------------------------------------------------------

def check_mass_series(report, h0=None, companion=None, rel_tol: float = 1e-3) -> InvariantEntry:
    """Liquid balance along a run.

    With ``h0`` zero the drift ``max |M(t) - M(0)|`` is compared with an
    order bound ``C (dt + h^2)`` whose constant comes from ``companion``, a
    coarser run of the same scenario; without a companion the bound is
    ``rel_tol * M(0)``. With ``h0`` nonzero the drift is measured against the
    exact inflow ``-int_0^t h0``.
    """
    mass = report.column("mass")

    def deviation(rep):
        tt, mm = rep.column("t"), rep.column("mass")
        target = np.zeros_like(tt)
        if h0 is not None and not h0.is_zero:
            target = -np.array([h0.integral(0.0, ti) for ti in tt])
        return float(np.max(np.abs(mm - mm[0] - target)))

    measured = deviation(report)
    scale = max(abs(float(mass[0])), 1e-300)
    if companion is not None:
        def resolution(rep):
            return rep.dt + rep.h_pore**2
        C = deviation(companion) / resolution(companion)
        bound = 1.25 * C * resolution(report) + 1e-12 * scale
        detail = f"order bound from companion run, C={C:.3e}"
    else:
        bound = rel_tol * scale
        detail = f"relative tolerance {rel_tol:g}"
    return _entry("mass_balance", measured, bound, "upper", detail)


def check_energy_series(report, slack: float | None = None) -> InvariantEntry:
    """``E(t) + k_v int |u_tx|^2 <= E(0) + work of the pressure load``."""
    E = report.column("energy")
    D = np.asarray(report.dissipation)
    W = np.asarray(report.load_work)
    excess = E + D - E[0] - W
    if slack is None:
        slack = max(1e-9, report.dt**2) * (1.0 + abs(float(E[0])))
    measured = float(np.max(excess))
    return _entry("energy_inequality", measured, slack, "upper",
                  "max of E(t) + dissipation - E(0) - work")


def check_energy_monotone(report, slack: float = 1e-12) -> InvariantEntry:
    E = report.column("energy")
    inc = float(np.max(np.diff(E))) if len(E) > 1 else 0.0
    return _entry("energy_nonincreasing", inc, slack * (1.0 + abs(float(E[0]))), "upper")


def check_min_strain(report, floor: float) -> InvariantEntry:
    ms = report.column("min_strain")
    return _entry("min_strain_floor", float(ms.min()), floor, "lower")


def check_strain_series(report) -> InvariantEntry:
    """Min strain stays above the lemma bound at every recorded state."""
    ms = report.column("min_strain")
    sb = report.column("strain_bound")
    idx = int(np.argmin(ms - sb))
    slack = SLACK_FACTOR * report.h_beam**2
    return _entry("strain_bound_series", float(ms[idx]), float(sb[idx]) - slack, "lower",
                  f"worst step {idx}")
