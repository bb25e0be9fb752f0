"""Damped Newton iteration for banded nonlinear systems."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import solve_banded


class StepError(RuntimeError):
    """A time step failed to converge; carries the last residual norm."""

    def __init__(self, message: str, residual_norm: float = float("nan")):
        super().__init__(message)
        self.residual_norm = residual_norm


@dataclass
class NewtonResult:
    x: np.ndarray
    iterations: int
    residual_norm: float


def scaled_norm(res: np.ndarray, diag: np.ndarray) -> float:
    # Jacobi-scaled residual, i.e. an estimate of the Newton correction size
    return float(np.max(np.abs(res / diag))) if len(res) else 0.0


def banded_newton(
    system: Callable[[np.ndarray], tuple],
    x0: np.ndarray,
    bands: tuple[int, int],
    tol: float,
    max_iter: int,
    feasible: Callable[[np.ndarray], bool] | None = None,
    on_infeasible: Callable[[np.ndarray], Exception] | None = None,
    max_halvings: int = 40,
) -> NewtonResult:
    """Solve ``F(x) = 0`` where ``system(x)`` returns ``(F, ab, diag)``.

    ``ab`` is the Jacobian in :func:`scipy.linalg.solve_banded` layout and
    ``diag`` its main diagonal (used to scale the convergence test). When
    ``feasible`` is given, each step is halved until the trial point is
    feasible; ``on_infeasible`` builds the exception raised if that fails.
    """
    x = np.array(x0, dtype=float)
    F, ab, diag = system(x)
    norm = scaled_norm(F, diag)
    it = 0
    while norm > tol:
        if it >= max_iter:
            raise StepError(
                f"Newton did not converge in {max_iter} iterations "
                f"(scaled residual {norm:.3e})",
                norm,
            )
        dx = solve_banded(bands, ab, -F, check_finite=False)
        lam = 1.0
        for _ in range(max_halvings):
            trial = x + lam * dx
            if feasible is None or feasible(trial):
                break
            lam *= 0.5
        else:
            if on_infeasible is not None:
                raise on_infeasible(trial)
            raise StepError("line search could not keep the iterate feasible", norm)
        # backtrack a little on the residual, but keep the step if nothing helps
        best = None
        for _ in range(8):
            F_t, ab_t, diag_t = system(trial)
            n_t = scaled_norm(F_t, diag_t)
            if best is None or n_t < best[0]:
                best = (n_t, trial, F_t, ab_t, diag_t)
            if n_t < norm or not np.isfinite(norm):
                break
            lam *= 0.5
            trial = x + lam * dx
            if feasible is not None and not feasible(trial):
                break
        norm, x, F, ab, diag = best
        it += 1
        if not np.isfinite(norm):
            raise StepError("Newton produced a non-finite residual", norm)
    return NewtonResult(x, it, norm)
