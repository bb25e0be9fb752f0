"""Grid snapshots of the beam deformation and the changes of variables.

Three coordinates are in play: material ``x`` in [0, 1] (beam grid), physical
``y`` in [0, s(t)] (liquid domain) and rescaled ``y/s`` in [0, 1] (pore grid).
All interpolation is piecewise linear, which keeps the inverse map monotone.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constitutive import DomainError

MIN_CELLS = 8


def grid(n_cells: int) -> np.ndarray:
    if n_cells < MIN_CELLS:
        raise ValueError(f"grids need at least {MIN_CELLS} cells, got {n_cells}")
    return np.linspace(0.0, 1.0, n_cells + 1)


class SingularConfigurationError(DomainError):
    """A deformation lost strict monotonicity (some cell gradient <= 0)."""


@dataclass(frozen=True)
class DeformationSnapshot:
    """Nodal deformation ``u`` and velocity ``v = u_t`` on a uniform grid over [0, 1]."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if u.shape != v.shape or u.ndim != 1:
            raise ValueError("u and v must be 1-D arrays of equal length")
        if len(u) < MIN_CELLS + 1:
            raise ValueError(f"grids need at least {MIN_CELLS} cells")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise ValueError("snapshot contains non-finite values")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def n_cells(self) -> int:
        return len(self.u) - 1

    @property
    def h(self) -> float:
        return 1.0 / self.n_cells

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, len(self.u))

    @property
    def s(self) -> float:
        return float(self.u[-1])

    @property
    def s_dot(self) -> float:
        return float(self.v[-1])

    @property
    def gradients(self) -> np.ndarray:
        """Cell gradients ``(u_{j+1} - u_j)/h``."""
        return np.diff(self.u) * self.n_cells

    @property
    def min_strain(self) -> float:
        return float(self.gradients.min())

    def is_monotone(self) -> bool:
        return bool(self.min_strain > 0.0)

    def require_monotone(self):
        g = self.gradients
        if not np.all(g > 0.0):
            j = int(np.argmin(g))
            raise SingularConfigurationError(
                f"cell {j} has gradient {g[j]:.3e} <= 0; deformation not invertible"
            )

    @classmethod
    def from_functions(cls, u_fn, v_fn, n_cells: int) -> "DeformationSnapshot":
        x = grid(n_cells)
        return cls(np.asarray(u_fn(x), dtype=float) * np.ones_like(x),
                   np.asarray(v_fn(x), dtype=float) * np.ones_like(x))


def invert_deformation(snap: DeformationSnapshot, y):
    """Material point ``x`` with ``u(x) = y``; points beyond ``s`` map to 1.

    Vectorised over ``y``. Uses a binary search over cells followed by a
    linear solve inside the bracketing cell.
    """
    y = np.asarray(y, dtype=float)
    if np.any(y < 0.0):
        raise DomainError("positions in the liquid domain must be >= 0")
    u = snap.u
    n = snap.n_cells
    j = np.searchsorted(u, y, side="right") - 1
    j = np.clip(j, 0, n - 1)
    du = u[j + 1] - u[j]
    frac = np.clip((y - u[j]) / du, 0.0, 1.0)
    x = (j + frac) / n
    x = np.where(y >= u[-1], 1.0, x)
    x = np.where(y <= 0.0, 0.0, x)
    return x if x.ndim else float(x)


def pull_back_pressure(p_bar, snap: DeformationSnapshot) -> np.ndarray:
    """Pressure at material points, ``p_hat(x) = p_bar(u(x)/s)``.

    ``p_bar`` lives on its own uniform grid over the rescaled domain; the
    result lives on the snapshot grid.
    """
    p_bar = np.asarray(p_bar, dtype=float)
    s = snap.s
    if not s > 0.0:
        raise DomainError("domain length s must be positive")
    ref = snap.u / s
    ref[-1] = 1.0
    return np.interp(ref, np.linspace(0.0, 1.0, len(p_bar)), p_bar)


def pull_back_velocity(snap: DeformationSnapshot, n_cells: int | None = None) -> np.ndarray:
    """Velocity on the rescaled grid, ``v_bar(x) = v(u^{-1}(s x))``.

    ``n_cells`` selects the output grid (defaults to the snapshot grid).
    """
    s = snap.s
    if not s > 0.0:
        raise DomainError("domain length s must be positive")
    n_out = snap.n_cells if n_cells is None else n_cells
    xo = np.linspace(0.0, 1.0, n_out + 1)
    xm = invert_deformation(snap, s * xo)
    out = np.interp(xm, snap.x, snap.v)
    out[0] = snap.v[0]
    out[-1] = snap.s_dot
    return out
