"""Spectral Galerkin solver for the beam problem with frozen pressure load.

Used as an independent oracle for the finite-difference beam solver. The
basis is orthonormal in ``X = {z in H^2(0,1) : z(0) = 0}`` with the full H2
inner product; all integrals use Gauss-Legendre quadrature on [0, 1].
Boundary conditions other than ``z(0) = 0`` are natural, i.e. enforced only
weakly through the variational form.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import LinAlgError, cholesky, solve_triangular

from . import constitutive as cl
from .deformation import SingularConfigurationError
from .newton import StepError


class BasisError(ValueError):
    pass


def _generators(x, n):
    """Values, first and second derivatives of ``x, sin(pi x), ..., sin((n-1) pi x)``."""
    x = np.asarray(x, dtype=float)
    g = np.empty((n, len(x)))
    gx = np.empty_like(g)
    gxx = np.empty_like(g)
    g[0], gx[0], gxx[0] = x, 1.0, 0.0
    for j in range(1, n):
        w = j * np.pi
        g[j] = np.sin(w * x)
        gx[j] = w * np.cos(w * x)
        gxx[j] = -w * w * np.sin(w * x)
    return g, gx, gxx


@dataclass
class GalerkinBasis:
    n: int
    q: int
    coeffs: np.ndarray       # z_i = sum_k coeffs[i, k] * generator_k
    xq: np.ndarray
    wq: np.ndarray
    Z: np.ndarray = field(repr=False)
    Zx: np.ndarray = field(repr=False)
    Zxx: np.ndarray = field(repr=False)
    Z1: np.ndarray = field(repr=False)  # z_i(1)

    def evaluate(self, x, order: int = 0) -> np.ndarray:
        """Basis functions (``order`` 0, 1 or 2 derivatives) at points ``x``."""
        gens = _generators(np.atleast_1d(x), self.n)
        return self.coeffs @ gens[order]

    def inner_x(self, A, Ax, Axx, B, Bx, Bxx):
        w = self.wq
        return (A * w) @ B.T + (Ax * w) @ Bx.T + (Axx * w) @ Bxx.T

    def gram(self) -> np.ndarray:
        return self.inner_x(self.Z, self.Zx, self.Zxx, self.Z, self.Zx, self.Zxx)

    def project(self, f, fx, fxx) -> np.ndarray:
        """X-orthogonal projection coefficients of a function given with derivatives."""
        xq = self.xq
        F = np.atleast_2d(np.broadcast_to(f(xq), xq.shape))
        Fx = np.atleast_2d(np.broadcast_to(fx(xq), xq.shape))
        Fxx = np.atleast_2d(np.broadcast_to(fxx(xq), xq.shape))
        return self.inner_x(self.Z, self.Zx, self.Zxx, F, Fx, Fxx)[:, 0]

    def reconstruct(self, a, x, order: int = 0) -> np.ndarray:
        return np.asarray(a) @ self.evaluate(x, order)


def build_basis(n: int, q: int | None = None) -> GalerkinBasis:
    """X-orthonormal basis from ``{x, sin(j pi x)}`` by Gram-Schmidt (Cholesky form)."""
    if n < 1:
        raise BasisError("need at least one mode")
    if q is None:
        q = max(64, 8 * n)
    if q < 2 * n:
        raise BasisError(f"quadrature order q={q} must be >= 2n={2 * n}")
    t, w = leggauss(q)
    xq, wq = 0.5 * (t + 1.0), 0.5 * w
    g, gx, gxx = _generators(xq, n)
    G = (g * wq) @ g.T + (gx * wq) @ gx.T + (gxx * wq) @ gxx.T
    try:
        L = cholesky(G, lower=True)
    except LinAlgError as exc:
        raise BasisError(f"generating family is rank deficient at n={n}") from exc
    if np.min(np.abs(np.diag(L))) < 1e-10 * np.max(np.abs(np.diag(L))):
        raise BasisError(f"generating family is numerically rank deficient at n={n}")
    C = solve_triangular(L, np.eye(n), lower=True)
    Z, Zx, Zxx = C @ g, C @ gx, C @ gxx
    Z1 = C @ _generators(np.array([1.0]), n)[0][:, 0]
    basis = GalerkinBasis(n, q, C, xq, wq, Z, Zx, Zxx, Z1)
    dev = np.max(np.abs(basis.gram() - np.eye(n)))
    if dev > 1e-10:
        raise BasisError(f"Gram matrix deviates from identity by {dev:.2e}")
    return basis


@dataclass
class GalerkinTrajectory:
    basis: GalerkinBasis
    times: np.ndarray
    a: np.ndarray          # (n_times, n) displacement coefficients
    b: np.ndarray          # (n_times, n) velocity coefficients
    newton_iters: np.ndarray
    residuals: np.ndarray  # weak residual per step, scaled by the Jacobian diagonal as in Newton
    energy_lhs: np.ndarray
    energy_rhs: np.ndarray

    def displacement(self, x, index: int = -1) -> np.ndarray:
        return self.basis.reconstruct(self.a[index], x)

    def velocity(self, x, index: int = -1) -> np.ndarray:
        return self.basis.reconstruct(self.b[index], x)

    def to_grid(self, n_cells: int, index: int = -1):
        x = np.linspace(0.0, 1.0, n_cells + 1)
        return self.displacement(x, index), self.velocity(x, index)


def integrate_galerkin(basis: GalerkinBasis, u0, v0, constants: cl.PhysicalConstants,
                       dt: float, t_final: float, load=None, phi=None, g=None,
                       newton_tol: float = 1e-12, newton_max_iter: int = 30
                       ) -> GalerkinTrajectory:
    """Integrate the mode-n system with the beam solver's time scheme.

    ``u0`` and ``v0`` are triples ``(f, f_x, f_xx)`` of callables; they are
    projected onto the basis in X. ``load(t, x)`` returns the frozen
    pressure stress ``nu(p_hat)`` at points ``x``; ``phi`` is the swelling law
    acting at ``x = 1``; ``g(t)`` an additional end traction.
    """
    c = constants
    B = basis
    w = B.wq
    M = c.m * (B.Z * w) @ B.Z.T
    K = c.gamma * (B.Zxx * w) @ B.Zxx.T
    a = B.project(*u0)
    b = B.project(*v0)
    a_init, b_init = a.copy(), b.copy()
    n_steps = max(1, int(np.ceil(t_final / dt - 1e-9)))
    no_phi = phi is None

    def gradients(coef):
        return coef @ B.Zx

    if np.any(gradients(a) <= 0.0):
        raise SingularConfigurationError("projected initial gradient is not positive")

    def load_at(t):
        return np.zeros_like(B.xq) if load is None else np.asarray(load(t, B.xq), float)

    def g_at(t):
        return 0.0 if g is None else float(g(t))

    # energy bookkeeping for the a-priori estimate
    g00 = gradients(a_init)
    e_rhs0 = (0.5 * (b_init @ M @ b_init)
              + 0.5 * (a_init @ K @ a_init)
              + 0.25 * c.k * (float(np.sum(w * g00**2)) + 0.5 * float(np.sum(w / g00**2))))

    def energy_sides(coef, vel, diss_int, forcing_int):
        gx = gradients(coef)
        lhs = (0.5 * (vel @ M @ vel) + 0.5 * (coef @ K @ coef)
               + 0.25 * c.k * (float(np.sum(w * gx**2)) + 0.5 * float(np.sum(w / gx**2)))
               + 0.5 * c.k_v * diss_int)
        rhs = e_rhs0 + 0.25 * c.k * float(np.sum(w * np.abs(gx))) + forcing_int / c.k_v
        return lhs, rhs

    times = [0.0]
    A, Bv = [a.copy()], [b.copy()]
    iters, resids = [0], [0.0]
    lhs0, rhs0 = energy_sides(a, b, 0.0, 0.0)
    e_lhs, e_rhs = [lhs0], [rhs0]
    diss_int = forcing_int = 0.0
    t = 0.0
    for step in range(n_steps):
        h = min(dt, t_final - t) if step == n_steps - 1 else dt
        t_mid = t + 0.5 * h
        nu_q = load_at(t_mid)
        gt = g_at(t_mid)
        g0 = gradients(a)
        s0 = float(a @ B.Z1)

        def system(U):
            vm = (U - a) / h
            acc = 2.0 * (vm - b) / h
            g1 = gradients(U)
            sig = cl.elastic_response_averaged(g0, g1, c.k) + c.k_v * (vm @ B.Zx) + nu_q
            s1 = float(U @ B.Z1)
            R = M @ acc + K @ (0.5 * (U + a)) + (B.Zx * w) @ sig - gt * B.Z1
            dsig = cl.elastic_response_averaged_derivative(g0, g1, c.k) + c.k_v / h
            J = 2.0 * M / h**2 + 0.5 * K + (B.Zx * (w * dsig)) @ B.Zx.T
            if not no_phi:
                R = R + phi.averaged(s0, s1) * B.Z1
                J = J + phi.averaged_derivative(s0, s1) * np.outer(B.Z1, B.Z1)
            return R, J

        U = a + h * b
        if np.any(gradients(U) <= 0.0):
            U = a.copy()
        R, J = system(U)
        norm = float(np.max(np.abs(R / np.diag(J))))
        it = 0
        while norm > newton_tol:
            if it >= newton_max_iter:
                raise StepError(f"Galerkin Newton failed at t={t:.4g} ({norm:.2e})", norm)
            dU = np.linalg.solve(J, -R)
            lam = 1.0
            for _ in range(60):
                if np.all(gradients(U + lam * dU) > 0.0):
                    break
                lam *= 0.5
            else:
                raise SingularConfigurationError(
                    f"gradient positivity lost at a quadrature point near t={t:.4g}")
            U = U + lam * dU
            R, J = system(U)
            norm = float(np.max(np.abs(R / np.diag(J))))
            it += 1
        vm = (U - a) / h
        b = 2.0 * vm - b
        a = U
        t += h
        vmx = vm @ B.Zx
        diss_int += h * float(np.sum(w * vmx**2))
        s1 = float(a @ B.Z1)
        g_eff = gt - (0.0 if no_phi else float(phi(0.5 * (s0 + s1))))
        forcing_int += h * (float(np.sum(w * nu_q**2)) + g_eff**2)
        lhs, rhs = energy_sides(a, b, diss_int, forcing_int)
        times.append(t)
        A.append(a.copy())
        Bv.append(b.copy())
        iters.append(it)
        resids.append(norm)
        e_lhs.append(lhs)
        e_rhs.append(rhs)

    return GalerkinTrajectory(B, np.array(times), np.array(A), np.array(Bv),
                              np.array(iters), np.array(resids),
                              np.array(e_lhs), np.array(e_rhs))
