import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from foamswell import constitutive as cl
from foamswell.constitutive import DomainError
from foamswell.newton import StepError
from foamswell.pore import (DiffusionProblem, diffusion_jacobian_dense, diffusion_residual,
                            diffusion_weighted_residual, liquid_mass, step_diffusion)
from foamswell.verification import PoreMMS

C = cl.PhysicalConstants()
LIN = cl.DensityLaw(a=1.0, b=0.0, w0=0.0, family="linear")
TANH = cl.DensityLaw(a=1.0, b=0.5, family="tanh-augmented")
ZERO = cl.BoundedLipschitzLaw(0.0)
NO_FLUX = cl.BoundarySource.constant(0.0)


def prob(n, dt, rho=LIN, psi=ZERO, h0=NO_FLUX, **kw):
    return DiffusionProblem(C, rho, psi, h0, n, dt, **kw)


def test_constant_state_residual_vanishes():
    n = 32
    p = np.full(n + 1, 1.7)
    r = diffusion_residual(p, p, 1.0, 0.0, np.zeros(n + 1), 0.1, prob(n, 0.01, TANH))
    assert np.max(np.abs(r)) <= 1e-14


def test_heat_mode_residual_converges():
    errs = []
    for n in (32, 64, 128):
        dt = 1e-6
        x = np.linspace(0, 1, n + 1)
        t = 0.05
        exact = lambda tt: np.cos(np.pi * x) * math.exp(-math.pi**2 * tt)  # noqa: E731
        r = diffusion_residual(exact(t + dt), exact(t), 1.0, 0.0, np.zeros(n + 1), t + dt,
                               prob(n, dt))
        errs.append(np.max(np.abs(r)))
    assert errs[0] / errs[1] > 3.0 and errs[1] / errs[2] > 3.0


def test_mms_residual_converges():
    mms = PoreMMS()
    errs = []
    for n in (32, 64, 128):
        dt = 1.0 / n**2
        x = np.linspace(0, 1, n + 1)
        t = 0.1
        r = diffusion_residual(mms.p(t + dt, x), mms.p(t, x), mms.s(t + dt), mms.growth,
                               mms.growth * x, t + dt, prob(n, dt, mms.rho),
                               s_prev=mms.s(t), source=mms.source(t + dt, x))
        errs.append(np.max(np.abs(r[1:-1])))
    assert errs[0] / errs[1] > 3.0 and errs[1] / errs[2] > 3.0


def test_step_steady_constant():
    n = 64
    p = np.full(n + 1, 0.4)
    res = step_diffusion(p, 1.0, 0.0, np.zeros(n + 1), 0.1, prob(n, 0.1, TANH))
    assert res.newton_iters <= 1
    np.testing.assert_allclose(res.next, p, atol=1e-13)


def test_constant_pressure_remains_constant_over_many_steps():
    n = 32
    P = prob(n, 0.05, TANH)
    p = np.full(n + 1, -0.3)
    for k in range(40):
        p = step_diffusion(p, 1.3, 0.0, np.zeros(n + 1), (k + 1) * 0.05, P).next
    np.testing.assert_allclose(p, -0.3, atol=1e-12)


def test_heat_decay_rate():
    n, dt, T = 128, 1e-4, 0.05
    x = np.linspace(0, 1, n + 1)
    P = prob(n, dt)
    p = np.cos(np.pi * x)
    steps = int(round(T / dt))
    for k in range(steps):
        p = step_diffusion(p, 1.0, 0.0, np.zeros(n + 1), (k + 1) * dt, P).next
    amp = np.sum(p * np.cos(np.pi * x) * P.weights) / np.sum(np.cos(np.pi * x) ** 2 * P.weights)
    rate = -math.log(amp) / T
    assert rate == pytest.approx(C.kappa * math.pi**2, rel=0.02)


def test_nonlinear_density_first_order_in_time():
    n, T = 32, 0.2
    x = np.linspace(0, 1, n + 1)

    def run(dt):
        P = prob(n, dt, TANH)
        p = 0.8 * np.cos(np.pi * x)
        for k in range(int(round(T / dt))):
            p = step_diffusion(p, 1.0, 0.0, np.zeros(n + 1), (k + 1) * dt, P).next
        return p

    ref = run(0.0025 / 4)
    e1 = np.max(np.abs(run(0.01) - ref))
    e2 = np.max(np.abs(run(0.005) - ref))
    assert 1.5 < e1 / e2 < 3.0


@given(st.integers(0, 10_000), st.sampled_from(["central", "upwind"]))
def test_jacobian_matches_finite_differences(seed, scheme):
    rng = np.random.default_rng(seed)
    n = 16
    x = np.linspace(0, 1, n + 1)
    P = prob(n, 0.01, TANH, cl.BoundedLipschitzLaw(0.3), cl.BoundarySource.constant(0.2),
             advection_scheme=scheme)
    prev = rng.normal(size=n + 1)
    cand = prev + 0.1 * rng.normal(size=n + 1)
    vb = 0.5 * rng.normal(size=n + 1) * x
    J = diffusion_jacobian_dense(cand, prev, 1.2, 0.3, vb, 0.1, P)
    eps = 1e-7
    for j in range(n + 1):
        cp, cm = cand.copy(), cand.copy()
        cp[j] += eps
        cm[j] -= eps
        col = (diffusion_weighted_residual(cp, prev, 1.2, 0.3, vb, 0.1, P)
               - diffusion_weighted_residual(cm, prev, 1.2, 0.3, vb, 0.1, P)) / (2 * eps)
        scale = np.max(np.abs(J[:, j]))
        assert np.max(np.abs(col - J[:, j])) <= 1e-5 * scale


@pytest.mark.parametrize("scheme", ["central", "upwind"])
def test_discrete_mass_budget_is_exact(scheme):
    n, dt = 32, 0.01
    rng = np.random.default_rng(1)
    x = np.linspace(0, 1, n + 1)
    psi = cl.BoundedLipschitzLaw(0.3, 1.0, 0.0)
    h0 = cl.BoundarySource.constant(0.4)
    P = prob(n, dt, TANH, psi, h0, advection_scheme=scheme)
    p = 0.5 * np.cos(np.pi * x)
    s0, s1 = 1.0, 1.0 + dt * 0.7
    vb = 0.7 * x + 0.1 * np.sin(np.pi * x) * rng.normal()
    res = step_diffusion(p, s1, 0.7, vb, dt, P, s_prev=s0)
    m0 = liquid_mass(p, s0, TANH, 0.0)
    m1 = liquid_mass(res.next, s1, TANH, 0.0)
    expected = -dt * (h0(dt) + 0.7 * psi(s1))
    assert m1 - m0 == pytest.approx(expected, abs=1e-11)


def test_flux_sign_convention_mass_decreases_with_positive_h0():
    n, dt = 32, 0.01
    P = prob(n, dt, TANH, h0=cl.BoundarySource.constant(0.5))
    p = np.zeros(n + 1)
    m = [liquid_mass(p, 1.0, TANH, 0.0)]
    for k in range(10):
        p = step_diffusion(p, 1.0, 0.0, np.zeros(n + 1), (k + 1) * dt, P).next
        m.append(liquid_mass(p, 1.0, TANH, 0.0))
    assert np.all(np.diff(m) < 0)
    assert m[-1] - m[0] == pytest.approx(-0.5 * 0.1, rel=1e-10)
    # kappa/s p_x(0) = h0 > 0: pressure increases away from the left end
    assert p[1] > p[0]


def test_degenerate_domain_rejected():
    n = 16
    p = np.zeros(n + 1)
    with pytest.raises(DomainError):
        diffusion_residual(p, p, 0.0, 0.0, np.zeros(n + 1), 0.1, prob(n, 0.1))
    with pytest.raises(DomainError):
        liquid_mass(p, -1.0, LIN, 0.0)


def test_newton_cap():
    n = 16
    P = prob(n, 1.0, TANH, newton_max_iter=1, newton_tol=1e-15)
    p = 3.0 * np.cos(np.pi * np.linspace(0, 1, n + 1))
    with pytest.raises(StepError):
        step_diffusion(p, 1.0, 0.0, np.zeros(n + 1), 1.0, P)


def test_liquid_mass_examples():
    assert liquid_mass(np.full(17, 2.0), 0.5, LIN, 0.0) == pytest.approx(1.0)
    rho = cl.DensityLaw(a=1.0, b=0.0, w0=0.7, family="linear")
    assert liquid_mass(np.zeros(17), 1.0, rho, 0.25) == pytest.approx(0.95)


def test_liquid_mass_quadrature_converges():
    def mass(n):
        x = np.linspace(0, 1, n + 1)
        return liquid_mass(np.sin(2 * x) + 0.2, 1.3, TANH, 0.0)
    ref = mass(2560)
    assert abs(mass(32) - ref) / abs(mass(64) - ref) > 3.0


def test_problem_validation():
    with pytest.raises(ValueError):
        prob(16, -1.0)
    with pytest.raises(ValueError):
        prob(16, 0.1, advection_scheme="weno")
