import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from foamswell import constitutive as cl
from foamswell.beam import (BeamProblem, InitialDeformation, beam_energy, beam_forces,
                            beam_jacobian_dense, beam_residual, compatibility_residual,
                            compatible_velocity_slope, initial_snapshot, step_beam)
from foamswell.deformation import DeformationSnapshot, SingularConfigurationError
from foamswell.newton import StepError
from foamswell.verification import BeamMMS

C = cl.PhysicalConstants(m=1.0, gamma=0.01, k=1.0, k_v=0.5, kappa=1.0)
PHI = cl.BoundedLipschitzLaw(0.1, 1.0, 0.0)      # phi(1) = 0.1 tanh(1)
NU = cl.BoundedLipschitzLaw(0.1, 1.0, 1.0)       # nu(0) = -0.1 tanh(1)
P_STAR = 0.0
ZERO = cl.BoundedLipschitzLaw(0.0)


def rest(n):
    x = np.linspace(0, 1, n + 1)
    return DeformationSnapshot(x, np.zeros_like(x))


def random_state(seed, n=24):
    rng = np.random.default_rng(seed)
    x = np.linspace(0, 1, n + 1)
    u = x * rng.uniform(0.8, 1.5) + 0.05 * np.sin(np.pi * x) * rng.normal()
    u += 0.01 * rng.normal(size=n + 1) * x
    u[0] = 0.0
    v = 0.2 * rng.normal(size=n + 1) * x
    return DeformationSnapshot(u, v)


def test_equilibrium_residual_vanishes():
    n = 64
    prob = BeamProblem(C, PHI, NU, n, 1e-3)
    assert NU(P_STAR) + PHI(1.0) == pytest.approx(0.0, abs=1e-16)
    r = beam_residual(rest(n), rest(n), np.full(n + 1, P_STAR), prob)
    assert np.max(np.abs(r)) <= 1e-12


def test_residual_is_local_in_pressure():
    n, j = 64, 30
    prob = BeamProblem(C, PHI, NU, n, 1e-3)
    p = np.full(n + 1, P_STAR)
    p[j] += 0.3
    r = beam_residual(rest(n), rest(n), p, prob)
    nz = np.nonzero(np.abs(r) > 1e-12)[0]
    assert len(nz) > 0 and nz.min() >= j - 2 and nz.max() <= j + 2


def test_residual_rejects_nonmonotone_candidate():
    n = 32
    prob = BeamProblem(C, PHI, NU, n, 1e-3)
    u = np.linspace(0, 1, n + 1)
    u[5] = u[4] - 0.01
    with pytest.raises(SingularConfigurationError):
        beam_residual(DeformationSnapshot(u, np.zeros_like(u)), rest(n), np.zeros(n + 1), prob)


def test_mms_residual_is_second_order():
    mms = BeamMMS()
    t = 0.3
    errs = []
    for n in (32, 64, 128):
        # small dt isolates the spatial truncation; much smaller hits roundoff in u_tt
        dt = 1e-5
        x = np.linspace(0, 1, n + 1)
        prob = BeamProblem(mms.constants, mms.phi, ZERO, n, dt)
        prev = DeformationSnapshot(mms.u(t, x), mms.v(t, x))
        cand = DeformationSnapshot(mms.u(t + dt, x), mms.v(t + dt, x))
        r = beam_residual(cand, prev, np.zeros(n + 1), prob, load=mms.load(t + dt / 2, x))
        errs.append(np.max(np.abs(r)))
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_step_equilibrium_is_fixed_point():
    n = 64
    prob = BeamProblem(C, PHI, NU, n, 1e-2)
    res = step_beam(rest(n), np.full(n + 1, P_STAR), prob)
    assert res.newton_iters <= 1
    np.testing.assert_allclose(res.next.u, rest(n).u, atol=1e-12)
    np.testing.assert_allclose(res.next.v, 0.0, atol=1e-10)
    assert res.residual_norm <= prob.newton_tol


@given(st.integers(0, 10_000))
def test_jacobian_matches_finite_differences(seed):
    prob = BeamProblem(C, PHI, NU, 24, 5e-3)
    prev = random_state(seed)
    cand = random_state(seed + 1)
    p = 0.3 * np.cos(np.linspace(0, 3, 25))
    J = beam_jacobian_dense(cand, prev, p, prob)
    eps = 1e-7
    for j in range(1, 25):
        up, um = cand.u.copy(), cand.u.copy()
        up[j] += eps
        um[j] -= eps
        col = (beam_forces(up, prev, p, prob) - beam_forces(um, prev, p, prob)) / (2 * eps)
        scale = max(np.max(np.abs(J[:, j])), 1e-12)
        assert np.max(np.abs(col[1:] - J[1:, j])) <= 1e-5 * scale


def test_discrete_energy_balance_is_exact():
    n = 48
    prob = BeamProblem(C, PHI, NU, n, 2e-3)
    u0 = InitialDeformation(1.0, 0.1)
    snap = initial_snapshot(u0, 0.3, n)
    p = 0.5 * np.cos(np.pi * snap.x)
    for _ in range(50):
        E0 = beam_energy(snap, prob)
        res = step_beam(snap, p, prob)
        snap = res.next
        E1 = beam_energy(snap, prob)
        assert E1 + res.dissipation == pytest.approx(E0 + res.load_work, abs=1e-9)


def test_free_decay_energy_nonincreasing():
    n = 64
    prob = BeamProblem(C, ZERO, ZERO, n, 5e-3)
    snap = initial_snapshot(InitialDeformation(1.0, 0.05), 0.4, n)
    energies = [beam_energy(snap, prob)]
    for _ in range(200):
        snap = step_beam(snap, np.zeros(n + 1), prob).next
        energies.append(beam_energy(snap, prob))
    assert np.all(np.diff(energies) <= 1e-12)
    assert energies[-1] < energies[0]


def test_energy_bounded_by_load_estimate():
    # E(t) <= E(0) + |nu(p)|^2 t / k_v with a frozen load and no swelling force
    n = 64
    nu = cl.BoundedLipschitzLaw(0.2, 1.0, 0.0)
    prob = BeamProblem(C, ZERO, nu, n, 5e-3)
    snap = initial_snapshot(InitialDeformation(1.0, 0.05), 0.1, n)
    p = np.cos(np.pi * snap.x)
    E0 = beam_energy(snap, prob)
    load2 = float(np.mean(nu(p) ** 2))
    for k in range(1, 101):
        snap = step_beam(snap, p, prob).next
        assert beam_energy(snap, prob) <= E0 + load2 * k * prob.dt / C.k_v + 1e-12


def test_energy_closed_forms():
    prob = BeamProblem(C, ZERO, ZERO, 32, 1e-3)
    x = np.linspace(0, 1, 33)
    assert beam_energy(DeformationSnapshot(x, 0 * x), prob) == pytest.approx(0.125)
    assert beam_energy(DeformationSnapshot(2 * x, 0 * x), prob) == pytest.approx(0.53125)


def test_energy_quadrature_converges():
    def energy(n):
        x = np.linspace(0, 1, n + 1)
        u = x + 0.1 * np.sin(np.pi * x)
        v = 0.3 * x * (1 - x)
        return beam_energy(DeformationSnapshot(u, v), BeamProblem(C, PHI, NU, n, 1e-3))
    ref = energy(1280)
    e1, e2 = abs(energy(32) - ref), abs(energy(64) - ref)
    assert e1 / e2 > 3.0


def test_compatibility_helper():
    u0 = InitialDeformation(1.0, 0.1)
    beta = compatible_velocity_slope(u0, 0.5, C, PHI, NU)
    assert abs(compatibility_residual(u0, beta, 0.5, C, PHI, NU)) <= 1e-8
    assert abs(compatibility_residual(u0, beta + 0.1, 0.5, C, PHI, NU)) > 1e-3


def test_initial_deformation_family():
    u0 = InitialDeformation(1.0, 0.2)
    assert u0.uxx(0.0) == 0.0 and abs(u0.uxx(1.0)) < 1e-15
    assert u0.min_gradient == pytest.approx(1 - 0.2 * math.pi)
    assert u0.s0 == pytest.approx(1.0)


def test_newton_cap_raises_step_error():
    n = 32
    prob = BeamProblem(C, PHI, NU, n, 0.5, newton_max_iter=1, newton_tol=1e-14)
    snap = initial_snapshot(InitialDeformation(1.0, 0.2), 1.0, n)
    with pytest.raises(StepError) as info:
        step_beam(snap, np.full(n + 1, 3.0), prob)
    assert info.value.residual_norm > 0


def test_steps_stay_monotone_under_compression():
    n = 64
    nu = cl.BoundedLipschitzLaw(2.0, 1.0, 0.0)
    prob = BeamProblem(C, ZERO, nu, n, 0.05)
    snap = rest(n)
    for _ in range(40):
        snap = step_beam(snap, np.full(n + 1, 2.0), prob).next
        assert snap.min_strain > prob.gradient_floor
    assert snap.s < 0.9


def test_problem_validation():
    with pytest.raises(ValueError):
        BeamProblem(C, PHI, NU, 32, 0.0)
    with pytest.raises(ValueError):
        BeamProblem(C, PHI, NU, 4, 0.1)
