import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from foamswell.constitutive import DomainError
from foamswell.deformation import (DeformationSnapshot, SingularConfigurationError,
                                   invert_deformation, pull_back_pressure, pull_back_velocity)

N = 32
X = np.linspace(0.0, 1.0, N + 1)


def snap(u, v=None):
    return DeformationSnapshot(u, np.zeros_like(u) if v is None else v)


def smooth_monotone(seed, n=N):
    rng = np.random.default_rng(seed)
    x = np.linspace(0, 1, n + 1)
    a = rng.uniform(-0.25, 0.25, 3)
    u = x * rng.uniform(0.5, 2.0) + sum(a[j] * np.sin((j + 1) * np.pi * x) / (j + 1) / np.pi
                                        for j in range(3))
    return u


def test_invert_identity():
    assert invert_deformation(snap(X.copy()), 0.37) == pytest.approx(0.37)


def test_invert_linear_stretch():
    assert invert_deformation(snap(2 * X), 1.0) == pytest.approx(0.5)


def test_invert_beyond_s_returns_one():
    assert invert_deformation(snap(2 * X), 3.0) == 1.0


def test_invert_zero_and_negative():
    assert invert_deformation(snap(2 * X), 0.0) == 0.0
    with pytest.raises(DomainError):
        invert_deformation(snap(2 * X), -0.1)


@given(st.integers(0, 10_000))
def test_round_trip_at_nodes(seed):
    s = snap(smooth_monotone(seed))
    np.testing.assert_allclose(invert_deformation(s, s.u), X, atol=1e-12)


@given(st.integers(0, 10_000))
def test_inverse_is_nondecreasing(seed):
    s = snap(smooth_monotone(seed))
    y = np.sort(np.random.default_rng(seed).uniform(0, 1.2 * s.s, 200))
    assert np.all(np.diff(invert_deformation(s, y)) >= 0.0)


def test_snapshot_invariants():
    s = snap(2 * X, 0.5 * X)
    assert s.s == 2.0 and s.s_dot == 0.5 and s.h == 1 / N
    assert s.is_monotone() and s.min_strain == pytest.approx(2.0)
    bad = X.copy()
    bad[5] = bad[4]
    with pytest.raises(SingularConfigurationError):
        snap(bad).require_monotone()
    with pytest.raises(ValueError):
        DeformationSnapshot(np.zeros(4), np.zeros(4))


def test_pressure_affine_deformation_is_identity():
    p = np.cos(3 * X) + X
    np.testing.assert_allclose(pull_back_pressure(p, snap(1.7 * X)), p, atol=1e-14)


def test_pressure_constant_field():
    s = snap(smooth_monotone(3))
    np.testing.assert_allclose(pull_back_pressure(np.full(N + 1, 2.5), s), 2.5)


def test_pressure_endpoint_pinned():
    s = snap(smooth_monotone(5))
    p = np.sin(X) + 0.3
    ph = pull_back_pressure(p, s)
    assert ph[-1] == p[-1] and ph[0] == p[0]


def test_pressure_quadratic_u_matches_dense_oracle():
    errs = []
    for n in (32, 64, 128):
        x = np.linspace(0, 1, n + 1)
        u = x + 0.3 * x**2
        s_ = u[-1]
        xf = np.linspace(0, 1, 10 * n + 1)
        p_dense = np.sin(2 * xf)            # oracle grid for p_bar, composed directly
        p_coarse = np.sin(2 * x)
        exact = np.interp(u / s_, xf, p_dense)
        errs.append(np.max(np.abs(pull_back_pressure(p_coarse, snap(u)) - exact)))
    assert errs[0] / errs[1] > 3.0 and errs[1] / errs[2] > 3.0


def test_velocity_zero():
    np.testing.assert_array_equal(pull_back_velocity(snap(smooth_monotone(1))), 0.0)


def test_velocity_affine_case():
    np.testing.assert_allclose(pull_back_velocity(snap(1.5 * X, 0.4 * X)), 0.4 * X, atol=1e-14)


def test_velocity_endpoints_and_grid():
    u = smooth_monotone(2)
    v = np.sin(np.pi * X / 2) * 0.2
    vb = pull_back_velocity(snap(u, v), n_cells=16)
    assert len(vb) == 17 and vb[0] == 0.0 and vb[-1] == v[-1]


def test_velocity_generic_matches_dense_oracle():
    errs = []
    for n in (32, 64, 128):
        x = np.linspace(0, 1, n + 1)
        uf = lambda z: z + 0.2 * np.sin(np.pi * z)  # noqa: E731
        vf = lambda z: np.sin(np.pi * z / 2)  # noqa: E731
        xf = np.linspace(0, 1, 10 * n + 1)
        s_ = uf(1.0)
        exact = np.interp(np.interp(s_ * x, uf(xf), xf), xf, vf(xf))
        errs.append(np.max(np.abs(pull_back_velocity(snap(uf(x), vf(x))) - exact)))
    assert errs[0] / errs[1] > 3.0 and errs[1] / errs[2] > 3.0
