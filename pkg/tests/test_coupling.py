import json
import math
import runpy

import numpy as np
import pytest

from foamswell.config import parse_config
from foamswell.coupling import (COLUMNS, CouplingConfig, CouplingError, CoupledState,
                                SimulationError, coupled_step, run_simulation)
from foamswell.deformation import pull_back_velocity

from conftest import CONFIGS, ROOT


def load(name, **replace):
    text = (CONFIGS / name).read_text()
    for old, new in replace.items():
        text = text.replace(old, new)
    return parse_config(text)


def small_reference():
    return load("reference.ini", **{"n_beam = 128": "n_beam = 32", "n_pore = 128": "n_pore = 32",
                                    "dt = 1e-3": "dt = 1e-2"})


def test_equilibrium_step_converges_immediately():
    cfg = load("equilibrium.ini", **{"n_beam = 128": "n_beam = 32", "n_pore = 128": "n_pore = 32"})
    beam, pore, cc = cfg.problems()
    s0 = cfg.initial_state()
    s1, rep = coupled_step(s0, beam, pore, cc)
    assert rep.iterations == 1
    np.testing.assert_allclose(s1.beam.u, s0.beam.u, atol=1e-12)
    np.testing.assert_allclose(s1.p_bar, s0.p_bar, atol=1e-12)


def test_decoupled_load_needs_one_iteration():
    cfg = small_reference()
    cfg.material["nu_c"] = 0.0
    beam, pore, cc = cfg.problems()
    state = cfg.initial_state()
    for _ in range(3):
        state, rep = coupled_step(state, beam, pore, cc)
        assert rep.iterations == 1


def test_picard_history_matches_golden():
    picard_history = runpy.run_path(str(ROOT / "scripts" / "golden_picard.py"))["picard_history"]
    golden = json.loads((ROOT / "tests" / "golden" / "picard_desk.json").read_text())
    hist = picard_history()
    assert len(hist) == len(golden)
    for got, want in zip(hist, golden):
        assert got["iterations"] == want["iterations"] <= 10
        np.testing.assert_allclose(got["residuals"], want["residuals"], rtol=1e-6, atol=1e-14)
        assert all(b < a for a, b in zip(got["residuals"], got["residuals"][1:]))


def test_state_caches_are_consistent():
    cfg = small_reference()
    beam, pore, cc = cfg.problems()
    state = cfg.initial_state()
    for _ in range(5):
        state, _ = coupled_step(state, beam, pore, cc)
        assert state.caches_consistent(1e-12)
        assert state.beam.s == state.beam.u[-1]
        assert state.v_bar[-1] == pytest.approx(state.beam.s_dot, abs=1e-14)
        np.testing.assert_allclose(state.v_bar, pull_back_velocity(state.beam, pore.n_cells))


def test_coupled_step_is_deterministic():
    cfg = small_reference()
    beam, pore, cc = cfg.problems()
    s0 = cfg.initial_state()
    a, _ = coupled_step(s0, beam, pore, cc)
    b, _ = coupled_step(s0, beam, pore, cc)
    assert np.array_equal(a.beam.u, b.beam.u) and np.array_equal(a.p_bar, b.p_bar)


@pytest.mark.parametrize("t_final", [0.1, 0.105, 0.25])
def test_run_row_count(t_final):
    cfg = small_reference()
    beam, pore, cc = cfg.problems()
    rep = run_simulation(cfg.initial_state(), t_final, beam, pore, cc)
    assert len(rep.rows) == math.ceil(t_final / beam.dt - 1e-9) + 1
    assert rep.rows[-1].t == t_final
    assert tuple(COLUMNS)[0] == "t"


def test_callback_sees_every_state():
    cfg = small_reference()
    beam, pore, cc = cfg.problems()
    seen = []
    run_simulation(cfg.initial_state(), 0.05, beam, pore, cc, on_step=lambda i, s: seen.append(i))
    assert seen == list(range(6))


def test_picard_cap_raises():
    cfg = small_reference()
    beam, pore, _ = cfg.problems()
    with pytest.raises(CouplingError) as info:
        coupled_step(cfg.initial_state(), beam, pore, CouplingConfig(1e-14, 1, 1.0))
    assert len(info.value.history) == 1


def test_failure_carries_partial_report():
    cfg = small_reference()
    beam, pore, _ = cfg.problems()
    with pytest.raises(SimulationError) as info:
        run_simulation(cfg.initial_state(), 0.1, beam, pore, CouplingConfig(1e-14, 1, 1.0))
    assert len(info.value.report.rows) == 1
    assert "CouplingError" in info.value.report.error


def test_relaxed_iteration_converges_to_same_state():
    cfg = small_reference()
    beam, pore, cc = cfg.problems()
    s0 = cfg.initial_state()
    a, _ = coupled_step(s0, beam, pore, cc)
    b, rep = coupled_step(s0, beam, pore, CouplingConfig(1e-10, 60, 0.5))
    assert rep.iterations > 1
    np.testing.assert_allclose(a.beam.u, b.beam.u, atol=1e-8)


def test_config_validation():
    with pytest.raises(ValueError):
        CouplingConfig(relaxation=0.0)
    with pytest.raises(ValueError):
        CouplingConfig(picard_max_iter=0)
    cfg = small_reference()
    beam, pore, cc = cfg.problems()
    with pytest.raises(ValueError):
        coupled_step(cfg.initial_state(), beam, pore.with_dt(0.5), cc)
    with pytest.raises(ValueError):
        run_simulation(CoupledState.build(1.0, cfg.initial_state().beam,
                                          cfg.initial_state().p_bar), 0.5, beam, pore, cc)


def swelling(dt, t_final=2.0, n=32):
    return load("swelling.ini", **{"n_beam = 64": f"n_beam = {n}", "n_pore = 64": f"n_pore = {n}",
                                   "dt = 1e-3": f"dt = {dt!r}", "t_final = 4.0": f"t_final = {t_final!r}"})


def run(cfg):
    beam, pore, cc = cfg.problems()
    return run_simulation(cfg.initial_state(), cfg.discretization["t_final"], beam, pore, cc)


def test_swelling_lengthens_then_plateaus():
    rep = run(swelling(1e-2, t_final=6.0))
    t, s = rep.column("t"), rep.column("s")
    early = s[t <= 2.0]
    assert np.all(np.diff(early) >= -1e-12) and early[-1] > s[0] + 5e-3
    # a weakly damped overshoot settles; late variation is small against the total rise
    late = s[t >= 4.0]
    assert np.ptp(late) < 0.2 * (late.mean() - s[0])
    assert np.all(rep.column("min_strain") >= rep.column("strain_bound") - 10 * rep.h_beam**2)


def test_flux_pulse_mass_budget_first_order():
    errs = []
    for dt in (1e-2, 5e-3, 2.5e-3):
        cfg = swelling(dt, t_final=1.0)
        rep = run(cfg)
        h0 = cfg.material_system().h0
        target = -np.array([h0.integral(0.0, ti) for ti in rep.column("t")])
        m = rep.column("mass")
        errs.append(float(np.max(np.abs(m - m[0] - target))))
    assert target[-1] == pytest.approx(-0.275)
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    assert all(1.6 <= r <= 2.6 for r in ratios)


def test_equilibrium_series_constant():
    cfg = load("equilibrium.ini", **{"n_beam = 128": "n_beam = 32", "n_pore = 128": "n_pore = 32",
                                     "t_final = 1.0": "t_final = 0.1"})
    rep = run(cfg)
    for col in ("s", "s_dot", "mass", "energy", "min_strain"):
        c = rep.column(col)
        assert np.ptp(c) <= 1e-12 * max(1.0, abs(c[0]))
    assert set(rep.column("picard_iters")[1:]) == {1}
