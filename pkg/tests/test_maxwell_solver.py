"""Leapfrog field solver: stability guards, energy identity, trajectories."""

import math

import numpy as np
import pytest

from maxheat import (
    ConfigError,
    FieldState,
    MaxwellStepParams,
    PhysicalConstants,
    SourceG,
    build_domain,
    cfl_limit,
    check_cfl,
    dominant_frequency,
    maxwell_step,
    resolve_time_step,
    run_linear,
)
from maxheat.errors import NumericsError
from maxheat.maxwell_solver import advance_b, advance_d, stagger_b_back

CONSTS = PhysicalConstants(eps=1.0, mu=1.0, kappa=1.0)


def random_data(dom, seed):
    rng = np.random.default_rng(seed)
    Dz = rng.standard_normal(dom.node_shape)
    Dz[~dom.interior] = 0.0
    Bx = rng.standard_normal((dom.nx + 1, dom.ny)) * dom.face_wx.astype(bool)
    By = rng.standard_normal((dom.nx, dom.ny + 1)) * dom.face_wy.astype(bool)
    return Dz, Bx, By


def cavity_mode(dom):
    X, Y = dom.node_grids()
    return np.sin(math.pi * X) * np.sin(math.pi * Y)


def test_step_params_validation():
    MaxwellStepParams(dt=0.01)
    with pytest.raises(ConfigError, match="time.dt"):
        MaxwellStepParams(dt=0.0)
    with pytest.raises(ConfigError, match="time.dt"):
        MaxwellStepParams(dt=float("nan"))
    with pytest.raises(ConfigError, match="cfl_safety"):
        MaxwellStepParams(dt=0.01, cfl_safety=0.0)
    with pytest.raises(ConfigError, match="cfl_safety"):
        MaxwellStepParams(dt=0.01, cfl_safety=1.5)


def test_cfl_limit_and_check():
    dom = build_domain("rectangle", 16)
    consts = PhysicalConstants(eps=4.0, mu=1.0, kappa=1.0)
    assert cfl_limit(dom, consts) == pytest.approx(dom.h * 2.0 / math.sqrt(2.0), rel=1e-15)
    budget = 0.9 * cfl_limit(dom, consts)
    check_cfl(MaxwellStepParams(dt=budget), dom, consts)
    with pytest.raises(ConfigError, match="CFL"):
        check_cfl(MaxwellStepParams(dt=budget * 1.01), dom, consts)


def test_resolve_time_step_auto():
    dom = build_domain("rectangle", 16)
    dt, n = resolve_time_step(dom, CONSTS, 1.0)
    budget = 0.9 * cfl_limit(dom, CONSTS)
    assert n == math.ceil(1.0 / budget)
    assert dt * n == pytest.approx(1.0, rel=1e-15)
    assert dt <= budget * (1 + 1e-12)
    # T shorter than one budget step collapses to a single step.
    dt, n = resolve_time_step(dom, CONSTS, budget / 3.0)
    assert n == 1 and dt == pytest.approx(budget / 3.0)
    dt, n = resolve_time_step(dom, CONSTS, 0.0)
    assert n == 0 and dt > 0.0


def test_resolve_time_step_explicit():
    dom = build_domain("rectangle", 16)
    dt, n = resolve_time_step(dom, CONSTS, 0.5, dt=0.0125)
    assert (dt, n) == (0.0125, 40)
    with pytest.raises(ConfigError, match="does not divide"):
        resolve_time_step(dom, CONSTS, 0.5, dt=0.013)
    with pytest.raises(ConfigError, match="CFL"):
        resolve_time_step(dom, CONSTS, 0.5, dt=0.05)
    with pytest.raises(ConfigError, match="T_final"):
        resolve_time_step(dom, CONSTS, -1.0)


@pytest.mark.parametrize("kind,n", [("rectangle", 24), ("annulus", 32)])
def test_staggered_energy_conserved_lossless(kind, n):
    dom = build_domain(kind, n)
    Dz, Bx, By = random_data(dom, seed=7)
    dt, _ = resolve_time_step(dom, CONSTS, 1.0)
    res = run_linear(Dz, (Bx, By), None, None, 1.0, MaxwellStepParams(dt=dt), CONSTS, dom)
    e = res.diagnostics.staggered
    assert e[0] > 0.0
    drift = float(np.max(np.abs(e - e[0]))) / e[0]
    assert drift < 1e-11
    assert not res.diagnostics.dissipation.any()
    assert not res.diagnostics.source_power.any()


def test_staggered_identity_exact_with_damping():
    # With damping the staggered energy satisfies the per-step identity
    # to rounding: diff(E)/dt = -dissipation + source_power.
    dom = build_domain("rectangle", 16)
    Dz, Bx, By = random_data(dom, seed=19)
    sigma = np.where(dom.inside_mask, 0.7, 0.0)
    src = SourceG.separable(lambda t: math.sin(3.0 * t), lambda X, Y: X * (1 - X) * Y)
    dt, _ = resolve_time_step(dom, CONSTS, 0.8)
    res = run_linear(Dz, (Bx, By), sigma, src, 0.8, MaxwellStepParams(dt=dt), CONSTS, dom)
    d = res.diagnostics
    defect = np.diff(d.staggered) / dt + d.dissipation - d.source_power
    assert float(np.max(np.abs(defect))) < 1e-10 * d.staggered[0] / dt
    assert d.dissipation.min() > 0.0


def test_staggered_energy_monotone_dissipative():
    dom = build_domain("rectangle", 20)
    Dz, Bx, By = random_data(dom, seed=5)
    sigma = np.where(dom.inside_mask, 1.0, 0.0)
    dt, _ = resolve_time_step(dom, CONSTS, 1.0)
    res = run_linear(Dz, (Bx, By), sigma, None, 1.0, MaxwellStepParams(dt=dt), CONSTS, dom)
    e = res.diagnostics.staggered
    assert np.all(np.diff(e) <= 1e-12 * e[0])
    assert e[-1] < 0.9 * e[0]


def test_centered_residual_second_order():
    # The recorded-energy identity residual shrinks like dt^2.
    dom = build_domain("rectangle", 16)
    Dz = cavity_mode(dom)
    sigma = np.where(dom.inside_mask, 0.5, 0.0)
    zeros_b = (np.zeros((dom.nx + 1, dom.ny)), np.zeros((dom.nx, dom.ny + 1)))
    dt0, _ = resolve_time_step(dom, CONSTS, 0.5)
    peaks = []
    for dt in (dt0, dt0 / 2.0):
        res = run_linear(Dz, zeros_b, sigma, None, 0.5, MaxwellStepParams(dt=dt), CONSTS, dom)
        peaks.append(float(np.max(np.abs(res.diagnostics.residual))))
    assert peaks[1] < peaks[0] / 3.0


def test_run_linear_matches_manual_steps():
    dom = build_domain("rectangle", 12)
    Dz0, Bx0, By0 = random_data(dom, seed=23)
    sigma = np.where(dom.inside_mask, 0.3, 0.0)
    src = SourceG.separable(lambda t: 1.0 + t, lambda X, Y: np.sin(math.pi * X) * Y)
    dt = 0.02
    t_final = 5 * dt
    params = MaxwellStepParams(dt=dt)
    res = run_linear(Dz0, (Bx0, By0), sigma, src, t_final, params, CONSTS, dom)

    Dz = Dz0.copy()
    Dz[~dom.interior] = 0.0
    bx, by = stagger_b_back(Dz, Bx0.copy(), By0.copy(), dt, CONSTS, dom)
    state = FieldState(Dz, bx, by, 0.0)
    for n in range(5):
        g_mid = src.sample(dom, n * dt + 0.5 * dt)
        state = maxwell_step(state, sigma, g_mid, params, CONSTS, dom)
    assert np.array_equal(res.final.Dz, state.Dz)
    bx_next, by_next = advance_b(state.Dz, state.Bx, state.By, dt, CONSTS, dom)
    assert np.array_equal(res.b_half[0], bx_next)
    assert np.array_equal(res.b_half[1], by_next)
    # The reported final B is the centered average of the trailing pair.
    assert np.allclose(res.final.Bx, 0.5 * (state.Bx + bx_next), atol=0, rtol=0)


def test_exact_continuation_from_half_level():
    # b_half is B at T + dt/2, already advanced past the final Dz level:
    # continuation applies the Dz update with that pair first, then
    # resumes normal leapfrogging.
    dom = build_domain("rectangle", 12)
    Dz0, Bx0, By0 = random_data(dom, seed=31)
    dt = 0.02
    params = MaxwellStepParams(dt=dt)
    full = run_linear(Dz0, (Bx0, By0), None, None, 8 * dt, params, CONSTS, dom)
    head = run_linear(Dz0, (Bx0, By0), None, None, 4 * dt, params, CONSTS, dom)
    bx, by = head.b_half
    dz = advance_d(head.final.Dz, bx, by, None, None, dt, CONSTS, dom)
    state = FieldState(dz, bx, by, 5 * dt)
    for _ in range(3):
        state = maxwell_step(state, None, None, params, CONSTS, dom)
    assert np.array_equal(state.Dz, full.final.Dz)


def test_snapshots_and_on_step():
    dom = build_domain("rectangle", 10)
    Dz0, Bx0, By0 = random_data(dom, seed=2)
    dt = 0.02
    seen = []
    res = run_linear(
        Dz0, (Bx0, By0), None, None, 5 * dt, MaxwellStepParams(dt=dt), CONSTS, dom,
        snapshot_stride=2, on_step=lambda n, t, dz: seen.append((n, t)),
    )
    assert [s.t for s in res.snapshots] == pytest.approx([0.0, 2 * dt, 4 * dt, 5 * dt])
    assert [n for n, _ in seen] == list(range(6))
    masked = Dz0.copy()
    masked[~dom.interior] = 0.0
    assert np.array_equal(res.snapshots[0].Dz, masked)
    assert len(res.energy.samples) == 6


def test_zero_duration_run():
    dom = build_domain("rectangle", 10)
    Dz0, Bx0, By0 = random_data(dom, seed=4)
    res = run_linear(
        Dz0, (Bx0, By0), None, None, 0.0, MaxwellStepParams(dt=0.01), CONSTS, dom,
        snapshot_stride=1,
    )
    assert res.final.t == 0.0
    assert len(res.energy.samples) == 1
    assert len(res.snapshots) == 1
    # Centered B at level 0 recovers the initial data.
    assert np.allclose(res.final.Bx, Bx0, atol=1e-15)
    assert np.allclose(res.final.By, By0, atol=1e-15)


def test_nonfinite_abort_names_step():
    dom = build_domain("rectangle", 10)
    Dz0, Bx0, By0 = random_data(dom, seed=8)
    Dz0[5, 5] = np.inf
    with np.errstate(invalid="ignore"):
        with pytest.raises(NumericsError, match="step 1"):
            run_linear(Dz0, (Bx0, By0), None, None, 0.1, MaxwellStepParams(dt=0.01), CONSTS, dom)


def test_run_linear_rejects_cfl_and_mismatched_dt():
    dom = build_domain("rectangle", 16)
    Dz0, Bx0, By0 = random_data(dom, seed=1)
    with pytest.raises(ConfigError, match="CFL"):
        run_linear(Dz0, (Bx0, By0), None, None, 1.0, MaxwellStepParams(dt=0.5), CONSTS, dom)
    with pytest.raises(ConfigError, match="does not divide"):
        run_linear(Dz0, (Bx0, By0), None, None, 0.05, MaxwellStepParams(dt=0.012), CONSTS, dom)


def test_dominant_frequency_synthetic():
    dt = 0.01
    t = np.arange(2000) * dt
    omega = 3.7
    vals = np.sin(omega * t + 0.3)
    assert dominant_frequency(vals, dt) == pytest.approx(omega, rel=1e-4)
    with pytest.raises(ValueError, match="zero crossings"):
        dominant_frequency(np.ones(100), dt)


def test_cavity_mode_frequency_coarse():
    # The fundamental cavity mode oscillates near omega = sqrt(2) pi even
    # on a coarse grid; the tolerance covers the O(h^2) dispersion error.
    dom = build_domain("rectangle", 16)
    Dz0 = cavity_mode(dom)
    zeros_b = (np.zeros((dom.nx + 1, dom.ny)), np.zeros((dom.nx, dom.ny + 1)))
    dt, _ = resolve_time_step(dom, CONSTS, 3.0)
    probe = []
    run_linear(
        Dz0, zeros_b, None, None, 3.0, MaxwellStepParams(dt=dt), CONSTS, dom,
        on_step=lambda n, t, dz: probe.append(dz[dom.nx // 2, dom.ny // 4]),
    )
    omega = dominant_frequency(np.asarray(probe), dt)
    assert omega == pytest.approx(math.sqrt(2.0) * math.pi, rel=0.02)
