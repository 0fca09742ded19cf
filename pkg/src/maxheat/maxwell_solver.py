"""Leapfrog integration of the damped Maxwell system on the staggered grid.

One step from level n to n+1, with B living at half levels:

    B^{n+1/2} = B^{n-1/2} - (dt/eps) curl_D(Dz^n)
    Dz^{n+1}  = [(1 - a) Dz^n + dt ((1/mu) curl_B(B^{n+1/2}) + G^{n+1/2})]
                / (1 + a),        a = sigma dt / (2 eps)

The damping term is treated by the trapezoid rule (the a terms), which
keeps the update unconditionally stable in sigma and gives the exact
discrete energy identity

    E_stag^{n+1} - E_stag^n =
        dt [ -(1/eps^2) <sigma D^{n+1/2}, D^{n+1/2}>
             + (1/eps)  <G^{n+1/2}, D^{n+1/2}> ],
    D^{n+1/2} = (Dz^n + Dz^{n+1}) / 2,

so the staggered energy is conserved to rounding when sigma = 0 and G = 0,
and decreases monotonically when sigma >= 0 and G = 0.  The recorded
trajectory E(t_n) uses the time-centered magnetic field
(B^{n-1/2} + B^{n+1/2})/2, which makes the sampled identity residual
second order in dt.

Stability requires dt <= h sqrt(eps mu) / sqrt(2) (the 2-D CFL limit).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import Domain, integrate_nodal
from .errors import ConfigError
from .materials import PhysicalConstants, SourceG
from .state import (
    EnergyTrajectory,
    FieldState,
    apply_pec,
    check_finite,
    curl_B,
    curl_D,
    staggered_energy,
    total_energy,
)

CFL_DEFAULT_SAFETY = 0.9


@dataclass(frozen=True)
class MaxwellStepParams:
    """Time step and the safety factor applied to the CFL limit."""

    dt: float
    cfl_safety: float = CFL_DEFAULT_SAFETY

    def __post_init__(self):
        if not (isinstance(self.dt, (int, float)) and math.isfinite(self.dt) and self.dt > 0.0):
            raise ConfigError(f"time.dt must be a positive finite number, got {self.dt!r}")
        if not (0.0 < self.cfl_safety <= 1.0):
            raise ConfigError(
                f"time.cfl_safety must lie in (0, 1], got {self.cfl_safety!r}"
            )


@dataclass
class StepDiagnostics:
    """Per-step bookkeeping for the energy identity.

    Arrays t, energy, staggered have one entry per time level (N+1);
    dissipation, source_power, residual have one entry per step (N), with
    entry n covering the step from level n to n+1:

        residual[n] = (energy[n+1] - energy[n])/dt
                      + dissipation[n] - source_power[n]

    which is O(dt^2) for smooth data and exactly zero in the staggered
    bookkeeping.
    """

    t: np.ndarray
    energy: np.ndarray
    staggered: np.ndarray
    dissipation: np.ndarray
    source_power: np.ndarray
    residual: np.ndarray


@dataclass
class MaxwellRunResult:
    """Output of run_linear: final state, snapshots, energy, diagnostics.

    ``final`` carries the time-centered magnetic field at T; ``b_half``
    keeps the raw trailing half-level pair (Bx, By) at T + dt/2 for exact
    continuation: apply the Dz update with that pair first, then resume
    normal leapfrogging.  Snapshots also carry centered B.
    """

    final: FieldState
    b_half: tuple[np.ndarray, np.ndarray]
    snapshots: list[FieldState]
    energy: EnergyTrajectory
    diagnostics: StepDiagnostics


def cfl_limit(dom: Domain, consts: PhysicalConstants) -> float:
    """Largest stable dt: h sqrt(eps mu) / sqrt(2)."""
    return dom.h * math.sqrt(consts.eps * consts.mu) / math.sqrt(2.0)


def check_cfl(params: MaxwellStepParams, dom: Domain, consts: PhysicalConstants) -> None:
    limit = params.cfl_safety * cfl_limit(dom, consts)
    if params.dt > limit * (1.0 + 1e-12):
        raise ConfigError(
            f"time.dt = {params.dt} exceeds the CFL budget "
            f"{limit} (= cfl_safety {params.cfl_safety} x limit {cfl_limit(dom, consts)})"
        )


def resolve_time_step(
    dom: Domain,
    consts: PhysicalConstants,
    t_final: float,
    dt: float | None = None,
    cfl_safety: float = CFL_DEFAULT_SAFETY,
) -> tuple[float, int]:
    """Return (dt, n_steps) covering [0, t_final] exactly.

    With dt = None the step is chosen automatically: the largest dt at or
    under the CFL budget that divides t_final into an integer number of
    steps.  An explicit dt must divide t_final and satisfy the CFL check.
    """
    if not (isinstance(t_final, (int, float)) and math.isfinite(t_final) and t_final >= 0.0):
        raise ConfigError(f"time.T_final must be a nonnegative finite number, got {t_final!r}")
    budget = cfl_safety * cfl_limit(dom, consts)
    if dt is None:
        if t_final == 0.0:
            return budget, 0
        n = max(1, math.ceil(t_final / budget))
        return t_final / n, n
    params = MaxwellStepParams(dt=float(dt), cfl_safety=cfl_safety)
    check_cfl(params, dom, consts)
    if t_final == 0.0:
        return params.dt, 0
    n = int(round(t_final / params.dt))
    if n < 1 or abs(n * params.dt - t_final) > 1e-9 * max(1.0, t_final):
        raise ConfigError(
            f"time.dt = {params.dt} does not divide T_final = {t_final} "
            "into an integer number of steps"
        )
    return params.dt, n


def stagger_b_back(
    Dz: np.ndarray,
    Bx: np.ndarray,
    By: np.ndarray,
    dt: float,
    consts: PhysicalConstants,
    dom: Domain,
) -> tuple[np.ndarray, np.ndarray]:
    """Move whole-level initial B to level -1/2.

    A backward half step of the B update; the first in-loop update then
    lands B exactly at +dt/2, which is what makes the startup second
    order.
    """
    gx, gy = curl_D(Dz, dom)
    c = dt / (2.0 * consts.eps)
    return Bx + c * gx, By + c * gy


def advance_b(
    Dz: np.ndarray,
    Bx: np.ndarray,
    By: np.ndarray,
    dt: float,
    consts: PhysicalConstants,
    dom: Domain,
) -> tuple[np.ndarray, np.ndarray]:
    """Half-level magnetic update B^{n+1/2} = B^{n-1/2} - (dt/eps) curl_D."""
    gx, gy = curl_D(Dz, dom)
    c = dt / consts.eps
    return Bx - c * gx, By - c * gy


def advance_d(
    Dz: np.ndarray,
    Bx_half: np.ndarray,
    By_half: np.ndarray,
    sigma_nodes: np.ndarray | None,
    g_mid: np.ndarray | None,
    dt: float,
    consts: PhysicalConstants,
    dom: Domain,
) -> np.ndarray:
    """Damped Dz update using B at the bracketing half level."""
    rhs = curl_B(Bx_half, By_half, dom) / consts.mu
    if g_mid is not None:
        rhs = rhs + g_mid
    if sigma_nodes is None:
        new = Dz + dt * rhs
    else:
        a = sigma_nodes * (dt / (2.0 * consts.eps))
        new = ((1.0 - a) * Dz + dt * rhs) / (1.0 + a)
    return apply_pec(new, dom)


def maxwell_step(
    state: FieldState,
    sigma_nodes: np.ndarray | None,
    g_mid: np.ndarray | None,
    params: MaxwellStepParams,
    consts: PhysicalConstants,
    dom: Domain,
) -> FieldState:
    """One full leapfrog step.

    ``state`` holds Dz at level n and B at level n-1/2; the result holds
    Dz at n+1 and B at n+1/2.  ``g_mid`` is the source sampled at the
    half level t_n + dt/2.
    """
    bx, by = advance_b(state.Dz, state.Bx, state.By, params.dt, consts, dom)
    dz = advance_d(state.Dz, bx, by, sigma_nodes, g_mid, params.dt, consts, dom)
    return FieldState(Dz=dz, Bx=bx, By=by, t=state.t + params.dt)


def _normalize_sigma_at(sigma_at):
    """Accept None, a fixed nodal array, a sequence per step, or a callable."""
    if sigma_at is None:
        return lambda n: None
    if isinstance(sigma_at, np.ndarray):
        return lambda n: sigma_at
    if callable(sigma_at):
        return sigma_at
    seq = list(sigma_at)
    return lambda n: seq[n]


def run_linear(
    D0: np.ndarray,
    B0: tuple[np.ndarray, np.ndarray],
    sigma_at,
    source: SourceG | None,
    t_final: float,
    params: MaxwellStepParams,
    consts: PhysicalConstants,
    dom: Domain,
    snapshot_stride: int = 0,
    on_step=None,
) -> MaxwellRunResult:
    """Integrate the Maxwell system with a prescribed conductivity history.

    sigma_at may be None (lossless), a fixed nodal array, a per-step
    sequence, or a callable step -> nodal array; the heat equation is not
    touched here.  ``on_step(n, t, Dz)`` is invoked at every time level
    including 0 and N with a read-only view of Dz.  With snapshot_stride
    = k > 0 every k-th level (plus the final one) is stored with the
    time-centered magnetic field.

    Raises NumericsError naming the step at the first non-finite field.
    """
    check_cfl(params, dom, consts)
    dt = params.dt
    n_steps = int(round(t_final / dt)) if t_final > 0.0 else 0
    if t_final > 0.0 and abs(n_steps * dt - t_final) > 1e-9 * max(1.0, t_final):
        raise ConfigError(
            f"time.dt = {dt} does not divide T_final = {t_final}"
        )
    sig_of = _normalize_sigma_at(sigma_at)
    src = source if source is not None else SourceG.zero()

    Dz = apply_pec(np.array(D0, dtype=float, copy=True), dom)
    Bx = np.array(B0[0], dtype=float, copy=True)
    By = np.array(B0[1], dtype=float, copy=True)
    Bx, By = stagger_b_back(Dz, Bx, By, dt, consts, dom)

    e_avg = np.empty(n_steps + 1)
    e_stag = np.empty(n_steps + 1)
    diss = np.zeros(n_steps)
    srcp = np.zeros(n_steps)
    snapshots: list[FieldState] = []
    inv_eps_sq = 1.0 / (consts.eps * consts.eps)

    def record(n, t, bx_prev, by_prev, bx_next, by_next):
        bbar_x = 0.5 * (bx_prev + bx_next)
        bbar_y = 0.5 * (by_prev + by_next)
        e_avg[n] = total_energy(FieldState(Dz, bbar_x, bbar_y, t), dom, consts.eps, consts.mu)
        e_stag[n] = staggered_energy(
            Dz, (bx_prev, by_prev), (bx_next, by_next), dom, consts.eps, consts.mu
        )
        take = snapshot_stride > 0 and (n % snapshot_stride == 0 or n == n_steps)
        if take:
            snapshots.append(FieldState(Dz.copy(), bbar_x.copy(), bbar_y.copy(), t))
        if on_step is not None:
            on_step(n, t, Dz)
        return bbar_x, bbar_y

    bbar_x = bbar_y = None
    for n in range(n_steps):
        t_n = n * dt
        bx_next, by_next = advance_b(Dz, Bx, By, dt, consts, dom)
        record(n, t_n, Bx, By, bx_next, by_next)
        s = sig_of(n)
        g_mid = None if src.is_zero else src.sample(dom, t_n + 0.5 * dt)
        d_new = advance_d(Dz, bx_next, by_next, s, g_mid, dt, consts, dom)
        d_mid = 0.5 * (Dz + d_new)
        if s is not None:
            diss[n] = inv_eps_sq * integrate_nodal(s * d_mid * d_mid, dom)
        if g_mid is not None:
            srcp[n] = integrate_nodal(g_mid * d_mid, dom) / consts.eps
        check_finite({"Dz": d_new, "Bx": bx_next, "By": by_next}, n + 1)
        Dz = d_new
        Bx, By = bx_next, by_next

    # Close the final level: one extra half-level B, no state advance.
    bx_next, by_next = advance_b(Dz, Bx, By, dt, consts, dom)
    bbar_x, bbar_y = record(n_steps, n_steps * dt, Bx, By, bx_next, by_next)

    residual = np.diff(e_avg) / dt + diss - srcp
    diag = StepDiagnostics(
        t=np.arange(n_steps + 1) * dt,
        energy=e_avg,
        staggered=e_stag,
        dissipation=diss,
        source_power=srcp,
        residual=residual,
    )
    final = FieldState(Dz.copy(), bbar_x.copy(), bbar_y.copy(), n_steps * dt)
    return MaxwellRunResult(
        final=final,
        b_half=(bx_next, by_next),
        snapshots=snapshots,
        energy=EnergyTrajectory(samples=e_avg.copy(), dt=dt),
        diagnostics=diag,
    )


def dominant_frequency(values: np.ndarray, dt: float) -> float:
    """Angular frequency from zero crossings of an oscillating sample.

    Linear interpolation locates each sign change; k crossings span k - 1
    half periods, so omega = pi (k - 1) / (t_last - t_first).  Needs at
    least two crossings.
    """
    v = np.asarray(values, dtype=float)
    prod = v[:-1] * v[1:]
    idx = np.nonzero(prod < 0.0)[0]
    if len(idx) < 2:
        raise ValueError(f"need at least 2 zero crossings, found {len(idx)}")
    frac = v[idx] / (v[idx] - v[idx + 1])
    t_cross = (idx + frac) * dt
    return math.pi * (len(t_cross) - 1) / (t_cross[-1] - t_cross[0])
