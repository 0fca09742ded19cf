"""Coupled electromagnetic-thermal drivers.

The heating term is nonlocal: the heat equation is driven by the global
electromagnetic energy E(t), a single scalar per time level, while the
conductivity closing the loop is local, sigma(theta(x)).  Two strategies
compute the same trajectory:

    monolithic  one pass; each step uses the energy of the current fields
                to advance theta, then sigma(theta^{n+1}) to damp Dz
    picard      fixed-point iteration on the energy trajectory: given a
                guess E_in(t), march heat + Maxwell with the heating
                prescribed by E_in, read off the resulting energy E_out,
                repeat until the trajectory stops moving

Both reduce to plain damped Maxwell plus passive heating when sigma does
not depend on theta, which is what makes the Picard operator contract in
one application for constant conductivity.

The a priori energy bound computed here (gronwall_bound) follows from the
energy identity: E'(t) <= C2 E + C1 with C2 = (2 sigma0 + [G nonzero])/eps
and C1 = sup_t |G(t)|^2, so E(t) <= (2 E(0) + C1 t) exp(C2 t) dominates
every sampled energy.  The bound also caps the reachable temperature range
(via the heat maximum principle), which is used to re-audit the declared
conductivity bounds before a run.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .domain import Domain, integrate_nodal
from .errors import ConfigError, NonConvergenceError
from .heat_solver import HeatStepParams, heat_step
from .materials import (
    ConductivityModel,
    PhysicalConstants,
    SourceG,
    sigma_field,
    validate_bounds,
)
from .maxwell_solver import (
    CFL_DEFAULT_SAFETY,
    MaxwellStepParams,
    StepDiagnostics,
    advance_b,
    advance_d,
    check_cfl,
    resolve_time_step,
    stagger_b_back,
)
from .state import (
    EnergyTrajectory,
    FieldState,
    ThetaField,
    apply_pec,
    apply_theta_mask,
    check_finite,
    staggered_energy,
    total_energy,
)

PICARD_TOL_DEFAULT = 1e-8
PICARD_MAX_ITER_DEFAULT = 100
# Reachable temperatures are bounded by |theta0| + T * (energy bound); the
# conductivity audit range pads that by a factor of 10.
THETA_RANGE_FACTOR = 10.0


@dataclass(frozen=True)
class CoupledConfig:
    """Complete description of one coupled run on an already-built domain."""

    dom: Domain
    consts: PhysicalConstants
    conductivity: ConductivityModel
    source: SourceG
    D0: np.ndarray
    Bx0: np.ndarray
    By0: np.ndarray
    theta0: np.ndarray
    t_final: float
    dt: float | None = None          # None picks the largest CFL-safe divisor
    cfl_safety: float = CFL_DEFAULT_SAFETY
    mode: str = "monolithic"
    picard_tol: float = PICARD_TOL_DEFAULT
    picard_max_iter: int = PICARD_MAX_ITER_DEFAULT
    cg_tol: float = 1e-10
    cg_max_iter: int | None = None
    snapshot_stride: int = 0
    n_steps: int = field(init=False)
    dt_resolved: float = field(init=False)

    def __post_init__(self):
        dom = self.dom
        shapes = {
            "D0": (self.D0, (dom.nx + 1, dom.ny + 1)),
            "Bx0": (self.Bx0, (dom.nx + 1, dom.ny)),
            "By0": (self.By0, (dom.nx, dom.ny + 1)),
            "theta0": (self.theta0, (dom.nx + 1, dom.ny + 1)),
        }
        for name, (arr, want) in shapes.items():
            if not isinstance(arr, np.ndarray) or arr.shape != want:
                raise ConfigError(
                    f"initial.{name} must be an ndarray of shape {want}, "
                    f"got {getattr(arr, 'shape', type(arr))}"
                )
            if not np.isfinite(arr).all():
                raise ConfigError(f"initial.{name} contains non-finite values")
        if self.mode not in ("monolithic", "picard"):
            raise ConfigError(
                f"solver.mode must be 'monolithic' or 'picard', got {self.mode!r}"
            )
        if not (0.0 < self.picard_tol < 1.0):
            raise ConfigError(f"solver.picard_tol must lie in (0, 1), got {self.picard_tol!r}")
        if self.picard_max_iter < 1:
            raise ConfigError(
                f"solver.picard_max_iter must be at least 1, got {self.picard_max_iter!r}"
            )
        if self.snapshot_stride < 0:
            raise ConfigError(
                f"output.snapshot_stride must be nonnegative, got {self.snapshot_stride!r}"
            )
        dt, n = resolve_time_step(dom, self.consts, self.t_final, self.dt, self.cfl_safety)
        object.__setattr__(self, "dt_resolved", dt)
        object.__setattr__(self, "n_steps", n)

    def maxwell_params(self) -> MaxwellStepParams:
        return MaxwellStepParams(dt=self.dt_resolved, cfl_safety=self.cfl_safety)

    def heat_params(self) -> HeatStepParams:
        return HeatStepParams(dt=self.dt_resolved, cg_tol=self.cg_tol, cg_max_iter=self.cg_max_iter)

    def initial_energy(self) -> float:
        state = FieldState(
            apply_pec(self.D0.copy(), self.dom), self.Bx0, self.By0, 0.0
        )
        return total_energy(state, self.dom, self.consts.eps, self.consts.mu)


@dataclass
class CoupledDiagnostics(StepDiagnostics):
    """Maxwell energy bookkeeping plus the thermal inner-solve effort."""

    cg_iterations: np.ndarray = None  # type: ignore[assignment]
    picard_iterations: int | None = None


@dataclass
class CoupledRunResult:
    """Final fields, optional snapshots, energy trajectory, diagnostics."""

    final: FieldState
    b_half: tuple[np.ndarray, np.ndarray]
    theta_final: ThetaField
    snapshots: list[FieldState]
    theta_snapshots: list[ThetaField]
    energy: EnergyTrajectory
    diagnostics: CoupledDiagnostics
    gronwall: "GronwallBound | None" = None


@dataclass(frozen=True)
class GronwallBound:
    """A priori ceiling for the energy trajectory and what built it."""

    value: float
    e0: float
    c1: float
    c2: float
    t_final: float

    def theta_range(self, theta0_max: float) -> float:
        """Padded bound on reachable |theta| via the maximum principle."""
        return THETA_RANGE_FACTOR * (theta0_max + self.t_final * self.value)


def gronwall_bound(cfg: CoupledConfig) -> GronwallBound:
    """Energy ceiling (2 E(0) + C1 T) exp(C2 T) from the declared bounds.

    C1 is the largest sampled squared source norm over the run's time
    levels; C2 = (2 sigma0 + 1)/eps with a driving source, (2 sigma0)/eps
    without (the extra 1 pays for the Young inequality splitting of the
    source term).  With G = 0 and sigma0 = 0 the bound is exactly 2 E(0).
    """
    e0 = cfg.initial_energy()
    c1 = 0.0
    if not cfg.source.is_zero:
        profile = cfg.source.spatial_profile(cfg.dom)
        gnorm2 = integrate_nodal(profile * profile, cfg.dom)
        times = np.arange(cfg.n_steps + 1) * cfg.dt_resolved
        fmax = max((cfg.source.time_factor(float(t)) ** 2 for t in times), default=0.0)
        c1 = fmax * gnorm2
    c2 = (2.0 * cfg.conductivity.sigma0 + (0.0 if cfg.source.is_zero else 1.0)) / cfg.consts.eps
    value = (2.0 * e0 + c1 * cfg.t_final) * math.exp(c2 * cfg.t_final)
    return GronwallBound(value=value, e0=e0, c1=c1, c2=c2, t_final=cfg.t_final)


def _audit_conductivity_range(cfg: CoupledConfig, bound: GronwallBound) -> None:
    """Re-audit declared sigma bounds over the run-reachable range."""
    theta0_max = float(np.max(np.abs(cfg.theta0))) if cfg.theta0.size else 0.0
    rng = bound.theta_range(theta0_max)
    if rng > cfg.conductivity.theta_max:
        validate_bounds(cfg.conductivity, theta_max=rng)


def _march(cfg: CoupledConfig, heat_rate_of, on_step=None) -> CoupledRunResult:
    """Single forward pass of the coupled system.

    heat_rate_of(n, e_n) returns the heating rate driving the thermal step
    n -> n+1: the monolithic driver feeds back the live energy e_n, the
    Picard operator substitutes its prescribed trajectory.  Step order is
    fixed: magnetic half step, energy bookkeeping, thermal step, sigma
    refresh, damped Dz update.
    """
    dom, consts = cfg.dom, cfg.consts
    params = cfg.maxwell_params()
    check_cfl(params, dom, consts)
    hparams = cfg.heat_params()
    dt = cfg.dt_resolved
    n_steps = cfg.n_steps
    stride = cfg.snapshot_stride

    Dz = apply_pec(cfg.D0.copy(), dom)
    Bx = cfg.Bx0.copy()
    By = cfg.By0.copy()
    theta = ThetaField(apply_theta_mask(cfg.theta0.copy(), dom), 0.0)
    Bx, By = stagger_b_back(Dz, Bx, By, dt, consts, dom)

    e_avg = np.empty(n_steps + 1)
    e_stag = np.empty(n_steps + 1)
    diss = np.zeros(n_steps)
    srcp = np.zeros(n_steps)
    cg_iters = np.zeros(n_steps, dtype=int)
    snapshots: list[FieldState] = []
    theta_snapshots: list[ThetaField] = []
    inv_eps_sq = 1.0 / (consts.eps * consts.eps)

    def record(n, t, bx_prev, by_prev, bx_next, by_next):
        bbar_x = 0.5 * (bx_prev + bx_next)
        bbar_y = 0.5 * (by_prev + by_next)
        e_avg[n] = total_energy(FieldState(Dz, bbar_x, bbar_y, t), dom, consts.eps, consts.mu)
        e_stag[n] = staggered_energy(
            Dz, (bx_prev, by_prev), (bx_next, by_next), dom, consts.eps, consts.mu
        )
        if stride > 0 and (n % stride == 0 or n == n_steps):
            snapshots.append(FieldState(Dz.copy(), bbar_x.copy(), bbar_y.copy(), t))
            theta_snapshots.append(theta.copy())
        if on_step is not None:
            on_step(n, t, Dz)
        return bbar_x, bbar_y

    for n in range(n_steps):
        t_n = n * dt
        bx_next, by_next = advance_b(Dz, Bx, By, dt, consts, dom)
        record(n, t_n, Bx, By, bx_next, by_next)
        stats: dict = {}
        theta = heat_step(theta, heat_rate_of(n, e_avg[n]), hparams, consts.kappa, dom, stats=stats)
        cg_iters[n] = stats["iterations"]
        s = sigma_field(cfg.conductivity, theta, dom)
        g_mid = None if cfg.source.is_zero else cfg.source.sample(dom, t_n + 0.5 * dt)
        d_new = advance_d(Dz, bx_next, by_next, s, g_mid, dt, consts, dom)
        d_mid = 0.5 * (Dz + d_new)
        diss[n] = inv_eps_sq * integrate_nodal(s * d_mid * d_mid, dom)
        if g_mid is not None:
            srcp[n] = integrate_nodal(g_mid * d_mid, dom) / consts.eps
        check_finite({"Dz": d_new, "Bx": bx_next, "By": by_next, "theta": theta.theta}, n + 1)
        Dz = d_new
        Bx, By = bx_next, by_next

    bx_next, by_next = advance_b(Dz, Bx, By, dt, consts, dom)
    bbar_x, bbar_y = record(n_steps, n_steps * dt, Bx, By, bx_next, by_next)

    diag = CoupledDiagnostics(
        t=np.arange(n_steps + 1) * dt,
        energy=e_avg,
        staggered=e_stag,
        dissipation=diss,
        source_power=srcp,
        residual=np.diff(e_avg) / dt + diss - srcp,
        cg_iterations=cg_iters,
    )
    return CoupledRunResult(
        final=FieldState(Dz.copy(), bbar_x.copy(), bbar_y.copy(), n_steps * dt),
        b_half=(bx_next, by_next),
        theta_final=theta,
        snapshots=snapshots,
        theta_snapshots=theta_snapshots,
        energy=EnergyTrajectory(samples=e_avg.copy(), dt=dt),
        diagnostics=diag,
    )


def run_monolithic(cfg: CoupledConfig, on_step=None) -> CoupledRunResult:
    """One-pass coupled run; the heating rate is the live energy E(t_n)."""
    bound = gronwall_bound(cfg)
    _audit_conductivity_range(cfg, bound)
    res = _march(cfg, lambda n, e_n: e_n, on_step=on_step)
    res.energy.bound = bound.value
    res.gronwall = bound
    return res


def _check_against_bound(energy_in: EnergyTrajectory, bound: GronwallBound) -> None:
    peak = energy_in.max_abs()
    if peak > bound.value * (1.0 + 1e-9):
        warnings.warn(
            f"input energy trajectory peaks at {peak}, above the a priori "
            f"bound {bound.value}; continuing anyway",
            RuntimeWarning,
            stacklevel=3,
        )


def picard_T(energy_in: EnergyTrajectory, cfg: CoupledConfig, on_step=None) -> EnergyTrajectory:
    """One application of the Picard map: E_in -> energy of the pass it drives.

    Warns (does not abort) when the input exceeds the a priori bound; the
    map is still well defined there, just outside the regime the
    contraction argument covers.
    """
    if len(energy_in.samples) != cfg.n_steps + 1:
        raise ConfigError(
            f"picard_T: energy trajectory has {len(energy_in.samples)} samples, "
            f"run needs {cfg.n_steps + 1}"
        )
    bound = gronwall_bound(cfg)
    _check_against_bound(energy_in, bound)
    res = _march(cfg, lambda n, e_n: float(energy_in.samples[n]), on_step=on_step)
    out = res.energy
    out.bound = bound.value
    return out


@dataclass
class PicardReport:
    """Convergence record of the energy fixed-point iteration."""

    iterates: list[EnergyTrajectory]
    deltas: list[float]
    converged: bool
    contraction_ratios: list[float]
    tol: float

    @property
    def iterations(self) -> int:
        return len(self.deltas)


def picard_run(cfg: CoupledConfig) -> tuple[CoupledRunResult, PicardReport]:
    """Iterate the Picard map from the flat initial-energy guess.

    Starts from E^0(t) = E(0), stops when the sup-norm update falls under
    picard_tol * max(1, |E_k|_inf), and rebuilds the returned fields from
    the final operator application so they are exactly the fields the
    converged trajectory produces.  Raises NonConvergenceError with the
    delta history if picard_max_iter applications are not enough.
    """
    bound = gronwall_bound(cfg)
    _audit_conductivity_range(cfg, bound)
    e0 = cfg.initial_energy()
    current = EnergyTrajectory(
        samples=np.full(cfg.n_steps + 1, e0), dt=cfg.dt_resolved, bound=bound.value
    )
    iterates = [current]
    deltas: list[float] = []
    for _ in range(cfg.picard_max_iter):
        _check_against_bound(current, bound)
        res = _march(cfg, lambda n, e_n: float(current.samples[n]))
        nxt = res.energy
        nxt.bound = bound.value
        delta = float(np.max(np.abs(nxt.samples - current.samples)))
        deltas.append(delta)
        iterates.append(nxt)
        if delta <= cfg.picard_tol * max(1.0, current.max_abs()):
            ratios = [
                deltas[k] / deltas[k - 1]
                for k in range(1, len(deltas))
                if deltas[k - 1] > 0.0
            ]
            report = PicardReport(
                iterates=iterates,
                deltas=deltas,
                converged=True,
                contraction_ratios=ratios,
                tol=cfg.picard_tol,
            )
            res.gronwall = bound
            res.diagnostics.picard_iterations = report.iterations
            return res, report
        current = nxt
    raise NonConvergenceError(
        f"picard iteration did not converge in {cfg.picard_max_iter} "
        f"applications (last delta {deltas[-1]:.3e}, tol {cfg.picard_tol:.3e})",
        deltas=deltas,
    )


def run_coupled(cfg: CoupledConfig, on_step=None):
    """Dispatch on cfg.mode; returns (result, report-or-None)."""
    if cfg.mode == "picard":
        return picard_run(cfg)
    return run_monolithic(cfg, on_step=on_step), None


@dataclass(frozen=True)
class ProbeResult:
    """Sensitivity of one Picard application to an energy perturbation."""

    ratio: float
    delta: float
    perturbation_norm: float
    response_norm: float


def continuity_probe(cfg: CoupledConfig, delta: float, baseline=None) -> ProbeResult:
    """Measure |T(E* + p) - T(E*)| / |p| at the converged trajectory E*.

    p is a smooth Gaussian bump in time of amplitude ``delta`` centered at
    T/2.  For conductivity that ignores temperature the two applications
    perform identical arithmetic and the ratio is exactly zero; for a
    Lipschitz model the ratio is finite and stable as delta shrinks, which
    is the practical signature of the continuity the fixed point needs.

    ``baseline`` may carry a previous picard_run result pair to avoid
    re-converging when probing several amplitudes.
    """
    if not (isinstance(delta, (int, float)) and math.isfinite(delta) and delta > 0.0):
        raise ConfigError(f"probe delta must be positive, got {delta!r}")
    if baseline is None:
        baseline = picard_run(cfg)
    res, _report = baseline
    e_star = res.energy
    t = e_star.times
    t_mid = 0.5 * cfg.t_final
    width = max(cfg.t_final / 8.0, 1e-12)
    bump = delta * np.exp(-0.5 * ((t - t_mid) / width) ** 2)
    perturbed = EnergyTrajectory(samples=e_star.samples + bump, dt=e_star.dt, bound=e_star.bound)
    base_out = picard_T(e_star, cfg)
    pert_out = picard_T(perturbed, cfg)
    p_norm = float(np.max(np.abs(bump)))
    r_norm = float(np.max(np.abs(pert_out.samples - base_out.samples)))
    return ProbeResult(
        ratio=r_norm / p_norm, delta=float(delta),
        perturbation_norm=p_norm, response_norm=r_norm,
    )
