"""Backward Euler heat stepping with a matrix-free conjugate gradient solve.

Each step solves

    (I - kappa dt L_h) theta^{n+1} = theta^n + dt f^n

on the free nodes, where L_h is the five-point Laplacian in flux form and
f^n is the (spatially uniform) heating rate at the start of the step.  On
the annulus the boundary arms of L_h are shortened to the true circles
(see domain.py), so the operator stays symmetric positive definite and CG
applies; the M-matrix sign structure also gives a discrete maximum
principle, which the a priori temperature range used for conductivity
validation relies on.

All inner products go through the fixed-order reduction in domain.det_sum,
so iteration counts and results are independent of thread environment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import Domain, det_sum
from .errors import ConfigError, NumericsError
from .state import ThetaField, apply_theta_mask

CG_TOL_DEFAULT = 1e-10
CG_TOL_CEILING = 1e-6


@dataclass(frozen=True)
class HeatStepParams:
    """Time step and inner-solver controls for the heat equation."""

    dt: float
    cg_tol: float = CG_TOL_DEFAULT
    cg_max_iter: int | None = None

    def __post_init__(self):
        if not (isinstance(self.dt, (int, float)) and math.isfinite(self.dt) and self.dt > 0.0):
            raise ConfigError(f"time.dt must be a positive finite number, got {self.dt!r}")
        if not (0.0 < self.cg_tol <= CG_TOL_CEILING):
            raise ConfigError(
                f"solver.cg_tol must lie in (0, {CG_TOL_CEILING}], got {self.cg_tol!r}"
            )
        if self.cg_max_iter is not None and self.cg_max_iter < 1:
            raise ConfigError(
                f"solver.cg_max_iter must be a positive integer, got {self.cg_max_iter!r}"
            )

    def resolve_max_iter(self, dom: Domain) -> int:
        if self.cg_max_iter is not None:
            return int(self.cg_max_iter)
        return 10 * max(dom.nx, dom.ny)


def laplacian_apply(theta: np.ndarray, dom: Domain) -> np.ndarray:
    """Flux-form five-point Laplacian, zero off the free set.

    Assumes theta is already zero off the free set, so neighbor values at
    pinned or exterior nodes contribute nothing and the per-direction
    coefficients carry the boundary geometry.
    """
    out = np.zeros_like(theta)
    out[:-1, :] += dom.lap_ce[:-1, :] * (theta[1:, :] - theta[:-1, :])
    out[1:, :] += dom.lap_cw[1:, :] * (theta[:-1, :] - theta[1:, :])
    out[:, :-1] += dom.lap_cn[:, :-1] * (theta[:, 1:] - theta[:, :-1])
    out[:, 1:] += dom.lap_cs[:, 1:] * (theta[:, :-1] - theta[:, 1:])
    return out


def cg_solve(apply_op, b: np.ndarray, x0: np.ndarray, tol: float, max_iter: int):
    """Conjugate gradients with fixed-order reductions.

    Returns (x, info) where info carries the iteration count and the
    residual-norm history.  Raises NumericsError when the iteration cap
    is reached or the operator stops looking positive definite.
    """
    b_norm = math.sqrt(det_sum(b * b))
    if b_norm == 0.0:
        return np.zeros_like(b), {"iterations": 0, "residuals": []}
    x = x0.copy()
    r = b - apply_op(x)
    p = r.copy()
    rs = det_sum(r * r)
    history = [math.sqrt(rs)]
    if history[0] <= tol * b_norm:
        return x, {"iterations": 0, "residuals": history}
    for k in range(1, max_iter + 1):
        ap = apply_op(p)
        p_ap = det_sum(p * ap)
        if not (p_ap > 0.0 and math.isfinite(p_ap)):
            raise NumericsError(
                f"cg_solve: operator lost positive definiteness at iteration {k} "
                f"(<p, Ap> = {p_ap})",
                details={"iteration": k, "residuals": history[-10:]},
            )
        alpha = rs / p_ap
        x = x + alpha * p
        r = r - alpha * ap
        rs_new = det_sum(r * r)
        res = math.sqrt(rs_new)
        history.append(res)
        if res <= tol * b_norm:
            return x, {"iterations": k, "residuals": history}
        p = r + (rs_new / rs) * p
        rs = rs_new
    raise NumericsError(
        f"cg_solve: no convergence in {max_iter} iterations "
        f"(relative residual {history[-1] / b_norm:.3e}, tol {tol:.3e})",
        details={"iterations": max_iter, "residuals": history[-10:]},
    )


def heat_step(
    theta: ThetaField,
    f_n,
    params: HeatStepParams,
    kappa: float,
    dom: Domain,
    stats: dict | None = None,
) -> ThetaField:
    """One backward Euler step with heating rate f_n (scalar or nodal).

    The previous temperature warm-starts CG, which collapses the iteration
    count as the run approaches a steady state.
    """
    dt = params.dt
    coef = kappa * dt

    def apply_op(v):
        return v - coef * laplacian_apply(v, dom)

    b = theta.theta + dt * np.asarray(f_n, dtype=float)
    b = np.where(dom.theta_free, b, 0.0)
    # Mask the warm start too: the operator is symmetric only on the free
    # set, so off-free residue must not enter the Krylov space.
    x0 = np.where(dom.theta_free, theta.theta, 0.0)
    x, info = cg_solve(apply_op, b, x0, params.cg_tol, params.resolve_max_iter(dom))
    apply_theta_mask(x, dom)
    if stats is not None:
        stats["iterations"] = info["iterations"]
        stats.setdefault("per_step", []).append(info["iterations"])
    return ThetaField(theta=x, t=theta.t + dt)


def solve_heat_trajectory(
    theta0: ThetaField,
    energy,
    params: HeatStepParams,
    kappa: float,
    dom: Domain,
    stats: dict | None = None,
) -> list[ThetaField]:
    """March the heat equation under a prescribed heating history.

    ``energy`` is an EnergyTrajectory whose sample at level n drives the
    step n -> n+1; its dt must match params.dt.  Returns all N+1 levels,
    starting with a masked copy of theta0.
    """
    if abs(energy.dt - params.dt) > 1e-12 * max(1.0, params.dt):
        raise ConfigError(
            f"heat trajectory dt {params.dt} does not match energy sampling dt {energy.dt}"
        )
    start = ThetaField(
        apply_theta_mask(theta0.theta.copy(), dom), theta0.t
    )
    out = [start]
    cur = start
    for n in range(len(energy.samples) - 1):
        cur = heat_step(cur, float(energy.samples[n]), params, kappa, dom, stats=stats)
        out.append(cur)
    return out
