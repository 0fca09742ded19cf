"""Field containers, discrete curls, masks, and the electromagnetic energy.

The two curl operators form an adjoint pair under the domain quadrature:
for any Dz that vanishes off the interior nodes,

    <curl_B(B), D>_nodes = <B, curl_D(D)>_faces

holds to rounding.  This summation-by-parts identity is what makes the
leapfrog scheme conserve its staggered energy exactly when sigma = 0, so
it is enforced by tests rather than assumed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import Domain, integrate_faces, integrate_nodal
from .errors import NumericsError


@dataclass
class FieldState:
    """Electromagnetic state at one time level.

    Dz sits at nodes, Bx and By at the staggered face sites.  Inside the
    time loop the stored B lags Dz by half a step; states returned to
    callers carry B at the same half-step convention and are documented
    where they appear.
    """

    Dz: np.ndarray
    Bx: np.ndarray
    By: np.ndarray
    t: float = 0.0

    def copy(self) -> "FieldState":
        return FieldState(self.Dz.copy(), self.Bx.copy(), self.By.copy(), self.t)


@dataclass
class ThetaField:
    """Temperature at one time level, stored on the full node grid.

    Values are zero off the free set: on the rectangle that pins the grid
    edge, on the annulus it pins exterior nodes while the staircase ring
    carries values (the Laplacian enforces theta = 0 on the true circles
    through shortened boundary arms).
    """

    theta: np.ndarray
    t: float = 0.0

    def copy(self) -> "ThetaField":
        return ThetaField(self.theta.copy(), self.t)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.theta))) if self.theta.size else 0.0


@dataclass
class EnergyTrajectory:
    """Sampled electromagnetic energy E(t_n), n = 0..N, with uniform dt."""

    samples: np.ndarray
    dt: float
    bound: float | None = None   # a priori ceiling, when one was computed

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.samples)) * self.dt

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.samples))) if len(self.samples) else 0.0


def zeros_state(dom: Domain, t: float = 0.0) -> FieldState:
    return FieldState(
        Dz=np.zeros((dom.nx + 1, dom.ny + 1)),
        Bx=np.zeros((dom.nx + 1, dom.ny)),
        By=np.zeros((dom.nx, dom.ny + 1)),
        t=t,
    )


def zeros_theta(dom: Domain, t: float = 0.0) -> ThetaField:
    return ThetaField(theta=np.zeros((dom.nx + 1, dom.ny + 1)), t=t)


def apply_pec(Dz: np.ndarray, dom: Domain) -> np.ndarray:
    """Pin Dz to zero at every non-interior node, in place."""
    Dz[~dom.interior] = 0.0
    return Dz


def apply_theta_mask(theta: np.ndarray, dom: Domain) -> np.ndarray:
    """Zero theta off the free set, in place."""
    theta[~dom.theta_free] = 0.0
    return theta


def curl_D(Dz: np.ndarray, dom: Domain) -> tuple[np.ndarray, np.ndarray]:
    """Face-based curl of the scalar Dz: (dDz/dy, -dDz/dx).

    Plain forward differences; Dz is assumed already masked, so faces
    outside the domain see only zeros.
    """
    gx = (Dz[:, 1:] - Dz[:, :-1]) / dom.h
    gy = -(Dz[1:, :] - Dz[:-1, :]) / dom.h
    return gx, gy


def curl_B(Bx: np.ndarray, By: np.ndarray, dom: Domain) -> np.ndarray:
    """Node-based scalar curl dBy/dx - dBx/dy, zero at non-interior nodes."""
    out = np.zeros((dom.nx + 1, dom.ny + 1))
    out[1:-1, 1:-1] = (By[1:, 1:-1] - By[:-1, 1:-1]) / dom.h \
        - (Bx[1:-1, 1:] - Bx[1:-1, :-1]) / dom.h
    if dom.kind != "rectangle":
        out[~dom.interior] = 0.0
    return out


def total_energy(state: FieldState, dom: Domain, eps: float, mu: float) -> float:
    """E = (1/2) integral of Dz^2/eps + (Bx^2 + By^2)/mu over the domain."""
    e_d = integrate_nodal(state.Dz * state.Dz, dom) / eps
    e_b = integrate_faces(state.Bx * state.Bx, state.By * state.By, dom) / mu
    return 0.5 * (e_d + e_b)


def staggered_energy(
    Dz: np.ndarray,
    b_prev: tuple[np.ndarray, np.ndarray],
    b_next: tuple[np.ndarray, np.ndarray],
    dom: Domain,
    eps: float,
    mu: float,
) -> float:
    """Leapfrog-compatible energy at time level n.

    Pairs Dz^n with the product of the bracketing magnetic half levels:

        E_stag = (1/2) [ |Dz|^2/eps + <B^{n-1/2}, B^{n+1/2}>/mu ]

    This is the quantity the scheme conserves exactly when sigma = 0 and
    decreases monotonically when sigma >= 0 with no source.
    """
    e_d = integrate_nodal(Dz * Dz, dom) / eps
    e_b = integrate_faces(b_prev[0] * b_next[0], b_prev[1] * b_next[1], dom) / mu
    return 0.5 * (e_d + e_b)


def weighted_face_inner(
    ax: np.ndarray, ay: np.ndarray, bx: np.ndarray, by: np.ndarray, dom: Domain
) -> float:
    """Face-quadrature inner product of two face vector fields."""
    return integrate_faces(ax * bx, ay * by, dom)


def check_finite(arrays: dict[str, np.ndarray], step: int) -> None:
    """Raise NumericsError naming the first non-finite field."""
    for name, arr in arrays.items():
        if not np.isfinite(arr).all():
            raise NumericsError(
                f"non-finite values in {name} at step {step}",
                details={"step": step, "field": name},
            )


def interp_b_to_nodes(
    Bx: np.ndarray, By: np.ndarray, dom: Domain
) -> tuple[np.ndarray, np.ndarray]:
    """Average face values onto nodes for plotting and CSV export.

    Inner nodes get the mean of the two adjacent faces; nodes on the grid
    edge copy the single adjacent face (one-sided, first order).
    """
    bxn = np.empty((dom.nx + 1, dom.ny + 1))
    bxn[:, 1:-1] = 0.5 * (Bx[:, 1:] + Bx[:, :-1])
    bxn[:, 0] = Bx[:, 0]
    bxn[:, -1] = Bx[:, -1]
    byn = np.empty((dom.nx + 1, dom.ny + 1))
    byn[1:-1, :] = 0.5 * (By[1:, :] + By[:-1, :])
    byn[0, :] = By[0, :]
    byn[-1, :] = By[-1, :]
    return bxn, byn
