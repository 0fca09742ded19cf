"""Physical constants, conductivity models, and the driving source.

Conductivity depends on temperature only, sigma = sigma(theta), evaluated
pointwise on the node grid.  Every model declares two bounds that the
solvers and the a priori energy bound rely on:

    sigma0 : |sigma(xi)| <= sigma0 over the operating range
    sigma1 : |sigma(xi) - sigma(eta)| <= sigma1 |xi - eta|   (Lipschitz)

Declared bounds are audited at construction by dense sampling over the
declared operating range [-theta_max, theta_max]; a violation rejects the
model and names the offending xi.  Negative conductivity values are
permitted (the bounds are on magnitudes), which lets tests exercise the
energy bookkeeping with an energy-injecting material.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .domain import Domain
from .errors import ConfigError, NumericsError

DEFAULT_THETA_MAX = 100.0
BOUND_SAMPLES = 10_000
# Relative slack for auditing declared bounds against sampled values; the
# slope check is looser because finite-difference secants of a clamped or
# tabulated model can overshoot the analytic slope by rounding.
VALUE_SLACK = 1e-12
SLOPE_SLACK = 1e-6


@dataclass(frozen=True)
class PhysicalConstants:
    """Positive material constants eps (permittivity-like), mu, kappa."""

    eps: float
    mu: float
    kappa: float

    def __post_init__(self):
        for name in ("eps", "mu", "kappa"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0.0):
                raise ConfigError(f"constants.{name} must be a positive finite number, got {v!r}")


@dataclass(frozen=True)
class BoundsReport:
    """Outcome of auditing a model's declared bounds by sampling."""

    theta_max: float
    max_abs_value: float
    max_abs_slope: float
    n_samples: int


class ConductivityModel:
    """Base interface: evaluate() plus declared sigma0/sigma1 bounds."""

    kind: str = "abstract"
    sigma0: float
    sigma1: float
    theta_max: float

    def evaluate(self, xi: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _check_declared(self):
        for name in ("sigma0", "sigma1"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0.0):
                raise ConfigError(
                    f"conductivity.{name} must be a nonnegative finite number, got {v!r}"
                )
        if not (math.isfinite(self.theta_max) and self.theta_max > 0.0):
            raise ConfigError(
                f"conductivity.theta_max must be positive, got {self.theta_max!r}"
            )


def validate_bounds(model: ConductivityModel, theta_max: float | None = None) -> BoundsReport:
    """Audit declared sigma0/sigma1 by dense sampling; reject on violation.

    Samples the model at BOUND_SAMPLES points over [-theta_max, theta_max]
    (the model's declared range by default) and checks every value against
    sigma0 and every secant slope against sigma1.  Raises ConfigError
    naming the offending xi when a declared bound is too small.
    """
    rng_max = model.theta_max if theta_max is None else float(theta_max)
    if not (math.isfinite(rng_max) and rng_max > 0.0):
        raise ConfigError(f"operating range bound must be positive, got {rng_max!r}")
    xi = np.linspace(-rng_max, rng_max, BOUND_SAMPLES)
    vals = np.asarray(model.evaluate(xi), dtype=float)
    if vals.shape != xi.shape:
        raise ConfigError(
            f"conductivity model '{model.kind}' returned shape {vals.shape} "
            f"for input shape {xi.shape}"
        )
    if not np.isfinite(vals).all():
        bad = xi[~np.isfinite(vals)][0]
        raise ConfigError(
            f"conductivity model '{model.kind}' is non-finite at xi={bad!r}"
        )
    abs_vals = np.abs(vals)
    k = int(np.argmax(abs_vals))
    max_val = float(abs_vals[k])
    if max_val > model.sigma0 * (1.0 + VALUE_SLACK):
        raise ConfigError(
            f"conductivity model '{model.kind}' violates declared sigma0="
            f"{model.sigma0}: |sigma({float(xi[k])!r})| = {max_val}"
        )
    slopes = np.abs(np.diff(vals)) / (xi[1] - xi[0])
    max_slope = float(np.max(slopes)) if slopes.size else 0.0
    if max_slope > model.sigma1 * (1.0 + SLOPE_SLACK) + 1e-300:
        j = int(np.argmax(slopes))
        raise ConfigError(
            f"conductivity model '{model.kind}' violates declared sigma1="
            f"{model.sigma1}: slope {max_slope} near xi={float(xi[j])!r}"
        )
    return BoundsReport(
        theta_max=rng_max, max_abs_value=max_val,
        max_abs_slope=max_slope, n_samples=BOUND_SAMPLES,
    )


@dataclass(frozen=True)
class ConstantConductivity(ConductivityModel):
    """sigma(xi) = value, independent of temperature."""

    value: float
    sigma0: float = None  # type: ignore[assignment]
    sigma1: float = 0.0
    theta_max: float = DEFAULT_THETA_MAX
    kind: str = field(default="Constant", init=False)

    def __post_init__(self):
        if not (isinstance(self.value, (int, float)) and math.isfinite(self.value)):
            raise ConfigError(f"conductivity value must be finite, got {self.value!r}")
        if self.sigma0 is None:
            object.__setattr__(self, "sigma0", abs(float(self.value)))
        self._check_declared()
        validate_bounds(self)

    def evaluate(self, xi: np.ndarray) -> np.ndarray:
        return np.full_like(np.asarray(xi, dtype=float), float(self.value))


@dataclass(frozen=True)
class AffineClampedConductivity(ConductivityModel):
    """sigma(xi) = clip(a + b*xi, lo, hi)."""

    a: float
    b: float
    lo: float
    hi: float
    sigma0: float = None  # type: ignore[assignment]
    sigma1: float = None  # type: ignore[assignment]
    theta_max: float = DEFAULT_THETA_MAX
    kind: str = field(default="AffineClamped", init=False)

    def __post_init__(self):
        for name in ("a", "b", "lo", "hi"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise ConfigError(f"conductivity.{name} must be finite, got {v!r}")
        if self.lo > self.hi:
            raise ConfigError(
                f"conductivity clamp requires lo <= hi, got lo={self.lo}, hi={self.hi}"
            )
        if self.sigma0 is None:
            object.__setattr__(self, "sigma0", max(abs(self.lo), abs(self.hi)))
        if self.sigma1 is None:
            object.__setattr__(self, "sigma1", abs(float(self.b)))
        self._check_declared()
        validate_bounds(self)

    def evaluate(self, xi: np.ndarray) -> np.ndarray:
        return np.clip(self.a + self.b * np.asarray(xi, dtype=float), self.lo, self.hi)


@dataclass(frozen=True)
class TabulatedConductivity(ConductivityModel):
    """Piecewise-linear interpolation of (xi_k, sigma_k) samples.

    Breakpoints must be strictly increasing; evaluation clamps to the end
    values outside the table.  Default bounds are the exact magnitudes of
    the table: max |sigma_k| and the largest secant slope.
    """

    xi: np.ndarray
    sigma: np.ndarray
    sigma0: float = None  # type: ignore[assignment]
    sigma1: float = None  # type: ignore[assignment]
    theta_max: float = DEFAULT_THETA_MAX
    kind: str = field(default="Tabulated", init=False)

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        sg = np.asarray(self.sigma, dtype=float)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "sigma", sg)
        if xi.ndim != 1 or sg.shape != xi.shape or len(xi) < 2:
            raise ConfigError(
                "tabulated conductivity needs two equal-length 1-D columns "
                f"with at least 2 rows, got shapes {xi.shape} and {sg.shape}"
            )
        if not (np.isfinite(xi).all() and np.isfinite(sg).all()):
            raise ConfigError("tabulated conductivity contains non-finite entries")
        if not np.all(np.diff(xi) > 0.0):
            k = int(np.argmin(np.diff(xi)))
            raise ConfigError(
                f"tabulated xi column must be strictly increasing; "
                f"violation between rows {k} and {k + 1} (xi={xi[k]!r})"
            )
        if self.sigma0 is None:
            object.__setattr__(self, "sigma0", float(np.max(np.abs(sg))))
        if self.sigma1 is None:
            secants = np.abs(np.diff(sg)) / np.diff(xi)
            object.__setattr__(self, "sigma1", float(np.max(secants)))
        xi.setflags(write=False)
        sg.setflags(write=False)
        self._check_declared()
        validate_bounds(self)

    @classmethod
    def from_csv(cls, path, **kwargs) -> "TabulatedConductivity":
        """Load a two-column CSV (xi, sigma); '#' comment lines allowed."""
        try:
            data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read conductivity table {path!r}: {exc}") from exc
        if data.shape[1] != 2:
            raise ConfigError(
                f"conductivity table {path!r} must have exactly 2 columns, "
                f"got {data.shape[1]}"
            )
        return cls(xi=data[:, 0], sigma=data[:, 1], **kwargs)

    def evaluate(self, xi: np.ndarray) -> np.ndarray:
        return np.interp(np.asarray(xi, dtype=float), self.xi, self.sigma)


def sigma_field(model: ConductivityModel, theta, dom: Domain) -> np.ndarray:
    """Evaluate sigma(theta) on the node grid, zero outside the domain.

    ``theta`` may be a ThetaField or a bare node array.  Non-finite
    temperatures abort rather than silently propagate through the clamp.
    """
    values = getattr(theta, "theta", theta)
    if values.shape != dom.node_shape:
        raise ConfigError(
            f"sigma_field: theta shape {values.shape} does not match "
            f"node shape {dom.node_shape}"
        )
    if not np.isfinite(values).all():
        raise NumericsError("sigma_field: non-finite temperature input")
    out = np.asarray(model.evaluate(values), dtype=float)
    return np.where(dom.inside_mask, out, 0.0)


@dataclass(frozen=True)
class SourceG:
    """Driving current G(t, x, y), either zero or separable f(t)*g(x, y).

    Samples are masked to the interior nodes, matching where the Dz update
    applies them.
    """

    kind: str
    f_t: object = None   # callable t -> float
    g_xy: object = None  # callable (X, Y) -> ndarray

    @staticmethod
    def zero() -> "SourceG":
        return SourceG(kind="zero")

    @staticmethod
    def separable(f_t, g_xy) -> "SourceG":
        if not (callable(f_t) and callable(g_xy)):
            raise ConfigError("separable source needs callable f(t) and g(x, y)")
        return SourceG(kind="separable", f_t=f_t, g_xy=g_xy)

    def __post_init__(self):
        if self.kind not in ("zero", "separable"):
            raise ConfigError(f"source.kind must be 'zero' or 'separable', got {self.kind!r}")

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"

    def time_factor(self, t: float) -> float:
        """The scalar f(t); zero for the zero source."""
        if self.is_zero:
            return 0.0
        return float(self.f_t(t))

    def spatial_profile(self, dom: Domain) -> np.ndarray:
        """g(x, y) sampled at the nodes and masked to the interior."""
        if self.is_zero:
            return np.zeros(dom.node_shape)
        X, Y = dom.node_grids()
        g = np.asarray(self.g_xy(X, Y), dtype=float)
        if g.shape != dom.node_shape:
            raise ConfigError(
                f"source g(x, y) returned shape {g.shape}, expected {dom.node_shape}"
            )
        return np.where(dom.interior, g, 0.0)

    def sample(self, dom: Domain, t: float) -> np.ndarray:
        """G(t, x, y) = f(t) g(x, y) on the nodes, zero off the interior."""
        if self.is_zero:
            return np.zeros(dom.node_shape)
        return self.time_factor(t) * self.spatial_profile(dom)
