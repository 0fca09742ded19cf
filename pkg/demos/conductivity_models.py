"""Conductivity models, their declared bounds, and the a priori ceiling.

Every run declares sigma0 (a value bound) and sigma1 (a slope bound) so the
solver can certify an energy ceiling before stepping and audit the model
over the reachable temperature range. This script plots the three bundled
model shapes, shows a bounds audit catching an undersized declaration, and
runs two damped cavities to compare the actual decay against their
certified ceilings.

Writes conductivity_models.png next to this script.
"""

import math
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from maxheat import (
    AffineClampedConductivity,
    ConstantConductivity,
    CoupledConfig,
    PhysicalConstants,
    SourceG,
    TabulatedConductivity,
    build_domain,
    gronwall_bound,
    run_monolithic,
    validate_bounds,
)

HERE = pathlib.Path(__file__).resolve().parent

models = {
    "constant 1.0": ConstantConductivity(value=1.0),
    "affine clamped": AffineClampedConductivity(a=0.4, b=0.6, lo=0.4, hi=2.0),
    "tabulated": TabulatedConductivity(
        xi=np.linspace(0.0, 3.0, 13),
        sigma=0.5 + 1.2 * np.tanh(np.linspace(0.0, 3.0, 13)),
    ),
}

xi = np.linspace(-0.5, 3.5, 400)
fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4))
for label, m in models.items():
    ax1.plot(xi, m.evaluate(xi), lw=1.5, label=label)
    rep = validate_bounds(m, theta_max=3.5)
    print(f"{label:15s} sigma0={m.sigma0:g} sigma1={m.sigma1:g} "
          f"observed max |sigma|={rep.max_abs_value:.3f} "
          f"max slope={rep.max_abs_slope:.3f} over {rep.n_samples} samples")
ax1.set_xlabel("temperature")
ax1.set_ylabel("sigma")
ax1.set_title("Bundled conductivity shapes")
ax1.legend()

# An undersized declaration is rejected up front, not discovered mid-run.
try:
    validate_bounds(
        AffineClampedConductivity(a=0.0, b=1.0, lo=-50.0, hi=50.0,
                                  sigma0=5.0, theta_max=4.0),
        theta_max=40.0,
    )
except Exception as exc:
    print(f"bounds audit rejects an undersized sigma0: {exc}")

# Two damped cavities: decay vs certified ceiling.
n = 48
dom = build_domain("rectangle", n)
X, Y = dom.node_grids()
for sigma, style in ((0.5, "-"), (1.5, "--")):
    cfg = CoupledConfig(
        dom=dom,
        consts=PhysicalConstants(eps=1.0, mu=1.0, kappa=1.0),
        conductivity=ConstantConductivity(value=sigma),
        source=SourceG.zero(),
        D0=np.sin(math.pi * X) * np.sin(math.pi * Y),
        Bx0=np.zeros((dom.nx + 1, dom.ny)),
        By0=np.zeros((dom.nx, dom.ny + 1)),
        theta0=np.zeros(dom.node_shape),
        t_final=3.0,
    )
    bound = gronwall_bound(cfg)
    res = run_monolithic(cfg)
    peak = float(np.max(res.energy.samples))
    print(f"sigma={sigma}: ceiling {bound.value:.3f}, observed peak {peak:.3f}, "
          f"final energy {res.energy.samples[-1]:.2e}")
    ax2.semilogy(res.energy.times, res.energy.samples, style,
                 label=f"sigma = {sigma}")
ax2.set_xlabel("t")
ax2.set_ylabel("E(t)")
ax2.set_title("Damped cavity decay (certified ceilings hold)")
ax2.legend()

fig.tight_layout()
out = HERE / "conductivity_models.png"
fig.savefig(out, dpi=130)
print(f"figure written to {out}")
