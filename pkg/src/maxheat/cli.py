"""Command line front end.

    maxheat run --config sim.json
    maxheat run --preset cavity_mode [--n 64] [--mode picard]
    maxheat verify
    maxheat list-presets

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 fixed-point non-convergence.  Error messages name the offending key or
step rather than dumping a traceback.

A run writes into the configured output directory:

    energy.csv       step, t, E, dissipation, residual (and picard_iter
                     in picard mode); row n carries the identity terms of
                     the step ending at level n, zeros in row 0
    theta_final.csv  x, y, theta over all grid nodes
    fields_*.csv     x, y, Dz, Bx, By, theta per stored snapshot when
                     output.fields is true (B averaged onto nodes)
    report.json      resolved config echo, bound and peak energy, solver
                     statistics, wall time, threads, version

Numbers in CSV files are written with 17 significant digits and the JSON
echo round-trips bitwise: feeding report.json's "config" object back in
reproduces identical outputs.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .coupled import CoupledConfig, CoupledRunResult, PicardReport, run_coupled
from .domain import Domain, build_domain, integrate_nodal
from .errors import ConfigError, NonConvergenceError, NumericsError
from .materials import (
    AffineClampedConductivity,
    ConductivityModel,
    ConstantConductivity,
    PhysicalConstants,
    SourceG,
    TabulatedConductivity,
)
from .state import interp_b_to_nodes

FLOAT_FMT = "%.17g"


# ---------------------------------------------------------------------------
# presets

def preset_names() -> list[str]:
    return sorted(_PRESET_BUILDERS)


def preset_config(name: str) -> dict:
    """A fresh, fully self-contained config dict for a named preset."""
    if name not in _PRESET_BUILDERS:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(preset_names())}"
        )
    return copy.deepcopy(_PRESET_BUILDERS[name])


def _preset(domain_kind, n, sigma_value, initial, t_final, out_name):
    return {
        "domain": {"kind": domain_kind, "n": n},
        "constants": {"eps": 1.0, "mu": 1.0, "kappa": 1.0},
        "conductivity": {"kind": "Constant", "params": {"value": sigma_value}},
        "source": {"kind": "zero"},
        "initial": {"preset": initial},
        "time": {"T_final": t_final},
        "solver": {"mode": "monolithic"},
        "output": {"dir": f"maxheat_out/{out_name}"},
    }


_PRESET_BUILDERS: dict[str, dict] = {
    "cavity_mode": _preset("rectangle", 128, 0.0, "cavity", 10.0, "cavity_mode"),
    "dissipative_cavity": _preset("rectangle", 64, 1.0, "cavity", 1.5, "dissipative_cavity"),
    "zero_data": _preset("rectangle", 64, 1.0, "zero", 0.2, "zero_data"),
    "square_uniform_b": _preset("rectangle", 128, 1.0, "uniform_b", 1.5, "square_uniform_b"),
    "annulus_static_b": _preset("annulus", 128, 1.0, "static_b", 0.5, "annulus_static_b"),
}

PRESET_DESCRIPTIONS = {
    "cavity_mode": "lossless unit-square cavity ringing in its fundamental mode",
    "dissipative_cavity": "the same cavity with uniform conductivity draining the energy",
    "zero_data": "all-zero data; output must stay exactly zero",
    "square_uniform_b": "uniform magnetic field heating the unit square at a constant rate",
    "annulus_static_b": "static circulating field heating the annulus toward a radial profile",
}


def preset_initial(name: str, dom: Domain):
    """Initial (D0, Bx0, By0, theta0) arrays for an initial-data preset."""
    d0 = np.zeros((dom.nx + 1, dom.ny + 1))
    bx = np.zeros((dom.nx + 1, dom.ny))
    by = np.zeros((dom.nx, dom.ny + 1))
    th = np.zeros((dom.nx + 1, dom.ny + 1))
    if name == "zero":
        pass
    elif name == "cavity":
        if dom.kind != "rectangle":
            raise ConfigError("initial.preset 'cavity' requires a rectangle domain")
        X, Y = dom.node_grids()
        w = dom.node_x[-1] - dom.node_x[0]
        h_ext = dom.node_y[-1] - dom.node_y[0]
        d0 = np.sin(math.pi * X / w) * np.sin(math.pi * Y / h_ext)
    elif name == "uniform_b":
        bx = np.where(dom.face_wx > 0.0, 1.0, 0.0)
    elif name == "static_b":
        if dom.kind != "annulus":
            raise ConfigError("initial.preset 'static_b' requires the annulus domain")
        xf, yf = dom.bx_grids()
        r2 = xf * xf + yf * yf
        bx = np.where(dom.face_wx > 0.0, yf / r2, 0.0)
        xf, yf = dom.by_grids()
        r2 = xf * xf + yf * yf
        by = np.where(dom.face_wy > 0.0, -xf / r2, 0.0)
    else:
        raise ConfigError(
            f"initial.preset must be one of 'zero', 'cavity', 'uniform_b', "
            f"'static_b', got {name!r}"
        )
    return d0, bx, by, th


# ---------------------------------------------------------------------------
# config validation helpers

def _check_keys(d, path, required, optional=()):
    if not isinstance(d, dict):
        raise ConfigError(f"{path} must be an object, got {type(d).__name__}")
    for key in d:
        if key not in required and key not in optional:
            raise ConfigError(f"unknown key {path}.{key}")
    for key in required:
        if key not in d:
            raise ConfigError(f"missing key {path}.{key}")


def _get_number(d, key, path, positive=False, nonneg=False):
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{path}.{key} must be a finite number, got {v!r}")
    if positive and v <= 0:
        raise ConfigError(f"{path}.{key} must be positive, got {v!r}")
    if nonneg and v < 0:
        raise ConfigError(f"{path}.{key} must be nonnegative, got {v!r}")
    return float(v)


def _get_int(d, key, path, minimum=None):
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path}.{key} must be an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{path}.{key} must be at least {minimum}, got {v}")
    return v


def _get_str(d, key, path, choices=None):
    v = d[key]
    if not isinstance(v, str):
        raise ConfigError(f"{path}.{key} must be a string, got {v!r}")
    if choices is not None and v not in choices:
        raise ConfigError(
            f"{path}.{key} must be one of {sorted(choices)}, got {v!r}"
        )
    return v


def _get_bool(d, key, path):
    v = d[key]
    if not isinstance(v, bool):
        raise ConfigError(f"{path}.{key} must be true or false, got {v!r}")
    return v


# ---------------------------------------------------------------------------
# builders

def _build_conductivity(section) -> ConductivityModel:
    _check_keys(section, "conductivity", ("kind", "params"),
                ("sigma0", "sigma1", "theta_max"))
    kind = _get_str(section, "kind", "conductivity",
                    choices={"Constant", "AffineClamped", "Tabulated"})
    params = section["params"]
    extra = {}
    for opt in ("sigma0", "sigma1", "theta_max"):
        if opt in section:
            extra[opt] = _get_number(section, opt, "conductivity", nonneg=True)
    p = "conductivity.params"
    if kind == "Constant":
        _check_keys(params, p, ("value",))
        return ConstantConductivity(value=_get_number(params, "value", p), **extra)
    if kind == "AffineClamped":
        _check_keys(params, p, ("a", "b", "lo", "hi"))
        return AffineClampedConductivity(
            a=_get_number(params, "a", p), b=_get_number(params, "b", p),
            lo=_get_number(params, "lo", p), hi=_get_number(params, "hi", p),
            **extra,
        )
    _check_keys(params, p, (), ("csv", "xi", "sigma"))
    if "csv" in params:
        if "xi" in params or "sigma" in params:
            raise ConfigError(f"{p} must give either csv or xi/sigma arrays, not both")
        return TabulatedConductivity.from_csv(_get_str(params, "csv", p), **extra)
    if "xi" not in params or "sigma" not in params:
        raise ConfigError(f"{p} needs a csv path or both xi and sigma arrays")
    for col in ("xi", "sigma"):
        if not isinstance(params[col], list):
            raise ConfigError(f"{p}.{col} must be a list of numbers")
    return TabulatedConductivity(
        xi=np.asarray(params["xi"], dtype=float),
        sigma=np.asarray(params["sigma"], dtype=float),
        **extra,
    )


def _build_time_factor(section, path):
    kind = _get_str(section, "kind", path, choices={"constant", "gaussian_pulse"})
    if kind == "constant":
        _check_keys(section, path, ("kind", "value"))
        value = _get_number(section, "value", path)
        return lambda t: value
    _check_keys(section, path, ("kind", "amplitude", "t0", "tau"))
    amp = _get_number(section, "amplitude", path)
    t0 = _get_number(section, "t0", path)
    tau = _get_number(section, "tau", path, positive=True)
    return lambda t: amp * math.exp(-(((t - t0) / tau) ** 2))


def _build_space_factor(section, path):
    kind = _get_str(section, "kind", path, choices={"constant", "gaussian_bump"})
    if kind == "constant":
        _check_keys(section, path, ("kind", "value"))
        value = _get_number(section, "value", path)
        return lambda X, Y: np.full_like(X, value)
    _check_keys(section, path, ("kind", "amplitude", "x0", "y0", "w"))
    amp = _get_number(section, "amplitude", path)
    x0 = _get_number(section, "x0", path)
    y0 = _get_number(section, "y0", path)
    w = _get_number(section, "w", path, positive=True)
    return lambda X, Y: amp * np.exp(-(((X - x0) ** 2 + (Y - y0) ** 2) / (w * w)))


def _build_source(section) -> SourceG:
    _check_keys(section, "source", ("kind",), ("params",))
    kind = _get_str(section, "kind", "source", choices={"zero", "separable"})
    if kind == "zero":
        if "params" in section:
            raise ConfigError("source.params is not allowed for the zero source")
        return SourceG.zero()
    if "params" not in section:
        raise ConfigError("missing key source.params")
    params = section["params"]
    _check_keys(params, "source.params", ("f", "g"))
    f = _build_time_factor(params["f"], "source.params.f")
    g = _build_space_factor(params["g"], "source.params.g")
    return SourceG.separable(f, g)


def _load_initial_file(path_str, base_dir, key):
    path = Path(path_str)
    if not path.is_absolute():
        path = base_dir / path
    try:
        arr = np.load(path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot load initial.files.{key} from {path}: {exc}") from exc
    if not isinstance(arr, np.ndarray) or arr.dtype.kind not in "fiu":
        raise ConfigError(f"initial.files.{key} must be a numeric .npy array")
    return np.asarray(arr, dtype=float), str(path)


def _build_initial(section, dom: Domain, base_dir: Path):
    """Returns (D0, Bx0, By0, theta0, echo_section)."""
    _check_keys(section, "initial", (), ("preset", "files"))
    if ("preset" in section) == ("files" in section):
        raise ConfigError("initial must contain exactly one of 'preset' or 'files'")
    if "preset" in section:
        name = _get_str(section, "preset", "initial")
        return (*preset_initial(name, dom), {"preset": name})
    files = section["files"]
    _check_keys(files, "initial.files", (), ("D0", "Bx0", "By0", "theta0"))
    arrays = {
        "D0": np.zeros((dom.nx + 1, dom.ny + 1)),
        "Bx0": np.zeros((dom.nx + 1, dom.ny)),
        "By0": np.zeros((dom.nx, dom.ny + 1)),
        "theta0": np.zeros((dom.nx + 1, dom.ny + 1)),
    }
    echo_files = {}
    for key in files:
        arr, abspath = _load_initial_file(_get_str(files, key, "initial.files"), base_dir, key)
        if arr.shape != arrays[key].shape:
            raise ConfigError(
                f"initial.files.{key} has shape {arr.shape}, expected {arrays[key].shape}"
            )
        arrays[key] = arr
        echo_files[key] = abspath
    return (
        arrays["D0"], arrays["Bx0"], arrays["By0"], arrays["theta0"],
        {"files": echo_files},
    )


def _resolve_threads(cfg: dict) -> int:
    if "threads" in cfg:
        v = cfg["threads"]
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise ConfigError(f"threads must be a positive integer, got {v!r}")
        return v
    env = os.environ.get("MAXHEAT_THREADS")
    if env is not None:
        try:
            v = int(env)
        except ValueError:
            raise ConfigError(
                f"MAXHEAT_THREADS must be a positive integer, got {env!r}"
            ) from None
        if v < 1:
            raise ConfigError(f"MAXHEAT_THREADS must be a positive integer, got {env!r}")
        return v
    return 1


@dataclass
class RunSetup:
    """A validated config resolved into runnable pieces plus its echo."""

    coupled: CoupledConfig
    out_dir: Path
    write_fields: bool
    threads: int
    echo: dict


def build_setup(cfg: dict, base_dir: Path | str = ".") -> RunSetup:
    """Validate a config dict and resolve every default.

    ``base_dir`` anchors relative paths inside the config (initial data
    files, conductivity tables); the output directory is resolved against
    the current working directory as usual for command line tools.
    """
    base_dir = Path(base_dir)
    _check_keys(
        cfg, "config",
        ("domain", "constants", "conductivity", "initial", "time"),
        ("source", "solver", "output", "threads"),
    )

    dsec = cfg["domain"]
    _check_keys(dsec, "domain", ("kind", "n"), ("width", "height"))
    kind = _get_str(dsec, "kind", "domain", choices={"rectangle", "annulus"})
    n = _get_int(dsec, "n", "domain", minimum=8)
    width = _get_number(dsec, "width", "domain", positive=True) if "width" in dsec else 1.0
    height = _get_number(dsec, "height", "domain", positive=True) if "height" in dsec else 1.0
    if kind == "annulus" and ("width" in dsec or "height" in dsec):
        raise ConfigError("domain.width/height are not allowed for the annulus")
    dom = build_domain(kind, n, width=width, height=height)

    csec = cfg["constants"]
    _check_keys(csec, "constants", ("eps", "mu", "kappa"))
    consts = PhysicalConstants(
        eps=_get_number(csec, "eps", "constants", positive=True),
        mu=_get_number(csec, "mu", "constants", positive=True),
        kappa=_get_number(csec, "kappa", "constants", positive=True),
    )

    csec2 = cfg["conductivity"]
    if isinstance(csec2, dict) and isinstance(csec2.get("params"), dict) \
            and "csv" in csec2["params"]:
        # Resolve the table path against the config location before building.
        csec2 = copy.deepcopy(csec2)
        p = Path(str(csec2["params"]["csv"]))
        if not p.is_absolute():
            p = base_dir / p
        csec2["params"]["csv"] = str(p)
    model = _build_conductivity(csec2)

    source = _build_source(cfg.get("source", {"kind": "zero"}))

    d0, bx0, by0, th0, initial_echo = _build_initial(cfg["initial"], dom, base_dir)

    tsec = cfg["time"]
    _check_keys(tsec, "time", ("T_final",), ("dt", "cfl_safety"))
    t_final = _get_number(tsec, "T_final", "time", nonneg=True)
    dt = _get_number(tsec, "dt", "time", positive=True) if "dt" in tsec else None
    cfl_safety = (
        _get_number(tsec, "cfl_safety", "time", positive=True)
        if "cfl_safety" in tsec else 0.9
    )

    ssec = cfg.get("solver", {})
    _check_keys(ssec, "solver", (),
                ("mode", "picard_tol", "picard_max_iter", "cg_tol", "cg_max_iter"))
    mode = _get_str(ssec, "mode", "solver", choices={"monolithic", "picard"}) \
        if "mode" in ssec else "monolithic"
    picard_tol = _get_number(ssec, "picard_tol", "solver", positive=True) \
        if "picard_tol" in ssec else 1e-8
    picard_max_iter = _get_int(ssec, "picard_max_iter", "solver", minimum=1) \
        if "picard_max_iter" in ssec else 100
    cg_tol = _get_number(ssec, "cg_tol", "solver", positive=True) \
        if "cg_tol" in ssec else 1e-10
    cg_max_iter = _get_int(ssec, "cg_max_iter", "solver", minimum=1) \
        if "cg_max_iter" in ssec else None

    osec = cfg.get("output", {})
    _check_keys(osec, "output", (), ("dir", "snapshot_stride", "fields"))
    out_dir = _get_str(osec, "dir", "output") if "dir" in osec else "maxheat_out/run"
    stride = _get_int(osec, "snapshot_stride", "output", minimum=0) \
        if "snapshot_stride" in osec else 0
    write_fields = _get_bool(osec, "fields", "output") if "fields" in osec else False

    threads = _resolve_threads(cfg)

    coupled = CoupledConfig(
        dom=dom, consts=consts, conductivity=model, source=source,
        D0=d0, Bx0=bx0, By0=by0, theta0=th0,
        t_final=t_final, dt=dt, cfl_safety=cfl_safety, mode=mode,
        picard_tol=picard_tol, picard_max_iter=picard_max_iter,
        cg_tol=cg_tol, cg_max_iter=cg_max_iter, snapshot_stride=stride,
    )

    echo: dict = {
        "domain": {"kind": kind, "n": n},
        "constants": {"eps": consts.eps, "mu": consts.mu, "kappa": consts.kappa},
        "conductivity": _echo_conductivity(csec2, model),
        "source": copy.deepcopy(cfg.get("source", {"kind": "zero"})),
        "initial": initial_echo,
        "time": {
            "T_final": t_final,
            "dt": coupled.dt_resolved,
            "cfl_safety": cfl_safety,
        },
        "solver": {
            "mode": mode, "picard_tol": picard_tol,
            "picard_max_iter": picard_max_iter, "cg_tol": cg_tol,
        },
        "output": {"dir": out_dir, "snapshot_stride": stride, "fields": write_fields},
        "threads": threads,
    }
    if kind == "rectangle":
        echo["domain"]["width"] = width
        echo["domain"]["height"] = height
    if cg_max_iter is not None:
        echo["solver"]["cg_max_iter"] = cg_max_iter

    return RunSetup(
        coupled=coupled, out_dir=Path(out_dir), write_fields=write_fields,
        threads=threads, echo=echo,
    )


def _echo_conductivity(section, model: ConductivityModel) -> dict:
    out = {"kind": model.kind, "params": copy.deepcopy(section["params"])}
    out["sigma0"] = model.sigma0
    out["sigma1"] = model.sigma1
    out["theta_max"] = model.theta_max
    return out


# ---------------------------------------------------------------------------
# outputs

def write_outputs(
    result: CoupledRunResult,
    report: PicardReport | None,
    setup: RunSetup,
    wall_time: float,
) -> None:
    """Write energy.csv, theta_final.csv, optional field snapshots, report.json."""
    out = setup.out_dir
    out.mkdir(parents=True, exist_ok=True)
    dom = setup.coupled.dom
    diag = result.diagnostics
    n_levels = len(diag.t)

    # Per-step identity terms are attributed to the level the step ends at.
    diss = np.zeros(n_levels)
    resid = np.zeros(n_levels)
    if n_levels > 1:
        diss[1:] = diag.dissipation
        resid[1:] = diag.residual
    cols = [
        np.arange(n_levels, dtype=float), diag.t, diag.energy, diss, resid,
    ]
    header = "step,t,E,dissipation,residual"
    fmt = ["%d", FLOAT_FMT, FLOAT_FMT, FLOAT_FMT, FLOAT_FMT]
    if setup.coupled.mode == "picard":
        iters = report.iterations if report is not None else 0
        cols.append(np.full(n_levels, iters, dtype=float))
        header += ",picard_iter"
        fmt.append("%d")
    np.savetxt(
        out / "energy.csv", np.column_stack(cols),
        delimiter=",", header=header, comments="", fmt=fmt,
    )

    X, Y = dom.node_grids()
    theta = result.theta_final.theta
    np.savetxt(
        out / "theta_final.csv",
        np.column_stack([X.ravel(), Y.ravel(), theta.ravel()]),
        delimiter=",", header="x,y,theta", comments="", fmt=FLOAT_FMT,
    )

    if setup.write_fields:
        pairs = list(zip(result.snapshots, result.theta_snapshots))
        if not pairs:
            pairs = [(result.final, result.theta_final)]
        for state, th in pairs:
            level = int(round(state.t / setup.coupled.dt_resolved)) \
                if setup.coupled.dt_resolved > 0 else 0
            bxn, byn = interp_b_to_nodes(state.Bx, state.By, dom)
            np.savetxt(
                out / f"fields_{level:06d}.csv",
                np.column_stack([
                    X.ravel(), Y.ravel(), state.Dz.ravel(),
                    bxn.ravel(), byn.ravel(), th.theta.ravel(),
                ]),
                delimiter=",", header="x,y,Dz,Bx,By,theta", comments="",
                fmt=FLOAT_FMT,
            )

    max_e = float(np.max(diag.energy)) if n_levels else 0.0
    bound = result.gronwall.value if result.gronwall is not None else None
    report_obj = {
        "version": __version__,
        "config": setup.echo,
        "n_steps": setup.coupled.n_steps,
        "dt": setup.coupled.dt_resolved,
        "gronwall_bound": bound,
        "max_energy": max_e,
        "energy_bound_satisfied": (bound is None or max_e <= bound),
        "picard": None if report is None else {
            "iterations": report.iterations,
            "converged": report.converged,
            "deltas": list(report.deltas),
            "contraction_ratios": list(report.contraction_ratios),
            "tol": report.tol,
        },
        "max_theta": result.theta_final.max_abs(),
        "wall_time_s": wall_time,
        "threads": setup.threads,
    }
    with open(out / "report.json", "w") as f:
        json.dump(report_obj, f, indent=2, sort_keys=True)
        f.write("\n")


# ---------------------------------------------------------------------------
# verify battery

def _verify_checks():
    """Yield (name, callable) quick self-checks; each returns a detail string."""
    from .heat_solver import HeatStepParams, heat_step
    from .maxwell_solver import dominant_frequency
    from .oracle import (
        radial_steady_exact,
        radial_steady_theta,
        square_torsion_center,
    )
    from .state import ThetaField, curl_B, curl_D
    from .domain import integrate_faces

    def check_sbp():
        rng = np.random.default_rng(7)
        worst = 0.0
        for kind, n in (("rectangle", 24), ("annulus", 32)):
            dom = build_domain(kind, n)
            for _ in range(20):
                dz = rng.standard_normal((dom.nx + 1, dom.ny + 1))
                dz[~dom.interior] = 0.0
                bx = rng.standard_normal((dom.nx + 1, dom.ny))
                by = rng.standard_normal((dom.nx, dom.ny + 1))
                lhs = integrate_nodal(curl_B(bx, by, dom) * dz, dom)
                gx, gy = curl_D(dz, dom)
                rhs = integrate_faces(bx * gx, by * gy, dom)
                scale = max(abs(lhs), abs(rhs), 1e-30)
                worst = max(worst, abs(lhs - rhs) / scale)
        if worst > 1e-12:
            raise AssertionError(f"summation-by-parts defect {worst:.2e} above 1e-12")
        return f"max relative defect {worst:.2e}"

    def check_areas():
        rect = build_domain("rectangle", 16)
        a1 = rect.area()
        if abs(a1 - 1.0) > 1e-13:
            raise AssertionError(f"rectangle area {a1!r} is not 1")
        ann = build_domain("annulus", 64)
        a2 = ann.area()
        if abs(a2 - math.pi) / math.pi > 0.02:
            raise AssertionError(f"annulus area {a2!r} deviates from pi by over 2%")
        return f"rectangle exact, annulus within {abs(a2 - math.pi) / math.pi:.2%} of pi"

    def check_cavity():
        from .coupled import run_monolithic as run_m
        setup = build_setup(_quick_preset("cavity_mode", 32, t_final=3.0))
        probe: list[float] = []
        ci, cj = setup.coupled.dom.nx // 2, setup.coupled.dom.ny // 2
        res = run_m(setup.coupled, on_step=lambda k, t, dz: probe.append(dz[ci, cj]))
        stag = res.diagnostics.staggered
        drift = float(np.max(np.abs(stag - stag[0]))) / stag[0]
        if drift > 1e-10:
            raise AssertionError(f"staggered energy drift {drift:.2e} above 1e-10")
        omega = dominant_frequency(np.asarray(probe), setup.coupled.dt_resolved)
        target = math.sqrt(2.0) * math.pi
        rel = abs(omega - target) / target
        if rel > 0.01:
            raise AssertionError(f"mode frequency off by {rel:.2%}")
        return f"energy drift {drift:.2e}, frequency error {rel:.2e}"

    def check_dissipative():
        from .coupled import run_monolithic as run_m
        setup = build_setup(_quick_preset("dissipative_cavity", 32, t_final=1.0))
        res = run_m(setup.coupled)
        stag = res.diagnostics.staggered
        increases = np.diff(stag) > 1e-12 * stag[0]
        if np.any(increases):
            raise AssertionError("staggered energy increased under sigma >= 0")
        return f"energy fell from {stag[0]:.6f} to {stag[-1]:.6f} monotonically"

    def check_zero():
        from .coupled import run_monolithic as run_m
        setup = build_setup(_quick_preset("zero_data", 16))
        res = run_m(setup.coupled)
        pieces = [
            res.final.Dz, res.final.Bx, res.final.By,
            res.theta_final.theta, res.energy.samples,
        ]
        if any(np.any(p != 0.0) for p in pieces):
            raise AssertionError("zero data produced nonzero output")
        return "all outputs exactly zero"

    def check_radial():
        rss = radial_steady_theta(1.0, 1.0, n_r=512)
        exact = radial_steady_exact(rss.r, 1.0, 1.0)
        err = float(np.max(np.abs(rss.theta - exact)))
        if err > 1e-6:
            raise AssertionError(f"radial solve disagrees with closed form by {err:.2e}")
        return f"max gap to closed form {err:.2e}"

    def check_torsion():
        fine = square_torsion_center(256)
        coarse = square_torsion_center(32)
        if not (0.0735 < fine < 0.0739):
            raise AssertionError(f"torsion center {fine!r} outside (0.0735, 0.0739)")
        if abs(fine - coarse) > 1e-3:
            raise AssertionError(f"torsion grid gap {abs(fine - coarse):.2e} above 1e-3")
        return f"center value {fine:.6f}"

    def check_heat():
        dom = build_domain("rectangle", 24)
        params = HeatStepParams(dt=0.05)
        th = ThetaField(np.zeros((dom.nx + 1, dom.ny + 1)), 0.0)
        for _ in range(200):
            th = heat_step(th, 1.0, params, 1.0, dom)
        center = th.theta[dom.nx // 2, dom.ny // 2]
        target = square_torsion_center(24)
        rel = abs(center - target) / target
        if rel > 1e-6:
            raise AssertionError(f"steady heat center off its own grid value by {rel:.2e}")
        return f"steady center matches the direct solve to {rel:.2e}"

    return [
        ("summation_by_parts", check_sbp),
        ("quadrature_areas", check_areas),
        ("cavity_conservation", check_cavity),
        ("dissipative_monotone", check_dissipative),
        ("zero_data", check_zero),
        ("radial_oracle", check_radial),
        ("torsion_oracle", check_torsion),
        ("heat_steady_state", check_heat),
    ]


def _quick_preset(name: str, n: int, t_final: float | None = None) -> dict:
    cfg = preset_config(name)
    cfg["domain"]["n"] = n
    if t_final is not None:
        cfg["time"]["T_final"] = t_final
    return cfg


def cmd_verify() -> int:
    failures = 0
    for name, check in _verify_checks():
        try:
            detail = check()
            print(f"PASS {name}: {detail}")
        except Exception as exc:  # noqa: BLE001 - report and keep going
            failures += 1
            print(f"FAIL {name}: {exc}")
    if failures:
        print(f"{failures} check(s) failed")
        return 3
    print("all checks passed")
    return 0


# ---------------------------------------------------------------------------
# entry points

def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maxheat",
        description="2-D microwave heating simulator with nonlocal coupling",
    )
    sub = parser.add_subparsers(dest="command")

    run_p = sub.add_parser("run", help="run a simulation from a config or preset")
    group = run_p.add_mutually_exclusive_group(required=True)
    group.add_argument("--config", help="path to a JSON config file")
    group.add_argument("--preset", help="name of a built-in scenario")
    run_p.add_argument("--n", type=int, default=None,
                       help="override the preset grid resolution")
    run_p.add_argument("--mode", choices=("monolithic", "picard"), default=None,
                       help="override the solver strategy")

    sub.add_parser("verify", help="run quick built-in self checks")
    sub.add_parser("list-presets", help="list built-in scenarios")
    return parser


def cmd_run(args) -> int:
    if args.config is not None:
        path = Path(args.config)
        try:
            with open(path) as f:
                cfg = json.load(f)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if args.n is not None or args.mode is not None:
            raise ConfigError("--n and --mode only apply to --preset runs")
        base_dir = path.parent
    else:
        cfg = preset_config(args.preset)
        if args.n is not None:
            cfg["domain"]["n"] = args.n
        if args.mode is not None:
            cfg["solver"]["mode"] = args.mode
        base_dir = Path(".")

    setup = build_setup(cfg, base_dir=base_dir)
    start = time.perf_counter()
    result, report = run_coupled(setup.coupled)
    wall = time.perf_counter() - start
    write_outputs(result, report, setup, wall)
    peak = float(np.max(result.diagnostics.energy))
    line = (
        f"completed {setup.coupled.n_steps} steps "
        f"(dt={setup.coupled.dt_resolved:.6g}) in {wall:.2f}s; "
        f"peak energy {peak:.6g}"
    )
    if report is not None:
        line += f"; picard iterations {report.iterations}"
    print(line)
    print(f"outputs written to {setup.out_dir}")
    return 0


def cmd_list_presets() -> int:
    for name in preset_names():
        print(f"{name:20s} {PRESET_DESCRIPTIONS[name]}")
    return 0


def main(argv=None) -> int:
    parser = create_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "verify":
            return cmd_verify()
        return cmd_list_presets()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except NonConvergenceError as exc:
        tail = ", ".join(f"{d:.3e}" for d in exc.deltas[-5:])
        print(f"non-convergence: {exc} (last deltas: {tail})", file=sys.stderr)
        return 4


def entry() -> None:
    sys.exit(main())
