"""Canned figure-style runs with reproducible manifests.

Each recipe executes one module pipeline at desk-scale defaults and
writes plot-ready CSV files plus a JSON manifest recording the recipe
name, package version, seed, resolved parameters, output hashes, and
wall time.  Re-running a manifest reproduces the data files byte for
byte: every data file is deterministic given (parameters, seed), and the
only non-reproducible values (wall time, hashes) live in the manifest.

Recipes:

* fig1            -- kick potential and its slope on a fine angle grid
* fig2, fig3      -- momentum spreading curves for three fixed offsets
                     and one offset-averaged ensemble (fig3: stronger kick)
* fig4            -- late-time momentum distribution, offset-averaged
* pf-spread       -- transfer-operator run: norm and participation numbers
* resonance-demo  -- exact cycle census and prediction at a commensurate
                     spacing, cross-checked against an ensemble fit
"""

from __future__ import annotations

import hashlib
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._emit import write_csv, write_json
from ._version import __version__
from .dynamics import (
    EnsembleSpec,
    growth_exponent,
    momentum_distribution,
    simulate_ensemble,
)
from .expressions import GOLDEN_MEAN
from .pf import (
    band_distribution,
    gaussian_field,
    harmonic_distribution,
    participation_number,
    pf_step,
)
from .potential import build_potential, kick_impulse, potential_value
from .resonance import (
    angle_averaged_prediction,
    ballistic_coefficient,
    find_cycle,
    resonance_params,
)

__all__ = ["RecipeError", "RecipeResult", "recipe_names", "rerun_manifest", "run_recipe"]

MANIFEST_NAME = "manifest.json"


class RecipeError(ValueError):
    """Raised for unknown recipes or invalid overrides."""


@dataclass(frozen=True)
class RecipeResult:
    name: str
    directory: Path
    manifest: Path
    outputs: tuple[str, ...]


def _spreading_curves(mu: float, eta: float, points: int, kicks: int,
                      window: int, seed: int):
    pot = build_potential(mu, eta)
    starts = [
        ("p0_half_eta", "fixed", eta / 2.0),
        ("p0_eta_sqrt2", "fixed", eta / math.sqrt(2.0)),
        ("p0_pi_sqrt3", "fixed", math.pi / math.sqrt(3.0)),
        ("beta_averaged", "uniform", 0.0),
    ]
    columns = ["time"]
    series = []
    times = None
    for i, (label, mode, value) in enumerate(starts):
        spec = EnsembleSpec(size=points, kicks=kicks, seed=seed + i,
                            p0_mode=mode, p0_value=value, window=window)
        result = simulate_ensemble(pot, spec)
        times = result.times
        columns.append(label)
        series.append(result.mean_p2)
    rows = [
        [int(t)] + [float(s[i]) for s in series] for i, t in enumerate(times)
    ]
    return {"spreading.csv": (columns, rows)}, {}


def _fig1(params, seed):
    pot = build_potential(params["mu"], params["eta"])
    samples = int(params["samples"])
    theta = np.linspace(0.0, 2.0 * math.pi, samples + 1)
    v = potential_value(pot, theta)
    slope = kick_impulse(pot, theta)
    rows = [
        (float(t), float(a), float(b)) for t, a, b in zip(theta, v, slope)
    ]
    return {"potential.csv": (["theta", "potential", "slope"], rows)}, {}


def _fig2(params, seed):
    return _spreading_curves(params["mu"], params["eta"], int(params["points"]),
                             int(params["kicks"]), int(params["window"]), seed)


def _fig4(params, seed):
    pot = build_potential(params["mu"], params["eta"])
    spec = EnsembleSpec(size=int(params["points"]), kicks=int(params["kicks"]),
                        seed=seed, p0_mode="uniform", window=int(params["window"]))
    hist = momentum_distribution(pot, spec)
    rows = [
        (float(p), float(w))
        for p, w in zip(hist.centers, hist.probabilities)
        if w > 0.0
    ]
    return {"histogram.csv": (["p", "probability"], rows)}, {}


def _pf_spread(params, seed):
    pot = build_potential(params["mu"], params["eta"])
    field = gaussian_field(pot, params["beta"], int(params["grid"]),
                           int(params["band"]), center=params["center"],
                           width=params["width"])
    rows = []
    for t in range(int(params["steps"]) + 1):
        harm = harmonic_distribution(field)
        _, band_w = band_distribution(field)
        rows.append((
            t,
            float(field.norm_squared),
            float(participation_number(harm.weights)),
            float(participation_number(band_w)),
        ))
        if t < int(params["steps"]):
            field = pf_step(field)
    columns = ["time", "norm_squared", "harmonic_pn", "band_pn"]
    return {"pf_spread.csv": (columns, rows)}, {}


def _resonance_demo(params, seed):
    mu = params["mu"]
    P, Q = int(params["P"]), int(params["Q"])
    prediction = angle_averaged_prediction(mu, P, Q)
    sample = resonance_params(mu, P, Q, theta0=params["sample_theta0"])
    cycle = find_cycle(sample, 0, 0)
    pot = build_potential(mu, 2.0 * math.pi * P / Q)
    spec = EnsembleSpec(size=int(params["points"]), kicks=int(params["kicks"]),
                        seed=seed, p0_mode="fixed", p0_value=0.0,
                        window=int(params["window"]))
    result = simulate_ensemble(pot, spec)
    t_lo = float(params["fit_start"])
    exponent = growth_exponent(result.times, result.mean_p2, t_lo, result.times[-1])
    late = result.times >= t_lo
    coefficient = float(np.mean(
        result.mean_p2[late] / result.times[late].astype(float) ** 2))
    doc = {
        "prediction": {
            "mean_square_coefficient": prediction.mean_square_coefficient,
            "ballistic_fraction": prediction.ballistic_fraction,
        },
        "sample_cycle": {
            "theta0": params["sample_theta0"],
            "period": cycle.period,
            "angle_winding": cycle.angle_winding,
            "momentum_winding": cycle.momentum_winding,
            "coefficient": ballistic_coefficient(cycle, sample),
        },
        "ensemble": {
            "exponent": exponent,
            "coefficient": coefficient,
            "coefficient_ratio": coefficient / prediction.mean_square_coefficient,
        },
    }
    rows = [(int(t), float(v)) for t, v in zip(result.times, result.mean_p2)]
    return {"spreading.csv": (["time", "mean_p2"], rows)}, {"resonance.json": doc}


_ETA_GOLDEN = math.pi / GOLDEN_MEAN

_RECIPES = {
    "fig1": ({"mu": 3.0, "eta": 1.2, "samples": 2048}, _fig1),
    "fig2": ({"mu": 3.0, "eta": _ETA_GOLDEN, "points": 5000, "kicks": 2000,
              "window": 100}, _fig2),
    "fig3": ({"mu": 4.0, "eta": _ETA_GOLDEN, "points": 5000, "kicks": 2000,
              "window": 100}, _fig2),
    "fig4": ({"mu": 4.0, "eta": _ETA_GOLDEN, "points": 30000, "kicks": 2000,
              "window": 100}, _fig4),
    "pf-spread": ({"mu": 3.0, "eta": _ETA_GOLDEN,
                   "beta": _ETA_GOLDEN / math.sqrt(2.0), "grid": 256,
                   "band": 64, "steps": 200, "center": math.pi,
                   "width": 0.5}, _pf_spread),
    "resonance-demo": ({"mu": 3.0, "P": 1, "Q": 3, "points": 100000,
                        "kicks": 3000, "window": 100, "fit_start": 300,
                        "sample_theta0": 1.57}, _resonance_demo),
}


def recipe_names() -> tuple[str, ...]:
    return tuple(_RECIPES)


def run_recipe(name: str, out_dir, seed: int = 0,
               overrides: dict | None = None) -> RecipeResult:
    """Execute one recipe into ``out_dir``/``name`` and write its manifest."""
    if name not in _RECIPES:
        known = ", ".join(sorted(_RECIPES))
        raise RecipeError(f"unknown recipe '{name}' (known: {known})")
    defaults, fn = _RECIPES[name]
    params = dict(defaults)
    for key, value in (overrides or {}).items():
        if key not in defaults:
            raise RecipeError(
                f"recipe '{name}' has no parameter '{key}' "
                f"(known: {', '.join(sorted(defaults))})")
        params[key] = type(defaults[key])(value)
    directory = Path(out_dir) / name
    directory.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    tables, documents = fn(params, seed)
    outputs = {}
    for filename, (columns, rows) in tables.items():
        write_csv(directory / filename, columns, rows, manifest_name=MANIFEST_NAME)
        outputs[filename] = _sha256(directory / filename)
    for filename, payload in documents.items():
        write_json(directory / filename, payload)
        outputs[filename] = _sha256(directory / filename)
    manifest = {
        "recipe": name,
        "version": __version__,
        "seed": seed,
        "parameters": params,
        "outputs": outputs,
        "wall_time_s": round(time.perf_counter() - start, 3),
    }
    manifest_path = directory / MANIFEST_NAME
    write_json(manifest_path, manifest)
    return RecipeResult(name=name, directory=directory, manifest=manifest_path,
                        outputs=tuple(sorted(outputs)))


def rerun_manifest(manifest_path, out_dir) -> RecipeResult:
    """Re-execute the run recorded in a manifest (same parameters and seed)."""
    import json

    path = Path(manifest_path)
    try:
        stored = json.loads(path.read_text())
        name = stored["recipe"]
        seed = int(stored["seed"])
        params = dict(stored["parameters"])
    except (OSError, ValueError, KeyError) as exc:
        raise RecipeError(f"cannot read manifest {path}: {exc}") from exc
    return run_recipe(name, out_dir, seed=seed, overrides=params)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()
