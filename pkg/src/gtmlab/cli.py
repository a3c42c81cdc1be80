"""Command-line front end: config parsing, expression flags, and runs.

Every subcommand accepts its numeric flags as arithmetic expressions
(``--eta pi/gm``), optionally seeded from a TOML config file; flags
override file values.  Each run writes deterministic CSV/JSON data files
plus a ``manifest.json`` recording the resolved parameters, and every
CSV carries a ``#``-prefixed reference to that manifest.

Exit codes: 0 on success, 2 for configuration errors (bad expressions,
unknown or missing keys, invalid parameter domains), 3 for numerical
budget errors (band leakage, non-converging tables).  The default
output directory comes from ``--out``, else the ``GTMLAB_OUTDIR``
environment variable, else the working directory.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from ._emit import write_csv, write_json
from ._version import __version__
from .dynamics import (
    EnsembleSpec,
    PhasePoint,
    momentum_distribution,
    orbit_trace,
    simulate_ensemble,
)
from .expressions import ExpressionError, evaluate_expression
from .lattice import (
    OnSitePhaseGen,
    decay_profile,
    gtm_couplings,
    pseudorandomness_diagnostic,
    qkr_halfkick_couplings,
    qkr_tan_couplings,
)
from .pf import (
    band_distribution,
    delta_field,
    gaussian_field,
    harmonic_distribution,
    participation_number,
    pf_step,
    uniform_field,
)
from .potential import build_potential, kick_impulse, potential_value
from .recipes import (
    MANIFEST_NAME,
    RecipeError,
    recipe_names,
    rerun_manifest,
    run_recipe,
)
from .resonance import (
    angle_averaged_prediction,
    ballistic_coefficient,
    cycle_census,
    find_cycle,
    resonance_params,
)

__all__ = ["ConfigError", "RunConfig", "main", "parse_config"]

OUTDIR_ENV = "GTMLAB_OUTDIR"
_REQUIRED = object()


class ConfigError(ValueError):
    """Raised for unusable configuration input."""


@dataclass(frozen=True)
class RunConfig:
    """A fully resolved run: subcommand, evaluated parameters, plumbing."""

    subcommand: str
    params: dict
    out_dir: Path
    seed: int
    emit: str


@dataclass(frozen=True)
class _Param:
    name: str
    kind: str  # real | int | str | flag
    default: object = _REQUIRED
    choices: tuple | None = None
    help: str = ""


_SCHEMAS: dict[str, list[_Param]] = {
    "potential": [
        _Param("mu", "real", help="kick strength"),
        _Param("eta", "real", help="impulse quantum"),
        _Param("samples", "int", 1024, help="angle grid size"),
    ],
    "simulate": [
        _Param("mu", "real"),
        _Param("eta", "real"),
        _Param("p0", "real", 0.0, help="initial momentum (fixed mode)"),
        _Param("beta_average", "flag", False,
               help="draw p0 uniformly from [-eta/2, eta/2)"),
        _Param("points", "int", 2000),
        _Param("kicks", "int", 1000),
        _Param("window", "int", 100),
    ],
    "histogram": [
        _Param("mu", "real"),
        _Param("eta", "real"),
        _Param("p0", "real", 0.0),
        _Param("beta_average", "flag", False),
        _Param("points", "int", 20000),
        _Param("kicks", "int", 2000),
        _Param("window", "int", 100),
    ],
    "portrait": [
        _Param("mu", "real"),
        _Param("eta", "real"),
        _Param("orbits", "int", 12),
        _Param("steps", "int", 400),
        _Param("p_span", "real", math.pi, help="initial |p| range"),
    ],
    "resonance": [
        _Param("mu", "real"),
        _Param("P", "int"),
        _Param("Q", "int"),
        _Param("r", "int", 0),
        _Param("s", "int", 1),
        _Param("theta0", "real", 0.0),
        _Param("sample", "int", 0, help="census sample size (0 = exhaustive)"),
    ],
    "pf": [
        _Param("mu", "real"),
        _Param("eta", "real"),
        _Param("beta", "real", 0.0),
        _Param("grid", "int", 256),
        _Param("band", "int", 64),
        _Param("steps", "int", 200),
        _Param("state", "str", "gaussian",
               choices=("gaussian", "uniform", "delta")),
        _Param("center", "real", math.pi),
        _Param("width", "real", 0.5),
        _Param("cell", "int", 0),
        _Param("band_index", "int", 0),
        _Param("ordering", "str", "kick-then-shear",
               choices=("kick-then-shear", "shear-then-kick")),
    ],
    "lattice": [
        _Param("model", "str", choices=("gtm", "qkr-tan", "qkr-half")),
        _Param("mu", "real"),
        _Param("eta", "real", None),
        _Param("hbar", "real", None),
        _Param("beta", "real", 0.0),
        _Param("omega", "real", 0.0),
        _Param("max_dk", "int", 4096, help="harmonic cutoff (gtm)"),
        _Param("cutoff", "int", 32, help="offset cutoff (qkr tables)"),
        _Param("length", "int", 10000, help="diagnostic slice length"),
    ],
    "recipe": [
        _Param("name", "str", None, choices=tuple(recipe_names())),
        _Param("manifest", "str", None, help="re-run this manifest"),
        _Param("points", "int", None),
        _Param("kicks", "int", None),
    ],
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gtmlab",
        description="kicked maps with quantized piecewise-linear impulses",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="TOML config file")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int, help="RNG seed (default 0)")
    parser.add_argument("--format", choices=("csv", "json"), dest="emit",
                        help="table format (default csv)")
    subs = parser.add_subparsers(dest="subcommand", metavar="subcommand")
    for name, schema in _SCHEMAS.items():
        sub = subs.add_parser(name)
        for spec in schema:
            flag = "--" + spec.name.replace("_", "-")
            if spec.kind == "flag":
                sub.add_argument(flag, action="store_true", default=None,
                                 help=spec.help)
            else:
                sub.add_argument(flag, default=None, help=spec.help)
    return parser


def _load_file(path: str) -> dict:
    try:
        with open(path, "rb") as handle:
            return tomllib.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path}: {exc}") from exc


def _coerce(spec: _Param, raw, env: dict):
    key = spec.name
    if spec.kind == "flag":
        if isinstance(raw, bool):
            return raw
        raise ConfigError(f"key '{key}' expects true/false, got {raw!r}")
    if spec.kind == "str":
        if not isinstance(raw, str):
            raise ConfigError(f"key '{key}' expects a string, got {raw!r}")
        if spec.choices and raw not in spec.choices:
            raise ConfigError(
                f"key '{key}': '{raw}' is not one of {', '.join(spec.choices)}")
        return raw
    if isinstance(raw, str):
        value = evaluate_expression(raw, key, env)
    elif isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ConfigError(f"key '{key}' expects a number or expression, got {raw!r}")
    else:
        value = float(raw)
    if spec.kind == "int":
        if abs(value - round(value)) > 1e-9:
            raise ConfigError(f"key '{key}' must be an integer, got {value!r}")
        return int(round(value))
    return value


def parse_config(argv: list[str], config_file: str | None = None) -> RunConfig:
    """Resolve argv (plus an optional TOML file) into a RunConfig."""
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.subcommand is None:
        raise ConfigError("no subcommand given (see --help)")
    schema = _SCHEMAS[args.subcommand]
    names = [s.name for s in schema]

    file_data = _load_file(args.config or config_file) if (
        args.config or config_file) else {}
    scalars = {"out": str, "seed": int, "format": str}
    for key, value in file_data.items():
        if key in scalars:
            if not isinstance(value, scalars[key]):
                raise ConfigError(f"config key '{key}' has wrong type: {value!r}")
        elif key in _SCHEMAS:
            if not isinstance(value, dict):
                raise ConfigError(f"config key '{key}' must be a table")
        else:
            raise ConfigError(f"unknown config key '{key}'")

    merged: dict = {}
    for key, value in file_data.get(args.subcommand, {}).items():
        if key not in names:
            raise ConfigError(
                f"unknown key '{key}' for subcommand '{args.subcommand}' "
                f"(known: {', '.join(names)})")
        merged[key] = value
    for spec in schema:
        flag_value = getattr(args, spec.name)
        if flag_value is not None:
            merged[spec.name] = flag_value

    params: dict = {}
    env: dict = {}
    for spec in schema:
        if spec.name in merged:
            value = _coerce(spec, merged[spec.name], env)
        elif spec.default is _REQUIRED:
            raise ConfigError(
                f"missing required key '{spec.name}' for subcommand "
                f"'{args.subcommand}'")
        else:
            value = spec.default
        params[spec.name] = value
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            env[spec.name] = float(value)

    if args.emit is None:
        emit = file_data.get("format", "csv")
        if emit not in ("csv", "json"):
            raise ConfigError(f"unknown format '{emit}'")
    else:
        emit = args.emit
    out_dir = args.out or file_data.get("out") or os.environ.get(OUTDIR_ENV) or "."
    seed = args.seed if args.seed is not None else int(file_data.get("seed", 0))
    return RunConfig(subcommand=args.subcommand, params=params,
                     out_dir=Path(out_dir), seed=seed, emit=emit)


# ---------------------------------------------------------------------------
# subcommand bodies: each returns (tables, documents)


def _cmd_potential(cfg: RunConfig):
    p = cfg.params
    pot = build_potential(p["mu"], p["eta"])
    theta = np.linspace(0.0, 2.0 * math.pi, p["samples"] + 1)
    rows = [
        (float(t), float(v), float(s))
        for t, v, s in zip(theta, potential_value(pot, theta),
                           kick_impulse(pot, theta))
    ]
    return {"potential": (["theta", "potential", "slope"], rows)}, {}


def _ensemble_spec(p: dict, seed: int) -> EnsembleSpec:
    mode = "uniform" if p["beta_average"] else "fixed"
    return EnsembleSpec(size=p["points"], kicks=p["kicks"], seed=seed,
                        p0_mode=mode, p0_value=p["p0"], window=p["window"])


def _cmd_simulate(cfg: RunConfig):
    pot = build_potential(cfg.params["mu"], cfg.params["eta"])
    series = simulate_ensemble(pot, _ensemble_spec(cfg.params, cfg.seed))
    rows = [
        (int(t), float(a), float(b))
        for t, a, b in zip(series.times, series.mean_p2, series.windowed_mean_p2)
    ]
    return {"series": (["time", "mean_p2", "windowed_mean_p2"], rows)}, {}


def _cmd_histogram(cfg: RunConfig):
    pot = build_potential(cfg.params["mu"], cfg.params["eta"])
    hist = momentum_distribution(pot, _ensemble_spec(cfg.params, cfg.seed))
    rows = [
        (float(c), float(w))
        for c, w in zip(hist.centers, hist.probabilities) if w > 0.0
    ]
    return {"histogram": (["p", "probability"], rows)}, {}


def _cmd_portrait(cfg: RunConfig):
    p = cfg.params
    pot = build_potential(p["mu"], p["eta"])
    rng = np.random.Generator(np.random.Philox(key=cfg.seed))
    rows = []
    for orbit in range(p["orbits"]):
        start = PhasePoint(
            theta=float(rng.uniform(0.0, 2.0 * math.pi)),
            p=float(rng.uniform(-p["p_span"], p["p_span"])),
        )
        thetas, ps = orbit_trace(pot, start, p["steps"])
        rows.extend(
            (orbit, float(t), float(q)) for t, q in zip(thetas, ps))
    return {"portrait": (["orbit", "theta", "p"], rows)}, {}


def _cmd_resonance(cfg: RunConfig):
    p = cfg.params
    params = resonance_params(p["mu"], p["P"], p["Q"], r=p["r"], s=p["s"],
                              theta0=p["theta0"])
    census = cycle_census(params, sample=p["sample"] or None, seed=cfg.seed)
    cycle = find_cycle(params, params.r, 0)
    prediction = angle_averaged_prediction(p["mu"], p["P"], p["Q"],
                                           r=p["r"], s=p["s"])
    pair_rows = [
        (period, winding, count)
        for (period, winding), count in sorted(census.pairs.items())
    ]
    doc = {
        "parameters": {k: p[k] for k in ("mu", "P", "Q", "r", "s", "theta0")},
        "census": {
            "mode": census.mode,
            "states": census.states,
            "ballistic_fraction": census.ballistic_fraction,
            "mean_square_coefficient": census.mean_square_coefficient,
            "max_abs_coefficient": census.max_abs_coefficient,
            "max_period": census.max_period,
        },
        "cycle_at_origin": {
            "period": cycle.period,
            "angle_winding": cycle.angle_winding,
            "momentum_winding": cycle.momentum_winding,
            "coefficient": ballistic_coefficient(cycle, params),
        },
        "angle_averaged": {
            "mean_square_coefficient": prediction.mean_square_coefficient,
            "ballistic_fraction": prediction.ballistic_fraction,
        },
    }
    tables = {"cycles": (["period", "momentum_winding", "states"], pair_rows)}
    return tables, {"resonance": doc}


def _cmd_pf(cfg: RunConfig):
    p = cfg.params
    pot = build_potential(p["mu"], p["eta"])
    if p["state"] == "gaussian":
        field = gaussian_field(pot, p["beta"], p["grid"], p["band"],
                               center=p["center"], width=p["width"],
                               band=p["band_index"])
    elif p["state"] == "uniform":
        field = uniform_field(pot, p["beta"], p["grid"], p["band"])
    else:
        field = delta_field(pot, p["beta"], p["grid"], p["band"],
                            cell=p["cell"], band=p["band_index"])
    rows = []
    for t in range(p["steps"] + 1):
        harm = harmonic_distribution(field)
        _, band_w = band_distribution(field)
        rows.append((
            t,
            float(field.norm_squared),
            float(participation_number(harm.weights)),
            float(participation_number(band_w)),
        ))
        if t < p["steps"]:
            field = pf_step(field, ordering=p["ordering"])
    columns = ["time", "norm_squared", "harmonic_pn", "band_pn"]
    return {"evolution": (columns, rows)}, {}


def _cmd_lattice(cfg: RunConfig):
    p = cfg.params
    model = p["model"]
    if model == "gtm":
        if p["eta"] is None:
            raise ConfigError("missing required key 'eta' for lattice model gtm")
        table = gtm_couplings(build_potential(p["mu"], p["eta"]), p["max_dk"])
        scale = p["eta"]
    else:
        if p["hbar"] is None:
            raise ConfigError(
                f"missing required key 'hbar' for lattice model {model}")
        builder = qkr_tan_couplings if model == "qkr-tan" else qkr_halfkick_couplings
        table = builder(p["mu"], p["hbar"], cutoff=p["cutoff"])
        scale = p["hbar"]
    rows = []
    for i, dn in enumerate(table.dn_values):
        for j, dk in enumerate(table.dk_values):
            w = table.values[i, j]
            rows.append((int(dn), int(dk), float(w.real), float(w.imag),
                         float(abs(w)), float(np.angle(w))))
    tables = {"couplings": (["dn", "dk", "re", "im", "abs", "phase"], rows)}
    for axis in ("n", "k"):
        offsets, profile = decay_profile(table, axis)
        tables[f"decay_{axis}"] = (
            ["offset", "max_abs"],
            [(int(o), float(v)) for o, v in zip(offsets, profile)],
        )
    gen = OnSitePhaseGen(scale=scale, beta=p["beta"], omega=p["omega"])
    report = pseudorandomness_diagnostic(gen, length=p["length"])
    doc = {
        "model": model,
        "phase_parameters": {"scale": scale, "beta": p["beta"],
                             "omega": p["omega"], "length": p["length"]},
        "ks_threshold": report.ks_threshold,
        "autocorr_threshold": report.autocorr_threshold,
        "passed": report.passed,
        "slices": {
            s.label: {
                "ks_distance": s.ks_distance,
                "max_autocorrelation": s.max_autocorrelation,
            }
            for s in report.slices
        },
    }
    return tables, {"diagnostic": doc}


def _cmd_recipe(cfg: RunConfig):
    p = cfg.params
    if p["manifest"]:
        result = rerun_manifest(p["manifest"], cfg.out_dir)
    elif p["name"]:
        overrides = {k: p[k] for k in ("points", "kicks") if p[k] is not None}
        result = run_recipe(p["name"], cfg.out_dir, seed=cfg.seed,
                            overrides=overrides)
    else:
        raise ConfigError("recipe needs either --name or --manifest")
    written = [result.directory / f for f in result.outputs]
    written.append(result.manifest)
    return written


_COMMANDS = {
    "potential": _cmd_potential,
    "simulate": _cmd_simulate,
    "histogram": _cmd_histogram,
    "portrait": _cmd_portrait,
    "resonance": _cmd_resonance,
    "pf": _cmd_pf,
    "lattice": _cmd_lattice,
}


def _execute(cfg: RunConfig) -> list[Path]:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    if cfg.subcommand == "recipe":
        return _cmd_recipe(cfg)
    tables, documents = _COMMANDS[cfg.subcommand](cfg)
    manifest = {
        "subcommand": cfg.subcommand,
        "version": __version__,
        "seed": cfg.seed,
        "format": cfg.emit,
        "parameters": {k: v for k, v in cfg.params.items()},
    }
    written: list[Path] = []
    for name, (columns, rows) in tables.items():
        if cfg.emit == "csv":
            path = cfg.out_dir / f"{name}.csv"
            write_csv(path, columns, rows, manifest_name=MANIFEST_NAME)
        else:
            path = cfg.out_dir / f"{name}.json"
            write_json(path, {"columns": columns,
                              "rows": [list(r) for r in rows]})
        written.append(path)
    for name, payload in documents.items():
        path = cfg.out_dir / f"{name}.json"
        write_json(path, payload)
        written.append(path)
    manifest_path = cfg.out_dir / MANIFEST_NAME
    write_json(manifest_path, manifest)
    written.append(manifest_path)
    return written


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except (ConfigError, ExpressionError) as exc:
        print(f"gtmlab: config error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse --help (0) or usage error (2)
        return int(exc.code or 0)
    try:
        written = _execute(cfg)
    except (ConfigError, ExpressionError, RecipeError, ValueError) as exc:
        print(f"gtmlab: config error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:  # band leakage, non-converging tables
        print(f"gtmlab: numerical budget exceeded: {exc}", file=sys.stderr)
        return 3
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
