"""Command-line front end: identify / analyze / simulate / bench.

Every command accepts ``--config FILE`` pointing at a flat TOML-style
``key = value`` file supplying defaults; explicit flags win over the file.
A ``version`` key in the file must match this tool's major version.

Primary outputs (models, reports, data) are written atomically and are
byte-identical across reruns with the same inputs; wall-clock metadata is
quarantined in a ``run_info.json`` sidecar.

Exit codes: 0 ok, 2 I/O (missing/unreadable files), 3 parse (malformed
CSV/JSON), 4 numeric (identification or analysis failure), 5 configuration
(bad flags, policies, or specs).
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import analysis, bench, era, lti, okid, signals
from .errors import (
    BadDimension,
    DegeneratePencil,
    DimensionMismatch,
    EmptyFile,
    FrequencyOutOfRange,
    HorizonTooLong,
    InfeasibleSpec,
    InsufficientData,
    MissingChannel,
    NonUniformSampling,
    RankDeficientData,
    RankPolicyUnsatisfiable,
    ShapeMismatch,
    TooFewSamples,
    UnstableSystem,
    ZeroMatrix,
    ZeroNominal,
)

EXIT_OK = 0
EXIT_IO = 2
EXIT_PARSE = 3
EXIT_NUMERIC = 4
EXIT_CONFIG = 5

TOOL_MAJOR_VERSION = 1

_PARSE_ERRORS = (MissingChannel, NonUniformSampling, json.JSONDecodeError)
_NUMERIC_ERRORS = (
    UnstableSystem,
    InsufficientData,
    ZeroMatrix,
    TooFewSamples,
    RankDeficientData,
    DegeneratePencil,
    HorizonTooLong,
    np.linalg.LinAlgError,
)
_CONFIG_ERRORS = (
    RankPolicyUnsatisfiable,
    BadDimension,
    DimensionMismatch,
    ShapeMismatch,
    ZeroNominal,
    FrequencyOutOfRange,
    InfeasibleSpec,
    ValueError,
    KeyError,
)
_IO_ERRORS = (EmptyFile, OSError)


class ConfigError(Exception):
    """Bad run configuration (wrong version, missing keys, ...)."""


# --- config files -----------------------------------------------------------


def _parse_config_file(path: Path) -> dict:
    """Flat TOML-style ``key = value`` file: strings, numbers, booleans."""
    table: dict = {}
    for i, raw in enumerate(path.read_text(encoding="utf-8").splitlines()):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}: line {i + 1} is not 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if value.startswith(('"', "'")) and value.endswith(value[0]) and len(value) > 1:
            table[key] = value[1:-1]
        elif value in ("true", "false"):
            table[key] = value == "true"
        else:
            try:
                table[key] = int(value)
            except ValueError:
                try:
                    table[key] = float(value)
                except ValueError:
                    table[key] = value
    return table


def _check_version(tag) -> None:
    if int(tag) != TOOL_MAJOR_VERSION:
        raise ConfigError(
            f"config version {tag} does not match tool major version "
            f"{TOOL_MAJOR_VERSION}"
        )


def _merge_config(args: argparse.Namespace, keys: list[str]) -> dict:
    """Resolve run parameters: explicit flags win over the config file."""
    table: dict = {}
    if args.config is not None:
        path = Path(args.config)
        if not path.exists():
            raise FileNotFoundError(f"config file not found: {path}")
        table = _parse_config_file(path)
        if "version" in table:
            _check_version(table["version"])
    resolved = {}
    for key in keys:
        flag = getattr(args, key, None)
        resolved[key] = flag if flag is not None else table.get(key)
    return resolved


# --- deterministic output helpers -------------------------------------------


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _write_series_atomic(ts: signals.TimeSeries, path: Path) -> None:
    tmp = path.with_name(path.name + ".tmp")
    signals.save_timeseries(ts, tmp)
    os.replace(tmp, path)
    sidecar = tmp.with_name(tmp.stem + ".nominal.json")
    if sidecar.exists():
        os.replace(sidecar, path.with_name(path.stem + ".nominal.json"))


# --- identify ----------------------------------------------------------------


def cmd_identify(args: argparse.Namespace) -> int:
    cfg = _merge_config(
        args, ["data", "p", "s", "rank", "out", "discard_initial"]
    )
    if cfg["data"] is None or cfg["out"] is None:
        raise ConfigError("identify needs --data and --out")
    s = int(cfg["s"]) if cfg["s"] is not None else 10
    policy = era.RankPolicy.parse(cfg["rank"]) if cfg["rank"] else era.DEFAULT_RANK_POLICY
    p = int(cfg["p"]) if cfg["p"] is not None else None
    data = signals.load_timeseries(cfg["data"])
    result = okid.okid_era(
        data,
        p=p,
        s=s,
        policy=policy,
        discard_initial=bool(cfg["discard_initial"]),
    )
    out = Path(cfg["out"])
    diag_path = out.with_name(out.stem + ".diag.json")
    _write_atomic(out, _dump_json(result.model.to_dict()))
    _write_atomic(diag_path, _dump_json(result.diagnostics()))
    print(f"identified r={result.r} model -> {out} (diagnostics: {diag_path})")
    return EXIT_OK


# --- analyze ------------------------------------------------------------------


def _parse_freqs(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"--freqs wants lo:hi:n, got {text!r}")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if not (0 < lo < hi) or n < 2:
        raise ConfigError(f"bad frequency grid {text!r}")
    return np.geomspace(lo, hi, n)


def cmd_analyze(args: argparse.Namespace) -> int:
    cfg = _merge_config(args, ["models", "reference", "freqs", "out"])
    if not cfg["models"] or cfg["reference"] is None or cfg["out"] is None:
        raise ConfigError("analyze needs --models, --reference and --out")
    model_paths = [Path(p) for p in str(cfg["models"]).split(",") if p]
    models = [lti.load_model(p) for p in model_paths]
    names = [p.stem for p in model_paths]
    reference = signals.load_timeseries(cfg["reference"])
    freqs = _parse_freqs(cfg["freqs"]) if cfg["freqs"] else None
    reports = analysis.compare_models(
        models,
        reference,
        names=names,
        freqs=freqs,
        data_id=Path(str(cfg["reference"])).stem,
    )
    out = Path(cfg["out"])
    _write_atomic(out, _dump_json([r.to_dict() for r in reports]))
    for report in reports:
        analysis.report_to_csv(
            report, out.with_name(f"{out.stem}.{report.model_id}.csv")
        )
    print(f"analyzed {len(reports)} model(s) -> {out}")
    return EXIT_OK


# --- simulate -----------------------------------------------------------------


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _merge_config(args, ["model", "input", "out"])
    if cfg["model"] is None or cfg["input"] is None or cfg["out"] is None:
        raise ConfigError("simulate needs --model, --input and --out")
    model = lti.load_model(cfg["model"])
    record = signals.load_timeseries(cfg["input"])
    if record.n_inputs != model.n_inputs:
        raise DimensionMismatch(
            f"input file has {record.n_inputs} channels, model expects "
            f"{model.n_inputs}"
        )
    y = lti.simulate(model, record.inputs)
    out_series = signals.TimeSeries(
        sample_period=record.sample_period,
        inputs=record.inputs,
        outputs=y,
        input_names=record.input_names,
    )
    _write_series_atomic(out_series, Path(cfg["out"]))
    print(f"simulated {record.n_samples} samples -> {cfg['out']}")
    return EXIT_OK


# --- bench --------------------------------------------------------------------


def _identify_from_series(
    series: list[signals.TimeSeries],
    excitation: str,
    p: int | None,
    s: int,
    policy: era.RankPolicy,
) -> tuple[lti.StateSpaceModel, dict]:
    if excitation == "impulse":
        # stack the per-input impulse experiments into Markov blocks
        length = series[0].n_samples
        q = series[0].n_outputs
        blocks = np.empty((length, q, len(series)))
        for j, ts in enumerate(series):
            blocks[:, :, j] = ts.outputs
        markov = lti.MarkovSequence(blocks=blocks, dt=series[0].sample_period)
        hankel = era.build_hankel(markov, s)
        trunc = era.truncate_svd(hankel.H, policy)
        model = era._realize(hankel, trunc, markov.blocks[0])
        diagnostics = {
            "residual": None,
            "singular_values": [float(v) for v in trunc.singular_values],
            "r": trunc.r,
            "p": None,
            "s": s,
        }
        return model, diagnostics
    result = okid.okid_era(series[0], p=p, s=s, policy=policy)
    return result.model, result.diagnostics()


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = _merge_config(args, ["manifest", "out"])
    if cfg["manifest"] is None or cfg["out"] is None:
        raise ConfigError("bench needs --manifest and --out")
    manifest_path = Path(cfg["manifest"])
    with open(manifest_path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    _check_version(manifest.get("version", TOOL_MAJOR_VERSION))

    plant_spec = bench.PlantSpec.from_dict(manifest["plant"])
    exp = dict(manifest.get("experiment", {}))
    ident = dict(manifest.get("identify", {}))
    sweep = manifest.get("sweep", {"parameter": "seed", "values": [0]})
    parameter = sweep.get("parameter", "seed")
    values = sweep.get("values", [0])
    if parameter not in ("seed", "noise_std"):
        raise ConfigError(
            f"sweep parameter must be 'seed' or 'noise_std', got {parameter!r}"
        )

    excitation = exp.get("excitation", "prbs")
    length = int(exp.get("length", 2000))
    input_scale = float(exp.get("input_scale", 1.0))
    base_seed = int(exp.get("seed", 0))
    base_noise_seed = int(exp.get("noise_seed", 1))
    base_noise_std = float(exp.get("noise_std", 0.0))

    p = int(ident["p"]) if "p" in ident else None
    s = int(ident.get("s", 10))
    policy = (
        era.RankPolicy.parse(ident["rank"]) if "rank" in ident
        else era.DEFAULT_RANK_POLICY
    )

    plant = bench.generate_plant(plant_spec)
    truth = plant.model
    out_dir = Path(cfg["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_atomic(out_dir / "manifest.json", _dump_json(manifest))

    summary_runs = []
    for idx, value in enumerate(values):
        run_dir = out_dir / f"run-{idx:03d}"
        run_dir.mkdir(exist_ok=True)
        seed = int(value) if parameter == "seed" else base_seed
        noise_seed = int(value) + 1 if parameter == "seed" else base_noise_seed
        noise_std = base_noise_std if parameter == "seed" else float(value)
        noise = None
        if noise_std > 0:
            noise = signals.NoiseSpec(
                std=np.full(truth.n_outputs, noise_std), seed=noise_seed
            )
        series = bench.run_experiment(
            truth,
            excitation=excitation,
            length=length,
            noise=noise,
            seed=seed,
            input_scale=input_scale,
        )
        for j, ts in enumerate(series):
            _write_series_atomic(ts, run_dir / f"data-{j:03d}.csv")
        model, diagnostics = _identify_from_series(
            series, excitation, p, s, policy
        )
        _write_atomic(run_dir / "model.json", _dump_json(model.to_dict()))
        _write_atomic(run_dir / "diagnostics.json", _dump_json(diagnostics))

        eig_error = None
        if model.n_states == truth.n_states:
            eig_error = analysis.eigenvalue_error(
                np.linalg.eigvals(model.A), plant.eigenvalues
            )
        report = analysis.compare_models(
            [model], series[0], names=["identified"], data_id=f"run-{idx:03d}"
        )[0]
        run_report = {
            "sweep_parameter": parameter,
            "sweep_value": value,
            "eigenvalue_error": eig_error,
            "r": diagnostics["r"],
            "report": report.to_dict(),
        }
        _write_atomic(run_dir / "report.json", _dump_json(run_report))
        summary_runs.append(
            {
                "run": f"run-{idx:03d}",
                "value": value,
                "eigenvalue_error": eig_error,
                "r": diagnostics["r"],
            }
        )

    summary = {
        "name": manifest.get("name", manifest_path.stem),
        "plant": plant_spec.to_dict(),
        "truth_eigenvalues": [
            [float(z.real), float(z.imag)] for z in np.sort_complex(plant.eigenvalues)
        ],
        "static_gain_condition": plant.static_gain_condition,
        "sweep_parameter": parameter,
        "runs": summary_runs,
    }
    _write_atomic(out_dir / "summary.json", _dump_json(summary))
    # wall-clock and host metadata live only here, off the determinism surface
    info = {
        "written_at_unix": time.time(),
        "host": platform.node(),
        "platform": platform.platform(),
    }
    (out_dir / "run_info.json").write_text(_dump_json(info), encoding="utf-8")
    print(f"bench sweep of {len(values)} run(s) -> {out_dir}")
    return EXIT_OK


# --- entry point --------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="okidera",
        description="Identify reduced-order state-space models from I/O data "
        "and analyze their quality.",
        epilog="exit codes: 0 ok, 2 io, 3 parse, 4 numeric, 5 config",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_id = sub.add_parser("identify", help="OKID-ERA identification from a CSV record")
    p_id.add_argument("--data", help="input/output CSV file")
    p_id.add_argument("--p", type=int, help="observer horizon")
    p_id.add_argument("--s", type=int, help="Hankel block rows")
    p_id.add_argument("--rank", help="rank policy: r=N | energy=TAU | gap")
    p_id.add_argument("--out", help="model JSON output path")
    p_id.add_argument(
        "--discard-initial",
        dest="discard_initial",
        action="store_const",
        const=True,
        help="drop the first p regression columns instead of zero-padding",
    )
    p_id.add_argument("--config", help="TOML-style key=value defaults file")
    p_id.set_defaults(handler=cmd_identify)

    p_an = sub.add_parser("analyze", help="score models against a reference record")
    p_an.add_argument("--models", help="comma-separated model JSON paths")
    p_an.add_argument("--reference", help="reference CSV (with nominal sidecar)")
    p_an.add_argument("--freqs", help="condition sweep grid lo:hi:n (rad/s)")
    p_an.add_argument("--out", help="report JSON output path")
    p_an.add_argument("--config", help="TOML-style key=value defaults file")
    p_an.set_defaults(handler=cmd_analyze)

    p_sim = sub.add_parser("simulate", help="simulate a model on an input record")
    p_sim.add_argument("--model", help="model JSON path")
    p_sim.add_argument("--input", help="input CSV file")
    p_sim.add_argument("--out", help="output CSV path")
    p_sim.add_argument("--config", help="TOML-style key=value defaults file")
    p_sim.set_defaults(handler=cmd_simulate)

    p_bench = sub.add_parser("bench", help="manifest-driven benchmark sweep")
    p_bench.add_argument("--manifest", help="sweep manifest JSON")
    p_bench.add_argument("--out", help="output directory")
    p_bench.add_argument("--config", help="TOML-style key=value defaults file")
    p_bench.set_defaults(handler=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.handler(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except _PARSE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except _NUMERIC_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _IO_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # no tracebacks reach the user
        print(f"error (internal): {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
