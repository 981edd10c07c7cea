"""Command-line front end.

Subcommands: ``simulate``, ``sweep``, ``validate``, ``bounds``.
Exit codes: 0 success, 2 config error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

from .config import ConfigError, ScenarioConfig, load_config, with_values
from .dynamics import IntegrationError, run_protocol
from .linalg import ValidationError
from .metrics import max_flight_time, metrics_report
from .model import TruncationError, bell_state
from .validation import compare_field_states

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
RECORD_FIELDS = ("concurrence", "fef", "fef_oracle", "teleport_fidelity", "fidelity_to_bell")
BOUND_FIELDS = ("gamma", "gamma_p", "velocity", "t_max", "distance_max")


class NumericalFailure(RuntimeError):
    pass


def evaluate(cfg: ScenarioConfig):
    """Protocol run plus metrics for one scenario; shared by simulate and sweep."""
    try:
        result = run_protocol(cfg.protocol, cfg.channel, cfg.mode, cfg.coherence, cfg.dt)
        report = metrics_report(result.final_two_ion_state, cfg.oracle_samples, cfg.seed, cfg.oracle_enabled)
    except (IntegrationError, ValidationError, TruncationError, FloatingPointError) as exc:
        raise NumericalFailure(str(exc)) from exc
    record = {
        "concurrence": report.concurrence,
        "fef": report.fef,
        "fef_oracle": report.fef_oracle if cfg.oracle_enabled else None,
        "teleport_fidelity": report.teleport_fidelity,
        "fidelity_to_bell": result.final_two_ion_state.fidelity_to_pure(bell_state()),
    }
    return result, report, record


def _json_float(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")


def _csv_float(x) -> str:
    if x is None:
        return ""
    x = float(x)
    return f"{x:.12g}" if math.isfinite(x) else ("inf" if x > 0 else "nan")


def dump_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def dump_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_float(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


def _record_columns(cfg: ScenarioConfig) -> list[str]:
    return [c for c in RECORD_FIELDS if cfg.oracle_enabled or c != "fef_oracle"]


def simulate_document(cfg: ScenarioConfig) -> dict:
    result, report, record = evaluate(cfg)
    rho = result.final_two_ion_state.matrix
    return {
        "mode": cfg.mode,
        "coherence": cfg.coherence,
        "protocol": {k: getattr(cfg.protocol, k) for k in ("lambda1", "lambda2", "tA", "tB")},
        "channel": {k: getattr(cfg.channel, k) for k in ("gamma", "gamma_p", "t_flight")},
        "final_state": {
            "layout": list(result.final_two_ion_state.layout.labels),
            "real": rho.real.tolist(),
            "imag": rho.imag.tolist(),
        },
        "checkpoints": {label: value for label, value in result.checkpoints},
        "metrics": {**{k: _json_float(record[k]) for k in _record_columns(cfg)}, "classical_beaten": report.classical_beaten},
    }


def sweep_rows(cfg: ScenarioConfig, jobs: int = 1) -> tuple[list[str], list[list]]:
    axes = cfg.sweep or ()
    names = [a.name for a in axes]
    grid = list(itertools.product(*[a.values() for a in axes]))

    def one(point):
        return evaluate(with_values(cfg, dict(zip(names, point))))[2]

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(one, grid))
    else:
        records = [one(p) for p in grid]
    columns = _record_columns(cfg)
    rows = [list(point) + [rec[c] for c in columns] for point, rec in zip(grid, records)]
    return names + columns, rows


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(args) -> ScenarioConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if getattr(args, "format", None):
        cfg = replace(cfg, output_format=args.format)
    if getattr(args, "output", None):
        cfg = replace(cfg, output_path=args.output)
    return cfg


def cmd_simulate(args) -> int:
    cfg = _load(args)
    if cfg.output_format == "csv":
        header, rows = sweep_rows(replace(cfg, sweep=()))
        _emit(dump_csv(header, rows), cfg.output_path)
    else:
        _emit(dump_json(simulate_document(cfg)), cfg.output_path)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args)
    if not cfg.sweep:
        raise ConfigError("missing required section 'sweep'")
    header, rows = sweep_rows(cfg, args.jobs)
    if cfg.output_format == "json":
        doc = [dict(zip(header, (_json_float(v) for v in row))) for row in rows]
        _emit(dump_json(doc), cfg.output_path)
    else:
        _emit(dump_csv(header, rows), cfg.output_path)
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = _load(args)
    if cfg.full_model is None:
        raise ConfigError("missing required section 'full_model'")
    try:
        comparison = compare_field_states(cfg.full_model, list(cfg.field_states), omega_qubit=cfg.omega_qubit)
    except (ValidationError, TruncationError, FloatingPointError) as exc:
        raise NumericalFailure(str(exc)) from exc
    doc = comparison.as_dict()
    doc["regime_warnings"] = cfg.full_model.regime_warnings()
    _emit(dump_json(_clean(doc)), cfg.output_path)
    return EXIT_OK


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float):
        return _json_float(obj)
    return obj


def _float_list(text: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values or any(v < 0 or not math.isfinite(v) for v in values):
        raise argparse.ArgumentTypeError(f"rates must be finite and nonnegative, got {text!r}")
    return values


def bound_rows(gammas, gammas_p, velocity, model="additive") -> list[list]:
    rows = []
    for g, gp in itertools.product(gammas, gammas_p):
        b = max_flight_time(g, gp, velocity, model)
        rows.append([g, gp, velocity, b.t_max, b.distance_max])
    return rows


def cmd_bounds(args) -> int:
    rows = bound_rows(args.gamma, args.gamma_p, args.velocity, args.coherence)
    fmt = args.format or "text"
    if fmt == "csv":
        text = dump_csv(list(BOUND_FIELDS), rows)
    elif fmt == "json":
        doc = [dict(zip(BOUND_FIELDS, (_json_float(v) for v in row))) for row in rows]
        text = dump_json(doc if len(doc) > 1 else doc[0])
    else:
        lines = []
        for g, gp, v, t, d in rows:
            line = f"gamma={g:g} 1/s gamma_p={gp:g} 1/s  t_max={_fmt_time(t)}"
            if v is not None:
                line += f"  distance_max={_csv_float(d)} m (v={v:g} m/s)"
            lines.append(line)
        text = "\n".join(lines) + "\n"
    _emit(text, args.output)
    return EXIT_OK


def _fmt_time(t: float) -> str:
    if math.isinf(t):
        return "inf"
    return f"{t:.12g} s ({t * 1e3:.4f} ms)"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flyingbell", description="Flying-atom Bell-state protocol: simulation, sweeps, model checks, bounds.")
    parser.add_argument("--seed", type=int, default=None, help="override the FEF oracle seed")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, func, help_ in (
        ("simulate", cmd_simulate, "run the protocol once and report the final state and metrics"),
        ("sweep", cmd_sweep, "evaluate metrics over the config's sweep grid"),
        ("validate", cmd_validate, "compare the full cavity model with the exchange model"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True)
        p.add_argument("--output", default=None)
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
        if name == "sweep":
            p.add_argument("--jobs", type=int, default=1)
        p.set_defaults(func=func)

    b = sub.add_parser("bounds", help="maximal flight time / distance keeping F >= 1/2")
    b.add_argument("--gamma", type=_float_list, required=True, help="decay rate(s) in 1/s, comma-separated for a table")
    b.add_argument("--gamma-p", type=_float_list, default=[0.0], help="dephasing rate(s) in 1/s")
    b.add_argument("--velocity", type=float, default=None, help="atom speed in m/s")
    b.add_argument("--coherence", choices=("additive", "lindblad"), default="additive")
    b.add_argument("--format", choices=("text", "csv", "json"), default=None)
    b.add_argument("--output", default=None)
    b.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    b.set_defaults(func=cmd_bounds)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
