"""Command-line runner: ``fraclap run``, ``fraclap list`` and ``fraclap suite``.

Exit codes: 0 when every verdict is PASS, 1 otherwise, 2 on a configuration
error.  Configuration files are flat ``key = value`` lines (a TOML subset)::

    experiment = "exp_boundary_behavior"
    s = 0.25
    N = 2048
    out = "results"
    format = "both"
    tol.exponent_max = 1.3

Command-line flags override the file.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .harness import EXPERIMENTS, PASS, ExperimentReport, UnknownTolerance, run_experiment

FORMATS = ("json", "csv", "both")


class InvalidConfig(ValueError):
    pass


class UnknownExperiment(InvalidConfig):
    pass


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    s: float | None = None
    n: int | None = None
    N: int | None = None
    tolerances: dict = field(default_factory=dict)
    output_dir: Path = Path("fraclap-results")
    format: str = "both"

    def validate(self) -> "RunConfig":
        if self.experiment not in EXPERIMENTS:
            raise UnknownExperiment(
                f"unknown experiment {self.experiment!r}; `fraclap list` shows the registered ones"
            )
        if self.s is not None and not 0.0 < self.s < 1.0:
            raise InvalidConfig("s must be in (0,1)")
        if self.n is not None and self.n not in (1, 2):
            raise InvalidConfig("n must be 1 or 2")
        if self.N is not None and (self.N < 32 or self.N > 4096 or self.N & (self.N - 1)):
            raise InvalidConfig("N must be a power of two in [32, 4096]")
        if self.format not in FORMATS:
            raise InvalidConfig(f"format must be one of {', '.join(FORMATS)}")
        accepted = EXPERIMENTS[self.experiment].defaults
        for key in ("s", "n", "N"):
            if getattr(self, key) is not None and key not in accepted:
                raise InvalidConfig(f"{self.experiment} does not take {key}; it takes {sorted(accepted)}")
        return self

    def params(self) -> dict:
        return {k: getattr(self, k) for k in ("s", "n", "N") if getattr(self, k) is not None}


def _parse_value(text):
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            pass
    return text


def parse_config(text: str) -> dict:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfig(f"config line {lineno}: expected key = value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise InvalidConfig(f"config line {lineno}: empty key")
        out[key] = _parse_value(value)
    return out


_FILE_KEYS = {"experiment", "s", "n", "N", "out", "format"}


def build_config(file_values: dict, experiment: str | None = None, **flags) -> RunConfig:
    values = dict(file_values)
    tolerances = {}
    for key in list(values):
        if key.startswith("tol."):
            v = values.pop(key)
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise InvalidConfig(f"tolerance {key} must be a number")
            tolerances[key[4:]] = float(v)
        elif key not in _FILE_KEYS:
            raise InvalidConfig(f"unknown config key {key!r}; known: {sorted(_FILE_KEYS)} and tol.<name>")
    if experiment is not None:
        values["experiment"] = experiment
    for key, v in flags.items():
        if v is not None:
            values[key] = v
    if "experiment" not in values:
        raise InvalidConfig("no experiment given")
    try:
        s = None if values.get("s") is None else float(values["s"])
        n = None if values.get("n") is None else int(values["n"])
        N = None if values.get("N") is None else int(values["N"])
    except (TypeError, ValueError) as exc:
        raise InvalidConfig(f"bad numeric value: {exc}") from exc
    return RunConfig(
        experiment=str(values["experiment"]),
        s=s,
        n=n,
        N=N,
        tolerances=tolerances,
        output_dir=Path(values.get("out", "fraclap-results")),
        format=str(values.get("format", "both")),
    ).validate()


def _plain(obj):
    """Recursively convert numpy scalars/arrays to JSON-safe Python values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def _write_csv(path: Path, series) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x ({series.x_label})", f"y ({series.y_label})"])
        for a, b in zip(np.asarray(series.x, dtype=float), np.asarray(series.y, dtype=float)):
            w.writerow([f"{a:.17g}", f"{b:.17g}"])


def write_report(report: ExperimentReport, out: Path, fmt: str = "both", timestamp: bool = True) -> dict:
    """Write ``report.json`` and/or one CSV per series into ``out``; returns the JSON document."""
    out.mkdir(parents=True, exist_ok=True)
    files = {}
    if fmt in ("csv", "both"):
        for label in sorted(report.series):
            name = f"{label}.csv"
            _write_csv(out / name, report.series[label])
            files[label] = name
    params = dict(report.params)
    params["provenance"] = {"package": "fraclap", "version": __version__}
    if timestamp:
        params["provenance"]["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    doc = _plain({
        "name": report.name,
        "params": params,
        "metrics": report.metrics,
        "verdict": report.verdict,
        "series_files": files,
        "tolerances": report.tolerances,
    })
    if fmt in ("json", "both"):
        (out / "report.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return doc


def run(config: RunConfig, timestamp: bool = True, stream=None) -> int:
    stream = stream or sys.stdout
    report = run_experiment(config.experiment, tolerances=config.tolerances, **config.params())
    write_report(report, config.output_dir, config.format, timestamp)
    print(f"{report.name}: {report.verdict}", file=stream)
    for name, entry in report.tolerances.items():
        if not entry["met"]:
            kind = "hard" if entry["hard"] else "soft"
            print(f"  {name} ({kind}): observed {entry['observed']!r}, tolerance {entry['value']!r}", file=stream)
    print(f"  written to {config.output_dir}", file=stream)
    return 0 if report.verdict == PASS else 1


def list_experiments() -> str:
    lines = []
    for name, exp in EXPERIMENTS.items():
        defaults = ", ".join(f"{k}={v}" for k, v in exp.defaults.items())
        lines.append(f"{name:24s} {exp.summary}  [{defaults}]")
    return "\n".join(lines)


def suite(out: Path, timestamp: bool = True, stream=None) -> int:
    stream = stream or sys.stdout
    rows = []
    for name in EXPERIMENTS:
        report = run_experiment(name)
        write_report(report, out / name, "both", timestamp)
        rows.append((name, report.verdict))
    summary = {"experiments": dict(rows), "all_pass": all(v == PASS for _, v in rows)}
    (out / "suite.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    width = max(len(n) for n, _ in rows)
    print(f"{'experiment':{width}s}  verdict", file=stream)
    for name, verdict in rows:
        print(f"{name:{width}s}  {verdict}", file=stream)
    return 0 if summary["all_pass"] else 1


def _parser():
    p = argparse.ArgumentParser(prog="fraclap", description="Fractional Laplacian experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one experiment")
    r.add_argument("experiment", nargs="?", help="experiment name (see `fraclap list`)")
    r.add_argument("--s", type=float, help="order s in (0, 1)")
    r.add_argument("--n", type=int, help="dimension, 1 or 2")
    r.add_argument("--N", type=int, help="grid cells, a power of two in [32, 4096]")
    r.add_argument("--config", type=Path, help="key = value config file; flags override it")
    r.add_argument("--out", type=Path, help="output directory (default fraclap-results)")
    r.add_argument("--format", choices=FORMATS, help="what to write (default both)")
    r.add_argument("--no-timestamp", action="store_true", help="omit generated_at for byte-stable output")
    sub.add_parser("list", help="list registered experiments")
    su = sub.add_parser("suite", help="run every experiment with default parameters")
    su.add_argument("--out", type=Path, default=Path("fraclap-suite"))
    su.add_argument("--no-timestamp", action="store_true", help="omit generated_at for byte-stable output")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list":
        print(list_experiments())
        return 0
    if args.command == "suite":
        return suite(args.out, timestamp=not args.no_timestamp)
    try:
        file_values = {}
        if args.config is not None:
            try:
                file_values = parse_config(args.config.read_text(encoding="utf-8"))
            except OSError as exc:
                raise InvalidConfig(f"cannot read config: {exc}") from exc
        config = build_config(file_values, args.experiment, s=args.s, n=args.n, N=args.N,
                              out=args.out, format=args.format)
        return run(config, timestamp=not args.no_timestamp)
    except (InvalidConfig, UnknownTolerance) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        print(f"fraclap: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
