"""Command-line front end: run a verification suite and emit its report.

Exit status: 0 when every check passes, 1 when any check fails, 2 when the
requested run is not executable (unknown suite, bad flag value, or a ring
without the needed square root).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .harness import (FORMATS, SUITES, HarnessError, HarnessOptions,
                      export_report, run_suite)

_CONFIG_KEYS = ("ring_d", "mc_scale", "gamma", "grid_points", "tol", "format")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="g2calc",
        description="Run the exact verification suites and report results.")
    parser.add_argument("suite", choices=SUITES + ("all",),
                        help="which suite to run")
    parser.add_argument("--ring-d", type=int, default=None, metavar="D",
                        help="square-free d of the coefficient ring "
                             "Q(sqrt(d)) (default 3)")
    parser.add_argument("--mc-scale", choices=("auto", "1", "1/2"),
                        default=None,
                        help="structure-constant scale of the link frame "
                             "(default auto-calibrated)")
    parser.add_argument("--gamma", default=None, metavar="EXPR",
                        help="deformation parameter value for sampled "
                             "sweeps (default 1)")
    parser.add_argument("--grid-points", type=int, default=None, metavar="N",
                        help="sample count for gridded suites")
    parser.add_argument("--tol", type=float, default=None,
                        help="numeric tolerance for unpinned checks "
                             "(default 1e-9)")
    parser.add_argument("--format", choices=FORMATS, default=None,
                        help="report format (default text)")
    parser.add_argument("--out", default=None, metavar="PATH",
                        help="write the report here (and render sample "
                             "figures alongside it) instead of stdout")
    parser.add_argument("--config", default=None, metavar="PATH",
                        help="JSON file with defaults for the flags above; "
                             "explicit flags win")
    return parser


def _load_config(path: str) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise HarnessError(f"cannot read config {path!r}: {exc}")
    except json.JSONDecodeError as exc:
        raise HarnessError(f"config {path!r} is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise HarnessError(f"config {path!r} must hold a JSON object")
    out = {}
    for key, value in raw.items():
        norm = key.replace("-", "_")
        if norm not in _CONFIG_KEYS:
            raise HarnessError(
                f"config {path!r}: unknown key {key!r} (allowed: "
                f"{', '.join(k.replace('_', '-') for k in _CONFIG_KEYS)})")
        out[norm] = value
    return out


def _resolve(args: argparse.Namespace) -> tuple[HarnessOptions, str]:
    settings: dict = {"ring_d": 3, "mc_scale": "auto", "gamma": "1",
                      "grid_points": None, "tol": 1e-9, "format": "text"}
    if args.config:
        settings.update(_load_config(args.config))
    for key in _CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    fmt = settings.pop("format")
    if fmt not in FORMATS:
        raise HarnessError(f"format must be one of {', '.join(FORMATS)}, "
                           f"got {fmt!r}")
    try:
        opts = HarnessOptions(
            ring_d=int(settings["ring_d"]),
            mc_scale=str(settings["mc_scale"]),
            gamma=str(settings["gamma"]),
            grid_points=(None if settings["grid_points"] is None
                         else int(settings["grid_points"])),
            tol=float(settings["tol"]),
        )
    except (TypeError, ValueError) as exc:
        raise HarnessError(f"bad option value: {exc}")
    opts.validate()
    return opts, fmt


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        opts, fmt = _resolve(args)
        report = run_suite(args.suite, opts)
        data = export_report(report, fmt)
    except HarnessError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.out:
        out = Path(args.out)
        try:
            out.write_bytes(data)
        except OSError as exc:
            print(f"error: cannot write {args.out!r}: {exc}", file=sys.stderr)
            return 2
        written = [str(out)]
        if report.samples:
            from .plotting import render_report_figures
            written += render_report_figures(report, out)
        print(f"{report.suite}: {report.passed} passed, {report.failed} "
              f"failed, {report.skipped} skipped")
        for path in written:
            print(f"wrote {path}")
    else:
        sys.stdout.write(data.decode())
    return 0 if report.all_pass else 1


if __name__ == "__main__":
    sys.exit(main())
