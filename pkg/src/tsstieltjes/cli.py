"""Command line front end.

Subcommands
-----------
integrate
    Enclose the integral described by a job and optionally run checks.
sums
    Lower and upper Darboux-Stieltjes sums for an explicit partition.
check
    Only the residual checks (``by_parts``, ``transition``, ``comparison``).

A job comes from a JSON file (``--job``) or from flags; when both give a field
the file wins and a warning is reported.  Results go to stdout as JSON with
17 significant digits; errors go to stderr as a JSON object and the process
exits with the error's status code.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field

from . import __version__
from .errors import JobError, NoConvergence, TSError
from .expr import parse
from .integrator import (
    IntegratorConfig,
    by_parts_residual,
    comparison_check,
    darboux_sums,
    integrate,
    transition_residual,
)
from .partition import Partition
from .timescale import BoxKind, parse_number, parse_scale

CHECKS = ("by_parts", "transition", "comparison")
_FIELDS = ("scale", "f", "g", "a", "b", "kind", "tol", "checks")


@dataclass
class JobSpec:
    scale: str
    f: str
    g: str
    a: float
    b: float
    kind: str = "delta"
    tol: float | None = None
    checks: list = field(default_factory=list)

    @classmethod
    def from_mapping(cls, data: dict) -> "JobSpec":
        missing = [k for k in ("scale", "f", "g", "a", "b") if data.get(k) is None]
        if missing:
            raise JobError(f"job is missing {', '.join(missing)}")
        unknown = sorted(set(data) - set(_FIELDS))
        if unknown:
            raise JobError(f"unknown job fields: {', '.join(unknown)}")
        kind = str(data.get("kind") or "delta").lower()
        if kind not in ("delta", "nabla"):
            raise JobError(f"kind must be 'delta' or 'nabla', got {kind!r}")
        tol = data.get("tol")
        if tol is not None:
            tol = _number(tol, "tol")
            if not tol > 0:
                raise JobError("tol must be positive")
        checks = data.get("checks") or []
        if isinstance(checks, str):
            checks = [checks]
        bad = [c for c in checks if c not in CHECKS]
        if bad:
            raise JobError(f"unknown checks: {', '.join(map(str, bad))}")
        return cls(
            scale=str(data["scale"]),
            f=str(data["f"]),
            g=str(data["g"]),
            a=_number(data["a"], "a"),
            b=_number(data["b"], "b"),
            kind=kind,
            tol=tol,
            checks=list(dict.fromkeys(checks)),
        )


def _number(value, name: str) -> float:
    if isinstance(value, bool):
        raise JobError(f"{name} must be a number")
    if isinstance(value, (int, float)):
        return float(value)
    try:
        return parse_number(str(value))
    except TSError:
        raise JobError(f"{name} is not a number: {value!r}") from None


def _config(job: JobSpec) -> IntegratorConfig:
    return IntegratorConfig() if job.tol is None else IntegratorConfig(tol=job.tol)


def _run_checks(job: JobSpec, scale, f, g, cfg) -> tuple[dict, dict]:
    residuals, bounds = {}, {}
    for name in job.checks:
        if name == "by_parts":
            r = by_parts_residual(f, g, scale, job.a, job.b, job.kind, cfg)
        elif name == "transition":
            r = transition_residual(f, g, scale, job.a, job.b, job.kind, cfg)
        else:
            r = comparison_check(f, g, scale, job.a, job.b, cfg)
        residuals[name] = r.residual
        bounds[name] = r.bound
    return residuals, bounds


def run(job: JobSpec, warnings: list | None = None) -> dict:
    """Integrate a job and return the report as a plain dict."""
    scale = parse_scale(job.scale)
    f, g = parse(job.f), parse(job.g)
    cfg = _config(job)
    res = integrate(f, g, scale, job.a, job.b, job.kind, cfg)
    residuals, bounds = _run_checks(job, scale, f, g, cfg)
    return {
        "lower": res.lower,
        "upper": res.upper,
        "value": res.value,
        "exact": res.exact,
        "kind": res.kind.value,
        "refinements": res.refinements,
        "partition_size": res.final_partition_size,
        "check_residuals": residuals,
        "check_bounds": bounds,
        "warnings": list(warnings or []),
    }


# -- output -----------------------------------------------------------------


def _fmt(obj) -> str:
    """JSON text with floats printed to 17 significant digits."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return format(obj, ".17g") if math.isfinite(obj) else "null"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in obj) + "]"
    return _fmt(float(obj))


def _pretty(report: dict) -> str:
    lines = []
    for key, val in report.items():
        if isinstance(val, dict):
            for sub, v in val.items():
                lines.append(f"{key}.{sub}: {_fmt(v)}")
        elif isinstance(val, list):
            for item in val:
                lines.append(f"{key}: {item}")
        else:
            lines.append(f"{key}: {_fmt(val) if not isinstance(val, str) else val}")
    return "\n".join(lines)


def _emit(report: dict, pretty: bool, stream) -> None:
    stream.write((_pretty(report) if pretty else _fmt(report)) + "\n")


def _error(exc: TSError, stream) -> int:
    payload = {"code": exc.code, "message": str(exc), "exit_status": exc.exit_status}
    if isinstance(exc, NoConvergence) and exc.result is not None:
        r = exc.result
        payload["result"] = {"lower": r.lower, "upper": r.upper, "value": r.value}
    stream.write(_fmt({"error": payload}) + "\n")
    return exc.exit_status


# -- argument handling --------------------------------------------------------


def _job_from_args(args) -> tuple[JobSpec, list]:
    flags = {
        "scale": args.scale,
        "f": args.f,
        "g": args.g,
        "a": args.a,
        "b": args.b,
        "kind": args.kind,
        "tol": args.tol,
        "checks": args.check or None,
    }
    warnings = []
    data = {k: v for k, v in flags.items() if v is not None}
    if args.job:
        try:
            with open(args.job, encoding="utf-8") as fh:
                from_file = json.load(fh)
        except OSError as exc:
            raise JobError(f"cannot read job file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise JobError(f"job file is not valid JSON: {exc}") from None
        if not isinstance(from_file, dict):
            raise JobError("job file must hold a JSON object")
        for k, v in from_file.items():
            if k in data and v is not None and data[k] != v:
                warnings.append(f"--{'check' if k == 'checks' else k} ignored: the job file sets {k}")
            data[k] = v
    return JobSpec.from_mapping(data), warnings


def _add_job_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--job", help="JSON job file (wins over flags)")
    p.add_argument("--scale", help="scale description, e.g. 'qscale(2)'")
    p.add_argument("--f", help="integrand expression in t")
    p.add_argument("--g", help="strictly increasing integrator expression in t")
    p.add_argument("--a", help="lower endpoint (a scale point)")
    p.add_argument("--b", help="upper endpoint (a scale point)")
    p.add_argument("--kind", choices=["delta", "nabla"], help="default: delta")
    p.add_argument("--tol", type=float, help="enclosure width target (default 1e-9)")
    p.add_argument("--pretty", action="store_true", help="human-readable output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsstieltjes",
        description="Verified Riemann-Stieltjes delta/nabla integrals on time scales.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("integrate", help="enclose an integral")
    _add_job_flags(p)
    p.add_argument("--check", action="append", choices=CHECKS, help="also run a check (repeatable)")

    p = sub.add_parser("sums", help="Darboux sums for an explicit partition")
    _add_job_flags(p)
    p.add_argument("--points", required=True, help="comma separated partition points")
    p.set_defaults(check=None)

    p = sub.add_parser("check", help="run residual checks only")
    _add_job_flags(p)
    p.add_argument("--check", action="append", choices=CHECKS, help="check to run (default: all)")
    return parser


def _cmd_integrate(args) -> dict:
    job, warnings = _job_from_args(args)
    return run(job, warnings)


def _cmd_sums(args) -> dict:
    job, warnings = _job_from_args(args)
    scale = parse_scale(job.scale)
    try:
        pts = [parse_number(s) for s in args.points.split(",") if s.strip()]
    except TSError:
        raise JobError(f"bad --points list: {args.points!r}") from None
    part = Partition(scale, pts)
    if part.a != scale.snap(job.a) or part.b != scale.snap(job.b):
        raise JobError("the partition must start at a and end at b")
    s = darboux_sums(part, parse(job.f), parse(job.g), BoxKind.parse(job.kind))
    return {
        "lower": s.lower,
        "upper": s.upper,
        "kind": s.kind.value,
        "partition_size": s.partition_size,
        "warnings": warnings,
    }


def _cmd_check(args) -> dict:
    job, warnings = _job_from_args(args)
    if not job.checks:
        job.checks = list(CHECKS)
    scale = parse_scale(job.scale)
    residuals, bounds = _run_checks(job, scale, parse(job.f), parse(job.g), _config(job))
    return {"check_residuals": residuals, "check_bounds": bounds, "warnings": warnings}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    handler = {"integrate": _cmd_integrate, "sums": _cmd_sums, "check": _cmd_check}[args.command]
    try:
        report = handler(args)
    except TSError as exc:
        return _error(exc, stderr)
    except ValueError as exc:
        return _error(JobError(str(exc)), stderr)
    _emit(report, args.pretty, stdout)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
