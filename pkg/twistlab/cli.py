from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from fractions import Fraction
from typing import Any, Callable, Dict, List, Literal, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field

from .core.asym import pert_expansion
from .core.chars import Character, kronecker_character, parse_character
from .core.config import get_settings, initialize_env
from .core.corpus import verify_corpus
from .core.errors import ParseError, TwistLabError
from .core.lfunc import LValueRequest, evaluate
from .core.modular import DEFAULT_COEFFICIENTS, LATTICE_CUTOFF
from .core.numerics import PrecisionContext, format_value, parse_number, to_mp
from .core.qseries import (
    QPoint,
    SeriesParams,
    eisenstein_q_coeffs,
    eisenstein_value,
    lambert,
    lambert_tilde,
    phi,
    xi_direct,
)
from .core.resurgence import transseries_eval
from .core.spectral import (
    TraceRequest,
    log_trace_pmn,
    strong_coupling_terms,
    trace_p2,
    trace_pmn_blocks,
    weak_coupling_terms,
)


logger = logging.getLogger(__name__)

OutputFormat = Literal["json", "csv", "text"]
Report = Dict[str, Any]


class RunConfig(BaseModel):
    """Everything needed to reproduce a run; embedded in every report."""

    model_config = ConfigDict(frozen=True)

    command: str
    precision_digits: int = Field(default=50, gt=0)
    guard_digits: int = Field(default=10, ge=0)
    output_format: OutputFormat = "json"
    cache_dir: str | None = None
    seed: int = 0
    jobs: int = Field(default=1, ge=1)
    params: Dict[str, Any] = Field(default_factory=dict)

    def context(self) -> PrecisionContext:
        return PrecisionContext.from_digits(self.precision_digits, guard_digits=self.guard_digits)


# Argument helpers

def _character(text: str) -> Character:
    return parse_character(text)


def _point(args: argparse.Namespace, ctx: PrecisionContext) -> QPoint:
    if getattr(args, "q", None):
        return QPoint.parse(f"q={args.q}", ctx)
    if getattr(args, "y", None):
        return QPoint.parse(f"y={args.y}", ctx)
    if getattr(args, "tau", None):
        return QPoint.parse(args.tau, ctx)
    raise ParseError("give the evaluation point as --tau, --y or --q")


def _number(text: str, ctx: PrecisionContext) -> Any:
    value = parse_number(text)
    return value if isinstance(value, Fraction) else to_mp(value, ctx.mp)


def _params(args: argparse.Namespace) -> Dict[str, Any]:
    skip = {"command", "handler", "digits", "format", "log_level", "jobs", "seed", "guard_digits"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


# Commands

def cmd_eval(args: argparse.Namespace, config: RunConfig) -> Tuple[Report, int]:
    ctx = config.context()
    digits = config.precision_digits
    report: Report = {"series": args.series}
    if args.series == "eisenstein":
        chi1, chi2 = kronecker_character(args.d1), kronecker_character(args.d2)
        expansion = eisenstein_q_coeffs(args.m, chi1, chi2, args.coeffs, ctx)
        values = [expansion.constant, *expansion.coefficients[: args.coeffs]]
        report["coefficients"] = [
            str(c) if isinstance(c, (int, Fraction)) else format_value(c, digits) for c in values
        ]
        if args.tau or args.y or args.q:
            z = _point(args, ctx)
            report["value"] = format_value(eisenstein_value(args.m, chi1, chi2, z, ctx), digits)
        return report, 0

    z = _point(args, ctx)
    chi1 = _character(args.chi1 or args.chi or "1:1")
    chi2 = _character(args.chi2 or "1:1")
    if args.series == "xi":
        p = SeriesParams(s1=args.s1 or "0", s2=args.s2 or "0", chi1=chi1, chi2=chi2)
        value = xi_direct(p, z, ctx)
    elif args.series == "lambert":
        value = lambert(_number(args.s or "0", ctx), chi1, chi2, z, ctx)
    elif args.series == "lambert-tilde":
        value = lambert_tilde(_number(args.s or "0", ctx), chi1, z, ctx)
    else:
        value = phi(_number(args.s or "0", ctx), chi1, z, ctx)
    report["value"] = format_value(value, digits)
    return report, 0


def cmd_transseries(args: argparse.Namespace, config: RunConfig) -> Tuple[Report, int]:
    ctx = config.context()
    p = SeriesParams(
        s1=args.s1, s2=args.s2, chi1=_character(args.chi1), chi2=_character(args.chi2)
    )
    report = transseries_eval(p, _point(args, ctx), args.side, ctx)
    return report.to_record(config.precision_digits), 0 if report.passed else 1


def cmd_verify(args: argparse.Namespace, config: RunConfig) -> Tuple[Report, int]:
    summary = verify_corpus(
        args.corpus,
        config.context(),
        n_max=args.coeffs,
        seed=config.seed,
        jobs=config.jobs,
        lattice_cutoff=args.lattice_cutoff,
    )
    report = {
        "counts": summary.counts,
        "results": [r.model_dump() for r in summary.results],
    }
    return report, 0 if summary.passed else 1


def cmd_lvalue(args: argparse.Namespace, config: RunConfig) -> Tuple[Report, int]:
    ctx = config.context()
    chi = _character(args.chi)
    s = parse_number(args.s)
    value = evaluate(LValueRequest(chi=chi, s=s, want_derivative=args.derivative), ctx)
    report: Report = {"chi": chi.label, "s": args.s, "derivative": args.derivative}
    if isinstance(value, Fraction):
        report["exact"] = str(value)
    report["value"] = format_value(value, config.precision_digits)
    return report, 0


def cmd_asymptotics(args: argparse.Namespace, config: RunConfig) -> Tuple[Report, int]:
    ctx = config.context()
    p = SeriesParams(
        s1=args.s1, s2=args.s2, chi1=_character(args.chi1), chi2=_character(args.chi2)
    )
    expansion = pert_expansion(p, ctx, order=args.order)
    return {
        "series": p.describe(),
        "terminating": expansion.terminating,
        "terms": expansion.to_records(config.precision_digits),
    }, 0


def cmd_spectral_trace(args: argparse.Namespace, config: RunConfig) -> Tuple[Report, int]:
    ctx = config.context()
    digits = config.precision_digits
    z = _point(args, ctx)
    req = TraceRequest(m=args.m, n=args.n, tau=z)
    report: Report = {"m": args.m, "n": args.n, "hbar": format_value(req.hbar(ctx), digits)}
    routes = ("product", "lambert") if args.route == "both" else (args.route,)
    values = {route: log_trace_pmn(req, route, ctx) for route in routes}
    if (args.m, args.n) == (1, 1) and "lambert" in values:
        values["lambert"] = trace_p2(z, "lambert", ctx)
    report["log_trace"] = {route: format_value(v, digits) for route, v in values.items()}
    first = next(iter(values.values()))
    report["trace"] = format_value(ctx.mp.exp(first), digits)
    status = 0
    if args.blocks:
        blocks = trace_pmn_blocks(req, ctx)
        report["blocks"] = blocks.to_record(digits)
        status = 0 if blocks.passed else 1
    if args.coupling:
        if (args.m, args.n) != (1, 1):
            raise ParseError("--coupling is available for local P^2 only (m = n = 1)")
        report["coupling"] = {
            terms.regime: {k: format_value(v, digits) for k, v in terms.terms.items()}
            for terms in (weak_coupling_terms(ctx), strong_coupling_terms(ctx))
        }
    return report, status


# Output

def _flatten(prefix: str, value: Any, out: Dict[str, str]) -> None:
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(value, list):
        out[prefix] = json.dumps(value, sort_keys=True)
    else:
        out[prefix] = "" if value is None else str(value)


def render(report: Report, fmt: OutputFormat) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True, default=str)
    rows: List[Dict[str, str]] = []
    if isinstance(report.get("results"), list):
        for result in report["results"]:
            row: Dict[str, str] = {}
            _flatten("", {k: v for k, v in result.items() if k != "data"}, row)
            rows.append(row)
    else:
        row = {}
        _flatten("", {k: v for k, v in report.items() if k != "config"}, row)
        rows.append(row)
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=list(rows[0].keys()) if rows else [])
        writer.writeheader()
        writer.writerows(rows)
        return buffer.getvalue().rstrip("\n")
    return "\n".join(f"{k}: {v}" for row in rows for k, v in row.items())


# Parser

def _add_point(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tau", help="point in the upper half-plane, e.g. 0.3i or 0.2+0.3i")
    parser.add_argument("--y", help="tau = i y")
    parser.add_argument("--q", help="nome q with 0 < |q| < 1")


def _add_series(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--s1", default="0")
    parser.add_argument("--s2", default="0")
    parser.add_argument("--chi1", default="1:1", help="Conrey 'r:ell' or 'D=k'")
    parser.add_argument("--chi2", default="1:1", help="Conrey 'r:ell' or 'D=k'")


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(
        prog="twistlab", description="Twisted Lambert series, Eisenstein series and their resurgence."
    )
    parser.add_argument("--digits", type=int, default=settings.digits)
    parser.add_argument("--guard-digits", type=int, default=settings.guard_digits)
    parser.add_argument("--format", choices=("json", "csv", "text"), default="json")
    parser.add_argument("--log-level", default=settings.log_level)
    parser.add_argument("--jobs", type=int, default=settings.jobs)
    parser.add_argument("--seed", type=int, default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", help="evaluate a q-series")
    ev.add_argument("series", choices=("xi", "lambert", "lambert-tilde", "phi", "eisenstein"))
    ev.add_argument("--s")
    ev.add_argument("--s1")
    ev.add_argument("--s2")
    ev.add_argument("--chi")
    ev.add_argument("--chi1")
    ev.add_argument("--chi2")
    ev.add_argument("--m", type=int, default=2)
    ev.add_argument("--d1", type=int, default=1)
    ev.add_argument("--d2", type=int, default=1)
    ev.add_argument("--coeffs", type=int, default=10)
    _add_point(ev)
    ev.set_defaults(handler=cmd_eval)

    ts = sub.add_parser("transseries", help="lateral transseries against the q-series")
    _add_series(ts)
    _add_point(ts)
    ts.add_argument("--side", choices=("plus", "minus", "median"), default="minus")
    ts.set_defaults(handler=cmd_transseries)

    vf = sub.add_parser("verify", help="run an identity corpus")
    vf.add_argument("corpus", choices=("eta-tables", "fricke", "spectral", "all"))
    vf.add_argument("--coeffs", type=int, default=DEFAULT_COEFFICIENTS)
    vf.add_argument("--lattice-cutoff", type=int, default=LATTICE_CUTOFF)
    vf.set_defaults(handler=cmd_verify)

    lv = sub.add_parser("lvalue", help="Dirichlet L-value or derivative")
    lv.add_argument("--chi", required=True)
    lv.add_argument("--s", required=True)
    lv.add_argument("--derivative", action="store_true")
    lv.set_defaults(handler=cmd_lvalue)

    asy = sub.add_parser("asymptotics", help="small-y perturbative expansion")
    _add_series(asy)
    asy.add_argument("--order", type=int)
    asy.set_defaults(handler=cmd_asymptotics)

    sp = sub.add_parser("spectral-trace", help="log of the spectral trace of local P^{m,n}")
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--route", choices=("product", "lambert", "both"), default="both")
    sp.add_argument("--blocks", action="store_true", help="include the G/F reconciliation")
    sp.add_argument("--coupling", action="store_true", help="weak and strong coupling terms")
    _add_point(sp)
    sp.set_defaults(handler=cmd_spectral_trace)
    return parser


def main(argv: Sequence[str] | None = None, stdout: Any = None) -> int:
    initialize_env()
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=args.log_level.upper(), format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )
    settings = get_settings()
    config = RunConfig(
        command=args.command,
        precision_digits=args.digits,
        guard_digits=args.guard_digits,
        output_format=args.format,
        cache_dir=str(settings.cache_dir) if settings.cache_dir else None,
        seed=args.seed,
        jobs=args.jobs,
        params=_params(args),
    )
    handler: Callable[[argparse.Namespace, RunConfig], Tuple[Report, int]] = args.handler
    try:
        report, status = handler(args, config)
    except TwistLabError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        print(json.dumps({"error": type(exc).__name__, "detail": str(exc)}), file=sys.stderr)
        return exc.exit_code
    report["config"] = config.model_dump()
    print(render(report, config.output_format), file=stdout)
    return status
