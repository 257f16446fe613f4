"""Command-line front end: ``lipext {extend,solve,verify,consistency}``.

Exit codes: 0 ok, 1 I/O failure, 2 usage/config error, 3 solver did not
converge, 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .boundary import BoundaryDataError, load_boundary
from .extension import lipschitz_constant_boundary, mcshane_extension, whitney_extension
from .fieldio import write_field
from .grid import DomainError, build_domain
from .scheme import ConfigError, SchemeConfig, solve
from .verify import (
    FORMS,
    VerificationReport,
    check_sandwich,
    check_theorem1,
    check_theorem2,
    consistency_study,
    bundled_polynomials,
    monotonicity_property_test,
)

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_NOCONV, EXIT_VERIFY = 0, 1, 2, 3, 4
# AMLE sandwich slack: 10 * tol_residual * eps**2 + SANDWICH_C * lam * eps
SANDWICH_C = 1.0
DEFAULT_MATRIX = {1: ("linear:0,1", "sine:1", "cone:0.3"),
                  2: ("zero", "xy", "sine:1", "cone:0.5,0.5")}


class UsageError(Exception):
    pass


def _nonneg(text):
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not x >= 0:
        raise argparse.ArgumentTypeError("lambda must be nonnegative")
    return x


def _positive(kind):
    def parse(text):
        try:
            x = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid value: {text!r}") from None
        if not x > 0:
            raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
        return x
    return parse


def _shared(p: argparse.ArgumentParser, default_domain="square:51") -> None:
    p.add_argument("--config", help="key=value defaults file; flags win")
    p.add_argument("--domain", default=default_domain,
                   help="interval:n | square:n | disk:n | mask:path")
    p.add_argument("--data", help="boundary data preset or csv:path")
    p.add_argument("--lambda", dest="lam", type=_nonneg,
                   help="slope parameter (default: boundary Lipschitz constant)")
    p.add_argument("--eps-cells", type=_positive(float), default=3.0,
                   help="ball radius in grid spacings")
    p.add_argument("--tol", type=_positive(float), default=1e-10, help="sup-norm change tolerance")
    p.add_argument("--tol-residual", type=_positive(float), default=1e-9)
    p.add_argument("--max-iter", type=_positive(int), default=10**6)
    p.add_argument("--sweep", choices=("jacobi", "gs", "gauss-seidel"), default="gauss-seidel")
    p.add_argument("--init", choices=("whitney", "mcshane", "midpoint", "zero"))
    p.add_argument("--out", help="output path")
    p.add_argument("--report", help="JSON report path (default: stdout)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=_positive(int), default=1)
    p.add_argument("--plot", action="store_true", help="also write a gnuplot script")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lipext", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extend", help="evaluate McShane/Whitney extensions")
    _shared(p)
    p.add_argument("--which", choices=("mcshane", "whitney", "both"), default="both")

    p = sub.add_parser("solve", help="solve a ball scheme by fixed-point iteration")
    _shared(p)
    p.add_argument("--eq", default="inf",
                   choices=("min", "max", "inf", "jensen-min", "jensen-max", "inf-harmonic"))

    p = sub.add_parser("verify", help="run the verification checks")
    _shared(p)
    p.add_argument("--lambda-below-lip", action="store_true",
                   help="use lambda = L_F/2 and check the sub-critical clause")
    p.add_argument("--trials", type=_positive(int), default=1000)
    p.add_argument("--sandwich-tol", type=float, help="override the AMLE sandwich slack")

    p = sub.add_parser("consistency", help="consistency ladder on bundled test polynomials")
    _shared(p)
    p.add_argument("--ladder", default="0.2,0.1,0.05,0.025")
    p.add_argument("--h-scale", type=_positive(float), default=1.0)
    p.add_argument("--lambdas", default="0.5,3")
    return parser


def _apply_config(parser, argv):
    """Load ``--config`` key=value defaults into the chosen subparser."""
    pre, _ = parser.parse_known_args(argv)
    if not getattr(pre, "config", None):
        return
    path = Path(pre.config)
    if not path.exists():
        parser.error(f"config file not found: {path}")
    defaults = {}
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            parser.error(f"{path}:{lineno}: expected key=value")
        key = key.strip().replace("-", "_")
        defaults["lam" if key == "lambda" else key] = val.strip()
    subparser = parser._subparsers._group_actions[0].choices[pre.command]
    actions = {a.dest: a for a in subparser._actions}
    for key, val in defaults.items():
        if key not in actions:
            parser.error(f"{path}: unknown key {key!r}")
        act = actions[key]
        if act.type is not None:
            try:
                val = act.type(val)
            except argparse.ArgumentTypeError as exc:
                parser.error(f"{path}: {key}: {exc}")
        elif isinstance(act, argparse._StoreTrueAction):
            val = val.lower() in ("1", "true", "yes", "on")
        subparser.set_defaults(**{key: val})


def _scheme_config(args, domain, equation, lam=None):
    return SchemeConfig(equation=equation, lam=args.lam if lam is None else lam,
                        eps=args.eps_cells * domain.h, tol_change=args.tol,
                        tol_residual=args.tol_residual, max_iter=args.max_iter,
                        sweep=args.sweep, init=args.init, threads=args.threads)


def _emit_json(obj, path):
    text = json.dumps(obj, indent=2)
    if path:
        Path(path).write_text(text + "\n")
    else:
        print(text)


def write_plot_script(csv_path, dim: int) -> Path:
    csv_path = Path(csv_path)
    script = csv_path.with_suffix(".gp")
    lines = ["set datafile separator ','", f"set title '{csv_path.name}'"]
    if dim == 1:
        lines.append(f"plot '{csv_path.name}' using 2:4 with linespoints title 'u'")
    else:
        lines += ["set view map", "set pm3d",
                  f"splot '{csv_path.name}' using 3:4:6 with points palette pointtype 5 title 'u'"]
    script.write_text("\n".join(lines) + "\n")
    return script


def cmd_extend(args) -> int:
    domain = build_domain(args.domain)
    F = load_boundary(args.data or "zero", domain)
    L = lipschitz_constant_boundary(F, domain)
    lam = L if args.lam is None else args.lam
    print(f"L_F = {L!r}")
    print(f"lambda = {lam!r} ({'>=' if lam >= L - 1e-12 else '<'} L_F)")
    out = Path(args.out or "extension.csv")
    which = ("mcshane", "whitney") if args.which == "both" else (args.which,)
    for name in which:
        u = (mcshane_extension if name == "mcshane" else whitney_extension)(domain, F, lam)
        path = out if len(which) == 1 else out.with_name(f"{out.stem}_{name}{out.suffix or '.csv'}")
        write_field(path, domain, u)
        print(f"{name}: {path}")
        if args.plot:
            print(f"plot script: {write_plot_script(path, domain.dim)}")
    return EXIT_OK


def cmd_solve(args) -> int:
    domain = build_domain(args.domain)
    F = load_boundary(args.data or "zero", domain)
    cfg = _scheme_config(args, domain, args.eq)
    u, report = solve(domain, F, cfg)
    out = Path(args.out or "solution.csv")
    write_field(out, domain, u)
    if args.plot:
        write_plot_script(out, domain.dim)
    _emit_json(report.to_dict(), args.report)
    return EXIT_OK if report.converged else EXIT_NOCONV


def _verify_instance(args, domain, data) -> VerificationReport:
    F = load_boundary(data, domain)
    L = lipschitz_constant_boundary(F, domain)
    eps = args.eps_cells * domain.h
    rep = VerificationReport()
    if args.lambda_below_lip:
        lam = L / 2 if args.lam is None else args.lam
        if not lam < L:
            raise UsageError(f"--lambda-below-lip needs lambda < L_F = {L!r}")
        rep.extend(check_theorem1(domain, F, lam, eps, sweep=args.sweep), "theorem1/")
        return rep
    lam = L if args.lam is None else args.lam
    if lam < L - 1e-12:
        rep.extend(check_theorem1(domain, F, lam, eps, sweep=args.sweep), "theorem1/")
        return rep
    rep.extend(check_theorem1(domain, F, lam, eps, sweep=args.sweep), "theorem1/")
    lower = whitney_extension(domain, F, lam)
    upper = mcshane_extension(domain, F, lam)
    rep.extend(check_theorem2(domain, F, 0.5 * (lower + upper), lam, eps), "theorem2/")
    cfg = _scheme_config(args, domain, "inf-harmonic", lam=lam)
    amle, sr = solve(domain, F, cfg)
    rep.add("amle_converged", 0.0 if sr.converged else 1.0, 0.0)
    tol = args.sandwich_tol
    if tol is None:
        tol = 10 * cfg.tol_residual * eps**2 + SANDWICH_C * lam * eps
    rep.extend(check_sandwich(lower, amle, upper, tol), "sandwich/")
    return rep


def cmd_verify(args) -> int:
    domain = build_domain(args.domain)
    datas = (args.data,) if args.data else DEFAULT_MATRIX[domain.dim]
    full = VerificationReport()
    for data in datas:
        full.extend(_verify_instance(args, domain, data), f"{domain.name}/{data}/")
    if not args.lambda_below_lip:
        full.extend(monotonicity_property_test(args.seed, args.trials), "monotonicity/")
    for c in full.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.measured:.3e} {c.sense} {c.tolerance:.3e}",
              file=sys.stderr)
    _emit_json(full.to_list(), args.report)
    return EXIT_OK if full.passed else EXIT_VERIFY


def _floats(text, what):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"bad {what}: {text!r}") from None


def cmd_consistency(args) -> int:
    ladder = _floats(args.ladder, "ladder")
    lambdas = _floats(args.lambdas, "lambdas")
    reports = []
    for phi in bundled_polynomials():
        for lam in lambdas:
            for form in FORMS:
                try:
                    reports.append(consistency_study(phi, lam, form, ladder, args.h_scale))
                except ValueError as exc:
                    raise UsageError(f"infeasible ladder: {exc}") from None
    out = Path(args.out or "consistency.csv")
    fields = ("name", "form", "lambda", "eps", "h", "discrete", "continuous", "error")
    with open(out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for r in reports:
            for row in r.rows():
                w.writerow(row)
    summary = []
    ok = True
    for r in reports:
        good = r.decreasing and r.order >= 0.8
        ok &= good
        summary.append({"name": r.name, "form": r.form, "lambda": r.lam, "order": r.order,
                        "exact": r.exact, "decreasing": r.decreasing, "pass": good})
        order = "exact" if r.exact else f"{r.order:.3f}"
        print(f"{r.name:18s} {r.form:3s} lambda={r.lam:<4g} order={order}", file=sys.stderr)
    _emit_json(summary, args.report)
    return EXIT_OK if ok else EXIT_VERIFY


COMMANDS = {"extend": cmd_extend, "solve": cmd_solve, "verify": cmd_verify,
            "consistency": cmd_consistency}


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    _apply_config(parser, argv)
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (DomainError, BoundaryDataError, ConfigError, UsageError) as exc:
        print(f"lipext {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"lipext {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
