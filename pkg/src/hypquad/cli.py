"""Command-line front end: ``hypquad {nodes,grid,integrate,sweep,fool}``.

Every subcommand writes CSV (``# key=value`` metadata lines, then a header
row) or JSON with the same fields, to ``--output`` or standard output.
Exit codes: 0 success, 2 invalid parameters, 3 resource cap, 4 numerical
failure.
"""
from __future__ import annotations

import argparse
import io
import json
import sys
import time
from dataclasses import dataclass

import numpy as np

from hypquad import orthopoly, quad1d, smolyak, testbed
from hypquad.rates import RateFit, fit_rate, fmt, lower_log_exponent, upper_log_exponent
from hypquad.weight_core import Domain, UnboundedEstimateError, WeightParams

EXIT_INVALID = 2
EXIT_CAP = 3
EXIT_NUMERICAL = 4

_NUMERICAL = (
    orthopoly.EigenSolverError,
    smolyak.IntegrandEvaluationError,
    testbed.CertificationError,
    UnboundedEstimateError,
    OverflowError,
)


class Table:
    """Rows plus metadata, rendered as CSV or JSON with identical fields."""

    def __init__(self, columns, meta=None):
        self.columns = list(columns)
        self.meta = dict(meta or {})
        self.rows = []
        self.footer = {}

    def add(self, *values):
        self.rows.append(values)

    def render(self, fmt_name: str) -> str:
        if fmt_name == "json":
            doc = {
                "meta": {k: _jsonable(v) for k, v in self.meta.items()},
                "columns": self.columns,
                "rows": [dict(zip(self.columns, map(_jsonable, r))) for r in self.rows],
            }
            if self.footer:
                doc["summary"] = {k: _jsonable(v) for k, v in self.footer.items()}
            return json.dumps(doc, indent=1) + "\n"
        out = io.StringIO()
        for k, v in self.meta.items():
            out.write(f"# {k}={fmt(v) if not isinstance(v, str) else v}\n")
        out.write(",".join(self.columns) + "\n")
        for r in self.rows:
            out.write(",".join(fmt(v) if not isinstance(v, str) else v for v in r) + "\n")
        for k, v in self.footer.items():
            out.write(f"# {k}={fmt(v) if not isinstance(v, str) else v}\n")
        return out.getvalue()


def _jsonable(v):
    if v is None or isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    # round-trip through the 17-digit text form so CSV and JSON agree
    return float(fmt(v))


def _emit(text: str, path: str | None) -> None:
    if path and path != "-":
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _levels(spec: str) -> list[int]:
    """'4:12' (inclusive), '3,5,8' or a single integer."""
    try:
        if ":" in spec:
            lo, hi = spec.split(":")
            out = list(range(int(lo), int(hi) + 1))
        else:
            out = [int(s) for s in spec.split(",") if s.strip()]
    except ValueError:
        raise ValueError(f"bad level range {spec!r}; use 'lo:hi' or a comma list") from None
    if not out or min(out) < 0:
        raise ValueError(f"level range {spec!r} is empty or negative")
    return out


def _family(args) -> quad1d.LevelFamily:
    return quad1d.LevelFamily(
        policy=quad1d.TruncationPolicy(args.theta), alpha=args.alpha, domain=Domain(args.domain)
    )


def _fit_footer(table: Table, fit: RateFit, prefix: str = "") -> None:
    table.footer[f"{prefix}slope"] = fit.slope
    table.footer[f"{prefix}intercept"] = fit.intercept
    table.footer[f"{prefix}fit_samples"] = fit.used
    if fit.log_correction_exponent:
        table.footer[f"{prefix}log_correction_exponent"] = fit.log_correction_exponent


# -- subcommands --------------------------------------------------------------


def cmd_nodes(args) -> Table:
    WeightParams(alpha=args.alpha)
    quad1d.TruncationPolicy(args.theta)
    kind = orthopoly.RuleKind(args.kind)
    full = orthopoly.gauss_rule(args.m, args.alpha)
    j = quad1d.truncation_index(args.m, args.theta, args.alpha) if kind is not orthopoly.RuleKind.FULL else args.m
    if kind is orthopoly.RuleKind.FULL:
        rule = full
    elif kind is orthopoly.RuleKind.TRUNCATED:
        rule = quad1d.truncated_rule(args.m, args.alpha, args.theta)
    else:
        rule = quad1d.symmetrized_rule(args.m, args.alpha, args.theta)
    meta = {"m": args.m, "j": j, "theta": args.theta if kind is not orthopoly.RuleKind.FULL else None,
            "alpha": args.alpha, "kind": kind.value}
    table = Table(["index", "node", "weight"], meta)
    for i, (x, w) in enumerate(zip(rule.nodes, rule.weights), start=1):
        table.add(i, x, w)
    return table


def cmd_grid(args) -> Table:
    fam = _family(args)
    grid = smolyak.build_grid(args.xi, args.d, fam)
    merged = grid.merged()
    cols = [f"x{i + 1}" for i in range(args.d)] + ["coefficient", "multiplicity"]
    meta = {"d": args.d, "xi": args.xi, "alpha": args.alpha, "theta": args.theta,
            "domain": fam.domain.value}
    table = Table(cols, meta)
    for p, c, mult in zip(merged.nodes, merged.coefficients, merged.multiplicity):
        table.add(*p, c, mult)
    table.footer["idealized_count"] = grid.idealized_count
    table.footer["term_count"] = grid.eval_count
    table.footer["merged_count"] = int(merged.coefficients.size)
    if fam.domain is Domain.FULL_LINE:
        table.footer["sign_symmetric"] = grid.is_sign_symmetric()
    if args.plot and args.d == 2:
        from hypquad import plotting

        plotting.nodes_figure(merged.nodes, merged.coefficients, args.plot,
                              title=f"xi={args.xi}, {fam.domain.value} line")
    return table


def _integrate(fam, f, xi, d, workers=1):
    grid = smolyak.build_grid(xi, d, fam)
    value = smolyak.apply(grid, f, workers=workers)
    return grid, value


def cmd_integrate(args) -> Table:
    fam = _family(args)
    f = testbed.lookup(args.integrand, args.d, args.alpha, fam.domain)
    t0 = time.perf_counter()
    grid, value = _integrate(fam, f, args.xi, args.d, args.threads)
    wall = time.perf_counter() - t0
    exact = f.exact_integral
    abs_err = abs(value - exact) if exact is not None else None
    rel_err = abs_err / abs(exact) if exact not in (None, 0.0) else None
    cols = ["integrand", "d", "xi", "value", "exact", "abs_error", "rel_error",
            "n_evals", "n_terms", "wall_time"]
    table = Table(cols, {"alpha": args.alpha, "theta": args.theta, "domain": fam.domain.value})
    table.add(f.name, args.d, args.xi, value, exact, abs_err, rel_err,
              int(grid.merged().coefficients.size), grid.eval_count, wall)
    return table


@dataclass(frozen=True)
class SweepConfig:
    d: int
    r: int
    alpha: float
    theta: float
    domain: Domain
    integrand: str
    levels: tuple[int, ...]
    output: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if not self.levels:
            raise ValueError("sweep needs at least one level")
        WeightParams(alpha=self.alpha, r=self.r, domain=self.domain, d=self.d)
        quad1d.TruncationPolicy(self.theta)
        testbed.lookup(self.integrand, self.d, self.alpha, self.domain)


def run_sweep(cfg: SweepConfig, threads: int = 1, skip: int = 2, log_correction: bool = False):
    fam = quad1d.LevelFamily(quad1d.TruncationPolicy(cfg.theta), cfg.alpha, cfg.domain)
    f = testbed.lookup(cfg.integrand, cfg.d, cfg.alpha, cfg.domain)
    if f.exact_integral is None:
        raise ValueError(f"integrand {cfg.integrand!r} has no exact integral to sweep against")
    meta = {"integrand": f.name, "d": cfg.d, "r": cfg.r, "alpha": cfg.alpha, "theta": cfg.theta,
            "domain": cfg.domain.value, "exact": f.exact_integral}
    table = Table(["xi", "n_evals", "n_terms", "value", "error"], meta)
    samples = []
    for xi in cfg.levels:
        grid, value = _integrate(fam, f, xi, cfg.d, threads)
        n = int(grid.merged().coefficients.size)
        err = abs(value - f.exact_integral)
        table.add(xi, n, grid.eval_count, value, err)
        samples.append((n, err))
    fits = []
    try:
        fits.append(fit_rate(samples, skip=skip))
    except ValueError:
        # too few levels, or errors already at rounding level: report no fit
        table.footer["fit_samples"] = 0
        return table, fits
    _fit_footer(table, fits[-1])
    if log_correction and cfg.d > 1:
        fits.append(fit_rate(samples, skip=skip,
                             log_correction_exponent=upper_log_exponent(cfg.r, cfg.d)))
        _fit_footer(table, fits[-1], "corrected_")
    return table, fits


def cmd_sweep(args) -> Table:
    cfg = SweepConfig(d=args.d, r=args.r, alpha=args.alpha, theta=args.theta,
                      domain=Domain(args.domain), integrand=args.integrand,
                      levels=tuple(_levels(args.levels)), output=args.output, format=args.format)
    table, fits = run_sweep(cfg, threads=args.threads, skip=args.skip,
                            log_correction=args.log_correction)
    if args.plot and fits:
        from hypquad import plotting

        plotting.rate_figure(fits[-1], args.plot, ylabel="|error|",
                             title=f"{cfg.integrand}, d={cfg.d}",
                             reference={f"n^-{cfg.r / 2:g}": -cfg.r / 2})
    return table


def _adversary_nodes(fam, d, level):
    if d == 1:
        return fam.rule(level).nodes
    return smolyak.build_grid(level, d, fam).merged().nodes


def cmd_fool(args) -> Table:
    if Domain(args.domain) is not Domain.HALF_LINE:
        raise ValueError("fooling certificates are built on the half-line / positive orthant only")
    weight = WeightParams(alpha=args.alpha, r=args.r, d=args.d)
    fam = _family(args)
    cols = ["level", "n", "delta", "M", "cell", "norm_bound", "lower_bound"]
    table = Table(cols, {"d": args.d, "r": args.r, "alpha": args.alpha, "theta": args.theta,
                         "nodes": args.nodes})
    if args.sweep:
        levels = _levels(args.sweep)
    else:
        levels = [args.level]

    samples = []
    for lvl in levels:
        if args.nodes == "gauss":
            nodes = orthopoly.gauss_rule(args.n, args.alpha).nodes if args.d == 1 else None
            if nodes is None:
                raise ValueError("--nodes gauss is one-dimensional; use --nodes family for d >= 2")
        else:
            nodes = _adversary_nodes(fam, args.d, lvl)
        cert = testbed.make_fooling(nodes, args.r, args.d, weight)
        if cert.norm_bound > 1.0:
            raise testbed.CertificationError(f"norm bound {cert.norm_bound} exceeds 1")
        table.add(lvl if args.nodes == "family" else None, cert.n, cert.delta, cert.M,
                  " ".join(map(str, cert.cell)), cert.norm_bound, cert.integral)
        samples.append((cert.n, cert.integral))
        if not args.sweep:
            table.footer["nodes_hash"] = cert.nodes_hash
            table.footer["vanish_checked"] = cert.vanish_checked
    if args.sweep and len(samples) - args.skip >= 2:
        fit = fit_rate(samples, skip=args.skip)
        _fit_footer(table, fit)
        if args.plot:
            from hypquad import plotting

            ref = -3 * args.r / 4
            plotting.rate_figure(fit, args.plot, ylabel="certified lower bound",
                                 title=f"fooling functions, d={args.d}, r={args.r}",
                                 reference={f"n^{ref:g}": ref})
        if args.d > 1:
            table.footer["lower_log_exponent"] = lower_log_exponent(args.r, args.d)
    return table


# -- argument parsing ---------------------------------------------------------


def _common(p, grid=True):
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--theta", type=float, default=quad1d.DEFAULT_THETA)
    if grid:
        p.add_argument("--d", type=int, default=1)
        p.add_argument("--domain", choices=[d.value for d in Domain], default="half")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--output", "-o", default=None, help="file path; standard output if omitted")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hypquad", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("nodes", help="one-dimensional Gauss-Laguerre rules")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--kind", choices=[k.value for k in orthopoly.RuleKind], default="full")
    _common(p, grid=False)
    p.set_defaults(func=cmd_nodes)

    p = sub.add_parser("grid", help="sparse grid terms")
    p.add_argument("--xi", type=int, required=True)
    p.add_argument("--plot", default=None, help="render a node scatter (d=2) to this file")
    _common(p)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("integrate", help="apply Q_xi to a registry integrand")
    p.add_argument("--integrand", required=True)
    p.add_argument("--xi", type=int, required=True)
    p.add_argument("--threads", type=int, default=1)
    _common(p)
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("sweep", help="convergence sweep over xi with a rate fit")
    p.add_argument("--integrand", required=True)
    p.add_argument("--levels", required=True, help="'lo:hi' inclusive or a comma list")
    p.add_argument("--r", type=int, default=1, help="smoothness used for the log correction")
    p.add_argument("--skip", type=int, default=2, help="smallest levels left out of the fit")
    p.add_argument("--log-correction", action="store_true",
                   help="also fit with (log n)^((r/2+1)(d-1)) divided out")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--plot", default=None, help="render the log-log rate figure to this file")
    _common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fool", help="fooling-function lower bounds")
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--nodes", choices=["family", "gauss"], default="family",
                   help="adversary nodes: level rule / sparse grid, or an n-point Gauss rule")
    p.add_argument("--level", type=int, default=4, help="level k (d=1) or xi (d>=2)")
    p.add_argument("--n", type=int, default=1, help="order of the Gauss rule for --nodes gauss")
    p.add_argument("--sweep", default=None, help="level range, e.g. '4:10'")
    p.add_argument("--skip", type=int, default=0)
    p.add_argument("--plot", default=None, help="render the lower-bound trend to this file")
    _common(p)
    p.set_defaults(func=cmd_fool)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        table = args.func(args)
    except smolyak.BudgetExceededError as exc:
        print(f"hypquad: {exc}", file=sys.stderr)
        return EXIT_CAP
    except _NUMERICAL as exc:
        print(f"hypquad: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, KeyError) as exc:
        print(f"hypquad: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_INVALID
    _emit(table.render(args.format), args.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
