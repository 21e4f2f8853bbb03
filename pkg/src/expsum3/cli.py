"""Command-line entry point: ``expsum3 <subcommand> ...``.

JSON goes to stdout with sorted keys; CSV subcommands write to stdout or
``--out``.  Exit codes: 0 ok, 2 bad parameters, 3 resource or accuracy limits.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from fractions import Fraction

from expsum3 import ENGINE_VERSION
from expsum3.afe import ContourSpec, afe_validate, write_afe_csv
from expsum3.bounds import winner_grid, write_grid_csv
from expsum3.config import load_config
from expsum3.domain import DomainSpec, normalize_convention, write_tuples_csv
from expsum3.errors import AccuracyError, ParameterError, ResourceError
from expsum3.expsum import fit_growth, log_spaced, sum_mu, sum_S
from expsum3.moment import RationalTriple, assemble_residual, sigma_series
from expsum3.params import THEOREM, AdmissibleTuple, ExponentTriple, derive_constants, validate_triple
from expsum3.phase import PhaseContext, sp_compare
from expsum3.quadrature import QuadratureSpec

EXIT_OK, EXIT_PARAM, EXIT_RESOURCE = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARAM, f"{self.prog}: error: {message}\n")


def _triple(args) -> ExponentTriple:
    return ExponentTriple.from_ac(args.a, args.c, args.b)


def _emit_json(payload: dict, out) -> None:
    out.write(json.dumps(payload, sort_keys=True, indent=2, allow_nan=True) + "\n")


def _header(args, triple=None, **extra) -> dict:
    params = {k: v for k, v in vars(args).items() if k not in ("func", "config", "out")}
    if triple is not None:
        params.update(a=triple.a, b=triple.b, c=triple.c)
    params.update(extra)
    return {"engine_version": ENGINE_VERSION, "params": params}


def _open_out(args, out):
    return open(args.out, "w", newline="") if getattr(args, "out", None) else None


def _sum_payload(res) -> dict:
    return {
        "value_re": res.value.real,
        "value_im": res.value.imag,
        "abs": abs(res.value),
        "term_count": res.term_count,
        "phase_precision": res.phase_precision,
    }


# --- subcommands -------------------------------------------------------------


def cmd_constants(args, cfg, out):
    tr = _triple(args)
    dc = derive_constants(tr)
    payload = _header(args, tr)
    payload["grade"] = validate_triple(*tr.as_tuple()).grade
    payload["constants"] = dc.to_dict()
    _emit_json(payload, out)


def cmd_enumerate(args, cfg, out):
    tr = _triple(args)
    spec = DomainSpec(tr, args.T, normalize_convention(args.convention), cfg.tuple_cap)
    fh = _open_out(args, out)
    try:
        write_tuples_csv(spec, fh or out)
    finally:
        if fh:
            fh.close()


def _precision(args, cfg):
    return args.precision or cfg.default_precision


def cmd_sum(args, cfg, out):
    tr = _triple(args)
    spec = DomainSpec(tr, args.T, normalize_convention(args.convention), cfg.tuple_cap)
    prec = _precision(args, cfg)
    res = sum_S(spec, args.chunks, prec, args.workers, cache_dir=cfg.cache_dir)
    payload = _header(args, tr, convention=spec.convention, precision=prec)
    payload["result"] = _sum_payload(res)
    _emit_json(payload, out)


def cmd_mu_sum(args, cfg, out):
    tr = _triple(args)
    spec = DomainSpec(tr, args.T, "cn_window", cfg.tuple_cap)
    prec = _precision(args, cfg)
    res = sum_mu(spec, args.chunks, prec, args.workers, cache_dir=cfg.cache_dir)
    payload = _header(args, tr, convention=spec.convention, precision=prec)
    payload["result"] = _sum_payload(res)
    _emit_json(payload, out)


def cmd_fit(args, cfg, out):
    tr = _triple(args)
    prec = _precision(args, cfg)
    rows = []
    for T in log_spaced(args.Tmin, args.Tmax, args.points):
        spec = DomainSpec(tr, T, normalize_convention(args.convention), cfg.tuple_cap)
        res = sum_S(spec, args.chunks, prec, args.workers, cache_dir=cfg.cache_dir)
        rows.append({"T": T, "abs": abs(res.value), "term_count": res.term_count})
    fit = fit_growth([(r["T"], r["abs"]) for r in rows])
    payload = _header(args, tr, precision=prec)
    payload.update(exponent=fit.exponent, intercept=fit.intercept, r2=fit.r2, rows=rows)
    payload["dropped"] = [list(d) for d in fit.dropped]
    _emit_json(payload, out)


def cmd_afe_check(args, cfg, out):
    tr = _triple(args)
    try:
        grid = [float(v) for v in args.t_grid.split(",") if v.strip()]
    except ValueError:
        raise ParameterError(f"bad t grid {args.t_grid!r}") from None
    table = afe_validate(AdmissibleTuple.from_triple(tr), grid, ContourSpec(), args.margin)
    fh = _open_out(args, out)
    try:
        write_afe_csv(table, fh or out)
    finally:
        if fh:
            fh.close()


def cmd_sp_check(args, cfg, out):
    tr = _triple(args)
    ctx = PhaseContext.build(tr, (args.n1, args.n2, args.n3))
    r = sp_compare(ctx, args.f)
    payload = _header(args, tr)
    payload.update(
        c=ctx.c,
        tau=ctx.tau,
        quadrature_re=r.quadrature.real,
        quadrature_im=r.quadrature.imag,
        prediction_re=r.prediction.real,
        prediction_im=r.prediction.imag,
        abs_err=r.abs_err,
        rel_err=r.rel_err,
    )
    _emit_json(payload, out)


def cmd_moment(args, cfg, out):
    tr = _triple(args)
    tol = args.tol if args.tol is not None else cfg.quad_tol
    rep = assemble_residual(tr, args.T, QuadratureSpec(abs_tol=tol))
    payload = _header(args, tr, tol=tol)
    payload.update(rep.to_dict())
    _emit_json(payload, out)


def _split_ints(text: str, name: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise ParameterError(f"--{name} expects comma-separated integers") from None


def cmd_sigma(args, cfg, out):
    nums = _split_ints(args.num, "num")
    dens = _split_ints(args.den, "den")
    if len(nums) != 3 or len(dens) not in (1, 3):
        raise ParameterError("--num needs three integers and --den one or three")
    if len(dens) == 1:
        dens = dens * 3
    if 0 in dens:
        raise ParameterError("zero denominator")
    rt = RationalTriple(*(Fraction(n, d) for n, d in zip(nums, dens)))
    res = sigma_series(rt, args.pmax)
    payload = _header(args, exponents=[str(rt.a), str(rt.b), str(rt.c)])
    payload.update(value=res.value, tail_bound=res.tail_bound, solution_count=res.solution_count)
    _emit_json(payload, out)


def cmd_bounds_map(args, cfg, out):
    rep = winner_grid(args.grid, Fraction(args.eps).limit_denominator(10**6))
    fh = _open_out(args, out)
    try:
        write_grid_csv(rep, fh or out)
    finally:
        if fh:
            fh.close()
    if rep.violations:
        sys.stderr.write(f"{len(rep.violations)} in-range rows where the theorem does not win\n")


# --- parser --------------------------------------------------------------------


def _add_triple(p, b=True):
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    if b:
        p.add_argument("--b", type=float, default=None, help="must equal 1+a-c within 1e-12")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument("--config", help="plain 'key = value' configuration file")
    common.add_argument("--cache-dir", dest="cache_dir", default=None)
    common.add_argument("--cap", dest="tuple_cap", type=lambda s: int(float(s)), default=None)
    parser = _Parser(
        prog="expsum3",
        description="Monomial exponential sums and zeta-product moments.",
        allow_abbrev=False,
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], allow_abbrev=False, **kw)

    sub.add_parser = add_parser

    p = sub.add_parser("constants", help="closed-form constants and bound exponents")
    _add_triple(p)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("enumerate", help="CSV of the summation domain")
    _add_triple(p)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--convention", default="paper", choices=["paper", "window", "paper_DT", "cn_window"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_enumerate)

    for name, func in (("sum", cmd_sum), ("mu-sum", cmd_mu_sum)):
        p = sub.add_parser(name, help="weighted exponential sum" if name == "sum" else "sum of mu(n)")
        _add_triple(p)
        p.add_argument("--T", type=float, required=True)
        if name == "sum":
            p.add_argument("--convention", default="paper", choices=["paper", "window", "paper_DT", "cn_window"])
        p.add_argument("--chunks", type=int, default=1)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--precision", choices=["auto", "double", "extended"], default=None)
        p.set_defaults(func=func)

    p = sub.add_parser("fit", help="growth exponent of |S(T)|")
    _add_triple(p)
    p.add_argument("--Tmin", type=float, required=True)
    p.add_argument("--Tmax", type=float, required=True)
    p.add_argument("--points", type=int, required=True)
    p.add_argument("--convention", default="paper", choices=["paper", "window", "paper_DT", "cn_window"])
    p.add_argument("--chunks", type=int, default=8)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--precision", choices=["auto", "double", "extended"], default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("afe-check", help="AFE against the direct zeta product (CSV)")
    _add_triple(p)
    p.add_argument("--t-grid", dest="t_grid", required=True)
    p.add_argument("--margin", type=float, default=2.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_afe_check)

    p = sub.add_parser("sp-check", help="stationary phase against quadrature")
    p.add_argument("--n1", type=int, required=True)
    p.add_argument("--n2", type=int, required=True)
    p.add_argument("--n3", type=int, required=True)
    _add_triple(p)
    p.add_argument("--f", type=float, default=2.0)
    p.set_defaults(func=cmd_sp_check)

    p = sub.add_parser("moment", help="moment identity residual")
    _add_triple(p)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=cmd_moment)

    p = sub.add_parser("sigma", help="diagonal constant for rational exponents")
    p.add_argument("--num", required=True, help="numerators 'A,B,C'")
    p.add_argument("--den", required=True, help="common denominator or 'Da,Db,Dc'")
    p.add_argument("--pmax", type=lambda s: int(float(s)), required=True)
    p.set_defaults(func=cmd_sigma)

    p = sub.add_parser("bounds-map", help="winner map over the (a, c) grid (CSV)")
    p.add_argument("--grid", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bounds_map)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = load_config(args.config, {"cache_dir": args.cache_dir, "tuple_cap": args.tuple_cap})
        cfg.check_cache_dir()
        buf = io.StringIO()
        args.func(args, cfg, buf)
        out.write(buf.getvalue())
        return EXIT_OK
    except ParameterError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_PARAM
    except (ResourceError, AccuracyError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
