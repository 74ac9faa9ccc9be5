"""Command line entry point: ``eiksum <subcommand> ...`` (or ``python -m eiksum``)."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import sweep as sw
from .characters import AddChar, MultChar, descend_char
from .config import ConfigError, FieldSpec, build_algebra_over, load_config
from .ffield import FieldError
from .polytope import f_family, fhat_family
from .sums import (
    bound_regime,
    eik_extended,
    eik_sum,
    ek_sum,
    extend_add_char,
    extended_algebra,
    laurent_fiber_sum,
    main_term,
    unfolded_sum,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.replace(" ", "").split(",") if t]


def _unit(F, log: int, name: str) -> int:
    if not 0 <= log < F.q - 1:
        raise ConfigError(f"{name} must be a discrete log in 0..{F.q - 2}")
    return log


def _add_field_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--p", type=int, required=True, help="characteristic")
    p.add_argument("--s", type=int, default=1, help="q = p^s")


def _add_sum_args(p: argparse.ArgumentParser) -> None:
    _add_field_args(p)
    p.add_argument("--type", required=True, help="factor degrees, e.g. 1,1 or 2")
    p.add_argument("--exps", default=None, help="character exponents per factor (default trivial)")
    p.add_argument("--c", type=int, default=0, help="additive twist c as a discrete log (0 means c = 1)")
    p.add_argument("--a", type=int, default=0, help="fiber value a as a discrete log (in F_{q^m} when m > 1)")
    p.add_argument("--m", type=int, default=1, help="extension degree (eik only)")


def _value_json(v) -> dict:
    d = v.to_json()
    d["abs"] = v.abs_val()[0]
    return d


def _emit(obj, out: Path | None, name: str) -> None:
    if out is None:
        json.dump(obj, sys.stdout, indent=2, sort_keys=True, default=sw._json_default)
        sys.stdout.write("\n")
    else:
        out.mkdir(parents=True, exist_ok=True)
        sw.write_json(obj, out / name)
        print(f"wrote {out / name}")


def cmd_field(args) -> int:
    F = FieldSpec(args.p, args.s).build()
    info = F.descriptor()
    info.update({"q": F.q, "generator_powers": [F.to_int(k) for k in range(min(F.q - 1, 32))]})
    if args.x is not None:
        x = F.from_int(args.x)
        info["element"] = {
            "int": args.x,
            "log": None if x == F.zero else x,
            "trace": F.trace_prime(x),
            "inverse": None if x == F.zero else F.to_int(F.inv(x)),
        }
    _emit(info, args.out, "field.json")
    return EXIT_OK


def _sum_setup(args):
    F = FieldSpec(args.p, args.s).build()
    B = build_algebra_over(F, _ints(args.type))
    exps = _ints(args.exps) if args.exps else [0] * len(B.fields)
    chi = MultChar(B, tuple(exps))
    psi = AddChar(F, _unit(F, args.c, "c"))
    return F, B, chi, psi


def cmd_sum(args) -> int:
    F, B, chi, psi = _sum_setup(args)
    kind = args.command
    report = {"q": F.q, "type": list(B.type), "exps": list(chi.exps), "c": args.c, "a": args.a}
    if kind == "eik" and args.m > 1:
        Bp, descent = extended_algebra(B, args.m)
        a = _unit(Bp.base, args.a, "a")
        value = eik_extended(B, args.m, chi, psi, a)
        chi_p = descend_char(chi, descent)
        psi_p = extend_add_char(psi, Bp.base)
        main = main_term(Bp, chi_p, a)
        regime, rank = bound_regime(Bp, psi_p, a)
        Q = Bp.base.q
        report["m"] = args.m
    else:
        a = _unit(F, args.a, "a")
        fn = {"eik": eik_sum, "ek": ek_sum, "unfold": unfolded_sum}[kind]
        value = fn(B, chi, psi, a)
        main = main_term(B, chi, a)
        regime, rank = bound_regime(B, psi, a)
        Q = F.q
        if kind == "ek":
            regime, rank = "ek", B.degree
    report["value"] = _value_json(value)
    if kind in ("eik", "ek"):
        total = value + main if kind == "eik" else value
        bound = rank * Q ** (B.n / 2) if rank else None
        report.update({
            "main": _value_json(main) if kind == "eik" else None,
            "regime": regime,
            "bound": bound,
            "pass": None if bound is None else total.abs_val()[0] <= bound + 1e-6,
        })
    _emit(report, args.out, f"{kind}.json")
    return EXIT_FAIL if report.get("pass") is False else EXIT_OK


def cmd_toric(args) -> int:
    F = FieldSpec(args.p, args.s).build()
    fam = f_family(args.n) if args.family == "f" else fhat_family(args.n, args.m)
    w = _unit(F, args.w, "w")
    twists = _ints(args.twists) if args.twists else None
    psi = None if args.trivial_psi else AddChar(F, _unit(F, args.c, "c"))
    value = laurent_fiber_sum(fam, fam.specialize(F, w), twists, psi, F)
    _emit({"family": fam.name, "q": F.q, "w": args.w, "twists": twists, "c": args.c,
           "trivial_psi": args.trivial_psi, "value": _value_json(value)}, args.out, "toric.json")
    return EXIT_OK


def cmd_polytope(args) -> int:
    if args.config:
        cfg = load_config(args.config)
        if cfg.polytope is None:
            raise ConfigError("config has no [polytope] section")
        spec = cfg.polytope
        n_range, m_range, fields, depth = spec.n, spec.m, spec.fields, spec.depth
    else:
        n_range = tuple(_ints(args.n)) * (1 if "," in args.n else 2)
        m_range = tuple(_ints(args.m)) * (1 if "," in args.m else 2)
        fields = [FieldSpec(p, 1) for p in _ints(args.primes)] if args.primes else []
        depth = 3
    if args.depth is not None:
        depth = args.depth
    report = sw.polytope_report(n_range, m_range, fields, depth, args.jobs)
    _emit(report, args.out, "polytope.json")
    return EXIT_OK if report["pass"] else EXIT_FAIL


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    rows, summary = sw.run_sweep(cfg, args.jobs)
    text = sw.rows_to_csv(rows)
    if args.out is None:
        sys.stdout.write(text)
        json.dump(summary, sys.stderr, indent=2, sort_keys=True)
        sys.stderr.write("\n")
    else:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "sweep.csv").write_text(text)
        sw.write_json(summary, args.out / "sweep_summary.json")
        print(f"{summary['rows']} rows, {summary['fail']} failures -> {args.out}")
    return EXIT_FAIL if summary["fail"] else EXIT_OK


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    report = sw.verify_identities(cfg, args.jobs)
    if cfg.polytope is not None:
        depth = args.depth if args.depth is not None else cfg.polytope.depth
        report["polytope"] = sw.polytope_report(cfg.polytope.n, cfg.polytope.m, cfg.polytope.fields, depth, args.jobs)
        report["pass"] = report["pass"] and report["polytope"]["pass"]
    _emit(report, args.out, "verify.json")
    return EXIT_OK if report["pass"] else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eiksum", description="Exotic (inverted) Kloosterman sums over finite étale algebras.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=False):
        p.add_argument("--out", type=Path, default=None, help="output directory (default: stdout)")
        p.add_argument("--jobs", type=int, default=1, help="worker processes")
        p.add_argument("--depth", type=int, default=None, help="critical-point search depth")
        if config:
            p.add_argument("--config", type=Path, required=True, help="TOML configuration")

    p = sub.add_parser("field", help="describe F_{p^s} and optionally one element")
    _add_field_args(p)
    p.add_argument("--x", type=int, default=None, help="element in integer form")
    common(p)
    p.set_defaults(fn=cmd_field)

    for name, helptext in (("eik", "exotic inverted Kloosterman sum"), ("ek", "exotic Kloosterman sum"),
                           ("unfold", "unfolded triple sum (equals q * eik)")):
        p = sub.add_parser(name, help=helptext)
        _add_sum_args(p)
        common(p)
        p.set_defaults(fn=cmd_sum)

    p = sub.add_parser("toric", help="twisted torus sum of a Laurent family")
    _add_field_args(p)
    p.add_argument("--family", choices=("f", "fhat"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--w", type=int, required=True, help="parameter w as a discrete log")
    p.add_argument("--twists", default=None, help="per-variable character exponents")
    p.add_argument("--c", type=int, default=0, help="additive twist as a discrete log")
    p.add_argument("--trivial-psi", action="store_true", help="evaluate with the trivial additive character")
    common(p)
    p.set_defaults(fn=cmd_toric)

    p = sub.add_parser("polytope", help="Newton polytope report for fhat(n, m)")
    p.add_argument("--n", default="1,6", help="n or lo,hi")
    p.add_argument("--m", default="1,4", help="m or lo,hi")
    p.add_argument("--primes", default=None, help="prime fields for verdicts, e.g. 2,3")
    p.add_argument("--config", type=Path, default=None)
    common(p)
    p.set_defaults(fn=cmd_polytope)

    p = sub.add_parser("sweep", help="bound sweep from a config")
    common(p, config=True)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("verify", help="exact identity checks from a config")
    common(p, config=True)
    p.set_defaults(fn=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, FieldError, *sw.BUDGET_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
