"""Command-line front end.

Subcommands wrap the library modules one-to-one: counting tables
(``count``), the brute-force density oracle (``density``), hyperbolic
formula checks (``geometry``), archimedean Whittaker evaluations
(``whittaker``), special functions (``special``), the symbolic Hecke layer
(``satake``), the Fock-space identity table (``fock``), and truncated
theta values (``theta``).

Output is deterministic JSON (insertion-ordered keys, rationals as
"num/den" strings, every floating value next to an abs_error field) or
CSV for grids.  Exit codes: 2 invalid configuration, 3 uncovered local
case, 4 quadrature failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from . import counting, fock, hecke, hyperbolic, quaternion, specfun, whittaker
from .counting import (
    DepthTooSmall,
    IntersectionMatrix,
    NotAdmissible,
    NotNice,
    UncoveredCase,
)
from .hyperbolic import QuadratureFailure
from .padic import rational_str
from .quaternion import ShimuraContext

EXIT_CONFIG = 2
EXIT_UNCOVERED = 3
EXIT_QUADRATURE = 4


def _emit(obj, args) -> None:
    out = json.dumps(obj, indent=None, separators=(",", ":"))
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(out + "\n")
    else:
        print(out)


def _context(args) -> ShimuraContext:
    try:
        return ShimuraContext(args.D, args.M)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _parse_triple(text: str) -> tuple[int, int, int]:
    parts = [int(t) for t in text.split(",")]
    if len(parts) != 3:
        raise SystemExit(EXIT_CONFIG)
    return parts[0], parts[1], parts[2]


def _count_row(task):
    D, M, d1, d2, b = task
    ctx = ShimuraContext(D, M)
    row = {"D1": d1, "D2": d2, "b": b}
    try:
        rt = counting.count_RT(IntersectionMatrix(d1, d2, b), ctx)
        row["value"] = rational_str(rt.value)
        row["primes"] = [r.to_json() for r in rt.primes]
    except UncoveredCase as exc:
        row["uncovered"] = {"p": exc.p, "reason": str(exc)}
        return row
    flags = counting.is_admissible_nice(d1, d2, b)
    row.update(flags)
    if flags["admissible"] and flags["nice"]:
        prim = counting.rickards_count(d1, d2, b, ctx)
        allp = counting.rickards_all_pairs(d1, d2, b, ctx)
        row["primitive_count"] = rational_str(prim.value)
        row["all_pairs_count"] = rational_str(allp)
        row["agreement"] = allp == rt.value
    return row


def cmd_count(args) -> int:
    ctx = _context(args)
    header = {
        "D": ctx.D,
        "level": ctx.level,
        "volume": {"coeff_pi": rational_str(ctx.volume_pi_coefficient())},
    }
    if args.T:
        d1, d2, b = _parse_triple(args.T)
        try:
            row = _count_row((ctx.D, ctx.level, d1, d2, b))
        except (NotAdmissible, NotNice, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        if "uncovered" in row:
            _emit({**header, "row": row}, args)
            return EXIT_UNCOVERED
        _emit({**header, "row": row}, args)
        return 0
    if not args.grid:
        print("error: need --T or --grid", file=sys.stderr)
        return EXIT_CONFIG
    spec = dict(part.split("=", 1) for part in args.grid.split())
    lo1, hi1 = (int(t) for t in spec["D1"].split(".."))
    lo2, hi2 = (int(t) for t in spec["D2"].split(".."))
    tasks = []
    for d1 in range(lo1, hi1 + 1):
        if d1 % 4 not in (0, 1):
            continue
        for d2 in range(lo2, hi2 + 1):
            if d2 % 4 not in (0, 1):
                continue
            bs: list[int]
            if spec.get("b", "auto") == "auto":
                bs = [
                    b
                    for b in range(0, math.isqrt(d1 * d2) + 1)
                    if (b - d1 * d2) % 2 == 0 and b * b < d1 * d2
                ]
            else:
                bs = [int(spec["b"])]
            tasks.extend((ctx.D, ctx.level, d1, d2, b) for b in bs)
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_count_row, tasks))
    else:
        rows = [_count_row(t) for t in tasks]
    if args.format == "csv":
        cols = ["D1", "D2", "b", "value", "admissible", "nice",
                "primitive_count", "all_pairs_count", "agreement"]
        lines = [",".join(cols)]
        for row in rows:
            lines.append(",".join(str(row.get(c, "")) for c in cols))
        text = "\n".join(lines)
        if args.output:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
        else:
            print(text)
    else:
        _emit({**header, "rows": rows}, args)
    return 0


def cmd_density(args) -> int:
    ctx = _context(args)
    d1, d2, b = _parse_triple(args.T)
    T = [[Fraction(d1), Fraction(b)], [Fraction(b), Fraction(d2)]]
    try:
        alpha = counting.local_density_oracle(T, args.p, ctx, args.depth)
        stable = True
    except DepthTooSmall:
        alpha = counting.local_density_oracle(T, args.p, ctx, args.depth, check_stable=False)
        stable = False
    out = {"alpha": rational_str(alpha), "stable": stable}
    try:
        if args.p == 2 or ctx.level % args.p == 0:
            out["beta"] = rational_str(counting.beta_from_density(T, args.p, ctx, args.depth))
            out["beta_closed"] = rational_str(counting.beta_p(T, args.p, ctx))
        else:
            out["tildeW"] = rational_str(
                counting.tilde_whittaker_from_density(T, args.p, ctx, args.depth)
            )
            out["tildeW_closed"] = rational_str(counting.tilde_whittaker(T, args.p, ctx))
    except UncoveredCase as exc:
        out["uncovered"] = str(exc)
        _emit(out, args)
        return EXIT_UNCOVERED
    _emit(out, args)
    return 0


def cmd_geometry(args) -> int:
    rng = np.random.default_rng(args.seed)
    worst = {"angle": 0.0, "distance": 0.0, "point_geodesic": 0.0, "point_point": 0.0}
    n = args.count
    for _ in range(n):
        g = (
            hyperbolic.k_theta(rng.uniform(0, math.pi))
            @ hyperbolic.a_t(rng.uniform(-1.5, 1.5))
            @ hyperbolic.rho_t(rng.uniform(-1, 1))
        )
        x1 = hyperbolic.conj_vector(g, hyperbolic.E1)
        x2 = hyperbolic.conj_vector(g @ hyperbolic.k_theta(rng.uniform(0.1, 1.4)), hyperbolic.E1)
        b = hyperbolic.half_inner(x1, x2)
        D = hyperbolic.q_norm(x1) * hyperbolic.q_norm(x2)
        try:
            if b * b < D:
                r = hyperbolic.intersection_angle(x1, x2)
                worst["angle"] = max(
                    worst["angle"],
                    abs(math.cos(r["angle"]) - abs(b) / math.sqrt(D)),
                )
            else:
                d = hyperbolic.geodesic_distance(x1, x2)
                worst["distance"] = max(
                    worst["distance"], abs(math.cosh(d) - abs(b) / math.sqrt(D))
                )
            x3 = hyperbolic.conj_vector(g, hyperbolic.E3)
            d = hyperbolic.point_geodesic_distance(x3, x2)
            b2 = hyperbolic.half_inner(x3, x2)
            worst["point_geodesic"] = max(
                worst["point_geodesic"],
                abs(
                    math.sinh(d)
                    - abs(b2) / math.sqrt(-hyperbolic.q_norm(x3) * hyperbolic.q_norm(x2))
                ),
            )
            x4 = hyperbolic.conj_vector(g @ hyperbolic.a_t(0.6), hyperbolic.E3)
            d = hyperbolic.point_point_distance(x3, x4)
            b3 = hyperbolic.half_inner(x3, x4)
            worst["point_point"] = max(
                worst["point_point"],
                abs(
                    math.cosh(d)
                    - abs(b3) / math.sqrt(hyperbolic.q_norm(x3) * hyperbolic.q_norm(x4))
                ),
            )
        except QuadratureFailure:
            return EXIT_QUADRATURE
    _emit(
        {
            "configurations": n,
            "max_abs_error": {k: v for k, v in worst.items()},
            "pass": all(v <= args.tol for v in worst.values()),
        },
        args,
    )
    return 0


def cmd_whittaker(args) -> int:
    s = complex(args.s) if "j" in args.s else float(args.s)
    try:
        if args.kind in ("pp", "pm"):
            v1, v12, v2 = (float(t) for t in args.v.split(","))
            v = whittaker.PosDefMatrix2(v1, v2, v12)
            if args.kind == "pp":
                ev = whittaker.W_pp(args.n, v, s)
            else:
                ev = whittaker.W_pm(args.n, args.b0, v, s)
            _emit(
                {
                    "kind": args.kind,
                    "n": args.n,
                    "value_re": ev.value.real,
                    "value_im": complex(ev.value).imag,
                    "abs_error": ev.abs_error,
                },
                args,
            )
            return 0
        if args.v1 is not None:
            v = whittaker.PosDefMatrix2(args.v1, args.v1 + 1.0)
        else:
            v1, v12, v2 = (float(t) for t in args.v.split(","))
            v = whittaker.PosDefMatrix2(v1, v2, v12)
        ev = whittaker.W_m0(v, s) if args.kind == "m0" else whittaker.W_p0(v, s)
        out = {
            "kind": args.kind,
            "value_re": complex(ev.value).real,
            "value_im": complex(ev.value).imag,
            "abs_error": ev.abs_error,
        }
        if args.kind == "m0" and args.crosscheck:
            zero = np.zeros((2, 2))

            def frad(z):
                zz = np.asarray(z, dtype=complex)
                d = np.arccosh(1.0 + np.abs(zz - 1j) ** 2 / (2 * np.imag(zz)))
                us = np.maximum(np.cosh(d).reshape(-1), 1 + 1e-13)
                vals = np.array(
                    [x.value for x in specfun.legendre_P_grid(0, -s, us)]
                )
                return vals.reshape(d.shape)

            numeric, err = whittaker.orbital_integral((hyperbolic.E3, zero), v, frad)
            numeric = math.sqrt(v.det) * math.exp(-2 * math.pi * v.v1) * numeric
            out["numeric_delta"] = abs(numeric - ev.value)
            out["numeric_abs_error"] = err
        _emit(out, args)
        return 0
    except QuadratureFailure:
        return EXIT_QUADRATURE


def cmd_special(args) -> int:
    s_args = [complex(t) if "j" in t else float(t) for t in args.args.split(",")]
    try:
        if args.fn == "hyp2f1":
            v = specfun.hyp2f1(*s_args)
        elif args.fn == "legendre":
            v = specfun.legendre_P(*s_args)
        elif args.fn == "ferrers":
            v = specfun.ferrers_P(*s_args)
        elif args.fn == "whittaker":
            v = specfun.whittaker_W(*s_args)
        else:
            print("error: unknown function", file=sys.stderr)
            return EXIT_CONFIG
    except (specfun.NoConvergentRegime, specfun.PoleAtC) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_QUADRATURE
    _emit(
        {
            "fn": args.fn,
            "value_re": complex(v.value).real,
            "value_im": complex(v.value).imag,
            "abs_error": v.abs_error,
        },
        args,
    )
    return 0


def cmd_satake(args) -> int:
    p = args.p
    eps = None
    if args.eps != "auto":
        eps = hecke.Coeff.of(p, 1) if args.eps == "1" else hecke.Coeff.i(p)
    try:
        img = hecke.satake_symplectic(args.tag, p, eps)
    except hecke.UnknownTag as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = {"p": p, "tag": args.tag, "satake": str(img)}
    if args.tag.startswith("T2"):
        rz = hecke.rz_map(img)
        out["rz"] = str(rz)
        out["rz_orth_basis"] = hecke.orth_basis_string(hecke.express_in_orth_basis(rz))
        if args.tag == "T2_0":
            out["descent_report"] = hecke.rz_t20_report(p, eps)
    else:
        out["orth_basis"] = hecke.orth_basis_string(hecke.express_in_orth_basis(img))
    _emit(out, args)
    return 0


def cmd_fock(args) -> int:
    rep = fock.check_laplacian_commute()
    out = {
        "C2": "match" if rep["c2_match"] else "mismatch",
        "C1": "sign-mismatch" if rep["c1_mismatch_is_sign_flip"] else (
            "match" if rep["c1_match"] else "mismatch"
        ),
    }
    if args.check == "all":
        out["computed_C1"] = rep["computed_c1"]
        out["stated_C1"] = rep["stated_c1"]
        out["computed_C2"] = rep["computed_c2"]
        fam = [str(fock.casimir_o_iterated(n)) for n in range(4)]
        out["iterates"] = fam
        out["C1_words"] = sum(int(c.re) for c in fock.trace_expand("C1").values())
    _emit(out, args)
    return 0


def cmd_theta(args) -> int:
    ctx = _context(args)
    try:
        z = complex(args.z)
        if args.genus == 1:
            tau = complex(args.tau)
        else:
            parts = [complex(t) for t in args.tau.split(",")]
            tau = np.array([[parts[0], parts[1]], [parts[1], parts[2]]])
        val, tail = quaternion.theta_truncated(ctx, args.genus, tau, z, args.bound)
    except quaternion.MissingGlobalBasis as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _emit(
        {
            "genus": args.genus,
            "value_re": val.real,
            "value_im": val.imag,
            "abs_error": tail,
        },
        args,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="shimcycles",
        description="cycle-pair counts on compact Shimura curves and their verification surfaces",
    )
    ap.add_argument("--config", help="key=value file with default flags")
    sub = ap.add_subparsers(dest="cmd", required=True)

    c = sub.add_parser("count", help="|R_T| tables with the dual counting route")
    c.add_argument("--D", type=int, required=True)
    c.add_argument("--M", type=int, default=1)
    c.add_argument("--T", help="triple D1,D2,b")
    c.add_argument("--grid", help='e.g. "D1=5..21 D2=5..21 b=auto"')
    c.add_argument("--format", choices=("json", "csv"), default="json")
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--output")
    c.set_defaults(func=cmd_count)

    d = sub.add_parser("density", help="brute-force local density oracle")
    d.add_argument("--p", type=int, required=True)
    d.add_argument("--T", required=True, help="triple D1,D2,b")
    d.add_argument("--depth", type=int, default=None)
    d.add_argument("--D", type=int, default=6)
    d.add_argument("--M", type=int, default=1)
    d.add_argument("--output")
    d.set_defaults(func=cmd_density)

    g = sub.add_parser("geometry", help="hyperbolic formula checks on random configurations")
    g.add_argument("--count", type=int, default=100)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--tol", type=float, default=1e-10)
    g.add_argument("--output")
    g.set_defaults(func=cmd_geometry)

    w = sub.add_parser("whittaker", help="archimedean Whittaker evaluations")
    w.add_argument("--kind", choices=("pp", "pm", "m0", "p0"), required=True)
    w.add_argument("--n", type=int, default=0)
    w.add_argument("--s", default="0.0")
    w.add_argument("--v", default="1,0,1", help="v1,v12,v2")
    w.add_argument("--v1", type=float, default=None, help="rank-one kinds: v1 with det v = v1(v1+1)")
    w.add_argument("--b0", type=float, default=2.0)
    w.add_argument("--crosscheck", action="store_true")
    w.add_argument("--output")
    w.set_defaults(func=cmd_whittaker)

    sp = sub.add_parser("special", help="special function evaluation")
    sp.add_argument("--fn", required=True, choices=("hyp2f1", "legendre", "ferrers", "whittaker"))
    sp.add_argument("--args", required=True, help="comma-separated arguments")
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_special)

    st = sub.add_parser("satake", help="symbolic Hecke images")
    st.add_argument("--p", type=int, required=True)
    st.add_argument("--tag", default="T2_0", choices=("T1_0", "T2_0", "T2_1"))
    st.add_argument("--eps", default="auto", choices=("auto", "1", "i"))
    st.add_argument("--output")
    st.set_defaults(func=cmd_satake)

    f = sub.add_parser("fock", help="Fock-space identity table")
    f.add_argument("--check", default="all", choices=("all", "summary"))
    f.add_argument("--output")
    f.set_defaults(func=cmd_fock)

    t = sub.add_parser("theta", help="truncated theta values")
    t.add_argument("--D", type=int, default=6)
    t.add_argument("--M", type=int, default=1)
    t.add_argument("--genus", type=int, default=1, choices=(1, 2))
    t.add_argument("--tau", required=True, help="genus 1: one complex; genus 2: t11,t12,t22")
    t.add_argument("--z", default="0.1+1.2j")
    t.add_argument("--bound", type=float, default=12.0)
    t.add_argument("--output")
    t.set_defaults(func=cmd_theta)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    # allow a key=value config file to provide defaults
    if "--config" in argv:
        idx = argv.index("--config")
        path = argv[idx + 1]
        del argv[idx : idx + 2]
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#") or "=" not in line:
                    continue
                key, val = line.split("=", 1)
                flag = f"--{key.strip()}"
                if flag not in argv:
                    argv.extend([flag, val.strip()])
    args = ap.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
