"""Command line: ``fpmodmat {check,bench,crossover,crt-compare,plan}``.

Exit status: 0 on success, 1 on a mismatch or an infeasible requested
configuration, 2 on usage errors.
"""

import argparse
from contextlib import nullcontext
import logging
import sys

from . import bench
from .block import InfeasibleError
from .oracle import exact_mod_gemm, shadow_trace, to_exact
from .planner import (CRT_UNDERESTIMATE_NOTE, VARIANTS, plan_for_prime,
                      select_variant, variant_bit_limit)
from .scalar import FpContext

log = logging.getLogger("fpmodmat")


def parse_bits(text):
    """``"5,20,26"`` or ``"3-52"`` or a mix like ``"5,27-30"``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def parse_dims(text):
    dims = tuple(int(x) for x in text.split(","))
    if len(dims) != 3 or min(dims) < 1:
        raise argparse.ArgumentTypeError("dims must be m,k,n with positive entries")
    return dims


def parse_variants(text):
    if text in ("auto", "all"):
        return text
    out = []
    for part in text.split(";"):
        u, v = (int(x) for x in part.split(","))
        out.append((u, v))
    return out


def parse_lambda(text):
    return None if text == "auto" else int(text)


def _shared(p):
    p.add_argument("--bits", type=parse_bits, help="bitsizes, e.g. 5,20,26 or 3-52")
    p.add_argument("--dims", type=parse_dims, action="append", help="m,k,n (repeatable)")
    p.add_argument("--variant", type=parse_variants, default=None,
                   help="'u,v' or 'u,v;u,v' or 'auto' (default: all six)")
    p.add_argument("--concat", choices=["auto", "a", "b", "off"], default=None)
    p.add_argument("--lambda", dest="lam", type=parse_lambda, default=None, help="auto|N")
    p.add_argument("--kernel", choices=["naive", "accelerated"], default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--t", type=int, default=53, help="significand width (53 or 24)")
    p.add_argument("--checked", action="store_true", help="enable contract checks and shadow tracing")
    p.add_argument("--threads", type=int, default=None, help="pin BLAS thread count")


def build_parser():
    parser = argparse.ArgumentParser(prog="fpmodmat", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="verify products against the big-integer oracle")
    _shared(c)
    c.add_argument("--nseeds", type=int, default=3, help="seeds seed..seed+nseeds-1")
    c.add_argument("--algorithms", default="plain,concat,workspace")
    c.add_argument("--a", dest="a_path", help="matrix file for A (single-product mode)")
    c.add_argument("--b", dest="b_path", help="matrix file for B (single-product mode)")

    b = sub.add_parser("bench", help="time variants over a bitsize sweep, CSV output")
    _shared(b)
    b.add_argument("--scenario", choices=["square", "unbalanced"], default="square")
    b.add_argument("--scale", type=float, default=1.0, help="scale preset dimensions")

    x = sub.add_parser("crossover", help="best variant per bitsize from a bench CSV")
    x.add_argument("csv")
    x.add_argument("--out", default=None)

    r = sub.add_parser("crt-compare", help="multiword vs multimodular product counts")
    r.add_argument("--t", type=int, default=53)
    r.add_argument("--lambda", dest="lams", default="1,512", help="comma list")
    r.add_argument("--k", type=int, default=32768)
    r.add_argument("--bits", type=parse_bits, default=None)
    r.add_argument("--out", default=None)

    pl = sub.add_parser("plan", help="show the product plan for a modulus or bitsize")
    _shared(pl)
    pl.add_argument("--p", type=int, default=None, help="explicit modulus")
    pl.add_argument("--min-lambda", type=int, default=1)
    return parser


def _open_out(path):
    return open(path, "w", newline="") if path else nullcontext(sys.stdout)


def cmd_check(args):
    kernel = args.kernel or "naive"
    if args.a_path or args.b_path:
        return _check_files(args, kernel)
    variants = VARIANTS if args.variant in (None, "all", "auto") else args.variant
    seeds = tuple(range(args.seed, args.seed + args.nseeds))
    algorithms = tuple(a.strip() for a in args.algorithms.split(","))
    unknown = set(algorithms) - set(bench.ALGORITHMS)
    if unknown:
        print(f"unknown algorithms: {sorted(unknown)}", file=sys.stderr)
        return 2
    results = bench.run_check(dims=args.dims or bench.DEFAULT_CHECK_DIMS,
                              bits=args.bits or bench.DEFAULT_CHECK_BITS,
                              variants=variants, seeds=seeds, algorithms=algorithms,
                              kernel=kernel, t=args.t, checked=args.checked)
    with _open_out(args.out) as fh:
        for r in results:
            print(r.line(), file=fh)
        npass = sum(r.status == "pass" for r in results)
        nfail = sum(r.status == "FAIL" for r in results)
        nskip = len(results) - npass - nfail
        print(f"# {npass} passed, {nfail} failed, {nskip} skipped", file=fh)
    return 1 if nfail else 0


def _check_files(args, kernel):
    if not (args.a_path and args.b_path):
        print("--a and --b must be given together", file=sys.stderr)
        return 2
    A, p = bench.read_matrix(args.a_path)
    B, p2 = bench.read_matrix(args.b_path)
    if p != p2:
        print(f"moduli differ: {p} vs {p2}", file=sys.stderr)
        return 2
    m, k = A.shape
    n = B.shape[1]
    variant = None if args.variant in (None, "auto", "all") else args.variant[0]
    ctx = FpContext(p, args.t, checked=args.checked)
    plan = plan_for_prime(p, m, k, n, args.t, variant=variant, concat=args.concat or "auto",
                          lam=args.lam)
    op = bench.ALGORITHMS["plain" if plan.concat == "none" else "concat"]
    extra = {} if plan.concat == "none" else {"side": plan.concat}
    try:
        if args.checked:
            verdict = shadow_trace(op, A, B, plan.u, plan.v, plan.lam, ctx, kernel, **extra)
            C = verdict.result
            if not verdict.passed:
                print(f"shadow violation: {verdict.first}", file=sys.stderr)
                return 1
        else:
            C = op(A, B, plan.u, plan.v, plan.lam, ctx, kernel, **extra)
    except InfeasibleError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    ok = to_exact(C) == exact_mod_gemm(A, B, p)
    if args.out:
        bench.write_matrix(args.out, C, p)
    print(f"({plan.u},{plan.v}) concat={plan.concat} lambda={plan.lam}: "
          f"{'pass' if ok else 'FAIL'}")
    return 0 if ok else 1


def cmd_bench(args):
    scenario = args.scenario
    if args.dims:
        dims = args.dims[0]
    else:
        preset = bench.SQUARE_PRESET if scenario == "square" else bench.UNBALANCED_PRESET
        m, k, n = preset
        if scenario == "square":
            dims = tuple(max(1, round(x * args.scale)) for x in preset)
        else:
            dims = (max(1, round(m * args.scale)), max(1, round(k * args.scale)), n)
    variants = VARIANTS if args.variant in (None, "all") else args.variant
    concat = args.concat or ("off" if scenario == "square" else "auto")

    def progress(rec):
        log.info("bits=%d (%d,%d) %s %.4fs", rec.bits, rec.u, rec.v, rec.status, rec.t_avg_s)

    records = bench.run_bench(scenario, dims, args.bits or range(3, args.t), variants, concat,
                              args.lam, args.runs, args.kernel or "accelerated", args.seed,
                              args.t, args.threads, progress)
    with _open_out(args.out) as fh:
        bench.write_bench_csv(records, fh)
    requested_infeasible = args.variant not in (None, "all") and any(
        r.status == "infeasible" for r in records)
    return 1 if requested_infeasible else 0


def cmd_crossover(args):
    with open(args.csv, newline="") as fh:
        records = bench.read_bench_csv(fh)
    try:
        table = bench.crossover(records)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    with _open_out(args.out) as fh:
        print(bench.format_crossover(table), file=fh)
    return 0


def cmd_crt_compare(args):
    lams = [int(x) for x in args.lams.split(",")]
    if any(lam >= 2**args.t or lam < 1 for lam in lams):
        print("lambda must be in [1, 2^t)", file=sys.stderr)
        return 2
    bits = args.bits or range(1, args.t)
    rows = bench.crt_compare_rows(args.t, lams, args.k, bits)
    with _open_out(args.out) as fh:
        bench.write_crt_csv(rows, fh)
    print(f"# note: {CRT_UNDERESTIMATE_NOTE}", file=sys.stderr)
    return 0


def cmd_plan(args):
    m, k, n = (args.dims or [(1024, 1024, 1024)])[0]
    if args.p is not None:
        variant = None if args.variant in (None, "auto", "all") else args.variant[0]
        plan = plan_for_prime(args.p, m, k, n, args.t, variant=variant,
                              concat=args.concat or "auto", lam=args.lam)
        bits = args.p.bit_length()
    elif args.bits:
        bits = args.bits[0]
        try:
            plan = select_variant(bits, m, k, n, args.t, args.min_lambda)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    else:
        print("plan needs --p or --bits", file=sys.stderr)
        return 2
    limit = variant_bit_limit(plan.u, plan.v, args.t)
    print(f"bits={bits} dims={m}x{k}x{n} t={args.t}")
    print(f"variant=({plan.u},{plan.v}) concat={plan.concat} lambda={plan.lam} "
          f"(variant limit {limit} bits)")
    print(f"products={plan.predicted_products} reductions={plan.predicted_reductions} "
          f"storage_entries={plan.storage_entries}")
    return 0 if plan.lam >= 1 else 1


COMMANDS = {"check": cmd_check, "bench": cmd_bench, "crossover": cmd_crossover,
            "crt-compare": cmd_crt_compare, "plan": cmd_plan}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s")
    if getattr(args, "t", 53) not in (24, 53) and args.command not in ("crt-compare", "plan"):
        parser.error("--t must be 53 or 24")
    try:
        return COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
