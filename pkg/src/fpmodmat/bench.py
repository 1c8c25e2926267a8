"""Correctness sweeps, timing runs, crossover tables and CSV / matrix-file I/O."""

from contextlib import nullcontext
import csv
from dataclasses import asdict, dataclass, fields
import math
import time

import numpy as np

from .block import block_gemm_mod
from .kernels import get_kernel
from .multiword import (concat_side, decompose, mw_product, mw_product_concat,
                        mw_product_workspace)
from .oracle import exact_mod_gemm, shadow_trace, to_exact
from .planner import (VARIANTS, crt_comparison, mw_block_size, plan_for_prime,
                      variant_bit_limit)
from .primes import largest_prime_with_bits
from .scalar import FpContext

SCHEMA_VERSION = "fpmodmat-bench/1"
CRT_SCHEMA_VERSION = "fpmodmat-crt/1"

SKIPPED = "skipped (over variant bit limit)"

DEFAULT_CHECK_BITS = (5, 20, 26, 30, 35, 39, 42, 48, 52)
DEFAULT_CHECK_DIMS = ((17, 33, 9), (64, 64, 64), (128, 300, 32))
SQUARE_PRESET = (10016, 10016, 10016)
UNBALANCED_PRESET = (10923, 32768, 32)

ALGORITHMS = {
    "plain": mw_product,
    "concat": mw_product_concat,
    "workspace": mw_product_workspace,
}


def random_matrix(rng, rows, cols, p, dtype=np.float64):
    """Uniform integers in [0, p) stored as floats."""
    return rng.integers(0, p, size=(rows, cols), dtype=np.int64).astype(dtype)


def case_rng(seed, bits, m, k, n):
    # one independent, reproducible stream per (seed, case)
    return np.random.default_rng([seed, bits, m, k, n])


def prime_for_bits(bits: int) -> int:
    return largest_prime_with_bits(bits)


# ------------------------------------------------------------------ check --


@dataclass
class CheckResult:
    u: int
    v: int
    bits: int
    p: int
    dims: tuple
    seed: int
    algorithm: str
    status: str  # "pass", "FAIL" or SKIPPED
    lam: int = 0
    detail: str = ""

    def line(self):
        m, k, n = self.dims
        return (f"({self.u},{self.v}) bits={self.bits:2d} p={self.p} dims={m}x{k}x{n} "
                f"seed={self.seed} {self.algorithm:9s} lambda={self.lam}: {self.status}"
                + (f" [{self.detail}]" if self.detail else ""))


def run_check(dims=DEFAULT_CHECK_DIMS, bits=DEFAULT_CHECK_BITS, variants=VARIANTS,
              seeds=(0, 1, 2), algorithms=tuple(ALGORITHMS), kernel=None, t=53,
              checked=False, progress=None):
    """Compare every requested product against the exact big-integer oracle.

    Variant/bitsize pairs over the variant's limit are reported as skipped.
    With ``checked`` each product also runs under the shadow checker.
    """
    kernel = get_kernel(kernel)
    dtype = FpContext(5, t).dtype
    results = []
    for b in bits:
        if b > t - 1 or b < 3:
            continue
        p = prime_for_bits(b)
        ctx = FpContext(p, t, checked=checked)
        for m, k, n in dims:
            for seed in seeds:
                rng = case_rng(seed, b, m, k, n)
                A = random_matrix(rng, m, k, p, dtype)
                B = random_matrix(rng, k, n, p, dtype)
                ref = None
                for u, v in variants:
                    if b > variant_bit_limit(u, v, t):
                        for alg in algorithms:
                            results.append(CheckResult(u, v, b, p, (m, k, n), seed, alg,
                                                       SKIPPED))
                        continue
                    if ref is None:
                        ref = exact_mod_gemm(A, B, p)
                    lam = plan_for_prime(p, m, k, n, t, variant=(u, v)).lam
                    for alg in algorithms:
                        op = ALGORITHMS[alg]
                        detail = ""
                        if checked:
                            verdict = shadow_trace(op, A, B, u, v, lam, ctx, kernel)
                            C = verdict.result
                            if not verdict.passed:
                                detail = str(verdict.first)
                        else:
                            C = op(A, B, u, v, lam, ctx, kernel)
                        ok = to_exact(C) == ref and not detail
                        r = CheckResult(u, v, b, p, (m, k, n), seed, alg,
                                        "pass" if ok else "FAIL", lam, detail)
                        results.append(r)
                        if progress:
                            progress(r)
    return results


# ------------------------------------------------------------------ bench --


@dataclass
class BenchRecord:
    scenario: str
    m: int
    k: int
    n: int
    bits: int
    p: int
    u: int
    v: int
    concat: str
    lam: int
    kernel: str
    runs: int
    t_avg_s: float
    status: str = "ok"
    schema_version: str = SCHEMA_VERSION

    @property
    def eff_gflops(self) -> float:
        if self.status != "ok" or not self.t_avg_s > 0:
            return float("nan")
        return 2 * self.m * self.k * self.n / self.t_avg_s * 1e-9

    def row(self):
        d = asdict(self)
        d["eff_gflops"] = self.eff_gflops
        return d


CSV_FIELDS = ["schema_version", "scenario", "m", "k", "n", "bits", "p", "u", "v", "concat",
              "lambda", "kernel", "runs", "t_avg_s", "eff_gflops", "status"]


def write_bench_csv(records, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in records:
        d = r.row()
        d["lambda"] = d.pop("lam")
        w.writerow([_fmt(d[f]) for f in CSV_FIELDS])


def _fmt(x):
    if isinstance(x, float):
        return "" if math.isnan(x) else f"{x:.6g}"
    return x


def read_bench_csv(fh):
    reader = csv.DictReader(fh)
    if reader.fieldnames != CSV_FIELDS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    out = []
    ints = {f.name for f in fields(BenchRecord) if f.type in ("int", int)}
    for row in reader:
        if row["schema_version"] != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema {row['schema_version']!r}")
        row["lam"] = row.pop("lambda")
        row.pop("eff_gflops")
        kw = {}
        for f in fields(BenchRecord):
            val = row[f.name]
            if f.name in ints:
                val = int(val)
            elif f.name == "t_avg_s":
                val = float(val) if val else float("nan")
            kw[f.name] = val
        out.append(BenchRecord(**kw))
    return out


def _thread_limit(threads):
    if threads is None:
        return nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=int(threads))


def _run_once(scenario, A, B, pre_a, p, m, k, n, t, variant, concat, lam, kernel):
    # plan construction is part of the timed region
    ctx = FpContext(p, t)
    plan = plan_for_prime(p, m, k, n, t, variant=variant, concat=concat, lam=lam)
    if plan.u == plan.v == 1:
        return block_gemm_mod(None, A, B, plan.lam, ctx, kernel), plan
    left = pre_a if pre_a is not None else A
    if plan.concat == "none":
        C = mw_product(left, B, plan.u, plan.v, plan.lam, ctx, kernel)
    else:
        C = mw_product_concat(left, B, plan.u, plan.v, plan.lam, ctx, kernel, side=plan.concat)
    return C, plan


def run_bench(scenario="square", dims=None, bits=range(3, 53), variants=VARIANTS,
              concat="off", lam=None, runs=10, kernel="accelerated", seed=0, t=53,
              threads=None, progress=None):
    """Time each (bitsize, variant) point and return :class:`BenchRecord` rows.

    ``square``: everything is timed, including both decompositions.
    ``unbalanced``: A is decomposed once beforehand (it would be reused across
    iterations in practice); B's decomposition and the product are timed.
    ``variants`` may be ``"auto"`` to let the planner choose per bitsize.
    """
    if scenario not in ("square", "unbalanced"):
        raise ValueError("scenario must be 'square' or 'unbalanced'")
    m, k, n = dims or (SQUARE_PRESET if scenario == "square" else UNBALANCED_PRESET)
    kernel = get_kernel(kernel)
    dtype = FpContext(5, t).dtype
    records = []
    with _thread_limit(threads):
        for b in bits:
            if b < 3 or b > t - 1:
                continue
            p = prime_for_bits(b)
            rng = case_rng(seed, b, m, k, n)
            A = random_matrix(rng, m, k, p, dtype)
            B = random_matrix(rng, k, n, p, dtype)
            todo = [None] if variants == "auto" else list(variants)
            for variant in todo:
                if variant is None:
                    plan = plan_for_prime(p, m, k, n, t, concat=concat, lam=lam)
                    variant = (plan.u, plan.v)
                u, v = variant
                lam_p = int(lam) if lam is not None else mw_block_size(u, v, p, t)
                side = plan_for_prime(p, m, k, n, t, variant=variant, concat=concat).concat
                if u * v == 1:
                    side = "none"
                if lam_p < 1 or (lam is not None and mw_block_size(u, v, p, t) < lam_p):
                    rec = BenchRecord(scenario, m, k, n, b, p, u, v, side, lam_p,
                                      kernel.name, runs, float("nan"), "infeasible")
                    records.append(rec)
                    if progress:
                        progress(rec)
                    continue
                pre_a = None
                if scenario == "unbalanced" and u * v > 1:
                    pre_a = decompose(A, u, FpContext(p, t))
                elapsed = []
                for _ in range(runs):
                    t0 = time.perf_counter()
                    _, plan = _run_once(scenario, A, B, pre_a, p, m, k, n, t, variant,
                                        concat, lam, kernel)
                    elapsed.append(time.perf_counter() - t0)
                rec = BenchRecord(scenario, m, k, n, b, p, u, v, plan.concat, plan.lam,
                                  kernel.name, runs, float(np.mean(elapsed)))
                records.append(rec)
                if progress:
                    progress(rec)
    return records


# -------------------------------------------------------------- crossover --


def _tie_key(rec):
    return (-rec.eff_gflops, rec.u * rec.v, rec.u + rec.v)


def crossover(records):
    """Bitsize intervals on which each variant has the best effective Gflops/s.

    Returns ``{(u, v): [(lo, hi), ...]}`` covering every variant present in
    the records (an empty list when it never wins). Equal rates go to the
    smaller ``uv``, then to fewer total words. Raises ``ValueError`` if the
    sweep has holes.
    """
    ok = [r for r in records if r.status == "ok" and not math.isnan(r.eff_gflops)]
    variants = sorted({(r.u, r.v) for r in records}, key=lambda uv: (uv[0] * uv[1], sum(uv)))
    if not ok:
        raise ValueError("no successful measurements")
    bits = sorted({r.bits for r in ok})
    missing = sorted(set(range(bits[0], bits[-1] + 1)) - set(bits))
    if missing:
        raise ValueError(f"bitsize sweep has gaps at {missing}")
    winners = []
    for b in bits:
        best = min((r for r in ok if r.bits == b), key=_tie_key)
        winners.append((b, (best.u, best.v)))
    table = {uv: [] for uv in variants}
    for b, uv in winners:
        spans = table[uv]
        if spans and spans[-1][1] == b - 1:
            spans[-1] = (spans[-1][0], b)
        else:
            spans.append((b, b))
    return table


def format_crossover(table, label="measured"):
    variants = list(table)
    head = "".ljust(12) + "".join(f"({u},{v})".rjust(10) for u, v in variants)
    cells = []
    for uv in variants:
        spans = table[uv]
        cells.append(",".join(f"[{lo},{hi}]" for lo, hi in spans) if spans else "---")
    return head + "\n" + label.ljust(12) + "".join(c.rjust(10) for c in cells)


# ------------------------------------------------------------ CRT compare --


CRT_FIELDS = ["schema_version", "t", "k", "lambda", "bits", "s_crt", "uv_mw", "u", "v"]


def crt_compare_rows(t=53, lambdas=(1, 512), k=32768, bits=range(1, 53)):
    rows = []
    for lam in lambdas:
        for b, s, uv, u, v in crt_comparison(bits, k, t, lam):
            rows.append(dict(schema_version=CRT_SCHEMA_VERSION, t=t, k=k, **{"lambda": lam},
                             bits=b, s_crt=s, uv_mw=uv, u=u, v=v))
    return rows


def write_crt_csv(rows, fh):
    w = csv.DictWriter(fh, CRT_FIELDS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)


# ------------------------------------------------------------ matrix files --


def write_matrix(path, M, p):
    """Text format: header ``m n p`` then one line of n integers per row."""
    M = np.asarray(M)
    with open(path, "w") as fh:
        fh.write(f"{M.shape[0]} {M.shape[1]} {int(p)}\n")
        for row in to_exact(M):
            fh.write(" ".join(map(str, row)) + "\n")


def read_matrix(path, dtype=np.float64):
    """Inverse of :func:`write_matrix`; returns ``(M, p)``."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ValueError(f"{path}: header must be 'm n p'")
        m, n, p = map(int, header)
        rows = [list(map(int, line.split())) for line in fh if line.strip()]
    if len(rows) != m or any(len(r) != n for r in rows):
        raise ValueError(f"{path}: expected {m} rows of {n} integers")
    limit = 2 ** (np.finfo(np.dtype(dtype)).nmant + 1)
    if any(not 0 <= x <= limit for r in rows for x in r):
        raise ValueError(f"{path}: entries must be in [0, 2^t]")
    return np.array(rows, dtype=dtype).reshape(m, n), p
