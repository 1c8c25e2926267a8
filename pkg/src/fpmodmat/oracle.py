"""Exact big-integer references and a shadow checker for the float paths.

Nothing in the reference products touches floating-point: matrices are
converted once to nested lists of Python ints ("big matrices") and all
arithmetic is exact.
"""

from dataclasses import dataclass, field

import numpy as np


def to_exact(M):
    """Float or integer matrix -> list of rows of Python ints (lossless)."""
    rows = []
    for row in np.asarray(M).tolist():
        out = []
        for v in row:
            iv = int(v)
            if iv != v:
                raise ValueError(f"non-integer entry {v!r}")
            out.append(iv)
        rows.append(out)
    return rows


def from_exact(rows, dtype=np.float64):
    """Nested int lists -> float matrix; refuses values the format can't hold."""
    dtype = np.dtype(dtype)
    limit = 2 ** (np.finfo(dtype).nmant + 1)
    for row in rows:
        for v in row:
            if not 0 <= v <= limit:
                raise ValueError(f"{v} is not exactly representable in {dtype}")
    return np.array(rows, dtype=dtype).reshape(len(rows), -1)


def _dims(A, B):
    m, k = len(A), len(A[0]) if A else 0
    if len(B) != k:
        raise ValueError(f"inner dimensions differ: {k} vs {len(B)}")
    return m, k, len(B[0]) if B else 0


def exact_mod_gemm(A, B, p: int):
    """``A @ B mod p`` by row-times-column dot products on Python ints."""
    A, B = _ensure_exact(A), _ensure_exact(B)
    _dims(A, B)
    cols = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) % p for col in cols] for row in A]


def exact_mod_gemm_colmajor(A, B, p: int):
    """Same product accumulated as a sum of outer products (inner index outermost)."""
    A, B = _ensure_exact(A), _ensure_exact(B)
    m, k, n = _dims(A, B)
    C = [[0] * n for _ in range(m)]
    for l in range(k):
        brow = B[l]
        for i in range(m):
            a = A[i][l]
            if a:
                ci = C[i]
                for j in range(n):
                    ci[j] += a * brow[j]
    return [[v % p for v in row] for row in C]


def _ensure_exact(M):
    if isinstance(M, np.ndarray):
        return to_exact(M)
    return [[int(v) for v in row] for row in M]


def worst_case_matrix(rows: int, cols: int, p: int, dtype=np.float64):
    """All entries p-1: maximizes every dot product of reduced operands."""
    return np.full((rows, cols), p - 1, dtype=dtype)


# ---------------------------------------------------------------- shadow --


def _ints(M):
    return np.asarray(M).astype(np.int64).astype(object)


@dataclass
class Violation:
    kind: str  # "panel-overflow", "kernel-mismatch", "reduce-bound", "mul-bound", "non-integer"
    stage: str
    panel: int | None
    coord: tuple
    value: int
    bound: int

    def __str__(self):
        where = " ".join(x for x in (self.stage, f"panel {self.panel}" if self.panel is not None
                                     else "") if x)
        return (f"{self.kind} at {where or 'top level'} {self.coord}: "
                f"exact value {self.value} > bound {self.bound}")


@dataclass
class Verdict:
    passed: bool
    violations: list
    result: object = None
    checks: int = 0
    steps: list = field(default_factory=list)

    @property
    def first(self):
        return self.violations[0] if self.violations else None

    def __bool__(self):
        return self.passed


@dataclass
class ShadowTrace:
    """Replays every kernel panel in exact integers and checks every reduction input.

    Products accept ``trace=`` and call the hooks below; nothing is raised,
    violations are collected for a :class:`Verdict`.
    """

    ctx: object
    record_steps: bool = False
    violations: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    checks: int = 0
    stage: str = ""
    _pending: object = field(default=None, repr=False)

    def _flag(self, kind, mask, values, bound, panel=None):
        idx = tuple(int(i) for i in np.argwhere(mask)[0])
        self.violations.append(Violation(kind, self.stage, panel, idx, int(values[idx]), int(bound)))

    def panel(self, j, C, A_j, B_j):
        """Called just before ``C += A_j @ B_j``."""
        self.checks += 1
        S = _ints(C) + _ints(A_j) @ _ints(B_j)
        limit = 2 ** self.ctx.t
        over = S > limit
        if over.any():
            self._flag("panel-overflow", over, S, limit, panel=j)
        self._pending = (j, S)

    def after_panel(self, C):
        """Called right after the kernel: the float result must equal the exact one."""
        j, S = self._pending
        self._pending = None
        limit = 2 ** self.ctx.t
        got = _ints(C)
        bad = (got != S) & (S <= limit)
        if bad.any():
            self._flag("kernel-mismatch", bad, S, limit, panel=j)

    def reduce_input(self, x):
        self.checks += 1
        x = np.asarray(x)
        frac = np.floor(x) != x
        if frac.any():
            self._flag("non-integer", frac, np.zeros(x.shape, dtype=object), 0)
            return
        bound = self.ctx.reduce_bound
        xi = _ints(x)
        over = (xi > bound) | (xi < 0)
        if over.any():
            self._flag("reduce-bound", over, xi, bound)

    def mul_input(self, x, g):
        self.checks += 1
        xi = _ints(x) * int(g)
        lim = 2 ** (self.ctx.t - 1) * self.ctx.p
        bound = lim // 3
        over = np.asarray(3 * xi > lim, dtype=bool)
        if over.any():
            self._flag("mul-bound", over, xi, bound)

    def step(self, i, j, C):
        if self.record_steps:
            self.steps.append(((i, j), to_exact(C)))

    def verdict(self, result=None):
        return Verdict(not self.violations, list(self.violations), result, self.checks, self.steps)


def _find_ctx(args, kwargs):
    from .scalar import FpContext

    if "ctx" in kwargs:
        return kwargs["ctx"]
    for a in args:
        if isinstance(a, FpContext):
            return a
    raise TypeError("shadow_trace needs an FpContext among the arguments")


def shadow_trace(op, *args, record_steps=False, **kwargs):
    """Run a product ``op(*args, **kwargs)`` under instrumentation.

    Returns a :class:`Verdict`; ``verdict.result`` holds the product.
    """
    trace = ShadowTrace(_find_ctx(args, kwargs), record_steps=record_steps)
    result = op(*args, trace=trace, **kwargs)
    return trace.verdict(result)
