"""The integer-relation solver and its matrix machinery.

One engine covers classic PSLQ over Z, complex PSLQ over Z[i], and the
algebraic variant over Z[w]: the only moving part is the nearest-integer
function used to build reducing matrices.  The iterative loop follows the
B = A^-1 formulation: columns of B are candidate relations and the vector
y = (x/|x|) B is watched for an entry collapsing to zero.

Matrices are plain nested lists (row-major), except B which is kept as a
list of columns since the loop swaps and combines whole columns.  Indices
are 0-based throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import mpmath as mp

from .numerics import PrecisionContext, nearly_zero
from .quadring import (
    AlgebraicInt,
    QuadraticRing,
    UnsupportedRingError,
    embed_now,
    one,
    ring_rounder,
    zero,
)


class DegeneratePivotError(ArithmeticError):
    """A zero diagonal entry where Hermite reduction needs a pivot."""


class DegenerateCornerError(ArithmeticError):
    """A vanishing corner block (both entries zero) during re-triangularization."""


class ThresholdMode(Enum):
    D_MINUS_1 = "d-1"
    D_MINUS_4 = "d-4"
    D_MINUS_LOG_N = "d-logn"

    def epsilon(self, decimal_digits: int, n: int) -> mp.mpf:
        if self is ThresholdMode.D_MINUS_1:
            return mp.mpf(10) ** (-(decimal_digits - 1))
        if self is ThresholdMode.D_MINUS_4:
            return mp.mpf(10) ** (-(decimal_digits - 4))
        return mp.mpf(10) ** (-(decimal_digits - mp.log10(n)))


class SolverStatus(Enum):
    RELATION = "relation"
    FAIL = "fail"


@dataclass(frozen=True)
class SolverConfig:
    gamma: object                      # positive real (anything mpf() accepts)
    precision: PrecisionContext
    threshold_mode: ThresholdMode = ThresholdMode.D_MINUS_1
    max_iterations: int = 10_000

    def __post_init__(self):
        if not mp.mpf(self.gamma) > 0:
            raise ValueError("gamma must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class SolverState:
    """Live view of the working data, exposed to trace callbacks."""

    h: list                            # n x (n-1), row-major
    b_cols: list                       # B = A^-1 as a list of n columns
    y: list                            # y = (x/|x|) B
    iteration: int


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    r: int
    k: int
    abs_y_min: mp.mpf
    bound: mp.mpf
    state: SolverState


@dataclass(frozen=True)
class SolverOutcome:
    status: SolverStatus
    relation: Optional[list[AlgebraicInt]]
    iterations_used: int
    final_bound: mp.mpf
    peak_bound: mp.mpf
    diagnostic: Optional[str] = None


def vector_norm(xs) -> mp.mpf:
    return mp.sqrt(mp.fsum(abs(v) ** 2 for v in xs))


def build_h_matrix(x) -> list:
    """The n x (n-1) lower-trapezoidal matrix with orthonormal columns
    spanning the orthogonal complement of x (callers pass x pre-normalized;
    the entries are scale-invariant either way).
    """
    n = len(x)
    if n < 2:
        raise ValueError("need at least two entries")
    if any(v == 0 for v in x):
        raise ValueError("zero entries are not allowed (a unit vector is a relation)")
    # s2[i] = sum_{k >= i} |x_k|^2, accumulated from the tail.
    s2 = [mp.mpf(0)] * (n + 1)
    for i in range(n - 1, -1, -1):
        s2[i] = s2[i + 1] + abs(x[i]) ** 2
    s = [mp.sqrt(v) for v in s2[:n]]
    h = [[mp.mpf(0)] * (n - 1) for _ in range(n)]
    for j in range(n - 1):
        h[j][j] = s[j + 1] / s[j]
        denom = s[j] * s[j + 1]
        for i in range(j + 1, n):
            h[i][j] = -mp.conj(x[i]) * x[j] / denom
    return h


def _reducing_terms(a, nint: Callable) -> list:
    """Nonzero subdiagonal entries of the reducing matrix of ``a``.

    Returns a per-row list of (column, ring integer, numeric value)
    triples, or None for rows that need no reduction.  The recursion
    resolves each row rightmost column first, so every term it needs
    already exists.
    """
    m = len(a)
    ncols = len(a[0])
    for j in range(min(m, ncols)):
        if a[j][j] == 0:
            raise DegeneratePivotError(f"zero pivot at column {j}")
    rows = [None] * m
    for i in range(1, m):
        terms = []
        for j in range(min(i, ncols) - 1, -1, -1):
            total = a[i][j]
            for k, _, qn in terms:
                total += qn * a[k][j]
            q = nint(-total / a[j][j])
            if not q.is_zero:
                terms.append((j, q, embed_now(q)))
        if terms:
            rows[i] = terms
    return rows


def reducing_matrix(a, nint: Callable) -> list:
    """Unit-diagonal lower-triangular integer matrix D with D*a Hermite
    reduced: each subdiagonal entry of D*a rounds to zero against its
    column pivot.  ``nint`` maps a number to a ring integer.
    """
    ring = nint(mp.mpf(0)).ring
    rows = _reducing_terms(a, nint)
    m = len(a)
    d = [[zero(ring)] * m for _ in range(m)]
    for i in range(m):
        d[i][i] = one(ring)
    for i, terms in enumerate(rows):
        if terms:
            for j, q, _ in terms:
                d[i][j] = q
    return d


def unit_lower_inverse(d) -> list:
    """Exact inverse of a unit-diagonal lower-triangular ring matrix;
    the inverse has ring-integer entries again (forward substitution).
    """
    m = len(d)
    ring = d[0][0].ring
    e = [[zero(ring)] * m for _ in range(m)]
    for i in range(m):
        e[i][i] = one(ring)
    for j in range(m):
        for i in range(j + 1, m):
            total = zero(ring)
            for k in range(j, i):
                dik = d[i][k]
                ekj = e[k][j]
                if not (dik.is_zero or ekj.is_zero):
                    total = total + dik * ekj
            e[i][j] = -total
    return e


def _apply_reducer_rows(rows, h) -> list:
    """D*H from the nonzero-term representation; uses the original rows."""
    ncols = len(h[0])
    out = []
    for i, terms in enumerate(rows):
        if not terms:
            out.append(h[i])
            continue
        row = list(h[i])
        for j, _, qn in terms:
            hj = h[j]
            for c in range(min(j + 1, ncols)):   # h[j][c] = 0 beyond the diagonal
                row[c] += qn * hj[c]
        out.append(row)
    return out


def _inverse_columns(rows, m) -> dict:
    """Nonzero subdiagonal entries of D^-1, keyed by column.

    For D = I + N with the nonzeros of N given per row, forward
    substitution fills only the columns N touches.
    """
    touched = sorted({j for terms in rows if terms for j, _, _ in terms})
    cols = {}
    for j in touched:
        col = {}                         # i -> exact entry of D^-1 below (j, j)
        for i in range(j + 1, m):
            terms = rows[i]
            if not terms:
                continue
            total = None
            for k, q, _ in terms:
                if k == j:
                    total = q if total is None else total + q
                elif k > j:
                    ekj = col.get(k)
                    if ekj is not None:
                        prod = q * ekj
                        total = prod if total is None else total + prod
            if total is not None and not total.is_zero:
                col[i] = -total
        if col:
            cols[j] = sorted(col.items())
    return cols


def _columns_times_inverse(b_cols, e_cols) -> list:
    """B*E from the sparse inverse; reads only the original columns."""
    if not e_cols:
        return b_cols
    out = list(b_cols)
    for j, entries in e_cols.items():
        col = list(b_cols[j])
        for i, q in entries:
            src = b_cols[i]
            for t in range(len(col)):
                col[t] = col[t] + src[t] * q
        out[j] = col
    return out


def _vector_times_inverse(y, e_cols) -> list:
    if not e_cols:
        return y
    out = list(y)
    for j, entries in e_cols.items():
        v = y[j]
        for i, q in entries:
            v += y[i] * embed_now(q)
        out[j] = v
    return out


def _corner_block(beta, lam):
    delta = mp.sqrt(abs(beta) ** 2 + abs(lam) ** 2)
    if delta == 0:
        raise DegenerateCornerError("corner block vanished")
    return (mp.conj(beta) / delta, -lam / delta,
            mp.conj(lam) / delta, beta / delta)


def corner_matrix(a, k: int) -> list:
    """The unitary block-rotation restoring lower-trapezoidal shape after
    a swap of rows k, k+1 (0-based columns).  Identity at the last column,
    where the swap cannot break the shape.
    """
    ncols = len(a[0])
    if not 0 <= k < ncols:
        raise ValueError(f"column index {k} out of range")
    q = [[mp.mpf(1) if i == j else mp.mpf(0) for j in range(ncols)]
         for i in range(ncols)]
    if k == ncols - 1:
        return q
    q11, q12, q21, q22 = _corner_block(a[k][k], a[k][k + 1])
    q[k][k], q[k][k + 1] = q11, q12
    q[k + 1][k], q[k + 1][k + 1] = q21, q22
    return q


def _apply_corner_in_place(h, k: int):
    q11, q12, q21, q22 = _corner_block(h[k][k], h[k][k + 1])
    for i in range(k, len(h)):
        a_, b_ = h[i][k], h[i][k + 1]
        h[i][k] = a_ * q11 + b_ * q21
        h[i][k + 1] = a_ * q12 + b_ * q22


def relation_norm_bound(state: SolverState) -> mp.mpf:
    """1/max_j |H'_{j,j}|: a lower bound for the norm of any relation."""
    top = max(abs(state.h[j][j]) for j in range(len(state.h[0])))
    return mp.inf if top == 0 else 1 / top


def _diag_max(h, ncols) -> mp.mpf:
    return max(abs(h[j][j]) for j in range(ncols))


def _unit_relation(ring, n, i):
    rel = [zero(ring) for _ in range(n)]
    rel[i] = one(ring)
    return rel


def solve(x, ring: QuadraticRing, cfg: SolverConfig,
          trace: Optional[Callable[[IterationRecord], None]] = None) -> SolverOutcome:
    """Search for a ring-integer relation of x.

    Returns a relation (a column of B) once the scaled minimum of y drops
    below the detection threshold, or FAIL at the iteration cap or on
    numerical degeneracy with no detectable relation.
    """
    if ring.D > 0 and not ring.is_rational:
        raise UnsupportedRingError(
            "direct solving over a real quadratic ring is not supported; "
            "use the reduction method"
        )
    ctx = cfg.precision
    with ctx.workdps():
        xs = [mp.mpmathify(v) for v in x]
        n = len(xs)
        if n < 2:
            raise ValueError("need at least two entries")
        if ring.is_rational or not ring.is_complex:
            if any(isinstance(v, mp.mpc) and v.imag != 0 for v in xs):
                raise ValueError("real input required for a real-field solve")
            xs = [mp.mpf(v.real) if isinstance(v, mp.mpc) else v for v in xs]
        for i, v in enumerate(xs):
            if v == 0:
                # A zero entry makes the unit vector a relation outright.
                return SolverOutcome(SolverStatus.RELATION,
                                     _unit_relation(ring, n, i),
                                     0, mp.mpf(0), mp.mpf(0))

        eps = cfg.threshold_mode.epsilon(ctx.decimal_digits, n)
        gamma = mp.mpf(cfg.gamma)
        nint = ring_rounder(ring)

        norm = vector_norm(xs)
        y = [v / norm for v in xs]
        h = build_h_matrix(y)
        rows = _reducing_terms(h, nint)
        h = _apply_reducer_rows(rows, h)
        e_cols = _inverse_columns(rows, n)
        b_cols = [[one(ring) if i == j else zero(ring) for i in range(n)]
                  for j in range(n)]
        b_cols = _columns_times_inverse(b_cols, e_cols)
        y = _vector_times_inverse(y, e_cols)

        iteration = 0
        bound = 1 / _diag_max(h, n - 1)
        peak_bound = bound
        diagnostic = None
        k = 0
        while True:
            try:
                # r maximizing gamma^r |H'_{r,r}|, smallest r on ties.
                weight = gamma
                best_val = None
                r = 0
                for j in range(n - 1):
                    v = weight * abs(h[j][j])
                    if best_val is None or v > best_val:
                        best_val, r = v, j
                    weight *= gamma
                h[r], h[r + 1] = h[r + 1], h[r]
                b_cols[r], b_cols[r + 1] = b_cols[r + 1], b_cols[r]
                y[r], y[r + 1] = y[r + 1], y[r]
                if r < n - 2:
                    _apply_corner_in_place(h, r)
                rows = _reducing_terms(h, nint)
                h = _apply_reducer_rows(rows, h)
                e_cols = _inverse_columns(rows, n)
                b_cols = _columns_times_inverse(b_cols, e_cols)
                y = _vector_times_inverse(y, e_cols)
            except (DegeneratePivotError, DegenerateCornerError) as exc:
                diagnostic = str(exc)
                break
            k = min(range(n), key=lambda j: abs(y[j]))
            iteration += 1
            dmax = _diag_max(h, n - 1)
            bound = mp.inf if dmax == 0 else 1 / dmax
            if bound > peak_bound:
                peak_bound = bound
            if trace is not None:
                trace(IterationRecord(iteration, r, k, abs(y[k]), bound,
                                      SolverState(h, b_cols, y, iteration)))
            col_norm = vector_norm([embed_now(a) for a in b_cols[k]])
            if nearly_zero(abs(y[k]) / col_norm, eps):
                return SolverOutcome(SolverStatus.RELATION, list(b_cols[k]),
                                     iteration, bound, peak_bound)
            if iteration >= cfg.max_iterations:
                return SolverOutcome(SolverStatus.FAIL, None, iteration,
                                     bound, peak_bound,
                                     diagnostic="iteration cap exceeded")

        # Degeneracy: surface a relation if one is already detectable.
        k = min(range(n), key=lambda j: abs(y[j]))
        col_norm = vector_norm([embed_now(a) for a in b_cols[k]])
        if col_norm > 0 and nearly_zero(abs(y[k]) / col_norm, eps):
            return SolverOutcome(SolverStatus.RELATION, list(b_cols[k]),
                                 iteration, bound, peak_bound)
        return SolverOutcome(SolverStatus.FAIL, None, iteration, bound,
                             peak_bound,
                             diagnostic=f"numerical degeneracy: {diagnostic}")
