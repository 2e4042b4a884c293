"""Dimension-doubling reduction to a classic integer-relation problem.

An algebraic relation over Z[w] can be found by solving the doubled
vector (x1, x1*w, ..., xn, xn*w) over Z (real fields) or Z[i] (complex
fields) and reassembling consecutive pairs as alpha + beta*w.  Over the
reals the reassembly always lands in Z[w]; over the complex fields the
solver may return genuinely Gaussian coefficients, in which case the
reconstruction is surfaced as invalid rather than repaired.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import mpmath as mp

from .numerics import PrecisionContext
from .pslq import SolverConfig, SolverOutcome, SolverStatus, solve
from .quadring import (
    RATIONAL_RING,
    AlgebraicInt,
    QuadraticRing,
    format_element,
    is_member_of_ring,
    make_ring,
    omega_value,
)


class ReductionStatus(Enum):
    RELATION = "relation"
    INVALID_RECONSTRUCTION = "invalid_reconstruction"
    FAIL = "fail"


@dataclass
class ReductionOutcome:
    status: ReductionStatus
    relation: Optional[list[AlgebraicInt]] = None
    # The inner solver's 2n-vector, retained whenever reconstruction was
    # attempted (audit trail for invalid cases).
    raw_relation: Optional[list[AlgebraicInt]] = None
    inner: Optional[SolverOutcome] = None
    original_diagnosis: Optional[object] = None

    def to_json(self) -> dict:
        out = {"status": self.status.value}
        if self.relation is not None:
            out["relation"] = [format_element(a) for a in self.relation]
        if self.raw_relation is not None:
            out["raw_relation"] = [format_element(a) for a in self.raw_relation]
        if self.original_diagnosis is not None:
            out["original_diagnosis"] = str(self.original_diagnosis)
        return out


def inner_ring_for(ring: QuadraticRing) -> QuadraticRing:
    """The classic ring the doubled problem is solved over."""
    return RATIONAL_RING if ring.D > 0 else make_ring(-1)


def default_reduction_gamma(inner_ring: QuadraticRing) -> mp.mpf:
    """Solver weight used when none is specified: strictly above the
    inner lattice's gamma1 (sqrt(4/3) for Z, sqrt(2) for Z[i])."""
    base = mp.sqrt(2) if inner_ring.D == -1 else mp.sqrt(mp.mpf(4) / 3)
    return base + mp.mpf("0.1")


def expand_vector(x, ring: QuadraticRing, ctx: PrecisionContext) -> list:
    """(x1, x1*w, x2, x2*w, ...): length 2n, interleaved."""
    if ring.is_rational:
        raise ValueError("reduction needs a genuine quadratic ring")
    w = omega_value(ring, ctx)
    with ctx.workdps():
        out = []
        for v in x:
            v = mp.mpmathify(v)
            out.append(v)
            out.append(v * w)
        return out


def _integer_parts(g) -> tuple[int, int]:
    """(real, imaginary) integer parts of an inner-solver coefficient."""
    if isinstance(g, int):
        return g, 0
    if isinstance(g, AlgebraicInt):
        if g.ring.is_rational:
            return g.alpha, 0
        if g.ring.D == -1:
            return g.alpha, g.beta
    raise TypeError("inner coefficients must be rational or Gaussian integers")


def reconstruct(a_prime, ring: QuadraticRing) -> ReductionOutcome:
    """Reassemble a doubled-problem relation into ring elements.

    Real rings always reconstruct.  Complex rings check each coefficient
    pair for membership in Z[w]; a single Gaussian (non-real) coefficient
    invalidates the whole reconstruction.
    """
    if len(a_prime) % 2 != 0:
        raise ValueError("reduction relation must have even length")
    if ring.is_rational:
        raise ValueError("reduction needs a genuine quadratic ring")
    raw = list(a_prime)
    pairs = [(raw[2 * k], raw[2 * k + 1]) for k in range(len(raw) // 2)]
    if ring.D < 0:
        if not all(is_member_of_ring(g1, g2, ring) for g1, g2 in pairs):
            return ReductionOutcome(ReductionStatus.INVALID_RECONSTRUCTION,
                                    raw_relation=raw)
    relation = []
    for g1, g2 in pairs:
        alpha, _ = _integer_parts(g1)
        beta, _ = _integer_parts(g2)
        relation.append(AlgebraicInt(alpha, beta, ring))
    if all(a.is_zero for a in relation):
        return ReductionOutcome(ReductionStatus.FAIL, raw_relation=raw)
    return ReductionOutcome(ReductionStatus.RELATION, relation, raw_relation=raw)


def reduction_solve(x, ring: QuadraticRing, cfg: SolverConfig,
                    trace=None) -> ReductionOutcome:
    """Expand, solve over the classic ring, reconstruct."""
    expanded = expand_vector(x, ring, cfg.precision)
    inner = solve(expanded, inner_ring_for(ring), cfg, trace=trace)
    if inner.status is not SolverStatus.RELATION:
        return ReductionOutcome(ReductionStatus.FAIL, inner=inner)
    outcome = reconstruct(inner.relation, ring)
    outcome.inner = inner
    return outcome
