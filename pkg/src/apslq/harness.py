"""Classification of solver results and the experiment runner.

A result is GOOD when it is an exact ring multiple of the planted
relation, UNEXPECTED when it is a different combination that still
vanishes at very high precision, BAD when it does neither, FAIL when the
solver produced nothing.  Complex-ring reduction results additionally go
through a membership check: reconstructions containing genuine Gaussian
coefficients are reclassified as FAIL with the original verdict retained.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import mpmath as mp

from .numerics import PrecisionContext, eval_constant
from .pslq import SolverConfig, SolverStatus, ThresholdMode, solve
from .quadring import (
    AlgebraicInt,
    QuadraticRing,
    UnsupportedRingError,
    embed_now,
    format_element,
    gaussian_parts,
    lattice_params,
)
from .reduction import (
    ReductionOutcome,
    ReductionStatus,
    default_reduction_gamma,
    inner_ring_for,
    reduction_solve,
)
from .testgen import ProblemInstance, TestSet

# The high-precision re-check: evaluate the candidate combination to 1000
# digits and call it a true relation if it is within 10^-998 of zero.
RECHECK_DIGITS = 1000
RECHECK_EXPONENT = -998


class Verdict(Enum):
    GOOD = "good"
    UNEXPECTED = "unexpected"
    BAD = "bad"
    FAIL = "fail"


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    reclassified_from: Optional[Verdict] = None


def _recheck_context() -> PrecisionContext:
    return PrecisionContext(RECHECK_DIGITS)


def _instance_vector_at(instance: ProblemInstance, ring: QuadraticRing,
                        ctx: PrecisionContext) -> list:
    """Recompute the instance vector from its symbolic identities: the
    pool constants re-evaluated, and C0 rebuilt as the planted sum."""
    with ctx.workdps():
        consts = [eval_constant(c, ctx) for c in instance.constant_specs]
        c0 = sum((embed_now(z) * c
                  for z, c in zip(instance.planted[1:], consts)), mp.mpf(0))
        return [c0] + consts


def _residual_verdict(embedded_relation, instance: ProblemInstance,
                      ring: QuadraticRing) -> Verdict:
    ctx = _recheck_context()
    xs = _instance_vector_at(instance, ring, ctx)
    with ctx.workdps():
        residual = abs(mp.fsum(a * v for a, v in zip(embedded_relation, xs)))
        if residual < mp.mpf(10) ** RECHECK_EXPONENT:
            return Verdict.UNEXPECTED
    return Verdict.BAD


def classify(found: Optional[list[AlgebraicInt]], instance: ProblemInstance,
             ring: QuadraticRing) -> Classification:
    """Diagnose a solver result against the instance's planted relation.

    The multiple test is exact ring arithmetic: a = lambda * planted
    forces lambda = -a_1, so a single candidate multiplier is checked.
    """
    if found is None:
        return Classification(Verdict.FAIL)
    if len(found) != len(instance.planted):
        raise ValueError("relation length does not match the instance")
    lam = -found[0]
    if all(lam * p == a for p, a in zip(instance.planted, found)):
        return Classification(Verdict.GOOD)
    ctx = _recheck_context()
    with ctx.workdps():
        embedded = [embed_now(a) for a in found]
    return Classification(_residual_verdict(embedded, instance, ring))


# --- raw (possibly invalid) complex reconstructions ----------------------
#
# The doubled-problem coefficients are Gaussian integers; the reassembled
# entries live in Z[i] + Z[i]*w.  The multiple test still applies there,
# with products computed on Gaussian coordinate pairs.

def _pair_scale(g: tuple[int, int], m: int) -> tuple[int, int]:
    return (g[0] * m, g[1] * m)


def _pair_add(g: tuple[int, int], h: tuple[int, int]) -> tuple[int, int]:
    return (g[0] + h[0], g[1] + h[1])


def _mixed_multiply(g_const, g_omega, z: AlgebraicInt, ring: QuadraticRing):
    """(g_const + g_omega*w) * (z.alpha + z.beta*w) on Gaussian pairs."""
    if ring.is_rational:
        raise ValueError("mixed coordinates need a quadratic ring")
    if ring.omega_form.value == "sqrt_d":
        c0, c1 = ring.D, 0
    else:
        c0, c1 = (ring.D - 1) // 4, 1
    new_const = _pair_add(_pair_scale(g_const, z.alpha),
                          _pair_scale(g_omega, z.beta * c0))
    new_omega = _pair_add(_pair_add(_pair_scale(g_const, z.beta),
                                    _pair_scale(g_omega, z.alpha)),
                          _pair_scale(g_omega, z.beta * c1))
    return new_const, new_omega


def classify_reconstruction(raw_relation, instance: ProblemInstance,
                            ring: QuadraticRing) -> Classification:
    """Diagnose a complex-ring reduction result from its raw 2n vector,
    tolerating Gaussian (non-member) coefficients."""
    pairs = [(gaussian_parts(raw_relation[2 * k]),
              gaussian_parts(raw_relation[2 * k + 1]))
             for k in range(len(raw_relation) // 2)]
    if len(pairs) != len(instance.planted):
        raise ValueError("relation length does not match the instance")
    lam_const, lam_omega = [(-a, -b) for a, b in pairs[0]]
    ok = True
    for (g_const, g_omega), z in zip(pairs, instance.planted):
        if _mixed_multiply(lam_const, lam_omega, z, ring) != (g_const, g_omega):
            ok = False
            break
    if ok:
        return Classification(Verdict.GOOD)
    ctx = _recheck_context()
    with ctx.workdps():
        w = embed_now(AlgebraicInt(0, 1, ring))
        embedded = [mp.mpc(gc[0], gc[1]) + mp.mpc(go[0], go[1]) * w
                    for gc, go in pairs]
    return Classification(_residual_verdict(embedded, instance, ring))


def postprocess_reduction(outcome: ReductionOutcome,
                          base: Classification) -> Classification:
    """Reclassify invalid reconstructions as FAIL, keeping the original
    verdict on record."""
    if outcome.status is ReductionStatus.INVALID_RECONSTRUCTION:
        return Classification(Verdict.FAIL, reclassified_from=base.verdict)
    return base


# --- experiment running ---------------------------------------------------

@dataclass(frozen=True)
class MethodConfig:
    """One cell of the method matrix.

    gamma may be a number, the string "gamma1" (resolved against the
    relevant lattice), or None (reduction only: the method default).
    max_iterations of None applies the 10*n*digits default per instance.
    """

    method: str                                   # "apslq" | "reduction"
    gamma: object = None
    threshold_mode: ThresholdMode = ThresholdMode.D_MINUS_1
    max_iterations: Optional[int] = None

    def __post_init__(self):
        if self.method not in ("apslq", "reduction"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == "apslq" and self.gamma is None:
            raise ValueError("apslq needs an explicit gamma (or 'gamma1')")

    @property
    def gamma_label(self) -> str:
        if self.gamma is None:
            return "default"
        if isinstance(self.gamma, str):
            return self.gamma
        return f"{float(self.gamma):g}"

    @property
    def label(self) -> tuple[str, str, str]:
        return (self.method, self.gamma_label, self.threshold_mode.value)


def resolve_gamma(config: MethodConfig, ring: QuadraticRing,
                  ctx: PrecisionContext) -> mp.mpf:
    target = ring if config.method == "apslq" else inner_ring_for(ring)
    with ctx.workdps():
        if config.gamma is None:
            return default_reduction_gamma(target)
        if isinstance(config.gamma, str):
            if config.gamma != "gamma1":
                raise ValueError(f"unknown gamma spec {config.gamma!r}")
            params = lattice_params(target, ctx)
            if params.gamma1 is None:
                raise UnsupportedRingError(
                    f"gamma1 does not exist for {target} (rho <= 1)"
                )
            return params.gamma1
        return mp.mpf(config.gamma)


def default_iteration_cap(n: int, digits: int) -> int:
    return 10 * n * digits


@dataclass
class InstanceResult:
    index: int
    method: str
    gamma_label: str
    threshold: str
    verdict: Verdict
    reclassified_from: Optional[Verdict]
    iterations: int
    peak_bound: Optional[mp.mpf]
    planted_norm: Optional[mp.mpf]
    wall_time: float
    diagnostic: Optional[str] = None
    raw_relation: Optional[str] = None


TALLY_LETTERS = ((Verdict.GOOD, "G"), (Verdict.UNEXPECTED, "U"),
                 (Verdict.BAD, "B"), (Verdict.FAIL, "F"))


def format_tally(counts: dict) -> str:
    """Compact cell notation: counts for G, U, B, F with zeros omitted."""
    parts = [f"{counts.get(v, 0)}{letter}" for v, letter in TALLY_LETTERS
             if counts.get(v, 0) > 0]
    return "".join(parts) if parts else "0"


@dataclass
class ExperimentReport:
    header: dict
    records: list[InstanceResult]
    cells: dict            # (method, gamma, threshold) -> {Verdict: count}

    def tally(self, key) -> str:
        return format_tally(self.cells[key])

    def to_json(self) -> dict:
        return {
            "set": self.header,
            "cells": [
                {
                    "method": m, "gamma": g, "threshold": t,
                    "tally": format_tally(counts),
                    "counts": {v.value: counts.get(v, 0) for v in Verdict},
                    "total": sum(counts.values()),
                }
                for (m, g, t), counts in sorted(self.cells.items())
            ],
        }

    def csv_rows(self):
        yield ("instance", "method", "gamma", "threshold", "verdict",
               "reclassified_from", "iterations", "peak_bound",
               "planted_norm", "wall_time_s", "diagnostic", "raw_relation")
        for r in self.records:
            yield (r.index, r.method, r.gamma_label, r.threshold,
                   r.verdict.value,
                   r.reclassified_from.value if r.reclassified_from else "",
                   r.iterations,
                   mp.nstr(r.peak_bound, 8) if r.peak_bound is not None else "",
                   mp.nstr(r.planted_norm, 8) if r.planted_norm is not None else "",
                   f"{r.wall_time:.4f}",
                   r.diagnostic or "",
                   r.raw_relation or "")


def _expanded_planted_norm(instance: ProblemInstance,
                           ctx: PrecisionContext) -> mp.mpf:
    # Planted relation of the doubled problem: (-1, 0, a1, b1, ..., ak, bk).
    total = 1 + sum(z.alpha ** 2 + z.beta ** 2 for z in instance.planted[1:])
    with ctx.workdps():
        return mp.sqrt(total)


def run_one(instance: ProblemInstance, ring: QuadraticRing,
            config: MethodConfig, ctx: PrecisionContext,
            index: int = 0) -> InstanceResult:
    start = time.perf_counter()
    n = len(instance.x)
    cap = config.max_iterations or default_iteration_cap(
        2 * n if config.method == "reduction" else n, ctx.decimal_digits)
    diagnostic = None
    raw_text = None
    reclassified = None
    iterations = 0
    peak_bound = None
    planted_norm = None
    try:
        gamma = resolve_gamma(config, ring, ctx)
        cfg = SolverConfig(gamma=gamma, precision=ctx,
                           threshold_mode=config.threshold_mode,
                           max_iterations=cap)
        if config.method == "apslq":
            out = solve(instance.x, ring, cfg)
            iterations = out.iterations_used
            peak_bound = out.peak_bound
            planted_norm = instance.planted_norm(ctx)
            diagnostic = out.diagnostic
            found = out.relation if out.status is SolverStatus.RELATION else None
            cls = classify(found, instance, ring)
        else:
            rout = reduction_solve(instance.x, ring, cfg)
            if rout.inner is not None:
                iterations = rout.inner.iterations_used
                peak_bound = rout.inner.peak_bound
                diagnostic = rout.inner.diagnostic
            planted_norm = _expanded_planted_norm(instance, ctx)
            if rout.status is ReductionStatus.FAIL:
                base = Classification(Verdict.FAIL)
            elif rout.status is ReductionStatus.RELATION:
                base = classify(rout.relation, instance, ring)
            else:
                base = classify_reconstruction(rout.raw_relation, instance, ring)
                raw_text = ",".join(format_element(a) for a in rout.raw_relation)
            cls = postprocess_reduction(rout, base)
            if cls.reclassified_from is not None:
                rout.original_diagnosis = base
    except Exception as exc:  # a single bad instance must not sink the run
        cls = Classification(Verdict.FAIL)
        diagnostic = f"{type(exc).__name__}: {exc}"
    wall = time.perf_counter() - start
    return InstanceResult(
        index=index, method=config.method, gamma_label=config.gamma_label,
        threshold=config.threshold_mode.value, verdict=cls.verdict,
        reclassified_from=cls.reclassified_from, iterations=iterations,
        peak_bound=peak_bound, planted_norm=planted_norm, wall_time=wall,
        diagnostic=diagnostic, raw_relation=raw_text,
    )


def run_experiment(test_set: TestSet, methods: list[MethodConfig]) -> ExperimentReport:
    """Solve every instance under every method config and aggregate."""
    spec = test_set.spec
    ring = spec.ring
    ctx = spec.precision
    for config in methods:
        if config.method == "apslq" and ring.D > 0:
            raise UnsupportedRingError(
                "apslq is not applicable to real quadratic rings; use reduction"
            )
        if config.method == "reduction" and ring.is_rational:
            raise ValueError("reduction needs a genuine quadratic ring")
    records = []
    cells: dict = {}
    for config in methods:
        counts = cells.setdefault(config.label, {})
        for idx, instance in enumerate(test_set.instances):
            result = run_one(instance, ring, config, ctx, index=idx)
            records.append(result)
            counts[result.verdict] = counts.get(result.verdict, 0) + 1
    header = {
        "d": 0 if ring.is_rational else ring.D,
        "pool": spec.pool.value,
        "coeff_size": spec.coeff_size.value,
        "count": spec.count,
        "seed": spec.seed,
        "precision": ctx.decimal_digits,
    }
    return ExperimentReport(header, records, cells)
