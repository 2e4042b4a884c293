"""Seeded generation of relation-problem test sets.

Each instance plants a known relation: draw k constants from a fixed
pool, draw ring-integer coefficients z_i, and prepend the combination
C0 = sum z_i C_i so that (-1, z_1, ..., z_k) annihilates the vector.

Randomness comes from numpy's PCG64 generator, seeded per set, so a
(ring, pool, size, count, seed, precision) tuple is a complete, portable
description of a test set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import mpmath as mp
import numpy as np

from .numerics import (
    ConstantSpec,
    PrecisionContext,
    complex_to_string,
    eval_constant,
    parse_constant_spec,
    parse_number,
)
from .quadring import AlgebraicInt, QuadraticRing, embed_now, ring_from_id, ring_id

K_MIN, K_MAX = 2, 10


class PoolKind(Enum):
    REAL = "real"
    COMPLEX = "complex"


class CoeffSize(Enum):
    SMALL = "small"    # coefficients in [-9, 9], run at 75 digits
    LARGE = "large"    # coefficients in [-999999, 999999], run at 175 digits

    @property
    def bound(self) -> int:
        return 9 if self is CoeffSize.SMALL else 999_999

    @property
    def default_digits(self) -> int:
        return 75 if self is CoeffSize.SMALL else 175


@dataclass(frozen=True)
class TestSetSpec:
    __test__ = False          # not a pytest class, despite the name

    ring: QuadraticRing
    pool: PoolKind
    coeff_size: CoeffSize
    count: int
    seed: int
    precision: PrecisionContext = None

    def __post_init__(self):
        if self.count < 0:
            raise ValueError("count must be non-negative")
        if self.pool is PoolKind.COMPLEX and not self.ring.D < 0:
            raise ValueError(
                "a complex constant pool needs a complex quadratic ring"
            )
        if self.precision is None:
            object.__setattr__(
                self, "precision",
                PrecisionContext(self.coeff_size.default_digits),
            )


@dataclass
class ProblemInstance:
    x: list                       # (C0, C1, ..., Ck) at working precision
    planted: list[AlgebraicInt]   # (-1, z1, ..., zk)
    constant_specs: list[ConstantSpec]
    k: int

    def planted_norm(self, ctx: PrecisionContext) -> mp.mpf:
        with ctx.workdps():
            return mp.sqrt(mp.fsum(abs(embed_now(a)) ** 2 for a in self.planted))


def real_constant_pool() -> list[ConstantSpec]:
    """Powers of pi, e, and the Euler-Mascheroni constant, sin of small
    integers (exponents/arguments 1..9), and four prime logs."""
    pool = [ConstantSpec("pi", k) for k in range(1, 10)]
    pool += [ConstantSpec("e", k) for k in range(1, 10)]
    pool += [ConstantSpec("euler", k) for k in range(1, 10)]
    pool += [ConstantSpec("sin", k) for k in range(1, 10)]
    pool += [ConstantSpec("log", p) for p in (2, 3, 5, 7)]
    return pool


# Fixed moduli for arguments -9..9 (the "4" entry is 4*e^{0i}).
_COMPLEX_MODULI = (5, 4, 9, 5, 2, 9, 8, 3, 2, 4, 4, 5, 2, 7, 6, 3, 3, 5, 5)


def complex_constant_pool() -> list[ConstantSpec]:
    """The 19 constants m * e^{i k} for k = -9..9 with fixed moduli."""
    return [ConstantSpec("cexp", k, m)
            for k, m in zip(range(-9, 10), _COMPLEX_MODULI)]


def _pool_for(spec: TestSetSpec) -> list[ConstantSpec]:
    return real_constant_pool() if spec.pool is PoolKind.REAL \
        else complex_constant_pool()


def _draw_coefficient(rng: np.random.Generator, spec: TestSetSpec) -> AlgebraicInt:
    bound = spec.coeff_size.bound
    while True:
        alpha = int(rng.integers(-bound, bound + 1))
        beta = 0 if spec.ring.is_rational else int(rng.integers(-bound, bound + 1))
        if alpha != 0 or beta != 0:
            return AlgebraicInt(alpha, beta, spec.ring)


def generate_instance(rng: np.random.Generator, spec: TestSetSpec) -> ProblemInstance:
    pool = _pool_for(spec)
    k = int(rng.integers(K_MIN, K_MAX + 1))
    if k > len(pool):
        raise ValueError("constant pool smaller than the relation length")
    picks = [pool[i] for i in rng.choice(len(pool), size=k, replace=False)]
    zs = [_draw_coefficient(rng, spec) for _ in range(k)]
    ctx = spec.precision
    with ctx.workdps():
        consts = [eval_constant(c, ctx) for c in picks]
        c0 = sum((embed_now(z) * c for z, c in zip(zs, consts)), mp.mpf(0))
        x = [c0] + consts
    planted = [AlgebraicInt(-1, 0, spec.ring)] + zs
    return ProblemInstance(x=x, planted=planted, constant_specs=picks, k=k)


def generate_test_set(spec: TestSetSpec) -> list[ProblemInstance]:
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    return [generate_instance(rng, spec) for _ in range(spec.count)]


@dataclass
class TestSet:
    __test__ = False          # not a pytest class, despite the name

    spec: TestSetSpec
    instances: list[ProblemInstance]


def make_test_set(spec: TestSetSpec) -> TestSet:
    return TestSet(spec, generate_test_set(spec))


def serialize_test_set(ts: TestSet) -> dict:
    ctx = ts.spec.precision
    return {
        "format": "apslq-testset-v1",
        "d": ring_id(ts.spec.ring),
        "pool": ts.spec.pool.value,
        "coeff_size": ts.spec.coeff_size.value,
        "count": ts.spec.count,
        "seed": ts.spec.seed,
        "precision": ctx.decimal_digits,
        "guard_digits": ctx.guard_digits,
        "instances": [
            {
                "k": inst.k,
                "constants": [str(c) for c in inst.constant_specs],
                "alpha": [z.alpha for z in inst.planted[1:]],
                "beta": [z.beta for z in inst.planted[1:]],
                "c0": complex_to_string(inst.x[0], ctx.total_digits),
            }
            for inst in ts.instances
        ],
    }


def save_test_set(ts: TestSet, path) -> None:
    Path(path).write_text(json.dumps(serialize_test_set(ts), indent=1) + "\n")


def deserialize_test_set(data: dict) -> TestSet:
    if data.get("format") != "apslq-testset-v1":
        raise ValueError("not a test-set file (missing/unknown format tag)")
    ring = ring_from_id(int(data["d"]))
    ctx = PrecisionContext(int(data["precision"]), int(data["guard_digits"]))
    spec = TestSetSpec(
        ring=ring,
        pool=PoolKind(data["pool"]),
        coeff_size=CoeffSize(data["coeff_size"]),
        count=int(data["count"]),
        seed=int(data["seed"]),
        precision=ctx,
    )
    instances = []
    with ctx.workdps():
        for rec in data["instances"]:
            picks = [parse_constant_spec(s) for s in rec["constants"]]
            zs = [AlgebraicInt(int(a), int(b), ring)
                  for a, b in zip(rec["alpha"], rec["beta"])]
            consts = [eval_constant(c, ctx) for c in picks]
            c0 = parse_number(rec["c0"], ctx)
            instances.append(ProblemInstance(
                x=[c0] + consts,
                planted=[AlgebraicInt(-1, 0, ring)] + zs,
                constant_specs=picks,
                k=int(rec["k"]),
            ))
    return TestSet(spec, instances)


def load_test_set(path) -> TestSet:
    return deserialize_test_set(json.loads(Path(path).read_text()))
