"""Acceptance suite: one test per numbered criterion, each printing a
PASS/FAIL line (run with -s to watch them stream).

Experiment cells run 100 instances apiece with fixed seeds; the small /
large coefficient sets run at 75 / 175 decimal digits.  Reports from
criteria 1-5 are kept in a registry so the relation-norm-bound property
can audit every solved instance afterwards.
"""

import mpmath as mp
import numpy as np
import pytest

from apslq.harness import MethodConfig, Verdict, run_experiment
from apslq.numerics import PrecisionContext
from apslq.pslq import (
    SolverConfig,
    SolverStatus,
    build_h_matrix,
    corner_matrix,
    reducing_matrix,
    solve,
    unit_lower_inverse,
    vector_norm,
)
from apslq.quadring import (
    RATIONAL_RING,
    AlgebraicInt,
    embed,
    lattice_params,
    make_ring,
    nearest_quadratic_integer,
    ring_from_id,
)
from apslq.testgen import CoeffSize, PoolKind, TestSet, TestSetSpec, generate_test_set
from conftest import brute_force_nearest_distance

COUNT = 100
COMPLEX_DS = [-1, -2, -3, -5, -6, -7, -10, -11]

# (criterion label, report, working digits) for the bound audit in 6f.
_EXPERIMENTS = []


def _run_cells(tag, d, pool, size, seed, methods, count=COUNT):
    spec = TestSetSpec(ring=ring_from_id(d), pool=pool, coeff_size=size,
                       count=count, seed=seed)
    ts = TestSet(spec, generate_test_set(spec))
    report = run_experiment(ts, methods)
    _EXPERIMENTS.append((tag, report, spec.precision.decimal_digits))
    return report


def _good(report, key):
    return report.cells[key].get(Verdict.GOOD, 0)


def _announce(number, name, passed, detail):
    line = f"ACCEPTANCE {number} {name}: {'PASS' if passed else 'FAIL'} ({detail})"
    print(line, flush=True)
    assert passed, line


APSLQ_GAMMAS = [MethodConfig("apslq", gamma="gamma1"),
                MethodConfig("apslq", gamma=2.0),
                MethodConfig("apslq", gamma=3.0)]


class TestCriterion1SanityReplication:
    @pytest.mark.parametrize("d,pool,size,seed", [
        (0, PoolKind.REAL, CoeffSize.SMALL, 101),
        (0, PoolKind.REAL, CoeffSize.LARGE, 102),
        (-1, PoolKind.REAL, CoeffSize.SMALL, 103),
        (-1, PoolKind.REAL, CoeffSize.LARGE, 104),
        (-1, PoolKind.COMPLEX, CoeffSize.SMALL, 105),
        (-1, PoolKind.COMPLEX, CoeffSize.LARGE, 106),
    ])
    def test_sanity_cells(self, d, pool, size, seed):
        report = _run_cells("C1", d, pool, size, seed, APSLQ_GAMMAS)
        details = []
        ok = True
        for cfg in APSLQ_GAMMAS:
            good = _good(report, cfg.label)
            details.append(f"gamma={cfg.gamma_label}: {report.tally(cfg.label)}")
            ok = ok and good >= 99
        field = "Q" if d == 0 else "Q(i)"
        _announce(1, f"sanity {field} {pool.value} {size.value}",
                  ok, "; ".join(details))


class TestCriterion2RealReduction:
    @pytest.mark.parametrize("d", [2, 3, 5, 6, 7, 10, 11])
    @pytest.mark.parametrize("size", [CoeffSize.SMALL, CoeffSize.LARGE])
    def test_real_quadratic_cells(self, d, size):
        seed = 200 + d + (50 if size is CoeffSize.LARGE else 0)
        report = _run_cells("C2", d, PoolKind.REAL, size, seed,
                            [MethodConfig("reduction")])
        key = ("reduction", "default", "d-1")
        good = _good(report, key)
        invalid = sum(1 for r in report.records if r.reclassified_from is not None)
        ok = good >= 99 and invalid == 0
        _announce(2, f"real reduction D={d} {size.value}", ok,
                  f"{report.tally(key)}, invalid reconstructions: {invalid}")


# Paper GOOD rates (percent) for the 1000-instance reduction cells.
PAPER_REDUCTION_RATES = {
    (PoolKind.REAL, -2): 91.2, (PoolKind.REAL, -3): 91.9,
    (PoolKind.REAL, -7): 95.6, (PoolKind.REAL, -11): 97.5,
    (PoolKind.COMPLEX, -2): 91.1, (PoolKind.COMPLEX, -3): 90.4,
    (PoolKind.COMPLEX, -7): 93.9, (PoolKind.COMPLEX, -11): 97.9,
}


class TestCriterion3ComplexWithGamma1:
    @pytest.mark.parametrize("d", [-2, -3, -7, -11])
    @pytest.mark.parametrize("pool", [PoolKind.REAL, PoolKind.COMPLEX])
    def test_gamma1_cells(self, d, pool):
        seed = 300 + abs(d) + (50 if pool is PoolKind.COMPLEX else 0)
        report = _run_cells("C3", d, pool, CoeffSize.SMALL, seed, [
            MethodConfig("apslq", gamma="gamma1"),
            MethodConfig("reduction"),
        ])
        apslq_key = ("apslq", "gamma1", "d-1")
        red_key = ("reduction", "default", "d-1")
        apslq_good = _good(report, apslq_key)
        red_good = _good(report, red_key)
        paper = PAPER_REDUCTION_RATES[(pool, d)]
        rate = 100.0 * red_good / COUNT
        fails_ok = all(
            r.reclassified_from in (None, Verdict.GOOD)
            for r in report.records
            if r.method == "reduction" and r.verdict is Verdict.FAIL
        )
        ok = apslq_good == COUNT and abs(rate - paper) <= 10.0 and fails_ok
        _announce(3, f"complex D={d} {pool.value} small", ok,
                  f"apslq gamma1: {report.tally(apslq_key)}; "
                  f"reduction: {report.tally(red_key)} "
                  f"(paper {paper}%, ours {rate:.1f}%); "
                  f"fail provenance ok: {fails_ok}")


class TestCriterion4ComplexWithoutGamma1:
    def test_d_minus_ten_separation(self):
        report = _run_cells("C4", -10, PoolKind.COMPLEX, CoeffSize.SMALL, 410, [
            MethodConfig("apslq", gamma=2.0),
            MethodConfig("reduction"),
        ])
        apslq_key = ("apslq", "2", "d-1")
        red_key = ("reduction", "default", "d-1")
        apslq_good = _good(report, apslq_key)
        red_good = _good(report, red_key)
        ok = apslq_good <= 10 and red_good >= 95
        _announce(4, "D=-10 complex small separation", ok,
                  f"apslq gamma=2: {report.tally(apslq_key)} (good <= 10 wanted); "
                  f"reduction: {report.tally(red_key)} (good >= 95 wanted)")


class TestCriterion5GammaSensitivity:
    def test_gamma_below_gamma1_completes(self):
        # gamma = 2.0 < gamma1 = sqrt(22)/2 for D = -11: the run must
        # complete; no assertion on the (tiny) failure-rate effect.
        report = _run_cells("C5", -11, PoolKind.COMPLEX, CoeffSize.SMALL, 511,
                            [MethodConfig("apslq", gamma=2.0)])
        key = ("apslq", "2", "d-1")
        total = sum(report.cells[key].values())
        _announce(5, "D=-11 gamma=2.0 < gamma1 completes", total == COUNT,
                  f"tally {report.tally(key)}")


class TestCriterion6PropertySuites:
    def test_h_matrix_properties(self):
        ctx = PrecisionContext(30)
        tol = mp.mpf(10) ** -25
        rng = np.random.default_rng(601)
        failures = 0
        with ctx.workdps():
            for trial in range(500):
                n = int(rng.integers(2, 11))
                if trial % 2:
                    x = [mp.mpc(a, b) for a, b in rng.uniform(0.1, 2, (n, 2))]
                else:
                    x = [mp.mpf(a) for a in rng.uniform(0.1, 2, n)]
                norm = vector_norm(x)
                x = [v / norm for v in x]
                h = build_h_matrix(x)
                for j in range(n - 1):
                    res = sum((x[i] * h[i][j] for i in range(n)), mp.mpf(0))
                    if abs(res) >= tol:
                        failures += 1
                    for j2 in range(j, n - 1):
                        dot = sum((mp.conj(h[i][j]) * h[i][j2] for i in range(n)),
                                  mp.mpf(0))
                        if abs(dot - (1 if j == j2 else 0)) >= tol:
                            failures += 1
        _announce(6, "H-matrix orthonormality + annihilation (500 vectors)",
                  failures == 0, f"{failures} violations")

    def test_reducing_matrix_properties(self):
        ctx = PrecisionContext(30)
        rng = np.random.default_rng(602)
        gauss = make_ring(-1)
        failures = 0
        with ctx.workdps():
            for trial in range(500):
                n = int(rng.integers(2, 7))
                complex_case = trial % 2
                ring = gauss if complex_case else RATIONAL_RING
                nint = lambda v: nearest_quadratic_integer(v, ring)

                def entry(i, j):
                    if j > i:
                        return mp.mpf(0)
                    if j == i:
                        return mp.mpf(rng.uniform(0.5, 3))
                    if complex_case:
                        return mp.mpc(*rng.uniform(-5, 5, 2))
                    return mp.mpf(rng.uniform(-5, 5))

                a = [[entry(i, j) for j in range(n - 1)] for i in range(n)]
                d = reducing_matrix(a, nint)
                e = unit_lower_inverse(d)
                # unimodularity: unit diagonal, exact ring-integer inverse
                for i in range(n):
                    if d[i][i] != AlgebraicInt(1, 0, ring):
                        failures += 1
                    for j in range(n):
                        total = AlgebraicInt(0, 0, ring)
                        for k in range(n):
                            total = total + d[i][k] * e[k][j]
                        if total != AlgebraicInt(1 if i == j else 0, 0, ring):
                            failures += 1
                # idempotence of the reduction
                from apslq.quadring import embed_now
                reduced = [[sum((embed_now(d[i][k]) * a[k][j] for k in range(n)),
                                mp.mpf(0)) for j in range(n - 1)] for i in range(n)]
                d2 = reducing_matrix(reduced, nint)
                for i in range(n):
                    for j in range(i):
                        if not d2[i][j].is_zero:
                            failures += 1
        _announce(6, "reducing-matrix unimodularity + idempotence (500 matrices)",
                  failures == 0, f"{failures} violations")

    def test_corner_matrix_unitarity(self):
        ctx = PrecisionContext(30)
        tol = mp.mpf(10) ** -25
        rng = np.random.default_rng(603)
        failures = 0
        with ctx.workdps():
            for trial in range(500):
                if trial % 2:
                    beta = mp.mpc(*rng.uniform(-3, 3, 2))
                    lam = mp.mpc(*rng.uniform(-3, 3, 2))
                else:
                    beta = mp.mpf(rng.uniform(-3, 3))
                    lam = mp.mpf(rng.uniform(-3, 3))
                if abs(beta) ** 2 + abs(lam) ** 2 < 0.01:
                    continue
                a = [[beta, lam, mp.mpf(0)],
                     [mp.mpf(1), mp.mpf(1), mp.mpf(1)],
                     [mp.mpf(0), mp.mpf(2), mp.mpf(1)],
                     [mp.mpf(1), mp.mpf(0), mp.mpf(2)]]
                q = corner_matrix(a, 0)
                m = len(q)
                for i in range(m):
                    for j in range(m):
                        dot = sum((q[i][k] * mp.conj(q[j][k]) for k in range(m)),
                                  mp.mpf(0))
                        if abs(dot - (1 if i == j else 0)) >= tol:
                            failures += 1
        _announce(6, "corner-matrix unitarity (500 corners)",
                  failures == 0, f"{failures} violations")

    def test_nearest_integer_minimality(self):
        ctx = PrecisionContext(30)
        tol = mp.mpf(10) ** -25
        rng = np.random.default_rng(604)
        failures = 0
        for d in COMPLEX_DS:
            ring = make_ring(d)
            for _ in range(1000):
                with ctx.workdps():
                    z = mp.mpc(*rng.uniform(-10, 10, 2))
                    a = nearest_quadratic_integer(z, ring)
                    achieved = abs(z - embed(a, ctx))
                oracle = brute_force_nearest_distance(z, ring, a, ctx)
                if achieved > oracle + tol:
                    failures += 1
        _announce(6, "nearest-integer minimality (1000 points x 8 rings)",
                  failures == 0, f"{failures} violations")

    def test_covering_bound(self):
        ctx = PrecisionContext(30)
        tol = mp.mpf(10) ** -25
        rng = np.random.default_rng(605)
        failures = 0
        for d in COMPLEX_DS:
            ring = make_ring(d)
            eps = lattice_params(ring, ctx).epsilon_cover
            with ctx.workdps():
                pts = rng.uniform(-10, 10, (100_000, 2))
                for re, im in pts:
                    z = mp.mpc(re, im)
                    a = nearest_quadratic_integer(z, ring)
                    if abs(z - embed(a, ctx)) > eps + tol:
                        failures += 1
        _announce(6, "covering bound (1e5 points x 8 rings)",
                  failures == 0, f"{failures} violations")

    def test_relation_norm_bound_never_exceeds_planted(self):
        if not _EXPERIMENTS:
            # standalone run: produce a small batch of experiment data
            _run_cells("C6-standalone", -2, PoolKind.REAL, CoeffSize.SMALL, 660,
                       [MethodConfig("apslq", gamma="gamma1"),
                        MethodConfig("reduction")], count=20)
        checked = 0
        violations = 0
        for tag, report, digits in _EXPERIMENTS:
            slack = mp.mpf(10) ** (-(digits - 5))
            for rec in report.records:
                if rec.peak_bound is None or rec.planted_norm is None:
                    continue
                checked += 1
                if rec.peak_bound > rec.planted_norm + slack:
                    violations += 1
        _announce(6, "relation-norm bound <= planted norm (all experiments)",
                  checked > 0 and violations == 0,
                  f"{checked} instances audited, {violations} violations")


class TestCriterion7KnownIdentities:
    def test_golden_ratio(self, ctx75):
        with ctx75.workdps():
            phi = (1 + mp.sqrt(5)) / 2
            out = solve([1, phi, phi ** 2], RATIONAL_RING,
                        SolverConfig(gamma=2, precision=ctx75, max_iterations=500))
        base = [AlgebraicInt(1, 0, RATIONAL_RING), AlgebraicInt(1, 0, RATIONAL_RING),
                AlgebraicInt(-1, 0, RATIONAL_RING)]
        ok = out.status is SolverStatus.RELATION and (
            out.relation == base or out.relation == [-a for a in base])
        _announce(7, "(1, phi, phi^2) -> (1, 1, -1)", ok,
                  f"found {[str(a) for a in (out.relation or [])]}")

    def test_exact_ratio(self, ctx75):
        out = solve([1, 2], RATIONAL_RING,
                    SolverConfig(gamma=2, precision=ctx75, max_iterations=100))
        base = [AlgebraicInt(-2, 0, RATIONAL_RING), AlgebraicInt(1, 0, RATIONAL_RING)]
        ok = out.status is SolverStatus.RELATION and (
            out.relation == base or out.relation == [-a for a in base])
        _announce(7, "(1, 2) -> (-2, 1)", ok,
                  f"found {[str(a) for a in (out.relation or [])]}")

    def test_gaussian_pair(self, ctx75):
        ring = make_ring(-1)
        with ctx75.workdps():
            x = [mp.mpc(1, 1), mp.mpc(2, 0)]
            out = solve(x, ring, SolverConfig(gamma=mp.sqrt(2), precision=ctx75,
                                              max_iterations=200))
            ok = out.status is SolverStatus.RELATION
            detail = "no relation"
            if ok:
                residual = abs(mp.fsum(embed(a, ctx75) * v
                                       for a, v in zip(out.relation, x)))
                ok = residual < mp.mpf(10) ** (-(75 - 1))
                detail = (f"relation {[str(a) for a in out.relation]}, "
                          f"residual {mp.nstr(residual, 3)}")
        _announce(7, "(1+i, 2) over Z[i]", ok, detail)
