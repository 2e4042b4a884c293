import mpmath as mp
import pytest
from hypothesis import HealthCheck, settings

from apslq import AlgebraicInt, PrecisionContext, embed

settings.register_profile(
    "apslq",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("apslq")


@pytest.fixture
def ctx30():
    return PrecisionContext(30)


@pytest.fixture
def ctx75():
    return PrecisionContext(75)


def brute_force_nearest_distance(z, ring, around, ctx, radius=4):
    """Minimum distance from z to lattice points with coordinates within
    +-radius of the given element's coordinates (independent oracle)."""
    with ctx.workdps():
        z = mp.mpmathify(z)
        best = None
        for da in range(-radius, radius + 1):
            for db in range(-radius, radius + 1):
                cand = AlgebraicInt(around.alpha + da, around.beta + db, ring)
                dist = abs(z - embed(cand, ctx))
                if best is None or dist < best:
                    best = dist
        return best


def assert_close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"
