"""Quadratic extension fields Q(sqrt(D)) and their rings of integers Z[w].

Provides exact ring elements alpha + beta*w with arbitrary-size integer
coordinates, the numerical embedding, nearest-integer maps for the
supported lattices, and the lattice geometry constants (covering radius,
rho, gamma1) that parameterize the solver.

Two degenerate "classical" rings are modeled alongside the genuine
quadratic ones: the rational integers (K = Q, elements have beta = 0) and
the Gaussian integers (D = -1, w = i).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

import mpmath as mp

from .numerics import PrecisionContext


class OmegaForm(Enum):
    SQRT_D = "sqrt_d"                 # D = 2, 3 (mod 4): w = sqrt(D)
    HALF_ONE_PLUS_SQRT_D = "half"     # D = 1 (mod 4): w = (1 + sqrt(D))/2


class Classical(Enum):
    RATIONAL_INTS = "rational"        # K = Q, the plain integers
    GAUSSIAN_INTS = "gaussian"        # D = -1, Z[i]
    GENERAL = "general"


class UnsupportedRingError(ValueError):
    """Raised for operations the ring's lattice geometry cannot support."""


@dataclass(frozen=True)
class QuadraticRing:
    D: int
    omega_form: OmegaForm
    classical: Classical

    @property
    def is_rational(self) -> bool:
        return self.classical is Classical.RATIONAL_INTS

    @property
    def is_complex(self) -> bool:
        return self.D < 0

    def __str__(self) -> str:
        if self.is_rational:
            return "Z"
        return f"Z[w], D={self.D}"


def _is_square_free(n: int) -> bool:
    n = abs(n)
    if n == 0:
        return False
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        if n % d == 0:
            n //= d
        d += 1
    return True


def make_ring(D: int) -> QuadraticRing:
    """Ring of integers of Q(sqrt(D)) for square-free D (not 0 or 1)."""
    if D in (0, 1) or not _is_square_free(D):
        raise ValueError(f"D must be a square-free integer != 0, 1; got {D}")
    form = OmegaForm.HALF_ONE_PLUS_SQRT_D if D % 4 == 1 else OmegaForm.SQRT_D
    classical = Classical.GAUSSIAN_INTS if D == -1 else Classical.GENERAL
    return QuadraticRing(D, form, classical)


# K = Q, represented with the reserved discriminant id 0 (w embeds as 0).
RATIONAL_RING = QuadraticRing(0, OmegaForm.SQRT_D, Classical.RATIONAL_INTS)


def ring_id(ring: QuadraticRing) -> int:
    return 0 if ring.is_rational else ring.D


def ring_from_id(d: int) -> QuadraticRing:
    return RATIONAL_RING if d == 0 else make_ring(d)


@dataclass(frozen=True)
class AlgebraicInt:
    """Exact element alpha + beta*w of Z[w]."""

    alpha: int
    beta: int
    ring: QuadraticRing

    def __post_init__(self):
        if self.ring.is_rational and self.beta != 0:
            raise ValueError("elements of the rational ring must have beta = 0")

    @property
    def is_zero(self) -> bool:
        return self.alpha == 0 and self.beta == 0

    def _check_ring(self, other: "AlgebraicInt"):
        if other.ring != self.ring:
            raise ValueError("mixed-ring arithmetic is not defined")

    def __add__(self, other: "AlgebraicInt") -> "AlgebraicInt":
        self._check_ring(other)
        return AlgebraicInt(self.alpha + other.alpha, self.beta + other.beta, self.ring)

    def __sub__(self, other: "AlgebraicInt") -> "AlgebraicInt":
        self._check_ring(other)
        return AlgebraicInt(self.alpha - other.alpha, self.beta - other.beta, self.ring)

    def __neg__(self) -> "AlgebraicInt":
        return AlgebraicInt(-self.alpha, -self.beta, self.ring)

    def __mul__(self, other):
        if isinstance(other, int):
            return AlgebraicInt(self.alpha * other, self.beta * other, self.ring)
        if not isinstance(other, AlgebraicInt):
            return NotImplemented
        self._check_ring(other)
        a1, b1, a2, b2 = self.alpha, self.beta, other.alpha, other.beta
        c0, c1 = _omega_square_coeffs(self.ring)
        bb = b1 * b2
        return AlgebraicInt(a1 * a2 + bb * c0, a1 * b2 + b1 * a2 + bb * c1, self.ring)

    def __rmul__(self, other):
        if isinstance(other, int):
            return self * other
        return NotImplemented

    def __str__(self) -> str:
        return format_element(self)


def _omega_square_coeffs(ring: QuadraticRing) -> tuple[int, int]:
    """(c0, c1) with w*w = c0 + c1*w."""
    if ring.is_rational:
        return (0, 0)
    if ring.omega_form is OmegaForm.SQRT_D:
        return (ring.D, 0)
    return ((ring.D - 1) // 4, 1)


def zero(ring: QuadraticRing) -> AlgebraicInt:
    return AlgebraicInt(0, 0, ring)


def one(ring: QuadraticRing) -> AlgebraicInt:
    return AlgebraicInt(1, 0, ring)


def omega_value(ring: QuadraticRing, ctx: PrecisionContext) -> mp.mpf | mp.mpc:
    """Numerical embedding of w at full context precision."""
    with ctx.workdps():
        return _omega_at_current_dps(ring)


_omega_cache: dict[tuple[int, int], mp.mpf | mp.mpc] = {}


def _omega_at_current_dps(ring: QuadraticRing):
    key = (ring_id(ring), mp.mp.dps)
    w = _omega_cache.get(key)
    if w is not None:
        return w
    if ring.is_rational:
        w = mp.mpf(0)
    else:
        root = mp.sqrt(abs(ring.D))
        sqrt_d = mp.mpc(0, root) if ring.D < 0 else root
        if ring.omega_form is OmegaForm.SQRT_D:
            w = sqrt_d
        else:
            w = (1 + sqrt_d) / 2
    _omega_cache[key] = w
    return w


def embed_now(a: AlgebraicInt) -> mp.mpf | mp.mpc:
    """alpha + beta * w at the ambient mpmath working precision."""
    return a.alpha + a.beta * _omega_at_current_dps(a.ring)


def embed(a: AlgebraicInt, ctx: PrecisionContext) -> mp.mpf | mp.mpc:
    """alpha + beta * w as a number, exact to context precision."""
    with ctx.workdps():
        return embed_now(a)


@dataclass(frozen=True)
class LatticeParams:
    """Lattice geometry of the ring: covering radius and derived constants.

    epsilon_cover is the covering radius (sharp bound on |z - nint(z)|),
    rho = 1/epsilon_cover, and gamma1 (present only when rho > 1) is the
    infimum of solver weights gamma keeping tau > 1.
    """

    epsilon_cover: mp.mpf
    rho: mp.mpf
    gamma1: mp.mpf | None

    def tau(self, gamma) -> mp.mpf:
        return 1 / mp.sqrt(1 / mp.mpf(gamma) ** 2 + 1 / self.rho ** 2)


def _has_gamma1(ring: QuadraticRing) -> bool:
    # Exact integer form of rho > 1, per omega form.
    if ring.is_rational:
        return True
    n = abs(ring.D)
    if ring.omega_form is OmegaForm.SQRT_D:
        return n + 1 < 4
    return 16 * n > (n + 1) ** 2


def lattice_params(ring: QuadraticRing, ctx: PrecisionContext | None = None) -> LatticeParams:
    """Covering radius, rho, and gamma1 for the supported lattices.

    Real quadratic rings (D > 0) are rejected: their integers are dense
    on the line, so there is no covering radius.
    """
    if ring.D > 0:
        raise UnsupportedRingError(
            f"D = {ring.D} > 0: algebraic integers are dense on the real line"
        )
    dps = ctx.total_digits if ctx is not None else mp.mp.dps
    with mp.workdps(dps):
        if ring.is_rational:
            eps = mp.mpf(1) / 2
        else:
            n = mp.mpf(abs(ring.D))
            if ring.omega_form is OmegaForm.SQRT_D:
                eps = mp.sqrt(n + 1) / 2
            else:
                eps = (n + 1) / (4 * mp.sqrt(n))
        rho = 1 / eps
        gamma1 = rho / mp.sqrt(rho ** 2 - 1) if _has_gamma1(ring) else None
        return LatticeParams(eps, rho, gamma1)


_HALF = mp.mpf(0.5)  # exact in binary at any precision


def _round_real(x) -> int:
    # Ties away from zero; callers guarantee a finite mpf.
    if x >= 0:
        return int(mp.floor(x + _HALF))
    return -int(mp.floor(-x + _HALF))


def nearest_rational_integer(x) -> int:
    """Nearest integer to a real value, ties rounded away from zero."""
    x = mp.mpf(x)
    if not mp.isfinite(x):
        raise ValueError("nearest integer of a non-finite value")
    return _round_real(x)


_root_cache: dict[tuple[int, int], mp.mpf] = {}


def _sqrt_abs_d(ring: QuadraticRing) -> mp.mpf:
    key = (ring.D, mp.mp.dps)
    r = _root_cache.get(key)
    if r is None:
        r = mp.sqrt(abs(ring.D))
        _root_cache[key] = r
    return r


def ring_rounder(ring: QuadraticRing):
    """A fast closure mapping a number to a nearest ring integer.

    This is the hot path of the solver's reducing step; the public
    :func:`nearest_quadratic_integer` delegates here after validation.
    """
    ring_zero = AlgebraicInt(0, 0, ring)  # reused: most roundings hit zero

    if ring.is_rational:
        def round_rational(z):
            if isinstance(z, mp.mpc):
                if z.imag != 0:
                    raise ValueError("rational-ring rounding requires a real input")
                z = z.real
            a = _round_real(z)
            return ring_zero if a == 0 else AlgebraicInt(a, 0, ring)
        return round_rational

    if ring.D > 0:
        raise UnsupportedRingError(
            f"D = {ring.D} > 0: no nearest integer in a dense lattice"
        )

    if ring.omega_form is OmegaForm.SQRT_D:
        def round_rectangular(z):
            if isinstance(z, mp.mpc):
                re, im = z.real, z.imag
            else:
                re, im = z, None
            beta = 0 if im is None else _round_real(im / _sqrt_abs_d(ring))
            alpha = _round_real(re)
            if alpha == 0 and beta == 0:
                return ring_zero
            return AlgebraicInt(alpha, beta, ring)
        return round_rectangular

    def round_offset_rows(z):
        # D = 1 (mod 4): lattice row b sits at height b*root/2 with a
        # horizontal offset of b/2.  The minimizer lies in one of the two
        # adjacent rows; round within each and keep the closer (ties to
        # the floor row).
        root = _sqrt_abs_d(ring)
        if isinstance(z, mp.mpc):
            re, im = z.real, z.imag
        else:
            re, im = z, mp.mpf(0)
        beta = 2 * im / root
        b_lo = int(mp.floor(beta))
        b_hi = int(mp.ceil(beta))
        best = None
        for b in (b_lo, b_hi) if b_hi != b_lo else (b_lo,):
            a = _round_real(re - _HALF * b)
            dx = re - (a + _HALF * b)
            dy = im - b * root / 2
            dist2 = dx * dx + dy * dy
            if best is None or dist2 < best[0]:
                best = (dist2, a, b)
        return AlgebraicInt(best[1], best[2], ring)
    return round_offset_rows


def nearest_quadratic_integer(z, ring: QuadraticRing) -> AlgebraicInt:
    """A ring integer minimizing |z - (alpha + beta*w)|."""
    return ring_rounder(ring)(mp.mpmathify(z))


def is_member_of_ring(g1, g2, ring: QuadraticRing) -> bool:
    """Whether g1 + g2*w lies in Z[w], for Gaussian integers g1, g2.

    For D < -1 the embeddings 1, i, w, i*w reduce to rational combinations
    of 1 and i*sqrt(|D|); matching coordinates forces the imaginary parts
    of g1 and g2 to vanish (both omega forms).  D = -1 is Z[i] itself.
    """
    if not ring.D < 0:
        raise ValueError("ring membership test is for complex rings only")
    if ring.D == -1:
        return True
    return _gaussian_imag(g1) == 0 and _gaussian_imag(g2) == 0


def _gaussian_imag(g) -> int:
    if isinstance(g, AlgebraicInt):
        if g.ring.D != -1:
            raise ValueError("expected a Gaussian integer")
        return g.beta
    if isinstance(g, int):
        return 0
    raise TypeError(f"expected Gaussian integer or int, got {type(g)!r}")


def gaussian_parts(g) -> tuple[int, int]:
    """(real, imaginary) integer parts of a Gaussian integer."""
    if isinstance(g, AlgebraicInt):
        if g.ring.D != -1:
            raise ValueError("expected a Gaussian integer")
        return g.alpha, g.beta
    if isinstance(g, int):
        return g, 0
    raise TypeError(f"expected Gaussian integer or int, got {type(g)!r}")


# --- serialization -------------------------------------------------------

_ELEMENT_RE = re.compile(r"^(?P<alpha>-?\d+)(?:(?P<beta>[+-]\d+)\*w)?$")


def format_element(a: AlgebraicInt) -> str:
    if a.beta == 0:
        return str(a.alpha)
    return f"{a.alpha}{a.beta:+d}*w"


def parse_element(text: str, ring: QuadraticRing) -> AlgebraicInt:
    m = _ELEMENT_RE.match(text.strip())
    if not m:
        raise ValueError(f"unrecognized ring element {text!r}")
    beta = int(m.group("beta")) if m.group("beta") else 0
    return AlgebraicInt(int(m.group("alpha")), beta, ring)


def format_relation(relation) -> str:
    return "(" + ",".join(format_element(a) for a in relation) + ")"


def parse_relation(text: str, ring: QuadraticRing) -> list[AlgebraicInt]:
    s = text.strip()
    if not (s.startswith("(") and s.endswith(")")):
        raise ValueError("relation must be parenthesized, e.g. (-1,2,3+1*w)")
    return [parse_element(part, ring) for part in s[1:-1].split(",")]
