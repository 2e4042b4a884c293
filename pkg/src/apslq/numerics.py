"""Arbitrary-precision arithmetic context shared by the whole package.

Numbers are mpmath ``mpf``/``mpc`` values; this module owns the precision
policy (working digits + guard digits), the constant pool evaluation, and
the decimal serialization format used in files and on the CLI.
"""

from __future__ import annotations

import re
from contextlib import contextmanager
from dataclasses import dataclass

import mpmath as mp

MIN_DECIMAL_DIGITS = 15
DEFAULT_GUARD_DIGITS = 10

# Moduli allowed in log(p) constant specs.
_LOG_PRIMES = (2, 3, 5, 7)


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision in decimal digits, plus internal guard digits.

    All user-facing tolerances are expressed at ``decimal_digits``;
    arithmetic performed under :meth:`workdps` carries the guard digits.
    """

    decimal_digits: int
    guard_digits: int = DEFAULT_GUARD_DIGITS

    def __post_init__(self):
        if self.decimal_digits < MIN_DECIMAL_DIGITS:
            raise ValueError(
                f"decimal_digits must be >= {MIN_DECIMAL_DIGITS}, "
                f"got {self.decimal_digits}"
            )
        if self.guard_digits < 0:
            raise ValueError("guard_digits must be non-negative")

    @property
    def total_digits(self) -> int:
        return self.decimal_digits + self.guard_digits

    @contextmanager
    def workdps(self):
        """Run a block at full internal precision (working + guard digits)."""
        with mp.workdps(self.total_digits):
            yield

    def eps_at(self, digits_lost: int) -> mp.mpf:
        """10**-(decimal_digits - digits_lost), the usual tolerance shape."""
        return mp.mpf(10) ** (-(self.decimal_digits - digits_lost))


@dataclass(frozen=True, order=True)
class ConstantSpec:
    """Symbolic identity of one pool constant.

    kind is one of:
      "pi"    -> pi**k
      "e"     -> e**k
      "euler" -> euler_gamma**k
      "sin"   -> sin(k)
      "log"   -> log(k), k in {2, 3, 5, 7}
      "cexp"  -> m * exp(i*k)
    """

    kind: str
    k: int
    m: int = 0

    def __post_init__(self):
        if self.kind not in ("pi", "e", "euler", "sin", "log", "cexp"):
            raise ValueError(f"unsupported constant kind {self.kind!r}")
        if self.kind == "log" and self.k not in _LOG_PRIMES:
            raise ValueError(f"log constant requires argument in {_LOG_PRIMES}")
        if self.kind == "cexp" and self.m == 0:
            raise ValueError("cexp constant requires a nonzero modulus")

    @property
    def is_real(self) -> bool:
        return self.kind != "cexp"

    def __str__(self) -> str:
        if self.kind in ("pi", "e", "euler"):
            base = {"pi": "pi", "e": "e", "euler": "gamma"}[self.kind]
            return f"{base}^{self.k}"
        if self.kind == "sin":
            return f"sin({self.k})"
        if self.kind == "log":
            return f"log({self.k})"
        return f"{self.m}*exp({self.k}*I)"


_SPEC_RE = re.compile(
    r"^(?:(?P<base>pi|e|gamma)\^(?P<exp>-?\d+)"
    r"|(?P<fn>sin|log)\((?P<arg>-?\d+)\)"
    r"|(?P<mod>-?\d+)\*exp\((?P<carg>-?\d+)\*I\))$"
)


def parse_constant_spec(text: str) -> ConstantSpec:
    m = _SPEC_RE.match(text.strip())
    if not m:
        raise ValueError(f"unrecognized constant spec {text!r}")
    if m.group("base"):
        kind = {"pi": "pi", "e": "e", "gamma": "euler"}[m.group("base")]
        return ConstantSpec(kind, int(m.group("exp")))
    if m.group("fn"):
        return ConstantSpec(m.group("fn"), int(m.group("arg")))
    return ConstantSpec("cexp", int(m.group("carg")), int(m.group("mod")))


# One cache entry per (spec, total working digits).
_constant_cache: dict[tuple[ConstantSpec, int], mp.mpf | mp.mpc] = {}


def eval_constant(spec: ConstantSpec, ctx: PrecisionContext) -> mp.mpf | mp.mpc:
    """Evaluate a pool constant to full context precision.

    Real specs return mpf, the complex exponentials return mpc.  Results
    are memoized per (spec, precision): test sets reuse a small pool of
    constants across many instances.
    """
    key = (spec, ctx.total_digits)
    cached = _constant_cache.get(key)
    if cached is not None:
        return cached
    with mp.workdps(ctx.total_digits + 5):
        if spec.kind == "pi":
            value = mp.pi ** spec.k
        elif spec.kind == "e":
            value = mp.exp(spec.k)
        elif spec.kind == "euler":
            value = mp.euler ** spec.k
        elif spec.kind == "sin":
            value = mp.sin(spec.k)
        elif spec.kind == "log":
            value = mp.log(spec.k)
        else:  # cexp
            value = spec.m * mp.exp(mp.mpc(0, spec.k))
    with mp.workdps(ctx.total_digits):
        value = +value  # round to the context's working precision
    _constant_cache[key] = value
    return value


def nearly_zero(v, threshold) -> bool:
    """True iff |v| < threshold (threshold must be positive)."""
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    return abs(v) < threshold


def is_finite(z) -> bool:
    z = mp.mpmathify(z)
    return mp.isfinite(z.real) and mp.isfinite(z.imag) if isinstance(z, mp.mpc) \
        else mp.isfinite(z)


def to_decimal_string(x, digits: int) -> str:
    """Serialize a real value with the given number of significant digits."""
    if not isinstance(x, mp.mpf):
        # Convert under enough precision; mpf(x) rounds at the ambient dps.
        with mp.workdps(digits + 10):
            x = mp.mpf(x)
    return mp.nstr(x, digits, strip_zeros=True)


def complex_to_string(z, digits: int) -> str:
    """Serialize re+im*I with both parts in plain decimal form.

    Formats the stored bits directly: no arithmetic that would re-round
    the value at the ambient working precision.
    """
    if isinstance(z, mp.mpc):
        re, im = z.real, z.imag
    else:
        re, im = z, None
    re_s = to_decimal_string(re, digits)
    if im is None or im == 0:
        return re_s
    im_s = to_decimal_string(im, digits)
    if im_s.startswith("-"):
        return f"{re_s}-{im_s[1:]}*I"
    return f"{re_s}+{im_s}*I"


def parse_number(text: str, ctx: PrecisionContext) -> mp.mpf | mp.mpc:
    """Parse the serialization produced by :func:`complex_to_string`.

    Accepts plain decimal reals and "re+im*I" complex strings.
    """
    s = text.strip().replace(" ", "")
    with ctx.workdps():
        if not s.endswith("*I"):
            return mp.mpf(s)
        body = s[:-2]
        # Split at the sign that starts the imaginary part: the last +/-
        # not part of an exponent and not the leading sign.
        for idx in range(len(body) - 1, 0, -1):
            c = body[idx]
            if c in "+-" and body[idx - 1] not in "eE":
                re_part = body[:idx]
                im_part = body[idx:] if c == "-" else body[idx + 1:]
                return mp.mpc(mp.mpf(re_part), mp.mpf(im_part))
        raise ValueError(f"cannot parse complex literal {text!r}")
