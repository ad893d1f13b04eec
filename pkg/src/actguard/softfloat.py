"""Software model of a binary32 datapath: multiplier, adder, Newton-Raphson divider.

Words are raw 32-bit patterns held in Python ints. Subnormal inputs and
outputs flush to signed zero; every rounding step is round-to-nearest-even.
NaN results are the quiet pattern ``0x7FC00000`` carrying the XOR sign.

The array helpers (``mul_array`` and friends) dispatch to the compiled kernel
when it is available.
"""
from __future__ import annotations

import struct
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

SIGN = 1 << 31
EXP_INF = 0xFF
FRAC_BITS = 23
FRAC_MASK = (1 << FRAC_BITS) - 1
HIDDEN = 1 << FRAC_BITS
BIAS = 127
QNAN = 0x7FC00000
INF_BITS = 0x7F800000

_f = struct.Struct("<f")
_i = struct.Struct("<I")


def f32_bits(x: float) -> int:
    """Bits of ``x`` rounded to binary32."""
    return _i.unpack(_f.pack(x))[0]


def f32_value(raw: int) -> float:
    return _f.unpack(_i.pack(raw & 0xFFFFFFFF))[0]


class Float32Word(NamedTuple):
    sign: int
    exponent: int
    significand: int

    @classmethod
    def decompose(cls, raw: int) -> "Float32Word":
        raw &= 0xFFFFFFFF
        return cls(raw >> 31, (raw >> FRAC_BITS) & EXP_INF, raw & FRAC_MASK)

    @property
    def raw(self) -> int:
        return (self.sign << 31) | (self.exponent << FRAC_BITS) | self.significand

    def compose(self) -> int:
        return self.raw


class AdderMode(Enum):
    SUM_ALL = 0
    NEGATE_ONE = 1


def _is_nan(e: int, f: int) -> bool:
    return e == EXP_INF and f != 0


def _pack(s: int, e: int, sig: int) -> int:
    """Assemble from a 24-bit significand, saturating to inf or flushing to zero."""
    if e >= EXP_INF:
        return (s << 31) | INF_BITS
    if e <= 0:
        return s << 31
    return (s << 31) | (e << FRAC_BITS) | (sig & FRAC_MASK)


def f32_mul(a: int, b: int) -> int:
    sa, ea, fa = a >> 31 & 1, a >> 23 & 0xFF, a & FRAC_MASK
    sb, eb, fb = b >> 31 & 1, b >> 23 & 0xFF, b & FRAC_MASK
    s = sa ^ sb
    if _is_nan(ea, fa) or _is_nan(eb, fb):
        return (s << 31) | QNAN
    zero_a, zero_b = ea == 0, eb == 0
    if ea == EXP_INF or eb == EXP_INF:
        if zero_a or zero_b:
            return (s << 31) | QNAN
        return (s << 31) | INF_BITS
    if zero_a or zero_b:
        return s << 31

    p = (fa | HIDDEN) * (fb | HIDDEN)  # in [2**46, 2**48)
    e = ea + eb - BIAS
    if p >> 47:
        shift = 24
        e += 1
    else:
        shift = 23
    q = p >> shift
    rem = p & ((1 << shift) - 1)
    half = 1 << (shift - 1)
    if rem > half or (rem == half and q & 1):
        q += 1
        if q >> 24:
            q >>= 1
            e += 1
    return _pack(s, e, q)


def f32_addsub(a: int, b: int, subtract: bool = False) -> int:
    if subtract:
        b ^= SIGN
    sa, ea, fa = a >> 31 & 1, a >> 23 & 0xFF, a & FRAC_MASK
    sb, eb, fb = b >> 31 & 1, b >> 23 & 0xFF, b & FRAC_MASK
    if _is_nan(ea, fa) or _is_nan(eb, fb):
        return QNAN
    if ea == EXP_INF or eb == EXP_INF:
        if ea == EXP_INF and eb == EXP_INF and sa != sb:
            return QNAN
        return (sa << 31) | INF_BITS if ea == EXP_INF else (sb << 31) | INF_BITS
    if ea == 0 and eb == 0:
        return (sa & sb) << 31
    if ea == 0:
        return b
    if eb == 0:
        return a

    # order by magnitude so the difference below is non-negative
    if (eb, fb) > (ea, fa):
        sa, ea, fa, sb, eb, fb = sb, eb, fb, sa, ea, fa
    ma = (fa | HIDDEN) << 3  # three extra bits: guard, round, sticky
    mb = (fb | HIDDEN) << 3
    d = ea - eb
    if d >= 27:
        mb = 1
    elif d:
        sticky = 1 if mb & ((1 << d) - 1) else 0
        mb = (mb >> d) | sticky
    e = ea
    if sa == sb:
        m = ma + mb
        if m >> 27:
            m = (m >> 1) | (m & 1)
            e += 1
    else:
        m = ma - mb
        if m == 0:
            return 0
        while not m >> 26:
            m <<= 1
            e -= 1
    q, grs = m >> 3, m & 7
    if grs > 4 or (grs == 4 and q & 1):
        q += 1
        if q >> 24:
            q >>= 1
            e += 1
    return _pack(sa, e, q)


def f32_add(a: int, b: int) -> int:
    return f32_addsub(a, b, False)


def f32_sub(a: int, b: int) -> int:
    return f32_addsub(a, b, True)


TWO = f32_bits(2.0)
ONE = f32_bits(1.0)
NR_ITERATIONS = 3
# Newton-Raphson datapath: unsigned fixed point with NR_FRAC fraction bits
NR_FRAC = 60
NR_ONE = 1 << NR_FRAC
SEED_OFFSET = ((48 << NR_FRAC) + 8) // 17  # 48/17, rounded
SEED_SLOPE = ((32 << NR_FRAC) + 8) // 17  # 32/17, rounded


def nr_reciprocal_fixed(d_norm: int, iterations: int = NR_ITERATIONS) -> int:
    """Fixed-point ``2 / d_norm`` for a significand-range word ``d_norm`` in [1, 2).

    The iteration runs on ``h = d_norm / 2`` in [0.5, 1), where the linear seed
    ``48/17 - 32/17 * h`` is the minimax fit, and returns ``r ~ 1/h`` scaled by
    ``2**NR_FRAC``. Products are truncated, as a multiplier array would.
    """
    h = (HIDDEN | (d_norm & FRAC_MASK)) << (NR_FRAC - 24)
    r = SEED_OFFSET - ((SEED_SLOPE * h) >> NR_FRAC)
    for _ in range(iterations):
        r = (r * ((2 << NR_FRAC) - ((h * r) >> NR_FRAC))) >> NR_FRAC
    return r


def _round_to_sig(p: int) -> tuple[int, int]:
    """Round a positive integer to 24 significant bits (RNE); return (sig, shift)."""
    shift = p.bit_length() - 24
    if shift <= 0:
        return p << -shift, shift
    q = p >> shift
    rem = p & ((1 << shift) - 1)
    half = 1 << (shift - 1)
    if rem > half or (rem == half and q & 1):
        q += 1
        if q >> 24:
            q >>= 1
            shift += 1
    return q, shift


def nr_reciprocal(d_norm: int, iterations: int = NR_ITERATIONS) -> int:
    """``1 / d_norm`` as a binary32 word, rounded once from the fixed-point result."""
    q, shift = _round_to_sig(nr_reciprocal_fixed(d_norm, iterations))
    # value = q * 2**shift * 2**-NR_FRAC / 2
    return _pack(0, BIAS + FRAC_BITS + shift - NR_FRAC - 1, q)


def f32_div_nr(a: int, d: int) -> int:
    sa, ea, fa = a >> 31 & 1, a >> 23 & 0xFF, a & FRAC_MASK
    sd, ed, fd = d >> 31 & 1, d >> 23 & 0xFF, d & FRAC_MASK
    s = sa ^ sd
    if _is_nan(ea, fa) or _is_nan(ed, fd):
        return (s << 31) | QNAN
    if ea == EXP_INF:
        return (s << 31) | (QNAN if ed == EXP_INF else INF_BITS)
    if ed == EXP_INF:
        return s << 31
    if ed == 0:
        return (s << 31) | (QNAN if ea == 0 else INF_BITS)
    if ea == 0:
        return s << 31

    r = nr_reciprocal_fixed(fd)
    # a_sig * 2**-23 * r * 2**-NR_FRAC / 2 == a_norm / d_norm, in (0.5, 2)
    q, shift = _round_to_sig((HIDDEN | fa) * r)
    return _pack(s, ea - ed + BIAS + shift - NR_FRAC - 1, q)


def multi_term_accumulate(
    terms: Sequence[int], mode: AdderMode = AdderMode.SUM_ALL, negate_index: int = 1
) -> int:
    """Six-operand adder: an integer constant plus five terms, ascending order.

    ``SUM_ALL`` adds the constant 1 (the folded zeroth term) to the terms.
    ``NEGATE_ONE`` flips the sign of ``terms[negate_index]`` and adds the
    constant 2, the ``e^-x + 1`` configuration.
    """
    if len(terms) != 5:
        raise ValueError("the accumulator takes exactly five terms")
    if mode is AdderMode.NEGATE_ONE and not 0 <= negate_index < 5:
        raise ValueError("negate_index must be in [0, 5)")
    acc = ONE if mode is AdderMode.SUM_ALL else TWO
    for i, t in enumerate(terms):
        if mode is AdderMode.NEGATE_ONE and i == negate_index:
            t ^= SIGN
        acc = f32_addsub(acc, t, False)
    return acc


def ulp_distance(a: int, b: int) -> int:
    """Number of binary32 values between two patterns (same-sign ordering)."""

    def key(x: int) -> int:
        x &= 0xFFFFFFFF
        return -(x & 0x7FFFFFFF) if x >> 31 else x

    return abs(key(a) - key(b))


# array front ends


def _as_u32(x) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=np.uint32)


def _binary_array(name: str, a, b, *extra, backend=None) -> np.ndarray:
    from ._backend import kernels_for

    a, b = _as_u32(a), _as_u32(b)
    if a.shape != b.shape:
        raise ValueError("operand arrays must have the same shape")
    out = np.empty_like(a)
    getattr(kernels_for(backend), name)(a.ravel(), b.ravel(), out.ravel(), *extra)
    return out


def mul_array(a, b, backend=None) -> np.ndarray:
    return _binary_array("f32_mul_array", a, b, backend=backend)


def addsub_array(a, b, subtract: bool = False, backend=None) -> np.ndarray:
    return _binary_array("f32_addsub_array", a, b, int(subtract), backend=backend)


def div_array(a, b, backend=None) -> np.ndarray:
    return _binary_array("f32_div_nr_array", a, b, backend=backend)


def reciprocal_array(d_norm, backend=None) -> np.ndarray:
    from ._backend import kernels_for

    d = _as_u32(d_norm)
    out = np.empty_like(d)
    kernels_for(backend).nr_reciprocal_array(d.ravel(), out.ravel())
    return out
