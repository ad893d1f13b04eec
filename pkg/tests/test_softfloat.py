import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from actguard import _backend
from actguard import softfloat as sf

B = sf.f32_bits
V = sf.f32_value

words = st.integers(min_value=0, max_value=0xFFFFFFFF)
normal_floats = st.floats(width=32, allow_nan=False, allow_infinity=False, allow_subnormal=False).filter(
    lambda v: v != 0.0
)


def native_bits(values) -> np.ndarray:
    return np.asarray(values, dtype=np.float32).view(np.uint32)


def random_normal_words(rng: np.random.Generator, size: int, spread: int = 40) -> np.ndarray:
    """Normal binary32 patterns with exponents within ``spread`` of 1.0."""
    sign = rng.integers(0, 2, size, dtype=np.uint32) << 31
    exp = rng.integers(127 - spread, 127 + spread + 1, size, dtype=np.uint32) << 23
    frac = rng.integers(0, 1 << 23, size, dtype=np.uint32)
    return sign | exp | frac


def ulp_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    def key(x):
        x = x.astype(np.int64)
        return np.where(x >> 31, -(x & 0x7FFFFFFF), x)

    return np.abs(key(a) - key(b))


# exact and special cases


def test_simple_products_and_sums():
    assert V(sf.f32_mul(B(1.5), B(2.0))) == 3.0
    assert V(sf.f32_add(B(1.0), B(1.0))) == 2.0
    assert V(sf.f32_sub(B(1.0), B(1.0))) == 0.0
    assert V(sf.f32_div_nr(B(1.0), B(2.0))) == 0.5
    assert V(sf.f32_div_nr(B(10.0), B(4.0))) == 2.5


def test_division_special_cases():
    assert sf.f32_div_nr(B(1.0), B(0.0)) == sf.INF_BITS
    assert sf.f32_div_nr(B(-1.0), B(0.0)) == sf.SIGN | sf.INF_BITS
    assert math.isnan(V(sf.f32_div_nr(B(0.0), B(0.0))))
    assert math.isnan(V(sf.f32_div_nr(sf.INF_BITS, sf.INF_BITS)))
    assert V(sf.f32_div_nr(B(3.0), sf.INF_BITS)) == 0.0


def test_inf_minus_inf_is_nan():
    assert math.isnan(V(sf.f32_sub(sf.INF_BITS, sf.INF_BITS)))
    assert math.isnan(V(sf.f32_mul(sf.INF_BITS, B(0.0))))


def test_overflow_saturates_and_underflow_flushes():
    big = B(3e38)
    assert sf.f32_mul(big, big) == sf.INF_BITS
    tiny = B(1e-30)
    assert sf.f32_mul(tiny, tiny) == 0
    subnormal = 1  # smallest positive subnormal pattern
    assert sf.f32_add(subnormal, B(1.0)) == B(1.0)
    assert sf.f32_mul(subnormal, B(2.0)) == 0


@given(normal_floats)
def test_identity_elements(x):
    w = B(x)
    assert sf.f32_mul(w, sf.ONE) == w
    assert sf.f32_add(w, 0) == w


@given(words, words)
def test_mul_commutes(a, b):
    assert sf.f32_mul(a, b) == sf.f32_mul(b, a)


@given(words, words)
def test_sign_is_xor_of_operand_signs(a, b):
    expected = (a ^ b) >> 31
    assert sf.f32_mul(a, b) >> 31 == expected
    if not math.isnan(V(a)) and not math.isnan(V(b)):
        assert sf.f32_div_nr(a, b) >> 31 == expected


@given(words)
def test_word_round_trip(raw):
    assert sf.Float32Word.decompose(raw).compose() == raw


# accumulator


def test_accumulator_constants():
    zeros = [0] * 5
    assert V(sf.multi_term_accumulate(zeros, sf.AdderMode.SUM_ALL)) == 1.0
    # negate-one mode computes e^-x + 1, so the folded constant is 2
    assert V(sf.multi_term_accumulate(zeros, sf.AdderMode.NEGATE_ONE)) == 2.0


def test_accumulator_sums_maclaurin_terms_like_native():
    terms = np.array([1.0, 1 / 2, 1 / 6, 1 / 24, 1 / 120], dtype=np.float32)
    got = sf.multi_term_accumulate([int(w) for w in terms.view(np.uint32)])
    acc = np.float32(1.0)
    for t in terms:
        acc = np.float32(acc + t)
    assert sf.ulp_distance(got, int(native_bits([acc])[0])) <= 2


def test_accumulator_negates_the_selected_term():
    terms = [B(v) for v in (0.5, 0.25, 0.125, 0.0625, 0.03125)]
    got = V(sf.multi_term_accumulate(terms, sf.AdderMode.NEGATE_ONE, negate_index=1))
    assert got == 2.0 + 0.5 - 0.25 + 0.125 + 0.0625 + 0.03125


def test_accumulator_validation():
    with pytest.raises(ValueError):
        sf.multi_term_accumulate([0] * 4)
    with pytest.raises(ValueError):
        sf.multi_term_accumulate([0] * 5, sf.AdderMode.NEGATE_ONE, negate_index=5)


# Newton-Raphson reciprocal


def test_reciprocal_grid_relative_error():
    # d_sig / 2**23 = d_norm; fixed result r / 2**60 approximates 2 / d_norm
    worst = 0.0
    for i in range(1 << 16):
        d_sig = (1 << 23) | (i << 7)
        r = sf.nr_reciprocal_fixed(d_sig & sf.FRAC_MASK)
        err = abs(r * d_sig - (1 << 84)) / (1 << 84)
        worst = max(worst, err)
    assert worst < 2.0 ** -24


def test_rounded_reciprocal_within_one_ulp():
    d = ((127 << 23) | (np.arange(1 << 16, dtype=np.uint32) << 7)).astype(np.uint32)
    got = sf.reciprocal_array(d)
    ref = native_bits(np.float32(1.0) / d.view(np.float32))
    assert ulp_distances(got, ref).max() <= 1


# native oracle, array front ends


@pytest.mark.parametrize("backend", _backend.available())
def test_array_ops_match_scalar_model(backend):
    rng = np.random.default_rng(1)
    a = rng.integers(0, 1 << 32, 5000, dtype=np.uint64).astype(np.uint32)
    b = rng.integers(0, 1 << 32, 5000, dtype=np.uint64).astype(np.uint32)
    cases = [
        (sf.mul_array(a, b, backend=backend), sf.f32_mul),
        (sf.addsub_array(a, b, backend=backend), sf.f32_add),
        (sf.addsub_array(a, b, subtract=True, backend=backend), sf.f32_sub),
        (sf.div_array(a, b, backend=backend), sf.f32_div_nr),
    ]
    for out, scalar in cases:
        assert [int(v) for v in out] == [scalar(int(x), int(y)) for x, y in zip(a, b)]


def test_array_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        sf.mul_array([1, 2], [1])


def _oracle_check(n: int, seed: int):
    rng = np.random.default_rng(seed)
    a = random_normal_words(rng, n)
    b = random_normal_words(rng, n)
    fa, fb = a.view(np.float32), b.view(np.float32)
    report = {}
    for name, got, ref in (
        ("mul", sf.mul_array(a, b), fa * fb),
        ("add", sf.addsub_array(a, b), fa + fb),
        ("sub", sf.addsub_array(a, b, subtract=True), fa - fb),
        ("div", sf.div_array(a, b), fa / fb),
    ):
        d = ulp_distances(got, native_bits(ref))
        report[name] = (int(d.max()), float(np.mean(d == 0)))
    return report


def test_ops_within_one_ulp_of_native_sample():
    for name, (worst, exact) in _oracle_check(20_000, 3).items():
        assert worst <= 1, name
        assert exact >= 0.999, name


@pytest.mark.slow
@pytest.mark.skipif(_backend.BACKEND != "compiled", reason="needs the compiled kernels for speed")
def test_ops_within_one_ulp_of_native_million():
    for name, (worst, exact) in _oracle_check(1_000_000, 7).items():
        assert worst <= 1, name
        assert exact >= 0.999, name
