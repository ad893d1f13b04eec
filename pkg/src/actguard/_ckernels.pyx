# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled campaign and soft-float kernels.

Mirrors ``_pykernels`` operation for operation: same SplitMix64 draws in the
same order, same double-precision expression trees, same fixed-point
Newton-Raphson datapath. Build flags disable fast-math and FMA contraction so
results are bit-identical to the Python path.
"""
from libc.math cimport fabs, INFINITY, NAN
from libc.stdint cimport uint32_t, uint64_t, int64_t
from libc.stdlib cimport malloc, free

cdef extern from *:
    """
    #include <stdint.h>
    #include <string.h>

    typedef unsigned __int128 ag_u128;

    #define AG_GAMMA 0x9E3779B97F4A7C15ULL
    #define AG_TWO_NEG53 0x1p-53
    #define AG_NR_FRAC 60
    #define AG_SEED_OFFSET 0x2d2d2d2d2d2d2d2dULL
    #define AG_SEED_SLOPE 0x1e1e1e1e1e1e1e1eULL

    static inline uint64_t ag_mix64(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    static inline uint64_t ag_bits(double x) { uint64_t u; memcpy(&u, &x, 8); return u; }
    static inline double ag_double(uint64_t u) { double x; memcpy(&x, &u, 8); return x; }

    static inline uint64_t ag_nr_recip_fixed(uint32_t frac, int iters) {
        uint64_t h = ((uint64_t)(0x800000u | frac)) << (AG_NR_FRAC - 24);
        uint64_t r = AG_SEED_OFFSET - (uint64_t)(((ag_u128)AG_SEED_SLOPE * h) >> AG_NR_FRAC);
        for (int i = 0; i < iters; i++) {
            uint64_t t = (uint64_t)(((ag_u128)h * r) >> AG_NR_FRAC);
            uint64_t e = (2ULL << AG_NR_FRAC) - t;
            r = (uint64_t)(((ag_u128)r * e) >> AG_NR_FRAC);
        }
        return r;
    }

    /* round a*b (a < 2^24, b < 2^62) to 24 significant bits, RNE */
    static inline uint32_t ag_round_product(uint64_t a, uint64_t b, int *shift_out) {
        ag_u128 p = (ag_u128)a * b;
        uint64_t hi = (uint64_t)(p >> 64), lo = (uint64_t)p;
        int len = hi ? 128 - __builtin_clzll(hi) : 64 - __builtin_clzll(lo);
        int shift = len - 24;
        if (shift <= 0) { *shift_out = shift; return (uint32_t)(lo << -shift); }
        uint64_t q = (uint64_t)(p >> shift);
        ag_u128 rem = p & ((((ag_u128)1) << shift) - 1);
        ag_u128 half = ((ag_u128)1) << (shift - 1);
        if (rem > half || (rem == half && (q & 1))) {
            q += 1;
            if (q >> 24) { q >>= 1; shift += 1; }
        }
        *shift_out = shift;
        return (uint32_t)q;
    }
    """
    uint64_t AG_GAMMA
    double AG_TWO_NEG53
    int AG_NR_FRAC
    uint64_t ag_mix64(uint64_t z) nogil
    uint64_t ag_bits(double x) nogil
    double ag_double(uint64_t u) nogil
    uint64_t ag_nr_recip_fixed(uint32_t frac, int iters) nogil
    uint32_t ag_round_product(uint64_t a, uint64_t b, int *shift_out) nogil


# random stream

cdef struct Stream:
    uint64_t state


cdef inline uint64_t next_u64(Stream *s) noexcept nogil:
    s.state += AG_GAMMA
    return ag_mix64(s.state)


cdef inline uint64_t run_seed(uint64_t master, int64_t index) noexcept nogil:
    return ag_mix64(ag_mix64(master) + <uint64_t>(index + 1) * AG_GAMMA)


cdef inline uint64_t randbelow(Stream *s, uint64_t k) noexcept nogil:
    # high word of the 64x32-bit product, matching (u * k) >> 64 for k < 2**32
    cdef uint64_t u = next_u64(s)
    return ((u >> 32) * k + (((u & 0xFFFFFFFFu) * k) >> 32)) >> 32


cdef inline void partial_shuffle(Stream *s, int *pool, int population, int count) noexcept nogil:
    cdef int i, j, tmp
    for i in range(population):
        pool[i] = i
    for i in range(count):
        j = i + <int>randbelow(s, population - i)
        tmp = pool[i]
        pool[i] = pool[j]
        pool[j] = tmp


cdef inline uint64_t random_finite(Stream *s) noexcept nogil:
    cdef uint64_t raw = 0
    cdef int attempt
    for attempt in range(64):
        raw = next_u64(s)
        if ((raw >> 52) & 0x7FF) != 0x7FF:
            return raw
    return raw & ~(<uint64_t>1 << 62)


# series and checks

cdef enum:
    F_EXPO = 0
    F_SIGMOID = 1
    F_TANH = 2

cdef enum:
    M_BITFLIP = 0
    M_STUCK0 = 1
    M_STUCK1 = 2
    M_SKIP = 3
    M_RANDOM = 4


cdef inline void fill_terms(double *t, int n, double x) noexcept nogil:
    cdef int k
    t[0] = 1.0
    for k in range(1, n):
        t[k] = t[k - 1] * x / <double>k


cdef inline double sum_pos(const double *t, int n) noexcept nogil:
    cdef double s = 0.0
    cdef int k
    for k in range(n):
        s += t[k]
    return s


cdef inline double sum_neg(const double *t, int n) noexcept nogil:
    cdef double s = 0.0
    cdef int k
    for k in range(n):
        if k & 1:
            s -= t[k]
        else:
            s += t[k]
    return s


cdef inline double protected(int func, const double *t, int n, double *value) noexcept nogil:
    """Store the activation output in ``value`` and return the residual."""
    cdef double v, c, y, e, alpha, h, en, res
    if func == F_EXPO:
        v = sum_pos(t, n)
        c = sum_neg(t, n)
        res = fabs(v * c - 1.0)
    elif func == F_SIGMOID:
        v = 1.0 / (1.0 + sum_neg(t, n))
        c = sum_pos(t, n)
        res = fabs(v / (1.0 - v) - c)
    else:
        e = sum_pos(t, n)
        v = (e - 1.0) / (e + 1.0)
        alpha = (1.0 - v) / (1.0 + v)
        h = (alpha - 1.0) / (alpha + 1.0)
        en = sum_neg(t, n)
        c = (en - 1.0) / (en + 1.0)
        res = fabs(h - c)
    if v != v or c != c:
        res = NAN
    value[0] = v
    return res


cdef inline double draw_input(Stream *s, double lo, double hi,
                              double clip_lo, double clip_hi) noexcept nogil:
    cdef double x = lo + (hi - lo) * (<double>(next_u64(s) >> 11) * AG_TWO_NEG53)
    if x != x:
        return x
    if clip_lo > x:
        x = clip_lo
    if clip_hi < x:
        x = clip_hi
    return x


def detection_counts(int func, int n_terms, double eps, double benign, int model,
                     int itype, int n_faults, int m, double lo, double hi,
                     double clip_lo, double clip_hi, uint64_t seed,
                     int64_t start, int64_t stop):
    cdef double *terms = <double *>malloc(n_terms * sizeof(double))
    cdef double *faulty = <double *>malloc(n_terms * sizeof(double))
    cdef uint64_t *masks = <uint64_t *>malloc(max(n_faults, 1) * sizeof(uint64_t))
    cdef int *pool = <int *>malloc(max(n_terms, 64) * sizeof(int))
    cdef int *targets = <int *>malloc(max(n_faults, 1) * sizeof(int))
    if not terms or not faulty or not masks or not pool or not targets:
        free(terms); free(faulty); free(masks); free(pool); free(targets)
        raise MemoryError()

    cdef int64_t i
    cdef int j, k, b, start_bit, end_bit
    cdef Stream st
    cdef double x, v0, v, res, dev
    cdef uint64_t raw, mask
    cdef int64_t detected = 0, benign_count = 0, silent = 0
    cdef bint term_level = model == M_SKIP or model == M_RANDOM

    with nogil:
        for i in range(start, stop):
            st.state = run_seed(seed, i)
            x = draw_input(&st, lo, hi, clip_lo, clip_hi)
            fill_terms(terms, n_terms, 2.0 * x if func == F_TANH else x)
            protected(func, terms, n_terms, &v0)

            partial_shuffle(&st, pool, n_terms, n_faults)
            for j in range(n_faults):
                targets[j] = pool[j]
            for j in range(n_faults):
                mask = 0
                if not term_level:
                    if itype == 0:
                        partial_shuffle(&st, pool, 64, m)
                        for b in range(m):
                            mask |= <uint64_t>1 << pool[b]
                    else:
                        start_bit = <int>randbelow(&st, 64)
                        end_bit = start_bit + m
                        if end_bit > 64:
                            end_bit = 64
                        for b in range(start_bit, end_bit):
                            mask |= <uint64_t>1 << b
                masks[j] = mask

            for k in range(n_terms):
                faulty[k] = terms[k]
            for j in range(n_faults):
                k = targets[j]
                if model == M_SKIP:
                    faulty[k] = 0.0
                elif model == M_RANDOM:
                    faulty[k] = ag_double(random_finite(&st))
                else:
                    raw = ag_bits(faulty[k])
                    if model == M_BITFLIP:
                        raw ^= masks[j]
                    elif model == M_STUCK1:
                        raw |= masks[j]
                    else:
                        raw &= ~masks[j]
                    faulty[k] = ag_double(raw)

            res = protected(func, faulty, n_terms, &v)
            dev = fabs(v - v0)
            if dev != dev:
                dev = INFINITY
            if not res <= eps:
                detected += 1
            elif dev <= benign:
                benign_count += 1
            else:
                silent += 1

    free(terms); free(faulty); free(masks); free(pool); free(targets)
    return detected, benign_count, silent


def fault_free_residuals(int func, int n_terms, double lo, double hi,
                         double clip_lo, double clip_hi, uint64_t seed,
                         int64_t start, int64_t stop, double[::1] out):
    cdef double *terms = <double *>malloc(n_terms * sizeof(double))
    if not terms:
        raise MemoryError()
    cdef int64_t i
    cdef Stream st
    cdef double x, v
    with nogil:
        for i in range(start, stop):
            st.state = run_seed(seed, i)
            x = draw_input(&st, lo, hi, clip_lo, clip_hi)
            fill_terms(terms, n_terms, 2.0 * x if func == F_TANH else x)
            out[i - start] = protected(func, terms, n_terms, &v)
    free(terms)


# binary32 datapath

cdef extern from *:
    """
    #define AG_FRAC_MASK 0x7FFFFFu
    #define AG_HIDDEN 0x800000u
    #define AG_QNAN 0x7FC00000u
    #define AG_INF_BITS 0x7F800000u
    #define AG_SIGN 0x80000000u
    """
    uint32_t FRAC_MASK "AG_FRAC_MASK"
    uint32_t HIDDEN "AG_HIDDEN"
    uint32_t QNAN "AG_QNAN"
    uint32_t INF_BITS "AG_INF_BITS"
    uint32_t SIGN "AG_SIGN"


cdef inline uint32_t pack32(uint32_t s, int e, uint32_t sig) noexcept nogil:
    if e >= 0xFF:
        return (s << 31) | INF_BITS
    if e <= 0:
        return s << 31
    return (s << 31) | (<uint32_t>e << 23) | (sig & FRAC_MASK)


cdef inline bint is_nan32(uint32_t e, uint32_t f) noexcept nogil:
    return e == 0xFF and f != 0


cdef inline uint32_t mul32(uint32_t a, uint32_t b) noexcept nogil:
    cdef uint32_t sa = a >> 31, ea = (a >> 23) & 0xFF, fa = a & FRAC_MASK
    cdef uint32_t sb = b >> 31, eb = (b >> 23) & 0xFF, fb = b & FRAC_MASK
    cdef uint32_t s = sa ^ sb
    if is_nan32(ea, fa) or is_nan32(eb, fb):
        return (s << 31) | QNAN
    if ea == 0xFF or eb == 0xFF:
        if ea == 0 or eb == 0:
            return (s << 31) | QNAN
        return (s << 31) | INF_BITS
    if ea == 0 or eb == 0:
        return s << 31
    cdef uint64_t p = <uint64_t>(fa | HIDDEN) * <uint64_t>(fb | HIDDEN)
    cdef int e = <int>ea + <int>eb - 127
    cdef int shift = 23
    if p >> 47:
        shift = 24
        e += 1
    cdef uint64_t q = p >> shift
    cdef uint64_t rem = p & ((<uint64_t>1 << shift) - 1)
    cdef uint64_t half = <uint64_t>1 << (shift - 1)
    if rem > half or (rem == half and (q & 1)):
        q += 1
        if q >> 24:
            q >>= 1
            e += 1
    return pack32(s, e, <uint32_t>q)


cdef inline uint32_t addsub32(uint32_t a, uint32_t b, bint subtract) noexcept nogil:
    if subtract:
        b ^= SIGN
    cdef uint32_t sa = a >> 31, ea = (a >> 23) & 0xFF, fa = a & FRAC_MASK
    cdef uint32_t sb = b >> 31, eb = (b >> 23) & 0xFF, fb = b & FRAC_MASK
    cdef uint32_t t
    if is_nan32(ea, fa) or is_nan32(eb, fb):
        return QNAN
    if ea == 0xFF or eb == 0xFF:
        if ea == 0xFF and eb == 0xFF and sa != sb:
            return QNAN
        if ea == 0xFF:
            return (sa << 31) | INF_BITS
        return (sb << 31) | INF_BITS
    if ea == 0 and eb == 0:
        return (sa & sb) << 31
    if ea == 0:
        return b
    if eb == 0:
        return a
    if eb > ea or (eb == ea and fb > fa):
        t = sa; sa = sb; sb = t
        t = ea; ea = eb; eb = t
        t = fa; fa = fb; fb = t
    cdef uint64_t ma = <uint64_t>(fa | HIDDEN) << 3
    cdef uint64_t mb = <uint64_t>(fb | HIDDEN) << 3
    cdef int d = <int>ea - <int>eb
    cdef uint64_t sticky
    if d >= 27:
        mb = 1
    elif d:
        sticky = 1 if (mb & ((<uint64_t>1 << d) - 1)) else 0
        mb = (mb >> d) | sticky
    cdef int e = ea
    cdef uint64_t m
    if sa == sb:
        m = ma + mb
        if m >> 27:
            m = (m >> 1) | (m & 1)
            e += 1
    else:
        m = ma - mb
        if m == 0:
            return 0
        while not (m >> 26):
            m <<= 1
            e -= 1
    cdef uint64_t q = m >> 3
    cdef uint64_t grs = m & 7
    if grs > 4 or (grs == 4 and (q & 1)):
        q += 1
        if q >> 24:
            q >>= 1
            e += 1
    return pack32(sa, e, <uint32_t>q)


cdef inline uint32_t div32(uint32_t a, uint32_t d) noexcept nogil:
    cdef uint32_t sa = a >> 31, ea = (a >> 23) & 0xFF, fa = a & FRAC_MASK
    cdef uint32_t sd = d >> 31, ed = (d >> 23) & 0xFF, fd = d & FRAC_MASK
    cdef uint32_t s = sa ^ sd
    if is_nan32(ea, fa) or is_nan32(ed, fd):
        return (s << 31) | QNAN
    if ea == 0xFF:
        return (s << 31) | (QNAN if ed == 0xFF else INF_BITS)
    if ed == 0xFF:
        return s << 31
    if ed == 0:
        return (s << 31) | (QNAN if ea == 0 else INF_BITS)
    if ea == 0:
        return s << 31
    cdef int shift
    cdef uint32_t q = ag_round_product(fa | HIDDEN, ag_nr_recip_fixed(fd, 3), &shift)
    return pack32(s, <int>ea - <int>ed + 127 + shift - AG_NR_FRAC - 1, q)


cdef inline uint32_t recip32(uint32_t d_norm) noexcept nogil:
    cdef int shift
    cdef uint32_t q = ag_round_product(1, ag_nr_recip_fixed(d_norm & FRAC_MASK, 3), &shift)
    return pack32(0, 127 + 23 + shift - AG_NR_FRAC - 1, q)


def f32_mul_array(const uint32_t[::1] a, const uint32_t[::1] b, uint32_t[::1] out):
    cdef Py_ssize_t i
    with nogil:
        for i in range(a.shape[0]):
            out[i] = mul32(a[i], b[i])


def f32_addsub_array(const uint32_t[::1] a, const uint32_t[::1] b, uint32_t[::1] out,
                     int subtract):
    cdef Py_ssize_t i
    with nogil:
        for i in range(a.shape[0]):
            out[i] = addsub32(a[i], b[i], subtract)


def f32_div_nr_array(const uint32_t[::1] a, const uint32_t[::1] b, uint32_t[::1] out):
    cdef Py_ssize_t i
    with nogil:
        for i in range(a.shape[0]):
            out[i] = div32(a[i], b[i])


def nr_reciprocal_array(const uint32_t[::1] d, uint32_t[::1] out):
    cdef Py_ssize_t i
    with nogil:
        for i in range(d.shape[0]):
            out[i] = recip32(d[i])
