#ifndef PHIGAMMA_PADIC_HPP
#define PHIGAMMA_PADIC_HPP

#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace phigamma {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;
using u128 = unsigned __int128;

// Every failure carries a stable code (the names used in fixtures and CLI diagnostics).
struct Error : std::runtime_error {
    std::string code;
    Error(std::string c, const std::string& what)
        : std::runtime_error(c + ": " + what), code(std::move(c)) {}
};

[[noreturn]] inline void fail(const std::string& code, const std::string& what) {
    throw Error(code, what);
}

// ---------------------------------------------------------------- modular helpers

constexpr u64 kModulusCap = u64(1) << 62;

inline u64 ipow(u64 p, int n) {
    u64 r = 1;
    for (int i = 0; i < n; ++i) {
        if (r > kModulusCap / p) fail("PrecisionExhausted", "p^n exceeds the 62-bit residue range");
        r *= p;
    }
    return r;
}

inline u64 mulmod(u64 a, u64 b, u64 m) { return u64((u128)a * b % m); }

inline u64 addmod(u64 a, u64 b, u64 m) {
    u64 s = a + b;
    return s >= m ? s - m : s;
}

inline u64 submod(u64 a, u64 b, u64 m) { return a >= b ? a - b : a + m - b; }

inline u64 reduce(i64 x, u64 m) {
    i128 r = (i128)x % (i128)m;
    if (r < 0) r += m;
    return u64(r);
}

inline u64 invmod(u64 a, u64 m) {
    i128 g = m, x = 0, g1 = a % m, x1 = 1;
    while (g1 != 0) {
        i128 q = g / g1;
        i128 t = g - q * g1; g = g1; g1 = t;
        t = x - q * x1; x = x1; x1 = t;
    }
    if (g != 1) fail("DivisionByZeroAtPrecision", "residue is not invertible");
    if (x < 0) x += m;
    return u64(x);
}

// p-adic valuation of a nonzero integer
inline int val_int(i128 x, u64 p) {
    if (x == 0) return 1 << 28;
    if (x < 0) x = -x;
    int v = 0;
    while (x % p == 0) { x /= p; ++v; }
    return v;
}

// floor(log_p(k)) for k >= 1
inline int floor_log(u64 p, u64 k) {
    int r = 0;
    while (k >= p) { k /= p; ++r; }
    return r;
}

// ceil(log_p(k)) for k >= 1
inline int ceil_log(u64 p, u64 k) {
    int r = 0;
    u64 q = 1;
    while (q < k) { q *= p; ++r; }
    return r;
}

// ---------------------------------------------------------------- rationals

struct Rat {
    i64 num = 0;
    i64 den = 1;

    Rat() = default;
    Rat(i64 n) : num(n), den(1) {}
    Rat(i64 n, i64 d) : num(n), den(d) {
        if (d == 0) throw std::invalid_argument("Rat: zero denominator");
        normalize();
    }
    void normalize() {
        if (den < 0) { num = -num; den = -den; }
        i64 g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }
    friend Rat operator+(Rat a, Rat b) { return Rat(a.num * b.den + b.num * a.den, a.den * b.den); }
    friend Rat operator-(Rat a, Rat b) { return Rat(a.num * b.den - b.num * a.den, a.den * b.den); }
    friend Rat operator*(Rat a, Rat b) { return Rat(a.num * b.num, a.den * b.den); }
    friend Rat operator/(Rat a, Rat b) { return Rat(a.num * b.den, a.den * b.num); }
    Rat operator-() const { return Rat(-num, den); }
    friend bool operator==(Rat a, Rat b) { return a.num == b.num && a.den == b.den; }
    friend bool operator!=(Rat a, Rat b) { return !(a == b); }
    friend bool operator<(Rat a, Rat b) { return (i128)a.num * b.den < (i128)b.num * a.den; }
    friend bool operator>(Rat a, Rat b) { return b < a; }
    friend bool operator<=(Rat a, Rat b) { return !(b < a); }
    friend bool operator>=(Rat a, Rat b) { return !(a < b); }
    i64 floor() const { return num >= 0 ? num / den : -((-num + den - 1) / den); }
    std::string str() const { return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den); }
};

inline std::ostream& operator<<(std::ostream& os, const Rat& r) { return os << r.str(); }

// ---------------------------------------------------------------- PadicScalar

// x = p^v * u with u a unit mod p^N (relative precision N).
// The zero flag marks a value indistinguishable from 0; its v then holds the
// absolute precision at which that was certified and N is 0.
struct PadicScalar {
    u64 p = 2;
    i64 v = 0;
    u64 u = 0;
    int N = 0;
    bool zero = true;

    static PadicScalar zero_at(u64 p, i64 absprec) {
        PadicScalar z;
        z.p = p; z.v = absprec; z.u = 0; z.N = 0; z.zero = true;
        return z;
    }

    // residue r known modulo p^absprec, scaled by p^shift
    static PadicScalar from_residue(u64 p, u128 r, i64 absprec, i64 shift = 0) {
        if (absprec <= 0) return zero_at(p, absprec + shift);
        u64 m = ipow(p, int(absprec));
        r %= m;
        if (r == 0) return zero_at(p, absprec + shift);
        int w = 0;
        while (r % p == 0) { r /= p; ++w; }
        PadicScalar s;
        s.p = p; s.v = w + shift; s.N = int(absprec - w); s.zero = false;
        s.u = u64(r % ipow(p, s.N));
        return s;
    }

    // nonzero x gets relative precision N; x == 0 gives zero at absolute precision N
    static PadicScalar from_int(u64 p, i64 x, int N) {
        if (x == 0) return zero_at(p, N);
        int w = val_int(x, p);
        i128 y = x;
        for (int i = 0; i < w; ++i) y /= (i128)p;
        PadicScalar s;
        s.p = p; s.v = w; s.N = N; s.zero = false;
        u64 m = ipow(p, N);
        i128 r = y % (i128)m;
        if (r < 0) r += m;
        s.u = u64(r);
        return s;
    }

    i64 abs_prec() const { return zero ? v : v + N; }
    i64 valuation() const { return v; }  // for zero: lower bound
    bool is_zero() const { return zero; }
    bool is_unit() const { return !zero && v == 0; }

    // value modulo p^k as an integer, requires v >= 0 or zero
    u64 residue(int k) const {
        if (k <= 0) return 0;
        u64 m = ipow(p, k);
        if (zero || v >= k) return 0;
        if (v < 0) fail("PrecisionExhausted", "residue of a non-integral scalar");
        return mulmod(u % m, ipow(p, int(v)) % m, m);
    }

    // signed representative in (-p^k/2, p^k/2]
    i64 signed_residue(int k) const {
        u64 m = ipow(p, k);
        u64 r = residue(k);
        return r > m / 2 ? i64(r) - i64(m) : i64(r);
    }

    PadicScalar with_abs_prec(i64 a) const {
        if (a >= abs_prec()) return *this;
        if (zero || a <= v) return zero_at(p, a);
        PadicScalar s = *this;
        s.N = int(a - v);
        s.u %= ipow(p, s.N);
        return s;
    }

    std::string u_str() const { return std::to_string(u); }
};

inline bool identical(const PadicScalar& a, const PadicScalar& b) {
    return a.p == b.p && a.v == b.v && a.u == b.u && a.N == b.N && a.zero == b.zero;
}

inline void check_prime(const PadicScalar& a, const PadicScalar& b) {
    if (a.p != b.p) fail("PrimeMismatch", "scalars over different primes");
}

inline PadicScalar neg(const PadicScalar& x) {
    if (x.zero) return x;
    PadicScalar r = x;
    u64 m = ipow(x.p, x.N);
    r.u = (m - x.u) % m;
    return r;
}

inline PadicScalar add(const PadicScalar& x, const PadicScalar& y) {
    check_prime(x, y);
    i64 A = std::min(x.abs_prec(), y.abs_prec());
    if (x.zero && y.zero) return PadicScalar::zero_at(x.p, A);
    if (x.zero) return y.with_abs_prec(A);
    if (y.zero) return x.with_abs_prec(A);
    i64 m = std::min(x.v, y.v);
    if (A - m <= 0) return PadicScalar::zero_at(x.p, A);
    int span = int(A - m);
    u64 M = ipow(x.p, span);
    u64 a = x.v - m < span ? mulmod(x.u % M, ipow(x.p, int(x.v - m)), M) : 0;
    u64 b = y.v - m < span ? mulmod(y.u % M, ipow(y.p, int(y.v - m)), M) : 0;
    return PadicScalar::from_residue(x.p, addmod(a, b, M), span, m);
}

inline PadicScalar sub(const PadicScalar& x, const PadicScalar& y) { return add(x, neg(y)); }

inline PadicScalar mul(const PadicScalar& x, const PadicScalar& y) {
    check_prime(x, y);
    if (x.zero && y.zero) return PadicScalar::zero_at(x.p, x.v + y.v);
    if (x.zero) return PadicScalar::zero_at(x.p, x.v + y.v);
    if (y.zero) return PadicScalar::zero_at(x.p, x.v + y.v);
    PadicScalar r;
    r.p = x.p; r.zero = false;
    r.v = x.v + y.v;
    r.N = std::min(x.N, y.N);
    u64 M = ipow(x.p, r.N);
    r.u = mulmod(x.u % M, y.u % M, M);
    return r;
}

inline PadicScalar div(const PadicScalar& x, const PadicScalar& y) {
    check_prime(x, y);
    if (y.zero) fail("DivisionByZeroAtPrecision", "divisor is zero at precision " + std::to_string(y.v));
    if (x.zero) return PadicScalar::zero_at(x.p, x.v - y.v);
    PadicScalar r;
    r.p = x.p; r.zero = false;
    r.v = x.v - y.v;
    r.N = std::min(x.N, y.N);
    u64 M = ipow(x.p, r.N);
    r.u = mulmod(x.u % M, invmod(y.u % M, M), M);
    return r;
}

inline PadicScalar operator+(const PadicScalar& a, const PadicScalar& b) { return add(a, b); }
inline PadicScalar operator-(const PadicScalar& a, const PadicScalar& b) { return sub(a, b); }
inline PadicScalar operator*(const PadicScalar& a, const PadicScalar& b) { return mul(a, b); }
inline PadicScalar operator/(const PadicScalar& a, const PadicScalar& b) { return div(a, b); }
inline PadicScalar operator-(const PadicScalar& a) { return neg(a); }

// Equality at the common absolute precision.
inline bool same_value(const PadicScalar& a, const PadicScalar& b) { return sub(a, b).zero; }

// binom(a, k) = a(a-1)...(a-k+1)/k!; a must be integral.  The result is known to
// absolute precision abs_prec(a) - floor(log_p k).
inline PadicScalar binom(const PadicScalar& a, u64 k) {
    if (!a.zero && a.v < 0) fail("PrecisionExhausted", "binom needs an integral argument");
    i64 A = a.abs_prec();
    if (k == 0) return PadicScalar::from_int(a.p, 1, int(std::max<i64>(A, 1)));
    u64 p = a.p;
    int e = 0;
    for (u64 q = p; q <= k; q *= p) { e += int(k / q); if (q > k / p) break; }
    i64 out = A - floor_log(p, k);
    if (out <= 0) fail("PrecisionExhausted", "binom(a," + std::to_string(k) + ") has no significant digits");
    i64 W = A + e;
    u64 M = 1;
    for (i64 i = 0; i < W; ++i) {
        if (M > kModulusCap / p) fail("PrecisionExhausted", "binom working precision too large");
        M *= p;
    }
    u64 at = a.residue(int(std::min<i64>(A, W)));
    u64 num = 1 % M;
    u64 kf_unit = 1;
    u64 Mu = ipow(p, int(out));
    for (u64 j = 0; j < k; ++j) {
        num = mulmod(num, submod(at % M, j % M, M), M);
        u64 d = j + 1;
        while (d % p == 0) d /= p;
        kf_unit = mulmod(kf_unit, d % Mu, Mu);
    }
    u64 pe = ipow(p, e);
    if (num % pe != 0) fail("PrecisionExhausted", "binom numerator lost divisibility");
    u64 q = num / pe;
    u64 r = mulmod(q % Mu, invmod(kf_unit, Mu), Mu);
    return PadicScalar::from_residue(p, r, out);
}

inline std::ostream& operator<<(std::ostream& os, const PadicScalar& s) {
    if (s.zero) return os << "O(" << s.p << "^" << s.v << ")";
    return os << s.p << "^" << s.v << "*" << s.u << " [N=" << s.N << "]";
}

// ---------------------------------------------------------------- norm values

// Zero, or p^(-e) for rational e.
struct NormValue {
    bool is_zero = true;
    Rat e;

    static NormValue zero() { return {}; }
    static NormValue of_exp(Rat e) { NormValue n; n.is_zero = false; n.e = e; return n; }
    static NormValue one() { return of_exp(Rat(0)); }
    static NormValue of_scalar(const PadicScalar& s) { return s.zero ? zero() : of_exp(Rat(s.v)); }
};

inline NormValue norm_mul(const NormValue& a, const NormValue& b) {
    if (a.is_zero || b.is_zero) return NormValue::zero();
    return NormValue::of_exp(a.e + b.e);
}

inline NormValue norm_max(const NormValue& a, const NormValue& b) {
    if (a.is_zero) return b;
    if (b.is_zero) return a;
    return a.e <= b.e ? a : b;
}

// -1, 0, 1 as a < b, a == b, a > b in value
inline int norm_cmp(const NormValue& a, const NormValue& b) {
    if (a.is_zero && b.is_zero) return 0;
    if (a.is_zero) return -1;
    if (b.is_zero) return 1;
    if (a.e == b.e) return 0;
    return a.e < b.e ? 1 : -1;
}

inline NormValue norm_pow(const NormValue& a, i64 k) {
    if (a.is_zero) {
        if (k == 0) return NormValue::one();
        if (k < 0) fail("DivisionByZeroAtPrecision", "negative power of the zero norm");
        return a;
    }
    return NormValue::of_exp(a.e * Rat(k));
}

inline NormValue norm_inv(const NormValue& a) { return norm_pow(a, -1); }

inline bool operator==(const NormValue& a, const NormValue& b) { return norm_cmp(a, b) == 0; }
inline bool operator<(const NormValue& a, const NormValue& b) { return norm_cmp(a, b) < 0; }
inline bool operator<=(const NormValue& a, const NormValue& b) { return norm_cmp(a, b) <= 0; }

inline std::string norm_str(const NormValue& n, u64 p) {
    if (n.is_zero) return "0";
    return std::to_string(p) + "^(" + (-n.e).str() + ")";
}

// rho = p^(-e), 0 < e < 1
struct RhoExponent {
    Rat e;
    RhoExponent() : e(1, 2) {}
    explicit RhoExponent(Rat x) : e(x) {
        if (!(Rat(0) < e && e < Rat(1))) fail("PreconditionFailed", "rho exponent must lie in (0,1), got " + e.str());
    }
    NormValue value() const { return NormValue::of_exp(e); }
};

}  // namespace phigamma

#endif
