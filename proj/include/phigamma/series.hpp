#ifndef PHIGAMMA_SERIES_HPP
#define PHIGAMMA_SERIES_HPP

#include <algorithm>
#include <map>
#include <mutex>
#include <optional>
#include <tuple>
#include <vector>

#include "padic.hpp"

namespace phigamma {

enum class CertClass { Iwasawa, OE, OEdagger, Edagger, Robba };

inline const char* cert_name(CertClass c) {
    switch (c) {
        case CertClass::Iwasawa: return "Iwasawa";
        case CertClass::OE: return "OE";
        case CertClass::OEdagger: return "OEdagger";
        case CertClass::Edagger: return "Edagger";
        case CertClass::Robba: return "Robba";
    }
    return "?";
}

inline CertClass cert_from_name(const std::string& s) {
    if (s == "Iwasawa") return CertClass::Iwasawa;
    if (s == "OE") return CertClass::OE;
    if (s == "OEdagger") return CertClass::OEdagger;
    if (s == "Edagger") return CertClass::Edagger;
    if (s == "Robba") return CertClass::Robba;
    fail("ParseError", "unknown series class '" + s + "'");
}

struct Cert {
    CertClass cls = CertClass::OE;
    std::optional<Rat> radius;  // declared radius exponent for dagger/Robba classes
};

// Smallest class containing both.  Iwasawa ⊂ OE† ⊂ OE and OE† ⊂ E† ⊂ R.
inline Cert cert_join(const Cert& a, const Cert& b) {
    auto branch_int = [](CertClass c) { return c == CertClass::Iwasawa || c == CertClass::OEdagger || c == CertClass::OE; };
    auto rank = [](CertClass c) {
        switch (c) {
            case CertClass::Iwasawa: return 0;
            case CertClass::OEdagger: return 1;
            case CertClass::OE: return 2;
            case CertClass::Edagger: return 2;
            case CertClass::Robba: return 3;
        }
        return 0;
    };
    if (a.cls == b.cls) {
        Cert r = a;
        if (a.radius && b.radius) r.radius = std::max(*a.radius, *b.radius);
        else if (!a.radius) r.radius = b.radius;
        return r;
    }
    if ((a.cls == CertClass::OE && !branch_int(b.cls)) || (b.cls == CertClass::OE && !branch_int(a.cls)))
        fail("ClassMismatch", std::string("no common class for ") + cert_name(a.cls) + " and " + cert_name(b.cls));
    Cert r = rank(a.cls) >= rank(b.cls) ? a : b;
    if (a.cls == CertClass::Iwasawa || b.cls == CertClass::Iwasawa) return r;
    if (a.radius && b.radius) r.radius = std::max(*a.radius, *b.radius);
    return r;
}

constexpr i64 kInf = i64(1) << 50;

// A Laurent series over Z_p (or Q_p) known to coefficient precision p^prec and,
// unless exact, only modulo T^hi.  Residues c[i] belong to T^(lo+i) and are
// stored scaled by p^shift modulo p^(prec+shift).  After normalize() the first
// stored residue is nonzero, so lo is the true lowest exponent (or hi if zero).
struct LaurentSeries {
    u64 p = 2;
    int prec = 1;
    int shift = 0;
    i64 lo = 0;
    i64 hi = 0;
    bool exact = true;
    std::vector<u64> c;
    Cert cert;

    u64 modulus() const { return ipow(p, prec + shift); }
    i64 top() const { return exact ? kInf : hi; }
    bool is_zero() const { return c.empty(); }
    i64 low() const { return c.empty() ? top() : lo; }
    i64 end() const { return lo + i64(c.size()); }

    u64 raw(i64 e) const {
        if (e < lo || e >= end()) return 0;
        return c[size_t(e - lo)];
    }

    PadicScalar coeff(i64 e) const {
        if (e >= top()) fail("WindowUnderflow", "coefficient of T^" + std::to_string(e) + " lies outside the window");
        return PadicScalar::from_residue(p, raw(e), prec + shift, -shift);
    }

    // representative in (-M/2, M/2] of the stored residue (integral series only)
    i64 signed_coeff(i64 e) const {
        u64 M = modulus();
        u64 r = raw(e);
        return r > M / 2 ? i64(r) - i64(M) : i64(r);
    }

    // smallest coefficient valuation, including the unknown tail of an inexact series
    i64 min_val() const {
        i64 v = exact ? kInf : -shift;
        for (u64 r : c)
            if (r) v = std::min<i64>(v, val_int(r, p) - shift);
        return v;
    }

    void normalize() {
        u64 M = modulus();
        for (auto& r : c) r %= M;
        size_t i = 0;
        while (i < c.size() && c[i] == 0) ++i;
        if (i == c.size()) {
            c.clear();
            if (exact) { lo = hi = 0; shift = 0; }
            else lo = hi;
            return;
        }
        c.erase(c.begin(), c.begin() + i);
        lo += i64(i);
        if (exact) {
            while (c.back() == 0) c.pop_back();
            hi = end();
            while (shift > 0 && std::all_of(c.begin(), c.end(), [&](u64 r) { return r % p == 0; })) {
                for (auto& r : c) r /= p;
                --shift;
            }
        }
    }
};

inline void same_prime(const LaurentSeries& f, const LaurentSeries& g) {
    if (f.p != g.p) fail("PrimeMismatch", "series over different primes");
}

// ---------------------------------------------------------------- construction

inline LaurentSeries series_from(u64 p, int prec, i64 lo, const std::vector<i64>& coeffs,
                                 bool exact = true, i64 hi = 0, Cert cert = {}) {
    LaurentSeries f;
    f.p = p; f.prec = prec; f.lo = lo; f.exact = exact; f.cert = cert;
    u64 M = f.modulus();
    size_t n = coeffs.size();
    if (!exact) n = size_t(std::clamp<i64>(hi - lo, 0, i64(n)));
    for (size_t i = 0; i < n; ++i) f.c.push_back(reduce(coeffs[i], M));
    if (!exact) {
        if (hi < lo) { f.lo = hi; f.c.clear(); }
        f.c.resize(size_t(hi - f.lo), 0);
        f.hi = hi;
    }
    f.normalize();
    return f;
}

inline LaurentSeries series_from_map(u64 p, int prec, const std::map<i64, i64>& m,
                                     bool exact = true, i64 hi = 0, Cert cert = {}) {
    if (m.empty()) return series_from(p, prec, exact ? 0 : hi, {}, exact, hi, cert);
    i64 lo = m.begin()->first, top = m.rbegin()->first + 1;
    std::vector<i64> v(size_t(top - lo), 0);
    for (auto& [e, a] : m) v[size_t(e - lo)] = a;
    return series_from(p, prec, lo, v, exact, hi, cert);
}

inline LaurentSeries monomial(u64 p, int prec, i64 e, i64 a = 1) { return series_from(p, prec, e, {a}); }
inline LaurentSeries ser_one(u64 p, int prec) { return monomial(p, prec, 0, 1); }
inline LaurentSeries ser_T(u64 p, int prec) { return monomial(p, prec, 1, 1); }
inline LaurentSeries ser_zero(u64 p, int prec) { return series_from(p, prec, 0, {}); }
inline LaurentSeries big_o(u64 p, int prec, i64 hi) { return series_from(p, prec, hi, {}, false, hi); }

// 1 + T, the image of the generator of Z_p
inline LaurentSeries chi_one(u64 p, int prec) { return series_from(p, prec, 0, {1, 1}); }

inline LaurentSeries truncate(const LaurentSeries& f, i64 h) {
    if (h >= f.top()) return f;
    LaurentSeries g = f;
    g.exact = false;
    g.hi = h;
    if (h <= g.lo) { g.c.clear(); g.lo = h; }
    else g.c.resize(size_t(h - g.lo), 0);
    g.normalize();
    return g;
}

inline LaurentSeries with_prec(const LaurentSeries& f, int P) {
    if (P >= f.prec) return f;
    LaurentSeries g = f;
    g.prec = std::max(P, 0);
    if (g.prec + g.shift == 0) { g.c.clear(); g.prec = 0; }
    g.normalize();
    return g;
}

inline LaurentSeries with_cert(LaurentSeries f, Cert c) { f.cert = c; return f; }

// residues of f rescaled to shift s (s >= f.shift) modulo M
inline std::vector<u64> rescaled(const LaurentSeries& f, int s, u64 M) {
    std::vector<u64> out(f.c.size());
    u64 k = ipow(f.p, s - f.shift) % M;
    for (size_t i = 0; i < f.c.size(); ++i) out[i] = mulmod(f.c[i] % M, k, M);
    return out;
}

// ---------------------------------------------------------------- ring operations

inline LaurentSeries ser_add(const LaurentSeries& f, const LaurentSeries& g) {
    same_prime(f, g);
    LaurentSeries r;
    r.p = f.p;
    r.prec = std::min(f.prec, g.prec);
    r.shift = std::max(f.shift, g.shift);
    r.exact = f.exact && g.exact;
    r.cert = cert_join(f.cert, g.cert);
    i64 top = std::min(f.top(), g.top());
    u64 M = r.modulus();
    i64 lo = std::min(f.is_zero() ? kInf : f.lo, g.is_zero() ? kInf : g.lo);
    i64 stop = r.exact ? std::max(f.end(), g.end()) : top;
    if (lo >= stop) {
        r.lo = r.exact ? 0 : top;
        r.hi = r.exact ? 0 : top;
        return r;
    }
    r.lo = lo;
    r.hi = stop;
    r.c.assign(size_t(stop - lo), 0);
    auto a = rescaled(f, r.shift, M), b = rescaled(g, r.shift, M);
    for (size_t i = 0; i < a.size(); ++i) {
        i64 e = f.lo + i64(i);
        if (e < stop) r.c[size_t(e - lo)] = a[i];
    }
    for (size_t i = 0; i < b.size(); ++i) {
        i64 e = g.lo + i64(i);
        if (e < stop) r.c[size_t(e - lo)] = addmod(r.c[size_t(e - lo)], b[i], M);
    }
    r.normalize();
    return r;
}

inline LaurentSeries ser_neg(const LaurentSeries& f) {
    LaurentSeries r = f;
    u64 M = f.modulus();
    for (auto& x : r.c) x = x ? M - x : 0;
    return r;
}

inline LaurentSeries ser_sub(const LaurentSeries& f, const LaurentSeries& g) { return ser_add(f, ser_neg(g)); }

inline LaurentSeries ser_scale(const LaurentSeries& f, i64 a) {
    LaurentSeries r = f;
    u64 M = f.modulus();
    u64 k = reduce(a, M);
    for (auto& x : r.c) x = mulmod(x, k, M);
    r.normalize();
    return r;
}

// multiply by p^k (k may be negative)
inline LaurentSeries ser_scale_p(const LaurentSeries& f, int k) {
    LaurentSeries r = f;
    if (k == 0) return r;
    if (k < 0) {
        r.shift -= k;
        r.prec += k;
        if (r.prec <= 0) fail("PrecisionExhausted", "division by p consumed all digits");
        return r;
    }
    int take = std::min(k, r.shift);
    r.shift -= take;
    r.prec += take;
    k -= take;
    if (k > 0) {
        int P = r.prec;
        while (P < r.prec + k && r.modulus() <= kModulusCap / ipow(r.p, P - r.prec + 1)) ++P;
        r.prec = P;
        u64 M = r.modulus();
        u64 pk = ipow(r.p, k) % M;
        for (auto& x : r.c) x = mulmod(x, pk, M);
    }
    r.normalize();
    return r;
}

inline LaurentSeries ser_mul_T(const LaurentSeries& f, i64 e) {
    LaurentSeries r = f;
    r.lo += e;
    if (!r.exact || !r.c.empty()) r.hi += e;
    return r;
}

// plain convolution modulo M, keeping at most `limit` output terms
inline std::vector<u64> poly_mul(const std::vector<u64>& a, const std::vector<u64>& b, u64 M,
                                 size_t limit = size_t(-1)) {
    if (a.empty() || b.empty()) return {};
    size_t n = std::min(a.size() + b.size() - 1, limit);
    if (n == 0) return {};
    size_t len = std::min(a.size(), b.size());
    u128 bound = (u128)(M - 1) * (M - 1) * len;
    if (bound < ((u128)1 << 64)) {
        std::vector<u64> acc(n, 0);
        for (size_t i = 0; i < a.size() && i < n; ++i) {
            u64 x = a[i];
            if (!x) continue;
            size_t jmax = std::min(b.size(), n - i);
            u64* out = acc.data() + i;
            for (size_t j = 0; j < jmax; ++j) out[j] += x * b[j];
        }
        for (auto& v : acc) v %= M;
        return acc;
    }
    if (M <= (u64(1) << 32)) {
        std::vector<u128> acc(n, 0);
        for (size_t i = 0; i < a.size() && i < n; ++i) {
            u64 x = a[i];
            if (!x) continue;
            size_t jmax = std::min(b.size(), n - i);
            for (size_t j = 0; j < jmax; ++j) acc[i + j] += (u128)(x * b[j]);
        }
        std::vector<u64> out(n);
        for (size_t k = 0; k < n; ++k) out[k] = u64(acc[k] % M);
        return out;
    }
    std::vector<u64> out(n, 0);
    for (size_t i = 0; i < a.size() && i < n; ++i) {
        if (!a[i]) continue;
        size_t jmax = std::min(b.size(), n - i);
        for (size_t j = 0; j < jmax; ++j) out[i + j] = addmod(out[i + j], mulmod(a[i], b[j], M), M);
    }
    return out;
}

// Product.  The T-adic window is min(hi_f + low(g), hi_g + low(f)); the
// coefficient precision is min(prec_f + v(g), prec_g + v(f)), capped at the
// larger input precision.
inline LaurentSeries ser_mul(const LaurentSeries& f, const LaurentSeries& g) {
    same_prime(f, g);
    LaurentSeries r;
    r.p = f.p;
    r.cert = cert_join(f.cert, g.cert);
    r.exact = f.exact && g.exact;
    i64 top = std::min(f.top() >= kInf ? kInf : f.top() + g.low(), g.top() >= kInf ? kInf : g.top() + f.low());
    if (f.low() >= kInf || g.low() >= kInf) top = kInf;
    if ((f.is_zero() && f.exact) || (g.is_zero() && g.exact)) {
        r.prec = std::max(f.prec, g.prec);
        r.exact = true;
        return r;
    }
    i64 vf = f.min_val(), vg = g.min_val();
    i64 P = std::min<i64>(f.prec + std::min<i64>(vg, 1000), g.prec + std::min<i64>(vf, 1000));
    P = std::min<i64>(P, std::max(f.prec, g.prec));
    int s = f.shift + g.shift;
    // keep p^(P+s) representable
    while (P + s > 0) {
        bool ok = true;
        u64 M = 1;
        for (i64 i = 0; i < P + s; ++i) {
            if (M > kModulusCap / r.p) { ok = false; break; }
            M *= r.p;
        }
        if (ok) break;
        --P;
    }
    if (P <= 0) fail("PrecisionExhausted", "product has no significant digits");
    r.prec = int(P);
    r.shift = s;
    u64 M = r.modulus();
    if (f.is_zero() || g.is_zero()) {
        r.lo = r.hi = top;
        return r;
    }
    std::vector<u64> a(f.c.size()), b(g.c.size());
    for (size_t i = 0; i < a.size(); ++i) a[i] = f.c[i] % M;
    for (size_t i = 0; i < b.size(); ++i) b[i] = g.c[i] % M;
    r.lo = f.lo + g.lo;
    size_t limit = r.exact ? size_t(-1) : size_t(std::max<i64>(0, top - r.lo));
    r.c = poly_mul(a, b, M, limit);
    if (!r.exact) {
        r.hi = top;
        r.c.resize(size_t(std::max<i64>(0, top - r.lo)), 0);
        if (top < r.lo) r.lo = top;
    }
    r.normalize();
    return r;
}

inline LaurentSeries operator+(const LaurentSeries& a, const LaurentSeries& b) { return ser_add(a, b); }
inline LaurentSeries operator-(const LaurentSeries& a, const LaurentSeries& b) { return ser_sub(a, b); }
inline LaurentSeries operator*(const LaurentSeries& a, const LaurentSeries& b) { return ser_mul(a, b); }
inline LaurentSeries operator-(const LaurentSeries& a) { return ser_neg(a); }

// f and g agree on their common window at their common precision
inline bool ser_agree(const LaurentSeries& f, const LaurentSeries& g) {
    LaurentSeries d = ser_sub(f, with_cert(g, f.cert));
    return d.is_zero();
}

// identical as truncated objects (window, precision, exactness and coefficients)
inline bool ser_identical(const LaurentSeries& f, const LaurentSeries& g) {
    return f.p == g.p && f.prec == g.prec && f.shift == g.shift && f.lo == g.lo && f.hi == g.hi &&
           f.exact == g.exact && f.c == g.c;
}

inline LaurentSeries ser_pow(const LaurentSeries& f, u64 n) {
    LaurentSeries r = ser_one(f.p, f.prec + f.shift);
    r.cert = f.cert;
    LaurentSeries b = f;
    while (n) {
        if (n & 1) r = ser_mul(r, b);
        n >>= 1;
        if (n) b = ser_mul(b, b);
    }
    return r;
}

// ---------------------------------------------------------------- inversion

// f = c T^m (1 + h) with c a unit after removing p^v; sums (-h)^k, which
// terminates modulo p^N because the part of h below T^0 is divisible by p.
inline LaurentSeries ser_invert(const LaurentSeries& f, std::optional<i64> target = std::nullopt) {
    if (f.is_zero()) fail("NotAUnit", "zero series is not invertible");
    i64 v = f.min_val();
    i64 vstored = kInf;
    for (u64 r : f.c)
        if (r) vstored = std::min<i64>(vstored, val_int(r, f.p) - f.shift);
    if (vstored > v) fail("NotAUnit", "leading unit term is hidden in the truncated tail");
    bool integral_class = f.cert.cls == CertClass::Iwasawa || f.cert.cls == CertClass::OE || f.cert.cls == CertClass::OEdagger;
    if (integral_class && v != 0) fail("NotAUnit", "leading coefficient is not a unit of Z_p");
    int N1 = int(f.prec - v);
    if (N1 <= 0) fail("NotAUnit", "no significant digits after removing p^v");
    u64 p = f.p;
    u64 M = ipow(p, N1);
    int cut = int(v + f.shift);  // residues are divisible by p^cut
    u64 pc = ipow(p, cut);
    std::vector<u64> g(f.c.size());
    for (size_t i = 0; i < g.size(); ++i) g[i] = (f.c[i] / pc) % M;
    size_t mi = 0;
    while (mi < g.size() && g[mi] % p == 0) ++mi;
    if (mi == g.size()) fail("NotAUnit", "no unit coefficient in the window");
    i64 m = f.lo + i64(mi);
    if (f.cert.cls == CertClass::Iwasawa && (f.lo < 0 || m != 0))
        fail("NotAUnit", "constant term of an Iwasawa series is not a unit");
    u64 cinv = invmod(g[mi], M);
    for (auto& x : g) x = mulmod(x, cinv, M);
    // h = g T^-m - 1 on relative exponents [f.lo - m, ...)
    i64 hlo = f.lo - m;
    std::vector<u64> h = g;
    h[mi] = submod(h[mi], 1, M);
    i64 d = -hlo;  // depth of the p-divisible negative part
    bool hpos = false;
    for (size_t i = mi + 1; i < h.size(); ++i)
        if (h[i]) { hpos = true; break; }
    bool terminates = f.exact && !hpos;
    i64 rel_top;
    if (!f.exact) rel_top = f.hi - m;
    else if (terminates) rel_top = kInf;
    else rel_top = (target ? *target : m + (f.end() - f.lo)) + m;
    i64 keep_top = rel_top >= kInf ? kInf : rel_top + i64(N1) * d + 1;
    // S and t live on exponents [slo, slo + size)
    i64 slo = 0;
    std::vector<u64> S{1 % M}, t{1 % M};
    i64 tlo = 0;
    std::vector<u64> negh(h.size());
    for (size_t i = 0; i < h.size(); ++i) negh[i] = h[i] ? M - h[i] : 0;
    for (int iter = 0; iter < 1000000; ++iter) {
        size_t limit = keep_top >= kInf ? size_t(-1) : size_t(std::max<i64>(0, keep_top - (tlo + hlo)));
        t = poly_mul(t, negh, M, limit);
        tlo += hlo;
        size_t z = 0;
        while (z < t.size() && t[z] == 0) ++z;
        if (z == t.size()) break;
        t.erase(t.begin(), t.begin() + z);
        tlo += i64(z);
        while (!t.empty() && t.back() == 0) t.pop_back();
        if (rel_top < kInf && tlo >= rel_top) break;
        i64 nlo = std::min(slo, tlo);
        i64 nhi = std::max(slo + i64(S.size()), tlo + i64(t.size()));
        if (rel_top < kInf) nhi = std::min(nhi, rel_top);
        std::vector<u64> T2(size_t(nhi - nlo), 0);
        for (size_t i = 0; i < S.size(); ++i) {
            i64 e = slo + i64(i);
            if (e < nhi) T2[size_t(e - nlo)] = S[i];
        }
        for (size_t i = 0; i < t.size(); ++i) {
            i64 e = tlo + i64(i);
            if (e < nhi) T2[size_t(e - nlo)] = addmod(T2[size_t(e - nlo)], t[i], M);
        }
        S.swap(T2);
        slo = nlo;
    }
    LaurentSeries r;
    r.p = p;
    r.prec = N1;
    r.shift = 0;
    r.cert = f.cert;
    r.lo = slo - m;
    r.c = S;
    for (auto& x : r.c) x = mulmod(x, cinv, M);
    if (rel_top >= kInf) {
        r.exact = true;
    } else {
        r.exact = false;
        r.c.resize(size_t(std::max<i64>(0, rel_top - slo)), 0);
        r.hi = rel_top - m;
    }
    r.normalize();
    if (!f.exact) {
        // error of f at T^hi_f propagates as T^(hi_f + 2 low(f^-1))
        i64 L = r.low();
        r = truncate(r, f.hi + 2 * L);
    }
    if (target && !r.exact && *target < r.top()) r = truncate(r, *target);
    return ser_scale_p(r, int(-v));
}

// ---------------------------------------------------------------- substitution

// the constant series with residue a, in f's representation
inline LaurentSeries monomial_residue(const LaurentSeries& f, u64 a) {
    LaurentSeries r;
    r.p = f.p; r.prec = f.prec; r.shift = f.shift; r.cert = f.cert;
    r.c = {a};
    r.normalize();
    return r;
}

// f(g) for g integral with zero constant term.  Negative powers of f go through
// g^-1, which needs a unit coefficient in g.
inline LaurentSeries ser_subst(const LaurentSeries& f, const LaurentSeries& g, std::optional<i64> target = std::nullopt) {
    same_prime(f, g);
    if (g.is_zero()) fail("SubstitutionDiverges", "substituted series is zero");
    if (g.min_val() < 0) fail("SubstitutionDiverges", "substituted series is not integral");
    if (g.low() < 1) fail("SubstitutionDiverges", "substituted series has a constant or negative term");
    u64 p = f.p;
    i64 d = g.low();
    i64 nneg = std::max<i64>(0, -f.low());
    if (!f.exact && f.hi < 0) nneg = std::max(nneg, -f.hi);
    std::optional<LaurentSeries> gi;
    i64 Lgi = 0;
    if (nneg > 0) {
        try {
            gi = ser_invert(g, target ? target : std::optional<i64>(std::max<i64>(0, f.exact ? f.end() : f.hi)));
        } catch (const Error& e) {
            fail("SubstitutionDiverges", std::string("negative powers need an invertible series: ") + e.what());
        }
        Lgi = gi->low();
    }
    i64 tail = kInf;
    if (!f.exact) tail = f.hi >= 0 ? f.hi * d : std::min<i64>(0, -f.hi * Lgi);
    i64 H;
    if (target) H = *target;
    else if (!f.exact) H = tail;
    else if (g.exact && (nneg == 0 || gi->exact)) H = kInf;
    else {
        i64 fe = f.end();
        H = fe >= 0 ? fe * d : fe * 1;
    }
    H = std::min(H, tail);
    if (gi && !gi->exact && H < kInf) {
        i64 need = H - (nneg - 1) * Lgi;
        if (need > gi->top()) gi = ser_invert(g, need);
    }
    int P = f.prec + f.shift;
    LaurentSeries acc = f.exact ? ser_zero(p, f.prec) : big_o(p, f.prec, H);
    acc.cert = f.cert;
    auto clip = [&](const LaurentSeries& s) { return H < kInf ? truncate(s, H) : s; };
    i64 fe = f.end();
    if (f.low() < fe) {
        // nonnegative powers
        LaurentSeries pw = ser_one(p, P);
        pw.cert = f.cert;
        LaurentSeries gg = with_cert(g, f.cert);
        for (i64 e = 0; e < fe; ++e) {
            if (e > 0) pw = clip(ser_mul(pw, gg));
            if (e < f.lo) continue;
            u64 a = f.raw(e);
            if (!a) continue;
            LaurentSeries term = pw;
            term.cert = f.cert;
            term = ser_mul(monomial_residue(f, a), term);
            acc = clip(ser_add(acc, term));
        }
        // negative powers
        if (f.lo < 0) {
            LaurentSeries q = with_cert(*gi, f.cert);
            LaurentSeries pwn = q;
            for (i64 e = -1; e >= f.lo; --e) {
                if (e < -1) pwn = clip(ser_mul(pwn, q));
                u64 a = f.raw(e);
                if (!a) continue;
                acc = clip(ser_add(acc, ser_mul(monomial_residue(f, a), pwn)));
            }
        }
    }
    if (H < kInf) acc = truncate(acc, H);
    return acc;
}

// ---------------------------------------------------------------- Frobenius and Gamma

// (1+T)^(p^c) - 1 = phi^c(T), exact
inline LaurentSeries phi_T(u64 p, int c, int prec) {
    return ser_sub(ser_pow(chi_one(p, prec), ipow(p, c)), ser_one(p, prec));
}

inline LaurentSeries frobenius_series(const LaurentSeries& f, int c) {
    if (c < 0) fail("PreconditionFailed", "Frobenius depth must be nonnegative");
    if (c == 0 || (f.is_zero() && f.exact)) return f;
    LaurentSeries g = phi_T(f.p, c, f.prec + f.shift);
    LaurentSeries r = ser_subst(f, g);
    r.cert = f.cert;
    return r;
}

// (1+T)^a0 - 1 modulo (p^P, T^W)
inline LaurentSeries one_plus_T_pow(u64 p, int P, u128 a0, i64 W) {
    u64 M = ipow(p, P);
    size_t w = size_t(std::max<i64>(W, 1));
    std::vector<u64> r{1 % M}, b{1 % M, 1 % M};
    while (a0) {
        if (a0 & 1) r = poly_mul(r, b, M, w);
        a0 >>= 1;
        if (a0) b = poly_mul(b, b, M, w);
    }
    r.resize(w, 0);
    r[0] = submod(r[0], 1 % M, M);
    LaurentSeries g;
    g.p = p; g.prec = P; g.lo = 0; g.exact = false; g.hi = i64(w);
    g.c = r;
    g.normalize();
    return g;
}

namespace detail {

// a0 is a p-adic unit known modulo p^avail
inline LaurentSeries gamma_impl(u128 a0, int avail, const LaurentSeries& f, std::optional<i64> target) {
    u64 p = f.p;
    if (a0 % p == 0) fail("NotAUnit", "gamma_a needs a in Z_p^x");
    i64 H = target ? *target : (f.exact ? f.end() : f.hi);
    if (f.is_zero() && f.exact) return f;
    i64 n = std::max<i64>(0, -f.low());
    if (!f.exact && f.hi < 0) n = std::max(n, -f.hi);
    i64 W = std::max<i64>(H + n + 2, 2);
    int P = f.prec + f.shift;
    int need = P + floor_log(p, u64(W));
    int Pg = P;
    if (avail < need) Pg = avail - floor_log(p, u64(W));
    if (Pg <= 0) fail("PrecisionExhausted", "gamma_a: exponent known to too few digits");
    u128 mod = 1;
    for (int i = 0; i < std::min(avail, need); ++i) mod *= p;
    LaurentSeries g = one_plus_T_pow(p, Pg, a0 % mod, W);
    LaurentSeries r = ser_subst(f, g, H);
    r.cert = f.cert;
    return r;
}

}  // namespace detail

inline LaurentSeries gamma_act(const PadicScalar& a, const LaurentSeries& f, std::optional<i64> target = std::nullopt) {
    if (a.zero || a.v != 0) fail("NotAUnit", "gamma_a needs a in Z_p^x");
    return detail::gamma_impl(a.u, a.N, f, target);
}

inline LaurentSeries gamma_act(i64 a, const LaurentSeries& f, std::optional<i64> target = std::nullopt) {
    if (a % i64(f.p) == 0) fail("NotAUnit", "gamma_a needs a in Z_p^x");
    if (a == 1) return target ? truncate(f, *target) : f;
    if (a > 0 && a <= 4096 && f.low() >= 0) {
        int P = f.prec + f.shift;
        LaurentSeries g = ser_sub(ser_pow(chi_one(f.p, P), u64(a)), ser_one(f.p, P));
        LaurentSeries r = ser_subst(f, g, target);
        r.cert = f.cert;
        return r;
    }
    // reduce a modulo a power of p large enough for every binomial coefficient used
    u128 mod = 1;
    int K = 0;
    while (K < 100 && mod <= ((u128)1 << 100)) { mod *= f.p; ++K; }
    i128 r = (i128)a % (i128)mod;
    if (r < 0) r += (i128)mod;
    return detail::gamma_impl(u128(r), K, f, target);
}

// ---------------------------------------------------------------- etale decomposition

namespace detail {

// F(T) -> coefficients of F(u - 1) in u
inline std::vector<u64> to_u_basis(const std::vector<u64>& a, u64 M) {
    std::vector<u64> r;
    for (size_t k = a.size(); k-- > 0;) {
        // r <- r * (u - 1) + a_k
        std::vector<u64> n(r.size() + 1, 0);
        for (size_t j = 0; j < r.size(); ++j) {
            n[j + 1] = addmod(n[j + 1], r[j], M);
            n[j] = submod(n[j], r[j], M);
        }
        n[0] = addmod(n[0], a[k] % M, M);
        r.swap(n);
    }
    return r;
}

// B(u) -> coefficients of B(1 + T) in T
inline std::vector<u64> from_u_basis(const std::vector<u64>& b, u64 M) {
    std::vector<u64> r;
    for (size_t k = b.size(); k-- > 0;) {
        std::vector<u64> n(r.size() + 1, 0);
        for (size_t j = 0; j < r.size(); ++j) {
            n[j + 1] = addmod(n[j + 1], r[j], M);
            n[j] = addmod(n[j], r[j], M);
        }
        n[0] = addmod(n[0], b[k] % M, M);
        r.swap(n);
    }
    return r;
}

struct Part {
    i64 lo;
    std::vector<u64> c;
};

// exact decomposition of the Laurent polynomial sum a[i] T^(lo+i) modulo M:
// T^-n = phi^c(T^-n) Q^n with Q = phi^c(T)/T, so f = phi^c(T^-n) * (Q^n T^n f)
inline std::vector<Part> decompose_residues(u64 p, int c, u64 M, i64 lo, const std::vector<u64>& a) {
    u64 q = ipow(p, c);
    i64 n = std::max<i64>(0, -lo);
    std::vector<u64> P(size_t(lo + n), 0);
    P.insert(P.end(), a.begin(), a.end());
    if (n > 0) {
        std::vector<u64> Q(q);
        // binom(q, k+1) mod M by Pascal on one row
        std::vector<u64> row{1 % M};
        for (u64 i = 1; i <= q; ++i) {
            std::vector<u64> nr(i + 1, 0);
            nr[0] = 1 % M;
            nr[i] = 1 % M;
            for (u64 j = 1; j < i; ++j) nr[j] = addmod(row[j - 1], row[j], M);
            row.swap(nr);
        }
        for (u64 k = 0; k < q; ++k) Q[k] = row[k + 1];
        for (i64 i = 0; i < n; ++i) P = poly_mul(P, Q, M);
    }
    std::vector<u64> b = to_u_basis(P, M);
    std::vector<Part> out(q);
    for (u64 i = 0; i < q; ++i) {
        std::vector<u64> bi;
        for (size_t j = i; j < b.size(); j += q) bi.push_back(b[j]);
        out[i].lo = -n;
        out[i].c = from_u_basis(bi, M);
    }
    return out;
}

// lowest exponents of the components of T^h u^j, minimised over j < p^c
inline std::vector<i64> decompose_tail_bound(u64 p, int c, int P, i64 h) {
    static std::mutex mu;
    static std::map<std::tuple<u64, int, int, i64>, std::vector<i64>> cache;
    auto key = std::make_tuple(p, c, P, h);
    {
        std::lock_guard<std::mutex> lk(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    u64 q = ipow(p, c);
    u64 M = ipow(p, P);
    std::vector<i64> best(q, kInf);
    std::vector<u64> uj{1 % M};
    for (u64 j = 0; j < q; ++j) {
        auto parts = decompose_residues(p, c, M, h, uj);
        for (u64 i = 0; i < q; ++i) {
            const auto& v = parts[i].c;
            for (size_t k = 0; k < v.size(); ++k)
                if (v[k]) { best[i] = std::min(best[i], parts[i].lo + i64(k)); break; }
        }
        uj = poly_mul(uj, {1 % M, 1 % M}, M);
    }
    std::lock_guard<std::mutex> lk(mu);
    cache[key] = best;
    return best;
}

}  // namespace detail

// f = sum_i (1+T)^i phi^c(r_i), i < p^c
inline std::vector<LaurentSeries> etale_decompose(const LaurentSeries& f, int c) {
    if (c < 0) fail("PreconditionFailed", "decomposition depth must be nonnegative");
    u64 q = ipow(f.p, c);
    if (c == 0) return {f};
    std::vector<LaurentSeries> out(q);
    u64 M = f.modulus();
    std::vector<detail::Part> parts;
    if (f.is_zero()) parts.assign(q, detail::Part{0, {}});
    else parts = detail::decompose_residues(f.p, c, M, f.lo, f.c);
    std::vector<i64> bound;
    if (!f.exact) bound = detail::decompose_tail_bound(f.p, c, f.prec + f.shift, f.hi);
    for (u64 i = 0; i < q; ++i) {
        LaurentSeries r;
        r.p = f.p; r.prec = f.prec; r.shift = f.shift; r.cert = f.cert;
        r.lo = parts[i].lo;
        r.c = parts[i].c;
        r.exact = true;
        r.normalize();
        if (!f.exact) {
            if (bound[i] >= kInf) {
                // the tail has no component here at this precision
                r = truncate(r, std::max(r.end(), f.hi));
            } else {
                r = truncate(r, bound[i]);
            }
            if (r.exact) { r.exact = false; r.hi = std::max(r.end(), f.hi); }
        }
        out[i] = r;
    }
    return out;
}

inline LaurentSeries etale_recombine(const std::vector<LaurentSeries>& parts, int c) {
    if (parts.empty()) fail("PreconditionFailed", "no parts to recombine");
    u64 p = parts[0].p;
    u64 q = ipow(p, c);
    if (parts.size() != q) fail("PreconditionFailed", "expected p^c parts");
    int P = 0;
    for (auto& r : parts) P = std::max(P, r.prec + r.shift);
    LaurentSeries acc = ser_zero(p, parts[0].prec);
    acc.prec = parts[0].prec;
    for (auto& r : parts) acc.prec = std::max(acc.prec, r.prec);
    acc.cert = parts[0].cert;
    LaurentSeries ui = ser_one(p, P);
    LaurentSeries u = chi_one(p, P);
    u.cert = Cert{CertClass::Iwasawa, std::nullopt};  // a polynomial, so it joins with every class
    for (u64 i = 0; i < q; ++i) {
        if (i > 0) ui = ser_mul(ui, u);
        ui.cert = parts[i].cert;
        acc = ser_add(acc, ser_mul(ui, frobenius_series(parts[i], c)));
    }
    return acc;
}

}  // namespace phigamma

#endif
