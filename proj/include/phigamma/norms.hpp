#ifndef PHIGAMMA_NORMS_HPP
#define PHIGAMMA_NORMS_HPP

#include <boost/multiprecision/cpp_int.hpp>
#include <string>
#include <vector>

#include "phigamma/distalg.hpp"
#include "phigamma/skewring.hpp"

namespace phigamma {

// All norms are exact: a value p^(-e) is stored through its exponent e.  The
// rho-norm of sum d_k b^k is max |d_k| rho^|k| with |k| the total degree and
// every b_beta weighted alike; eps_p is taken to be 1 for all p.
constexpr int kEpsP = 1;

// ---------------------------------------------------------------- spectral norms

struct NormEval {
    NormValue value;
    NormValue tail;  // the largest value the unknown part could contribute
    bool window_limited = false;
};

namespace detail {

inline NormValue exp_value(i64 v, const RhoExponent& rho, i64 deg) { return NormValue::of_exp(Rat(v) + rho.e * Rat(deg)); }

inline void norm_level_ok(const DistElt& x) {
    if (x.L != 0) fail("PreconditionFailed", "norms read exact coordinates; use level 0");
}

}  // namespace detail

inline NormEval norm_eval(const DistElt& x, const RhoExponent& rho) {
    if (!x.mono) fail("PreconditionFailed", "monomial coordinates not materialized");
    const MonoCoords& m = *x.mono;
    NormEval out;
    for (size_t i = 0; i < m.c.size(); ++i) {
        if (!m.c[i]) continue;
        Coords k = m.exps(i);
        i64 deg = -x.neg;
        for (auto v : k) deg += v;
        out.value = norm_max(out.value, detail::exp_value(val_int(m.c[i], x.p), rho, deg));
    }
    // coefficients are known mod p^N, down to total degree -neg
    out.tail = detail::exp_value(x.N, rho, -x.neg);
    if (!m.complete) {
        int lowest = m.box[0];
        for (int b : m.box) lowest = std::min(lowest, b);
        NormValue w = detail::exp_value(0, rho, i64(lowest) + 1 - x.neg);
        if (out.tail < w) out.window_limited = true;
        out.tail = norm_max(out.tail, w);
    }
    return out;
}

// requires the maximum to be attained inside the window
inline NormValue spectral_norm(const DistElt& x, const RhoExponent& rho) {
    auto ev = norm_eval(x, rho);
    if (!(ev.tail < ev.value))
        fail("WindowInsufficient", std::string(ev.window_limited ? "monomial window" : "coefficient precision") +
                                       " could dominate the norm at rho = p^(-" + rho.e.str() + ")");
    return ev.value;
}

inline NormValue spectral_norm(const DistElt& x, const RhoExponent& rho1, const RhoExponent& rho2) {
    return norm_max(spectral_norm(x, rho1), spectral_norm(x, rho2));
}

// Materialize monomials with a growing window until the norm is certified.
inline NormValue dist_norm(const DistElt& x, const RhoExponent& rho, size_t max_cells = size_t(1) << 23) {
    detail::norm_level_ok(x);
    if (dist_is_zero(x)) return NormValue::zero();
    DistElt y = dist_convert(x, Rep::Monomial);
    while (true) {
        auto ev = norm_eval(y, rho);
        if (ev.tail < ev.value) return ev.value;
        if (!ev.window_limited) fail("WindowInsufficient", "coefficient precision could dominate the norm");
        std::vector<int> box = y.mono->box;
        size_t cells = 1;
        for (auto& b : box) { b = 2 * b + 1; cells *= size_t(b + 1); }
        if (cells > max_cells) fail("WindowInsufficient", "window growth exceeded the cell budget");
        y = dist_convert(x, Rep::Monomial, box);
    }
}

// ---------------------------------------------------------------- phi_t(b_beta)

// max_{0 <= j <= m} rho^(p^j) p^(j - m) with m = val_p(beta(t))
inline NormValue phi_t_norm_closed(const RootDatum& D, int beta, const TorusElt& t, const RhoExponent& rho) {
    if (!in_Tplus(D, t)) fail("NotInTPlus", "t is not in T+");
    i64 m = root_m(D, beta, t);
    u64 p = t.d[0].p;
    NormValue best = NormValue::zero();
    i64 pj = 1;
    for (i64 j = 0; j <= m; ++j) {
        best = norm_max(best, NormValue::of_exp(rho.e * Rat(pj) + Rat(m - j)));
        pj *= i64(p);
    }
    return best;
}

// brute force: expand (1 + b_beta)^(beta(t)) - 1 and take the max
inline NormValue phi_t_norm_brute(const RootDatum& D, int beta, const TorusElt& t, const RhoExponent& rho, int N = 12) {
    u64 p = t.d[0].p;
    auto b = dist_b(D, p, 0, N, beta);
    return dist_norm(dist_phi_t(t, b), rho);
}

// ---------------------------------------------------------------- q_t norm

inline i64 sandwich_exponent(const RootDatum& D, const TorusElt& t) {
    i64 s = 0;
    u64 p = t.d[0].p;
    for (size_t r = 0; r < D.roots.size(); ++r) s += i64(ipow(p, int(root_m(D, int(r), t)))) - 1;
    return s;
}

struct QtReport {
    NormValue q;
    NormValue rho_norm;
    NormValue upper;          // rho^(-S) ||x||_rho
    bool left = false;        // ||x||_rho <= q
    bool right = false;       // q <= upper
    size_t maximal = 0;       // components attaining q
    size_t components = 0;    // nonzero components
};

// ||sum_n n phi_t(x_n)|| := max_n ||phi_t(x_n)||_rho
inline NormValue qt_norm(const DistElt& x, const TorusElt& t, const RhoExponent& rho, size_t* maximal = nullptr,
                         size_t* components = nullptr) {
    detail::norm_level_ok(x);
    auto comps = dist_coset_decompose(x, t);
    NormValue q = NormValue::zero();
    std::vector<NormValue> vals;
    for (auto& [u, xn] : comps) {
        if (dist_is_zero(xn)) continue;
        vals.push_back(dist_norm(dist_phi_t(t, xn), rho));
        q = norm_max(q, vals.back());
    }
    if (maximal) *maximal = size_t(std::count(vals.begin(), vals.end(), q));
    if (components) *components = vals.size();
    return q;
}

inline QtReport qt_sandwich(const DistElt& x, const TorusElt& t, const RhoExponent& rho) {
    QtReport r;
    r.q = qt_norm(x, t, rho, &r.maximal, &r.components);
    r.rho_norm = dist_norm(x, rho);
    r.upper = norm_mul(NormValue::of_exp(-rho.e * Rat(sandwich_exponent(x.D, t))), r.rho_norm);
    r.left = r.rho_norm <= r.q;
    r.right = r.q <= r.upper;
    return r;
}

// ---------------------------------------------------------------- convergence regions

// {rho2 < |b_alpha| < 1, |b_beta| <= |b_alpha|^r}
struct Region {
    RhoExponent rho2;
    i64 r = 1;
};

// a covers b: every series converging on b's annulus converges on a's, i.e.
// a's annulus sits inside b's
inline bool region_covers(const Region& a, const Region& b) { return a.r >= b.r && a.rho2.e <= b.rho2.e; }

inline Region region_of_t(const RootDatum& D, const TorusElt& t, const RhoExponent& rho2) {
    if (!in_Tplus(D, t)) fail("NotInTPlus", "t is not in T+");
    u64 p = t.d[0].p;
    Region g;
    g.rho2 = rho2;
    for (size_t b = 0; b < D.roots.size(); ++b) g.r = std::max<i64>(g.r, i64(ipow(p, int(root_m(D, int(b), t)))) + 1);
    return g;
}

// t = s_abar^k with k the least integer beating log r / m(beta, s_abar) for every beta != alpha
inline TorusElt t_of_region(const RootDatum& D, u64 p, const Region& reg) {
    if (reg.r < 1) fail("PreconditionFailed", "region exponent r must be >= 1");
    TorusElt sb = s_bar(D, p);
    i64 k = 1;
    for (size_t b = 0; b < D.roots.size(); ++b) {
        if (int(b) == D.alpha) continue;
        i64 m = root_m(D, int(b), sb);
        i64 j = 0;
        while (u128(ipow(p, int((j + 1) * m))) <= u128(reg.r)) ++j;
        k = std::max(k, j + 1);
    }
    return torus_pow(sb, k);
}

// inner radius for the converse: max(rho2, p^(-|beta(t)|)) over beta != alpha
inline RhoExponent region_rho0(const RootDatum& D, const TorusElt& t, const Region& reg) {
    Rat e = reg.rho2.e;
    u64 p = t.d[0].p;
    for (size_t b = 0; b < D.roots.size(); ++b) {
        if (int(b) == D.alpha) continue;
        e = std::min(e, Rat(1, i64(ipow(p, int(root_m(D, int(b), t))))));
    }
    return RhoExponent(e);
}

// ---------------------------------------------------------------- coefficient classes

enum class CoeffClass { Integral, Bounded, General };

inline const char* coeff_class_name(CoeffClass c) {
    switch (c) {
        case CoeffClass::Integral: return "integral";
        case CoeffClass::Bounded: return "bounded";
        case CoeffClass::General: return "general";
    }
    return "?";
}

struct CoeffClassReport {
    CoeffClass cls = CoeffClass::Integral;
    Coords witness;
    PadicScalar coeff;
};

// Valuation profile by shells of absolute degree.  Divergence cannot be decided
// from a window, so "general" means the minimum drops strictly over the last
// three nonempty shells and is reached at the outermost one.
inline CoeffClassReport coeff_class_check(const std::map<Coords, PadicScalar>& c) {
    CoeffClassReport rep;
    std::map<i64, std::pair<i64, Coords>> shell;
    bool first = true;
    i64 vmin = 0;
    for (auto& [k, s] : c) {
        if (s.zero) continue;
        i64 d = 0;
        for (auto v : k) d += v < 0 ? -v : v;
        auto it = shell.find(d);
        if (it == shell.end() || s.v < it->second.first) shell[d] = {s.v, k};
        if (first || s.v < vmin) { vmin = s.v; rep.witness = k; rep.coeff = s; first = false; }
    }
    if (first || vmin >= 0) { rep.cls = CoeffClass::Integral; return rep; }
    rep.cls = CoeffClass::Bounded;
    if (shell.size() >= 3) {
        auto it = shell.rbegin();
        i64 v0 = it->second.first;
        i64 v1 = (++it)->second.first;
        i64 v2 = (++it)->second.first;
        if (v0 == vmin && v0 < v1 && v1 < v2) rep.cls = CoeffClass::General;
    }
    return rep;
}

inline std::map<Coords, PadicScalar> mono_scalars(const DistElt& x) {
    std::map<Coords, PadicScalar> out;
    for (auto& [k, r] : mono_terms(x)) out.emplace(k, PadicScalar::from_residue(x.p, r, x.N));
    return out;
}

// ---------------------------------------------------------------- reduction to the skew ring

// g = h n_alpha(x) with h in N_1 goes to (1+T)^x (iota(x)^-1 h iota(x)) mod H_l;
// b_alpha^-j goes to T^-j on the right.  Finite support keeps the image
// overconvergent.
inline SkewElt pi_H_map(const DistElt& x, int l, i64 W = 32) {
    detail::norm_level_ok(x);
    auto q = quotient_spec(x.D.n, x.p, l);
    Cert od{CertClass::OEdagger, std::nullopt};
    SkewElt out = skew_zero(q, x.N, od);
    for (auto& [c, a] : x.g) {
        SkewElt t = x.D.n == 2 ? chi_k_embed(q, c[0], 0, 0, x.N, W) : chi_k_embed(q, c[2], c[1], c[0], x.N, W);
        for (auto& [h, f] : t.terms) skew_put(out, h, with_cert(ser_scale(f, i64(a)), od));
    }
    if (x.neg) {
        if (W < 1) fail("WindowInsufficient", "no window for b_alpha^-j");
        out = skew_mul(out, skew_term(q, {0, 0}, with_cert(monomial(x.p, x.N, -x.neg), od)));
    }
    out.cert = od;
    for (auto& [h, f] : out.terms) f.cert = od;
    return out;
}

inline bool skew_all_certified(const SkewElt& x, CertClass cls) {
    if (x.cert.cls != cls) return false;
    for (auto& [h, f] : x.terms)
        if (f.cert.cls != cls) return false;
    return true;
}

// ---------------------------------------------------------------- log division

using BigRat = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline i64 big_val(const BigRat& x, u64 p) {
    if (x == 0) return kInf;
    BigInt n = boost::multiprecision::numerator(x), d = boost::multiprecision::denominator(x);
    i64 v = 0;
    while (n % p == 0) { n /= p; ++v; }
    while (d % p == 0) { d /= p; --v; }
    return v;
}

struct LogDivisionReport {
    u64 p = 2;
    int r = 0;
    int m_beta = 1;
    std::vector<BigRat> c;        // q = sum c_i b^i, i <= M
    std::vector<i64> val;
    bool bound_ok = true;
    int first_violation = -1;
    bool identity_ok = true;      // phi^r(log) = p^(r m) log through degree M
};

// q = trunc(log(1+b)) / phi^r(b) with phi^r(b) = (1+b)^(p^(r m)) - 1; the
// numerator runs to degree M+1 so that c_0..c_M are those of the true quotient.
inline LogDivisionReport log_division_check(u64 p, int r, int M, int N, int m_beta = 1) {
    if (N < 1 || M < 0 || r < 0) fail("PreconditionFailed", "log division needs N >= 1, M >= 0, r >= 0");
    if (M > 4096 || r * m_beta > 12) fail("PrecisionExhausted", "log division window too large");
    LogDivisionReport rep;
    rep.p = p; rep.r = r; rep.m_beta = m_beta;
    BigInt e = 1;
    for (int i = 0; i < r * m_beta; ++i) e *= p;
    size_t K = size_t(M) + 2;
    std::vector<BigRat> lg(K, 0);
    for (size_t i = 1; i < K; ++i) lg[i] = BigRat(i % 2 ? 1 : -1, BigInt(i));
    // phi^r(b) / b
    std::vector<BigRat> d;
    {
        BigInt bin = 1;
        for (BigInt i = 1; i <= e && d.size() < K; ++i) {
            bin = bin * (e - i + 1) / i;
            d.push_back(BigRat(bin));
        }
    }
    for (int i = 0; i <= M; ++i) {
        BigRat s = lg[size_t(i) + 1];
        for (int j = 0; j < i; ++j)
            if (size_t(i - j) < d.size()) s -= rep.c[size_t(j)] * d[size_t(i - j)];
        rep.c.push_back(s / d[0]);
        i64 v = big_val(rep.c.back(), p);
        rep.val.push_back(v);
        i64 bound = -i64(r) * m_beta - ceil_log(p, u64(i) + 1);
        if (v < bound && rep.bound_ok) { rep.bound_ok = false; rep.first_violation = i; }
    }
    // phi^r(trunc log) against p^(r m) trunc log through degree M: substitute b -> phi^r(b)
    std::vector<BigRat> phib(size_t(M) + 1, 0);
    for (size_t i = 0; i < d.size() && i + 1 <= size_t(M); ++i) phib[i + 1] = d[i];
    std::vector<BigRat> acc(size_t(M) + 1, 0), pw(size_t(M) + 1, 0);
    pw[0] = 1;
    for (int i = 1; i <= M; ++i) {
        std::vector<BigRat> nx(size_t(M) + 1, 0);
        for (int a = 0; a <= M; ++a)
            if (pw[size_t(a)] != 0)
                for (int b = 1; a + b <= M; ++b) nx[size_t(a + b)] += pw[size_t(a)] * phib[size_t(b)];
        pw = nx;
        for (int a = 0; a <= M; ++a) acc[size_t(a)] += lg[size_t(i)] * pw[size_t(a)];
    }
    for (int a = 1; a <= M; ++a)
        if (acc[size_t(a)] != BigRat(e) * lg[size_t(a)]) rep.identity_ok = false;
    return rep;
}

// ---------------------------------------------------------------- witness tables

struct WitnessRow {
    i64 n = 0;
    NormValue plain;        // ||b_beta^n b_alpha^-n||_rho
    NormValue transported;  // ||phi_t(b_beta^n b_alpha^-n)||_rho
};

struct WitnessTable {
    std::vector<WitnessRow> rows;
    std::string plain_verdict;
    std::string transported_verdict;
};

// Terms b_beta^n b_alpha^-n for the non-simple root beta.  b_beta and b_alpha
// commute, so both norms live on a commutative two-variable Gauss norm and the
// transported one is ||phi_t(b_beta)^n|| / ||phi_t(b_alpha)^n||, each expanded
// in full.
inline WitnessTable witness_series_ex(const RootDatum& D, u64 p, i64 n_max, const TorusElt& t, const RhoExponent& rho) {
    if (D.simple.size() == D.roots.size()) fail("PreconditionFailed", "every positive root is simple");
    int beta = -1;
    for (size_t r = 0; r < D.roots.size(); ++r)
        if (D.deg(int(r)) > 1) { beta = int(r); break; }
    // precision: enough digits to certify the smallest expected value
    Rat need = phi_t_norm_closed(D, beta, t, rho).e * Rat(n_max) + Rat(4);
    int cap = 0;
    while (ipow(p, cap + 1) < kModulusCap / p) ++cap;
    int N = int(std::min<i64>(cap, need.floor() + 2));
    WitnessTable tab;
    auto bb = dist_phi_t(t, dist_b(D, p, 0, N, beta));
    auto ba = dist_phi_t(t, dist_b(D, p, 0, N, D.alpha));
    auto pb = dist_const(D, p, 0, N, 1), pa = pb;
    for (i64 n = 1; n <= n_max; ++n) {
        pb = dist_mul(pb, bb);
        pa = dist_mul(pa, ba);
        WitnessRow row;
        row.n = n;
        Coords k = root_coords(D, beta, n);
        k[size_t(D.alpha)] = -n;
        row.plain = spectral_norm(dist_convert(dist_from_monomials(D, p, 0, N, {{k, 1}}), Rep::Monomial), rho);
        row.transported = norm_mul(dist_norm(pb, rho), norm_inv(dist_norm(pa, rho)));
        tab.rows.push_back(row);
    }
    bool all_one = true;
    for (auto& r : tab.rows) all_one = all_one && r.plain == NormValue::one();
    tab.plain_verdict = all_one ? "not null" : "undetermined";
    bool geometric = tab.rows.size() >= 2;
    for (size_t i = 1; i < tab.rows.size(); ++i) {
        NormValue ratio = norm_mul(tab.rows[i].transported, norm_inv(tab.rows[i - 1].transported));
        NormValue first = norm_mul(tab.rows[1].transported, norm_inv(tab.rows[0].transported));
        if (!(ratio == first) || !(ratio < NormValue::one())) geometric = false;
    }
    tab.transported_verdict = geometric ? "null geometric" : "undetermined";
    return tab;
}

}  // namespace phigamma

#endif
