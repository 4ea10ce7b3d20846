#ifndef PHIGAMMA_GROUPS_HPP
#define PHIGAMMA_GROUPS_HPP

#include <algorithm>
#include <array>
#include <functional>
#include <set>
#include <utility>
#include <vector>

#include "series.hpp"

namespace phigamma {

// ---------------------------------------------------------------- root data

// GL_n with xi(x) = diag(x^(n-1), ..., 1).  Positive roots e_i - e_j (i < j,
// 0-based) are listed in ascending order: larger degree first, alpha = e_0 - e_1 last.
struct RootDatum {
    int n = 3;
    std::vector<std::pair<int, int>> roots;
    std::vector<int> simple;  // indices into roots
    std::vector<int> xi;      // exponents n-1, ..., 0
    int alpha = 0;            // index of the distinguished simple root

    int deg(int r) const { return roots[size_t(r)].second - roots[size_t(r)].first; }
    int index(int i, int j) const {
        for (size_t r = 0; r < roots.size(); ++r)
            if (roots[r].first == i && roots[r].second == j) return int(r);
        fail("PreconditionFailed", "no such root");
    }
};

inline RootDatum root_datum(int n) {
    if (n < 2) fail("PreconditionFailed", "root datum needs n >= 2");
    RootDatum d;
    d.n = n;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) d.roots.push_back({i, j});
    std::sort(d.roots.begin(), d.roots.end(), [](auto a, auto b) {
        int ma = a.second - a.first, mb = b.second - b.first;
        if (ma != mb) return ma > mb;
        return a.first > b.first;
    });
    for (size_t r = 0; r < d.roots.size(); ++r)
        if (d.deg(int(r)) == 1) d.simple.push_back(int(r));
    for (int i = 0; i < n; ++i) d.xi.push_back(n - 1 - i);
    d.alpha = d.index(0, 1);
    return d;
}

// GL_3 root indices in the ascending order [gamma, beta, alpha]
constexpr int kGamma = 0, kBeta = 1, kAlpha = 2;

// ---------------------------------------------------------------- torus

struct TorusElt {
    std::vector<PadicScalar> d;
};

constexpr int kTorusPrec = 30;

inline TorusElt torus_from_vals(u64 p, const std::vector<i64>& vals, int N = kTorusPrec) {
    TorusElt t;
    for (i64 v : vals) {
        auto s = PadicScalar::from_int(p, 1, N);
        s.v = v;
        t.d.push_back(s);
    }
    return t;
}

inline TorusElt torus_mul(const TorusElt& a, const TorusElt& b) {
    TorusElt t;
    for (size_t i = 0; i < a.d.size(); ++i) t.d.push_back(a.d[i] * b.d[i]);
    return t;
}

inline TorusElt torus_inv(const TorusElt& a) {
    TorusElt t;
    for (auto& x : a.d) t.d.push_back(PadicScalar::from_int(x.p, 1, x.N) / x);
    return t;
}

inline TorusElt torus_pow(const TorusElt& a, i64 k) {
    TorusElt r = torus_from_vals(a.d[0].p, std::vector<i64>(a.d.size(), 0));
    TorusElt b = k >= 0 ? a : torus_inv(a);
    for (i64 i = 0; i < (k >= 0 ? k : -k); ++i) r = torus_mul(r, b);
    return r;
}

inline std::vector<i64> torus_vals(const TorusElt& t) {
    std::vector<i64> v;
    for (auto& x : t.d) v.push_back(x.v);
    return v;
}

// s = xi(p)
inline TorusElt s_elt(const RootDatum& D, u64 p) {
    std::vector<i64> v(D.xi.begin(), D.xi.end());
    return torus_from_vals(p, v);
}

// xi(a) for a unit a
inline TorusElt xi_elt(const RootDatum& D, const PadicScalar& a) {
    TorusElt t;
    for (int e : D.xi) {
        PadicScalar x = PadicScalar::from_int(a.p, 1, a.N);
        for (int i = 0; i < e; ++i) x = x * a;
        t.d.push_back(x);
    }
    return t;
}

// s_abar: |alpha| = 1 and |beta| < 1 for the other simple roots
inline TorusElt s_bar(const RootDatum& D, u64 p) {
    std::vector<i64> v(size_t(D.n), 0);
    for (int i = 2; i < D.n; ++i) v[size_t(i)] = -(i - 1);
    return torus_from_vals(p, v);
}

struct RootValue {
    PadicScalar value;
    i64 m = 0;
};

inline RootValue root_eval(const RootDatum& D, int r, const TorusElt& t) {
    auto [i, j] = D.roots[size_t(r)];
    RootValue rv;
    rv.value = t.d[size_t(i)] / t.d[size_t(j)];
    rv.m = rv.value.v;
    return rv;
}

inline i64 root_m(const RootDatum& D, int r, const TorusElt& t) {
    auto [i, j] = D.roots[size_t(r)];
    return t.d[size_t(i)].v - t.d[size_t(j)].v;
}

inline bool in_Tplus(const RootDatum& D, const TorusElt& t) {
    for (int r : D.simple)
        if (root_m(D, r, t) < 0) return false;
    return true;
}

// t1 <=_alpha t2  iff  m(beta, t2/t1) >= m(alpha, t2/t1) >= 0 for all positive beta
inline bool leq_alpha(const RootDatum& D, const TorusElt& t1, const TorusElt& t2) {
    TorusElt u = torus_mul(t2, torus_inv(t1));
    i64 ma = root_m(D, D.alpha, u);
    if (ma < 0) return false;
    for (size_t r = 0; r < D.roots.size(); ++r)
        if (root_m(D, int(r), u) < ma) return false;
    return true;
}

inline TorusElt upper_bound(const RootDatum& D, TorusElt t1, TorusElt t2) {
    if (!in_Tplus(D, t1) || !in_Tplus(D, t2)) fail("NotInTPlus", "upper bound needs elements of T+");
    if (root_m(D, D.alpha, t1) < root_m(D, D.alpha, t2)) std::swap(t1, t2);
    TorusElt sb = s_bar(D, t1.d[0].p);
    TorusElt cand = t1;
    for (int k = 0; k < 100000; ++k) {
        if (leq_alpha(D, t2, cand) && leq_alpha(D, t1, cand)) return cand;
        cand = torus_mul(cand, sb);
    }
    fail("PreconditionFailed", "upper bound search did not terminate");
}

// ---------------------------------------------------------------- unitriangular groups

// Upper unitriangular n x n matrices over Z/p^L (L = 0: over Z).
struct UnitriangularElt {
    u64 p = 2;
    int L = 0;
    int n = 3;
    std::vector<i64> a;  // row-major n*n

    i64 at(int i, int j) const { return a[size_t(i * n + j)]; }
    i64& at(int i, int j) { return a[size_t(i * n + j)]; }
    i64 coord(const RootDatum& D, int r) const { return at(D.roots[size_t(r)].first, D.roots[size_t(r)].second); }

    // GL_3 coordinates: x = a12 (alpha), y = a23 (beta), z = a13 (gamma)
    i64 x() const { return at(0, 1); }
    i64 y() const { return at(1, 2); }
    i64 z() const { return at(0, 2); }

    void normalize() {
        if (L == 0) return;
        u64 M = ipow(p, L);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) at(i, j) = i64(reduce(at(i, j), M));
    }
};

inline bool operator==(const UnitriangularElt& g, const UnitriangularElt& h) {
    return g.p == h.p && g.L == h.L && g.n == h.n && g.a == h.a;
}
inline bool operator<(const UnitriangularElt& g, const UnitriangularElt& h) { return g.a < h.a; }

inline UnitriangularElt unit_identity(u64 p, int L, int n) {
    UnitriangularElt g;
    g.p = p; g.L = L; g.n = n;
    g.a.assign(size_t(n * n), 0);
    for (int i = 0; i < n; ++i) g.at(i, i) = 1;
    return g;
}

inline UnitriangularElt n_root(const RootDatum& D, int r, i64 x, u64 p, int L) {
    UnitriangularElt g = unit_identity(p, L, D.n);
    g.at(D.roots[size_t(r)].first, D.roots[size_t(r)].second) = x;
    g.normalize();
    return g;
}

// GL_3 element with matrix coordinates (x, y, z) = n_gamma(z) n_beta(y) n_alpha(x)
inline UnitriangularElt heis(i64 x, i64 y, i64 z, u64 p, int L) {
    UnitriangularElt g = unit_identity(p, L, 3);
    g.at(0, 1) = x; g.at(1, 2) = y; g.at(0, 2) = z;
    g.normalize();
    return g;
}

inline UnitriangularElt grp_mul(const UnitriangularElt& g, const UnitriangularElt& h) {
    if (g.n != h.n || g.L != h.L || g.p != h.p) fail("PreconditionFailed", "group elements at different levels");
    UnitriangularElt r = unit_identity(g.p, g.L, g.n);
    int n = g.n;
    u64 M = g.L ? ipow(g.p, g.L) : 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            i128 s = 0;
            for (int k = i; k <= j; ++k) s += (i128)g.at(i, k) * h.at(k, j);
            if (M) s %= (i128)M;
            r.at(i, j) = i64(s);
        }
    r.normalize();
    return r;
}

inline UnitriangularElt grp_inv(const UnitriangularElt& g) {
    // back substitution for the inverse of a unitriangular matrix
    int n = g.n;
    UnitriangularElt r = unit_identity(g.p, g.L, n);
    u64 M = g.L ? ipow(g.p, g.L) : 0;
    for (int j = 0; j < n; ++j)
        for (int i = j - 1; i >= 0; --i) {
            i128 s = 0;
            for (int k = i + 1; k <= j; ++k) s += (i128)g.at(i, k) * r.at(k, j);
            s = -s;
            if (M) s %= (i128)M;
            r.at(i, j) = i64(s);
        }
    r.normalize();
    return r;
}

inline UnitriangularElt grp_conj(const UnitriangularElt& g, const UnitriangularElt& h) {
    return grp_mul(grp_mul(grp_inv(g), h), g);  // g^-1 h g
}

// phi_t: x_beta -> beta(t) x_beta
inline UnitriangularElt phi_t_group(const RootDatum& D, const TorusElt& t, const UnitriangularElt& g) {
    if (!in_Tplus(D, t)) fail("NotInTPlus", "phi_t needs t in T+");
    UnitriangularElt r = g;
    for (size_t k = 0; k < D.roots.size(); ++k) {
        auto rv = root_eval(D, int(k), t);
        auto [i, j] = D.roots[k];
        if (g.L == 0) {
            // exact coordinates only admit integral root values p^m
            if (rv.value.u != 1) fail("PreconditionFailed", "exact coordinates need root values p^m");
            i64 s = 1;
            for (i64 q = 0; q < rv.m; ++q) s *= i64(g.p);
            r.at(i, j) = g.at(i, j) * s;
        } else {
            if (rv.m >= g.L && g.at(i, j) != 0) fail("LevelOverflow", "valuation shift exceeds the group level");
            u64 M = ipow(g.p, g.L);
            u64 sc = rv.value.residue(g.L);
            r.at(i, j) = i64(mulmod(reduce(g.at(i, j), M), sc, M));
        }
    }
    return r;
}

inline i64 ell(const RootDatum& D, const UnitriangularElt& g) { return g.coord(D, D.alpha); }
inline UnitriangularElt iota(const RootDatum& D, i64 x, u64 p, int L) { return n_root(D, D.alpha, x, p, L); }

// ---------------------------------------------------------------- finite quotients

// H_1/H_k for GL_3: (Z/p^(k-1))^2 with coordinates (y, z)
struct QuotientSpec {
    int n = 3;
    u64 p = 2;
    int k = 1;
    int c = 0;       // conjugation exponent c_k
    u64 order = 1;   // |H_1/H_k|
    u64 mod = 1;     // p^(k-1) for GL_3
    bool trivial() const { return order == 1; }
};

inline QuotientSpec quotient_spec(int n, u64 p, int k) {
    if (k < 1) fail("PreconditionFailed", "quotient level must be >= 1");
    QuotientSpec q;
    q.n = n; q.p = p; q.k = k;
    if (n == 2 || k == 1) return q;
    if (n != 3) fail("PreconditionFailed", "closed-form quotients exist for GL_2 and GL_3 only");
    q.c = k - 1;
    q.mod = ipow(p, k - 1);
    q.order = q.mod * q.mod;
    return q;
}

// Normal closure of phi^(k-1)(H_1) in N_0 modulo the congruence level L, by
// saturation: conjugate generators until stable, then close under products.
inline std::set<UnitriangularElt> normal_closure_saturation(const RootDatum& D, u64 p, int k, int L) {
    TorusElt s = s_elt(D, p);
    std::vector<UnitriangularElt> gens;
    for (size_t r = 0; r < D.roots.size(); ++r) {
        if (int(r) == D.alpha) continue;
        UnitriangularElt g = n_root(D, int(r), 1, p, L);
        for (int i = 0; i < k - 1; ++i) g = phi_t_group(D, s, g);
        gens.push_back(g);
    }
    std::vector<UnitriangularElt> conj_by;
    for (size_t r = 0; r < D.roots.size(); ++r) {
        if (D.deg(int(r)) != 1) continue;
        conj_by.push_back(n_root(D, int(r), 1, p, L));
        conj_by.push_back(n_root(D, int(r), -1, p, L));
    }
    std::set<UnitriangularElt> gset(gens.begin(), gens.end());
    for (bool grew = true; grew;) {
        grew = false;
        std::vector<UnitriangularElt> cur(gset.begin(), gset.end());
        for (auto& g : cur)
            for (auto& c : conj_by)
                if (gset.insert(grp_conj(c, g)).second) grew = true;
    }
    std::set<UnitriangularElt> H{unit_identity(p, L, D.n)};
    std::vector<UnitriangularElt> queue{unit_identity(p, L, D.n)};
    while (!queue.empty()) {
        auto h = queue.back();
        queue.pop_back();
        for (auto& g : gset) {
            auto x = grp_mul(h, g);
            if (H.insert(x).second) queue.push_back(x);
        }
    }
    return H;
}

// closed form: H_k = {n_beta(p^(k-1) a) n_gamma(p^(k-1) b)}
inline bool in_Hk_closed(const UnitriangularElt& g, int k) {
    u64 m = ipow(g.p, k - 1);
    u64 M = g.L ? ipow(g.p, g.L) : 0;
    auto divisible = [&](i64 v) {
        if (M) v = i64(reduce(v, M));
        return v % i64(m) == 0;
    };
    if (g.L && m >= M) return g.x() == 0 && g.y() == 0 && g.z() == 0;
    return g.x() == 0 && divisible(g.y()) && divisible(g.z());
}

// ---------------------------------------------------------------- coset representatives

// Subgroups of N_0 cut out coordinatewise: x_beta in p^e[beta] Z_p (e = kNoCoord: x_beta = 0).
constexpr int kNoCoord = 1 << 20;

struct LatticeSubgroup {
    std::vector<int> e;  // per root, in the datum's order
};

// canonical digit representatives n_{r_0}(d_0) ... n_{r_last}(d_last) (ascending
// root order, so for GL_3 the product is n_gamma n_beta n_alpha); H must contain K
inline std::vector<UnitriangularElt> coset_reps(const RootDatum& D, const LatticeSubgroup& H, const LatticeSubgroup& K,
                                                u64 p, int L, bool right = false) {
    std::vector<std::vector<i64>> digits(D.roots.size());
    for (size_t r = 0; r < D.roots.size(); ++r) {
        int h = H.e[r], k = K.e[r];
        if (k < h) fail("PreconditionFailed", "K is not contained in H");
        if (h >= kNoCoord) { digits[r] = {0}; continue; }
        if (k >= kNoCoord) fail("PreconditionFailed", "infinite index");
        i64 step = i64(ipow(p, h));
        for (u64 j = 0; j < ipow(p, k - h); ++j) digits[r].push_back(i64(j) * step);
    }
    std::vector<UnitriangularElt> out;
    std::vector<size_t> idx(D.roots.size(), 0);
    while (true) {
        UnitriangularElt g = unit_identity(p, L, D.n);
        for (size_t r = 0; r < D.roots.size(); ++r) {
            auto f = n_root(D, int(r), digits[r][idx[r]], p, L);
            g = right ? grp_mul(f, g) : grp_mul(g, f);
        }
        out.push_back(g);
        size_t r = 0;
        while (r < idx.size() && ++idx[r] == digits[r].size()) idx[r++] = 0;
        if (r == idx.size()) break;
    }
    return out;
}

inline bool in_lattice(const RootDatum& D, const LatticeSubgroup& K, const UnitriangularElt& g) {
    u64 M = g.L ? ipow(g.p, g.L) : 0;
    for (size_t r = 0; r < D.roots.size(); ++r) {
        i64 v = g.coord(D, int(r));
        if (M) v = i64(reduce(v, M));
        if (K.e[r] >= kNoCoord) {
            if (v != 0) return false;
            continue;
        }
        if (M && ipow(g.p, std::min(K.e[r], g.L)) >= M) {
            if (v != 0) return false;
            continue;
        }
        if (v % i64(ipow(g.p, K.e[r])) != 0) return false;
    }
    return true;
}

// brute-force oracle: every element of H (mod level L) lies in exactly one coset gK (or Kg)
inline bool is_transversal(const RootDatum& D, const std::vector<UnitriangularElt>& reps, const LatticeSubgroup& H,
                           const LatticeSubgroup& K, u64 p, int L, bool right = false) {
    // enumerate H mod level L through its digit vectors
    LatticeSubgroup top;
    top.e.assign(D.roots.size(), L);
    for (size_t r = 0; r < D.roots.size(); ++r)
        if (H.e[r] >= kNoCoord) top.e[r] = kNoCoord;
    auto elems = coset_reps(D, H, top, p, L);
    for (auto& h : elems) {
        int hits = 0;
        for (auto& g : reps) {
            auto q = right ? grp_mul(h, grp_inv(g)) : grp_mul(grp_inv(g), h);
            if (in_lattice(D, K, q)) ++hits;
        }
        if (hits != 1) return false;
    }
    return true;
}

// ---------------------------------------------------------------- H_1/H_k arithmetic (GL_3)

// element n_beta(y) n_gamma(z) of H_1/H_k, reduced modulo p^(k-1)
struct HKey {
    u64 y = 0;
    u64 z = 0;
    friend bool operator<(const HKey& a, const HKey& b) { return a.y != b.y ? a.y < b.y : a.z < b.z; }
    friend bool operator==(const HKey& a, const HKey& b) { return a.y == b.y && a.z == b.z; }
};

inline HKey hkey(const QuotientSpec& q, i64 y, i64 z) { return {reduce(y, q.mod), reduce(z, q.mod)}; }
inline HKey hmul(const QuotientSpec& q, HKey a, HKey b) { return {addmod(a.y, b.y, q.mod), addmod(a.z, b.z, q.mod)}; }
inline HKey hinv(const QuotientSpec& q, HKey a) { return {submod(0, a.y, q.mod), submod(0, a.z, q.mod)}; }

// iota(i)^-1 h iota(i) = (y, z - i y)
inline HKey conj_iota(const QuotientSpec& q, i64 i, HKey h) {
    return {h.y, submod(h.z, mulmod(reduce(i, q.mod), h.y, q.mod), q.mod)};
}

// phi(y, z) = (p y, p^2 z)
inline HKey phi_key(const QuotientSpec& q, HKey h) {
    return {mulmod(h.y, q.p % q.mod, q.mod), mulmod(h.z, (q.p * q.p) % q.mod, q.mod)};
}

inline std::vector<HKey> all_keys(const QuotientSpec& q) {
    std::vector<HKey> v;
    for (u64 y = 0; y < q.mod; ++y)
        for (u64 z = 0; z < q.mod; ++z) v.push_back({y, z});
    return v;
}

// h = phi(u) v with v in {n_beta(a) n_gamma(b) : a < p, b < p^2}; u canonical
inline std::pair<HKey, HKey> factor_phi(const QuotientSpec& q, HKey h) {
    u64 p = q.p;
    HKey v{h.y % p, h.z % (p * p)};
    if (v.y >= q.mod) v.y %= q.mod;
    if (v.z >= q.mod) v.z %= q.mod;
    HKey u{(h.y - v.y) / p, (h.z - v.z) / (p * p)};
    u64 my = q.k >= 2 ? ipow(p, std::max(q.k - 2, 0)) : 1;
    u64 mz = ipow(p, std::max(q.k - 3, 0));
    u.y %= my;
    u.z %= mz;
    return {u, v};
}

// ---------------------------------------------------------------- T+ acting on series

// alpha(t) = p^m u acts as gamma_u o phi^m
inline LaurentSeries tplus_act_series(const RootDatum& D, const TorusElt& t, const LaurentSeries& f,
                                      std::optional<i64> target = std::nullopt) {
    if (!in_Tplus(D, t)) fail("NotInTPlus", "t is not in T+");
    auto rv = root_eval(D, D.alpha, t);
    if (rv.value.zero) fail("NotInTPlus", "alpha(t) is zero at precision");
    LaurentSeries g = frobenius_series(f, int(rv.m));
    PadicScalar u = rv.value;
    u.v = 0;
    if (u.u == 1) return target ? truncate(g, *target) : g;
    return gamma_act(u, g, target);
}

}  // namespace phigamma

#endif
