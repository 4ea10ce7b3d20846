#ifndef PHIGAMMA_DISTALG_HPP
#define PHIGAMMA_DISTALG_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "phigamma/groups.hpp"

namespace phigamma {

// Truncated distribution algebra of N_0 for GL_2 and GL_3.
//
// The engine is the group algebra Z/p^N[N_0(Z/p^L)]; L = 0 stands for the
// untruncated lattice N_0(Z), which the norm layer uses so that Mahler
// expansions see honest integer coordinates.  Group elements are keyed by
// their product coordinates c in the fixed root order (gamma < beta < alpha),
// g = n_gamma(c_0) n_beta(c_1) n_alpha(c_2); for n <= 3 these are the matrix
// entries.  Monomials b^k = b_gamma^k0 b_beta^k1 b_alpha^k2 use the same order.

using Coords = std::vector<i64>;

// Dense b^k coefficients over the box 0 <= k_r <= box[r], residues mod p^N.
struct MonoCoords {
    std::vector<int> box;
    bool complete = true;  // false: the expansion continues past the box
    std::vector<u64> c;

    size_t size() const {
        size_t s = 1;
        for (int b : box) s *= size_t(b + 1);
        return s;
    }
    size_t index(const Coords& k) const {
        size_t i = 0;
        for (size_t r = 0; r < box.size(); ++r) i = i * size_t(box[r] + 1) + size_t(k[r]);
        return i;
    }
    Coords exps(size_t i) const {
        Coords k(box.size());
        for (size_t r = box.size(); r-- > 0;) {
            k[r] = i64(i % size_t(box[r] + 1));
            i /= size_t(box[r] + 1);
        }
        return k;
    }
    bool in_box(const Coords& k) const {
        for (size_t r = 0; r < box.size(); ++r)
            if (k[r] < 0 || k[r] > box[r]) return false;
        return true;
    }
};

// Sum of a_c delta_c, times b_alpha^(-neg) on the right (microlocal pairs).
struct DistElt {
    RootDatum D;
    u64 p = 3;
    int L = 1;
    int N = 1;
    i64 neg = 0;
    std::map<Coords, u64> g;
    std::optional<MonoCoords> mono;

    u64 modulus() const { return ipow(p, N); }
    size_t rank() const { return D.roots.size(); }
};

enum class Rep { Group, Monomial };

namespace detail {

inline void dist_group_ok(const RootDatum& D) {
    if (D.n != 2 && D.n != 3) fail("PreconditionFailed", "distribution algebra is built for GL_2 and GL_3");
}

inline Coords reduce_coords(Coords c, u64 p, int L) {
    if (L == 0) return c;
    u64 M = ipow(p, L);
    for (auto& x : c) x = i64(reduce(x, M));
    return c;
}

inline void accumulate(std::map<Coords, u64>& m, const Coords& c, u64 a, u64 mod) {
    if (a % mod == 0) return;
    auto it = m.find(c);
    if (it == m.end()) { m.emplace(c, a % mod); return; }
    it->second = addmod(it->second, a % mod, mod);
    if (it->second == 0) m.erase(it);
}

inline void same_algebra(const DistElt& x, const DistElt& y) {
    if (x.p != y.p || x.D.n != y.D.n) fail("PrimeMismatch", "distributions over different groups");
    if (x.L != y.L) fail("LevelOverflow", "distributions at different levels");
    if (x.N != y.N) fail("PreconditionFailed", "distributions at different precisions");
}

// binom(c, k) mod m for c in [c0, c1] and 0 <= k <= K, row c - c0
inline std::vector<std::vector<u64>> binom_table(i64 c0, i64 c1, int K, u64 m) {
    size_t W = size_t(K) + 1;
    i64 hi = std::max<i64>(c1, 0), lo = std::min<i64>(c0, 0);
    std::vector<std::vector<u64>> t(size_t(hi - lo + 1), std::vector<u64>(W, 0));
    auto row = [&](i64 c) -> std::vector<u64>& { return t[size_t(c - lo)]; };
    row(0)[0] = 1 % m;
    for (i64 c = 1; c <= hi; ++c)
        for (size_t k = 0; k < W; ++k) row(c)[k] = addmod(row(c - 1)[k], k ? row(c - 1)[k - 1] : 0, m);
    // binom(c-1, k) = binom(c, k) - binom(c-1, k-1)
    for (i64 c = 0; c > lo; --c)
        for (size_t k = 0; k < W; ++k) row(c - 1)[k] = submod(row(c)[k], k ? row(c - 1)[k - 1] : 0, m);
    return std::vector<std::vector<u64>>(t.begin() + (c0 - lo), t.begin() + (c1 - lo + 1));
}

// contract axis a of a row-major tensor against K (dims[a] x e)
inline std::vector<u64> contract_axis(const std::vector<u64>& T, std::vector<size_t>& dims, size_t a,
                                      const std::vector<std::vector<u64>>& K, size_t e, u64 m) {
    size_t outer = 1, inner = 1;
    for (size_t r = 0; r < a; ++r) outer *= dims[r];
    for (size_t r = a + 1; r < dims.size(); ++r) inner *= dims[r];
    size_t d = dims[a];
    std::vector<u64> out(outer * e * inner, 0);
    for (size_t o = 0; o < outer; ++o)
        for (size_t c = 0; c < d; ++c) {
            const u64* src = &T[(o * d + c) * inner];
            bool any = false;
            for (size_t l = 0; l < inner && !any; ++l) any = src[l] != 0;
            if (!any) continue;
            for (size_t j = 0; j < e; ++j) {
                u64 kc = K[c][j];
                if (!kc) continue;
                u64* dst = &out[(o * e + j) * inner];
                for (size_t l = 0; l < inner; ++l)
                    if (src[l]) dst[l] = addmod(dst[l], mulmod(src[l], kc, m), m);
            }
        }
    dims[a] = e;
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------- construction

inline Coords coords_of(const RootDatum& D, const UnitriangularElt& g) {
    Coords c;
    for (size_t r = 0; r < D.roots.size(); ++r) c.push_back(g.coord(D, int(r)));
    return c;
}

inline UnitriangularElt elt_of(const RootDatum& D, const Coords& c, u64 p, int L) {
    detail::dist_group_ok(D);
    UnitriangularElt g = unit_identity(p, L, D.n);
    for (size_t r = 0; r < D.roots.size(); ++r) g.at(D.roots[r].first, D.roots[r].second) = c[r];
    g.normalize();
    return g;
}

inline DistElt dist_zero(const RootDatum& D, u64 p, int L, int N) {
    detail::dist_group_ok(D);
    if (L < 0 || N < 1) fail("PreconditionFailed", "level must be >= 0 and precision >= 1");
    ipow(p, N);
    DistElt x;
    x.D = D; x.p = p; x.L = L; x.N = N;
    return x;
}

inline DistElt dist_delta(const RootDatum& D, u64 p, int L, int N, const Coords& c, i64 a = 1) {
    DistElt x = dist_zero(D, p, L, N);
    detail::accumulate(x.g, detail::reduce_coords(c, p, L), reduce(a, x.modulus()), x.modulus());
    return x;
}

inline DistElt dist_const(const RootDatum& D, u64 p, int L, int N, i64 a) {
    return dist_delta(D, p, L, N, Coords(D.roots.size(), 0), a);
}

inline Coords root_coords(const RootDatum& D, int r, i64 x) {
    Coords c(D.roots.size(), 0);
    c[size_t(r)] = x;
    return c;
}

// ---------------------------------------------------------------- linear structure

inline DistElt dist_mul(const DistElt& x, const DistElt& y);
inline DistElt dist_b(const RootDatum& D, u64 p, int L, int N, int r);

inline DistElt dist_add(const DistElt& x, const DistElt& y) {
    detail::same_algebra(x, y);
    if (x.neg != y.neg) {
        // P b^-j = (P b_alpha^(j'-j)) b^-j'
        const DistElt& s = x.neg < y.neg ? x : y;
        DistElt t = s;
        t.neg = 0;
        t.mono.reset();
        DistElt ba = dist_b(x.D, x.p, x.L, x.N, x.D.alpha);
        for (i64 i = s.neg; i < std::max(x.neg, y.neg); ++i) t = dist_mul(t, ba);
        t.neg = std::max(x.neg, y.neg);
        return x.neg < y.neg ? dist_add(t, y) : dist_add(x, t);
    }
    DistElt r = x;
    r.mono.reset();
    for (auto& [c, a] : y.g) detail::accumulate(r.g, c, a, r.modulus());
    return r;
}

inline DistElt dist_scale(const DistElt& x, i64 a) {
    DistElt r = x;
    r.mono.reset();
    r.g.clear();
    u64 M = x.modulus(), s = reduce(a, M);
    for (auto& [c, v] : x.g) detail::accumulate(r.g, c, mulmod(v, s, M), M);
    return r;
}

inline DistElt dist_neg(const DistElt& x) { return dist_scale(x, -1); }
inline DistElt dist_sub(const DistElt& x, const DistElt& y) { return dist_add(x, dist_neg(y)); }
inline bool dist_is_zero(const DistElt& x) { return x.g.empty(); }
inline bool dist_equal(const DistElt& x, const DistElt& y) {
    detail::same_algebra(x, y);
    return x.neg == y.neg && x.g == y.g;
}

// ---------------------------------------------------------------- convolution

inline bool alpha_sector(const DistElt& y) {
    for (auto& [c, a] : y.g)
        for (size_t r = 0; r < c.size(); ++r)
            if (int(r) != y.D.alpha && c[r] != 0) return false;
    return true;
}

inline DistElt dist_mul(const DistElt& x, const DistElt& y) {
    detail::same_algebra(x, y);
    // P b^-j Q b^-j' needs b_alpha^-j to pass Q, which only holds inside the alpha sector
    if (x.neg != 0 && !alpha_sector(y))
        fail("PreconditionFailed", "left factor carries b_alpha^-j and the right factor leaves the alpha sector");
    DistElt r = dist_zero(x.D, x.p, x.L, x.N);
    r.neg = x.neg + y.neg;
    u64 M = x.modulus();
    for (auto& [c1, a1] : x.g) {
        auto g1 = elt_of(x.D, c1, x.p, x.L);
        for (auto& [c2, a2] : y.g)
            detail::accumulate(r.g, coords_of(x.D, grp_mul(g1, elt_of(x.D, c2, x.p, x.L))), mulmod(a1, a2, M), M);
    }
    return r;
}

// b_r = n_r(1) - 1
inline DistElt dist_b(const RootDatum& D, u64 p, int L, int N, int r) {
    return dist_sub(dist_delta(D, p, L, N, root_coords(D, r, 1)), dist_const(D, p, L, N, 1));
}

// b_alpha^(-j) as a microlocal pair
inline DistElt dist_b_alpha_inv(const RootDatum& D, u64 p, int L, int N, i64 j) {
    DistElt x = dist_const(D, p, L, N, 1);
    x.neg = j;
    return x;
}

inline DistElt operator+(const DistElt& a, const DistElt& b) { return dist_add(a, b); }
inline DistElt operator-(const DistElt& a, const DistElt& b) { return dist_sub(a, b); }
inline DistElt operator*(const DistElt& a, const DistElt& b) { return dist_mul(a, b); }

// ---------------------------------------------------------------- Mahler transform

// group -> monomials: delta_c = prod_r (1 + b_r)^(c_r) = sum_k prod_r binom(c_r, k_r) b^k
inline MonoCoords mahler_transform(const DistElt& x, std::optional<std::vector<int>> box = std::nullopt) {
    size_t R = x.rank();
    u64 M = x.modulus();
    Coords lo(R, 0), hi(R, 0);
    for (auto& [c, a] : x.g)
        for (size_t r = 0; r < R; ++r) { lo[r] = std::min(lo[r], c[r]); hi[r] = std::max(hi[r], c[r]); }
    MonoCoords out;
    if (box) {
        if (box->size() != R) fail("PreconditionFailed", "box has the wrong rank");
        out.box = *box;
    } else {
        for (size_t r = 0; r < R; ++r) {
            i64 b = lo[r] < 0 ? 2 * (hi[r] - lo[r]) + 8 : hi[r];
            out.box.push_back(int(b));
        }
    }
    out.complete = true;
    for (size_t r = 0; r < R; ++r)
        if (lo[r] < 0 || hi[r] > out.box[r]) out.complete = false;
    std::vector<size_t> dims;
    for (size_t r = 0; r < R; ++r) dims.push_back(size_t(hi[r] - lo[r] + 1));
    std::vector<u64> T(1, 0);
    {
        size_t s = 1;
        for (auto d : dims) s *= d;
        T.assign(s, 0);
    }
    for (auto& [c, a] : x.g) {
        size_t i = 0;
        for (size_t r = 0; r < R; ++r) i = i * dims[r] + size_t(c[r] - lo[r]);
        T[i] = addmod(T[i], a, M);
    }
    for (size_t r = 0; r < R; ++r) {
        auto K = detail::binom_table(lo[r], hi[r], out.box[r], M);
        T = detail::contract_axis(T, dims, r, K, size_t(out.box[r]) + 1, M);
    }
    out.c = std::move(T);
    return out;
}

// monomials -> group: b^k = prod_r (n_r - 1)^(k_r) = sum_{c <= k} prod_r (-1)^(k_r - c_r) binom(k_r, c_r) delta_c
inline std::map<Coords, u64> inverse_mahler(const MonoCoords& m, u64 p, int L, u64 M) {
    size_t R = m.box.size();
    std::vector<size_t> dims;
    for (int b : m.box) dims.push_back(size_t(b) + 1);
    std::vector<u64> T = m.c;
    for (size_t r = 0; r < R; ++r) {
        auto B = detail::binom_table(0, m.box[r], m.box[r], M);
        // K[k][c] = (-1)^(k-c) binom(k, c)
        std::vector<std::vector<u64>> K(B.size(), std::vector<u64>(B.size(), 0));
        for (size_t k = 0; k < B.size(); ++k)
            for (size_t c = 0; c <= k; ++c) K[k][c] = (k - c) % 2 ? submod(0, B[k][c], M) : B[k][c];
        T = detail::contract_axis(T, dims, r, K, dims[r], M);
    }
    std::map<Coords, u64> g;
    MonoCoords shape{m.box, true, {}};
    for (size_t i = 0; i < T.size(); ++i)
        if (T[i]) detail::accumulate(g, detail::reduce_coords(shape.exps(i), p, L), T[i], M);
    return g;
}

// ---------------------------------------------------------------- certification

// Do the monomials b^k with 0 <= k_r <= M have independent images in
// Z/p^N[N_0(Z/p^L)]?  A map of free Z/p^N-modules is injective iff it is so
// mod p, so elimination runs over F_p; N is carried for the report only.
inline bool rank_check(const RootDatum& D, u64 p, int L, int M, int N) {
    (void)N;
    detail::dist_group_ok(D);
    size_t R = D.roots.size();
    u64 side = L ? ipow(p, L) : u64(M) + 1;
    auto B = detail::binom_table(0, M, M, p);
    MonoCoords shape;
    shape.box.assign(R, M);
    std::unordered_map<u64, std::map<u64, u64>> pivots;
    size_t total = shape.size();
    for (size_t i = 0; i < total; ++i) {
        Coords k = shape.exps(i);
        std::map<u64, u64> col;
        // enumerate c <= k
        Coords c(R, 0);
        while (true) {
            u64 coef = 1, key = 0;
            for (size_t r = 0; r < R; ++r) {
                u64 b = B[size_t(k[r])][size_t(c[r])];
                if ((k[r] - c[r]) % 2) b = submod(0, b, p);
                coef = mulmod(coef, b, p);
                key = key * side + (L ? u64(c[r]) % side : u64(c[r]));
            }
            if (coef) {
                u64& e = col[key];
                e = addmod(e, coef, p);
                if (!e) col.erase(key);
            }
            size_t r = R;
            while (r-- > 0) {
                if (c[r] < k[r]) { ++c[r]; break; }
                c[r] = 0;
            }
            if (r == size_t(-1)) break;
        }
        while (true) {
            if (col.empty()) return false;
            auto [lead, lc] = *col.rbegin();
            auto it = pivots.find(lead);
            if (it == pivots.end()) {
                u64 inv = invmod(lc, p);
                for (auto& [kk, v] : col) v = mulmod(v, inv, p);
                pivots.emplace(lead, std::move(col));
                break;
            }
            for (auto& [kk, v] : it->second) {
                u64& e = col[kk];
                e = submod(e, mulmod(lc, v, p), p);
                if (!e) col.erase(kk);
            }
        }
    }
    return true;
}

// starting guess for the level; never trusted without rank_check
inline int default_level(u64 p, int M, int N) { return N + (M > 1 ? ceil_log(p, u64(M)) : 0) + 1; }

inline int max_box(const MonoCoords& m) {
    int b = 0;
    for (int x : m.box) b = std::max(b, x);
    return b;
}

// Build from monomial coefficients; the alpha exponent may be negative.
inline DistElt dist_from_monomials(const RootDatum& D, u64 p, int L, int N, const std::map<Coords, i64>& coeffs) {
    DistElt x = dist_zero(D, p, L, N);
    size_t R = D.roots.size();
    size_t a = size_t(D.alpha);
    for (auto& [k, v] : coeffs) {
        if (k.size() != R) fail("ParseError", "exponent vector has the wrong rank");
        for (size_t r = 0; r < R; ++r)
            if (r != a && k[r] < 0) fail("ParseError", "negative exponent outside the alpha variable");
        x.neg = std::max<i64>(x.neg, -k[a]);
    }
    MonoCoords m;
    m.box.assign(R, 0);
    for (auto& [k, v] : coeffs)
        for (size_t r = 0; r < R; ++r) m.box[r] = std::max<int>(m.box[r], int(k[r] + (r == a ? x.neg : 0)));
    m.c.assign(m.size(), 0);
    u64 Mod = x.modulus();
    for (auto& [k, v] : coeffs) {
        Coords kk = k;
        kk[a] += x.neg;
        auto& e = m.c[m.index(kk)];
        e = addmod(e, reduce(v, Mod), Mod);
    }
    if (L > 0 && !rank_check(D, p, L, max_box(m), N))
        fail("CertificationFailed", "monomials up to degree " + std::to_string(max_box(m)) + " are not independent at level " +
                                        std::to_string(L));
    x.g = inverse_mahler(m, p, L, Mod);
    x.mono = m;
    return x;
}

inline DistElt dist_convert(const DistElt& x, Rep direction, std::optional<std::vector<int>> box = std::nullopt) {
    DistElt r = x;
    if (direction == Rep::Monomial) {
        r.mono = mahler_transform(x, box);
        if (x.L > 0 && !rank_check(x.D, x.p, x.L, max_box(*r.mono), x.N))
            fail("CertificationFailed", "monomial window exceeds the level");
        return r;
    }
    if (!x.mono) return r;
    if (!x.mono->complete) fail("CertificationFailed", "monomial coordinates are truncated; the group vector is not determined");
    if (x.L > 0 && !rank_check(x.D, x.p, x.L, max_box(*x.mono), x.N))
        fail("CertificationFailed", "monomial window exceeds the level");
    r.g = inverse_mahler(*x.mono, x.p, x.L, x.modulus());
    return r;
}

// coefficient of b^k (true alpha exponent) from the cached monomial coordinates
inline PadicScalar mono_coeff(const DistElt& x, Coords k) {
    if (!x.mono) fail("PreconditionFailed", "monomial coordinates not materialized");
    k[size_t(x.D.alpha)] += x.neg;
    if (!x.mono->in_box(k)) {
        for (auto v : k)
            if (v < 0) return PadicScalar::zero_at(x.p, x.N);
        if (!x.mono->complete) fail("WindowInsufficient", "exponent outside the certified window");
        return PadicScalar::zero_at(x.p, x.N);
    }
    return PadicScalar::from_residue(x.p, x.mono->c[x.mono->index(k)], x.N);
}

// sparse view: true exponent -> residue
inline std::map<Coords, u64> mono_terms(const DistElt& x) {
    if (!x.mono) fail("PreconditionFailed", "monomial coordinates not materialized");
    std::map<Coords, u64> out;
    for (size_t i = 0; i < x.mono->c.size(); ++i)
        if (x.mono->c[i]) {
            Coords k = x.mono->exps(i);
            k[size_t(x.D.alpha)] -= x.neg;
            out.emplace(k, x.mono->c[i]);
        }
    return out;
}

// ---------------------------------------------------------------- phi_t transport

inline bool alpha_fixed(const RootDatum& D, const TorusElt& t) {
    auto rv = root_eval(D, D.alpha, t);
    return rv.m == 0 && rv.value.u == 1;
}

inline DistElt dist_phi_t(const TorusElt& t, const DistElt& x) {
    if (!in_Tplus(x.D, t)) fail("NotInTPlus", "phi_t needs t in T+");
    if (x.neg && !alpha_fixed(x.D, t))
        fail("PreconditionFailed", "phi_t(b_alpha)^-1 is not a monomial unless alpha(t) = 1");
    DistElt r = dist_zero(x.D, x.p, x.L, x.N);
    r.neg = x.neg;
    for (auto& [c, a] : x.g)
        detail::accumulate(r.g, coords_of(x.D, phi_t_group(x.D, t, elt_of(x.D, c, x.p, x.L))), a, x.modulus());
    return r;
}

// ---------------------------------------------------------------- coset decomposition

// m(r, t) per root; root values must be exact powers of p
inline std::vector<int> pure_root_m(const RootDatum& D, const TorusElt& t) {
    if (!in_Tplus(D, t)) fail("NotInTPlus", "t is not in T+");
    std::vector<int> m;
    for (size_t r = 0; r < D.roots.size(); ++r) {
        auto rv = root_eval(D, int(r), t);
        if (rv.value.u != 1) fail("PreconditionFailed", "coset decomposition needs root values p^m");
        m.push_back(int(rv.m));
    }
    return m;
}

// J(N_0/phi_t(N_0)): digit representatives n_gamma(d0) n_beta(d1) n_alpha(d2), d_r < p^m_r
inline std::vector<Coords> dist_coset_reps(const RootDatum& D, const TorusElt& t, u64 p, int L) {
    auto m = pure_root_m(D, t);
    LatticeSubgroup H, K;
    H.e.assign(D.roots.size(), 0);
    K.e.assign(m.begin(), m.end());
    std::vector<Coords> out;
    for (auto& u : coset_reps(D, H, K, p, L)) out.push_back(coords_of(D, u));
    return out;
}

// x = sum_n n * phi_t(x_n); components at the same level with canonical preimages
inline std::map<Coords, DistElt> dist_coset_decompose(const DistElt& x, const TorusElt& t) {
    auto m = pure_root_m(x.D, t);
    for (int v : m)
        if (x.L > 0 && v >= x.L) fail("CertificationFailed", "phi_t(N_0) is trivial at this level");
    if (x.neg && !alpha_fixed(x.D, t))
        fail("CertificationFailed", "b_alpha^-j does not factor through phi_t unless alpha(t) = 1");
    auto reps = dist_coset_reps(x.D, t, x.p, x.L);
    LatticeSubgroup K;
    K.e.assign(m.begin(), m.end());
    std::map<Coords, DistElt> out;
    std::vector<UnitriangularElt> rep_inv;
    for (auto& u : reps) {
        DistElt z = dist_zero(x.D, x.p, x.L, x.N);
        z.neg = x.neg;
        out.emplace(u, z);
        rep_inv.push_back(grp_inv(elt_of(x.D, u, x.p, x.L)));
    }
    for (auto& [c, a] : x.g) {
        auto g = elt_of(x.D, c, x.p, x.L);
        bool found = false;
        for (size_t i = 0; i < reps.size() && !found; ++i) {
            auto h = grp_mul(rep_inv[i], g);
            if (!in_lattice(x.D, K, h)) continue;
            Coords hc = coords_of(x.D, h);
            for (size_t r = 0; r < hc.size(); ++r) hc[r] /= i64(ipow(x.p, m[r]));
            detail::accumulate(out.at(reps[i]).g, hc, a, x.modulus());
            found = true;
        }
        if (!found) fail("CertificationFailed", "no coset representative matched");
    }
    return out;
}

inline DistElt dist_coset_recombine(const RootDatum& D, const TorusElt& t, const std::map<Coords, DistElt>& comps) {
    if (comps.empty()) fail("PreconditionFailed", "no components");
    const DistElt& any = comps.begin()->second;
    DistElt r = dist_zero(D, any.p, any.L, any.N);
    r.neg = any.neg;
    for (auto& [u, xn] : comps) r = dist_add(r, dist_mul(dist_delta(D, xn.p, xn.L, xn.N, u), dist_phi_t(t, xn)));
    return r;
}

}  // namespace phigamma

#endif
