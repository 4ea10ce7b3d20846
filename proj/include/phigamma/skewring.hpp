#ifndef PHIGAMMA_SKEWRING_HPP
#define PHIGAMMA_SKEWRING_HPP

#include <map>

#include "phigamma/groups.hpp"

namespace phigamma {

// Element of R[H_1/H_k, ell, iota] for GL_2 (trivial quotient) or GL_3.
// Keys are canonical (y, z) residues of n_beta(y) n_gamma(z) modulo H_k;
// an absent key means zero.
struct SkewElt {
    QuotientSpec q;
    int prec = 1;   // coefficient precision used for freshly created zeros
    Cert cert;
    std::map<HKey, LaurentSeries> terms;

    u64 p() const { return q.p; }
    int level() const { return q.k; }
};

inline SkewElt skew_zero(const QuotientSpec& q, int prec, Cert cert = {}) {
    SkewElt x;
    x.q = q; x.prec = prec; x.cert = cert;
    return x;
}

inline void skew_put(SkewElt& x, HKey h, const LaurentSeries& r) {
    auto it = x.terms.find(h);
    LaurentSeries v = it == x.terms.end() ? r : ser_add(it->second, r);
    if (v.exact && v.is_zero()) {
        if (it != x.terms.end()) x.terms.erase(it);
        return;
    }
    x.terms[h] = v;
}

inline SkewElt skew_term(const QuotientSpec& q, HKey h, const LaurentSeries& r) {
    SkewElt x = skew_zero(q, r.prec, r.cert);
    skew_put(x, hkey(q, i64(h.y), i64(h.z)), r);
    return x;
}

inline SkewElt skew_one(const QuotientSpec& q, int prec, Cert cert = {}) {
    return skew_term(q, {0, 0}, with_cert(ser_one(q.p, prec), cert));
}

// 1 * h
inline SkewElt skew_group(const QuotientSpec& q, HKey h, int prec, Cert cert = {}) {
    return skew_term(q, h, with_cert(ser_one(q.p, prec), cert));
}

inline void same_ring(const SkewElt& x, const SkewElt& y) {
    if (x.q.p != y.q.p) fail("PrimeMismatch", "skew elements over different primes");
    if (x.q.k != y.q.k || x.q.n != y.q.n) fail("PreconditionFailed", "skew elements at different levels");
}

inline SkewElt skew_add(const SkewElt& x, const SkewElt& y) {
    same_ring(x, y);
    SkewElt r = x;
    r.prec = std::max(x.prec, y.prec);
    for (auto& [h, f] : y.terms) skew_put(r, h, f);
    return r;
}

inline SkewElt skew_neg(const SkewElt& x) {
    SkewElt r = x;
    for (auto& [h, f] : r.terms) f = ser_neg(f);
    return r;
}

inline SkewElt skew_sub(const SkewElt& x, const SkewElt& y) { return skew_add(x, skew_neg(y)); }

// left multiplication by a coefficient: r (r2 h2) = (r r2) h2
inline SkewElt skew_lmul(const LaurentSeries& r, const SkewElt& x) {
    SkewElt out = skew_zero(x.q, x.prec, x.cert);
    for (auto& [h, f] : x.terms) skew_put(out, h, ser_mul(r, f));
    return out;
}

// (1+T)^i for i >= 0 as an exact polynomial
inline LaurentSeries chi_pow(u64 p, int prec, u64 i) { return ser_pow(chi_one(p, prec), i); }

// (1+T)^i for any integer; negative powers are truncated at T^W
inline LaurentSeries chi_int(u64 p, int prec, i64 i, i64 W) {
    if (i >= 0) return chi_pow(p, prec, u64(i));
    return ser_invert(chi_pow(p, prec, u64(-i)), W);
}

namespace detail {

// pieces (1+T)^i phi^c(r_i) of r, i < p^c
inline std::vector<LaurentSeries> expand_pieces(const LaurentSeries& r, int c) {
    if (c == 0) return {r};
    auto parts = etale_decompose(r, c);
    std::vector<LaurentSeries> out;
    out.reserve(parts.size());
    LaurentSeries ui = ser_one(r.p, r.prec + r.shift);
    LaurentSeries u = chi_one(r.p, r.prec + r.shift);
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) ui = ser_mul(ui, u);
        out.push_back(ser_mul(with_cert(ui, r.cert), frobenius_series(parts[i], c)));
    }
    return out;
}

}  // namespace detail

namespace detail {

inline bool same_cert(const Cert& a, const Cert& b) { return a.cls == b.cls && a.radius == b.radius; }

// all coefficients exact, integral and at one precision and class
inline bool dense_eligible(const std::vector<const LaurentSeries*>& fs) {
    if (fs.empty()) return false;
    const LaurentSeries& f0 = *fs[0];
    for (auto* f : fs)
        if (!f->exact || f->shift != 0 || f->prec != f0.prec || !same_cert(f->cert, f0.cert)) return false;
    return true;
}

// Accumulates products of exact integral series straight into residue buffers,
// one per output key, reducing only when the u64 headroom runs out.
struct DenseAccumulator {
    u64 M = 1;
    u64 headroom = 0;   // products that fit on top of a reduced value
    i64 lo = 0;
    size_t len = 0;
    std::map<HKey, std::pair<std::vector<u64>, u64>> buf;  // residues, pending products

    DenseAccumulator(u64 M_, i64 lo_, size_t len_) : M(M_), lo(lo_), len(len_) {
        u128 sq = (u128)(M - 1) * (M - 1);
        headroom = sq == 0 ? u64(-1) : u64(((((u128)1 << 64) - 1) - (M - 1)) / sq);
    }

    bool fits(size_t conv_len) const { return headroom >= conv_len; }

    void add(HKey key, const LaurentSeries& a, const LaurentSeries& b) {
        auto& [v, pending] = buf[key];
        if (v.empty()) v.assign(len, 0);
        u64 add_n = std::min(a.c.size(), b.c.size());
        if (pending + add_n > headroom) {
            for (auto& e : v) e %= M;
            pending = 0;
        }
        pending += add_n;
        u64* out = v.data() + (a.lo + b.lo - lo);
        for (size_t i = 0; i < a.c.size(); ++i) {
            u64 xi = a.c[i];
            if (!xi) continue;
            u64* o = out + i;
            const u64* bc = b.c.data();
            for (size_t j = 0; j < b.c.size(); ++j) o[j] += xi * bc[j];
        }
    }
};

}  // namespace detail

// (r1 h1)(r2 h2) = sum_i r1 (1+T)^i phi^c(r_{i,2}) (iota(i)^-1 h1 iota(i)) h2, with
// c = depth (defaults to c_k; any depth >= c_k gives the same product)
inline SkewElt skew_mul(const SkewElt& x, const SkewElt& y, std::optional<int> depth = std::nullopt) {
    same_ring(x, y);
    const QuotientSpec& q = x.q;
    int c = depth ? *depth : q.c;
    if (c < q.c) fail("PreconditionFailed", "expansion depth below c_k");
    SkewElt out = skew_zero(q, std::max(x.prec, y.prec), x.cert);
    if (x.terms.empty() || y.terms.empty()) return out;
    u64 npieces = ipow(q.p, c);

    // dense path: x . y = sum_i (x with keys conjugated by iota(i)) * y_i, where y_i
    // collects the i-th pieces of the coefficients of y
    bool need_pieces = false;
    for (auto& kv : x.terms)
        if (kv.first.y != 0) need_pieces = true;
    std::vector<const LaurentSeries*> all;
    for (auto& kv : x.terms) all.push_back(&kv.second);
    for (auto& kv : y.terms) all.push_back(&kv.second);
    if (detail::dense_eligible(all)) {
        std::vector<std::pair<HKey, std::vector<LaurentSeries>>> ypieces;
        bool ok = true;
        std::vector<const LaurentSeries*> piece_ptrs;
        for (auto& [h2, r2] : y.terms) {
            ypieces.emplace_back(h2, need_pieces ? detail::expand_pieces(r2, c) : std::vector<LaurentSeries>{r2});
        }
        for (auto& [h2, ps] : ypieces)
            for (auto& pc : ps)
                if (!pc.is_zero()) piece_ptrs.push_back(&pc);
        if (!piece_ptrs.empty()) {
            piece_ptrs.push_back(all[0]);
            ok = detail::dense_eligible(piece_ptrs);
            piece_ptrs.pop_back();
        }
        if (ok) {
            if (piece_ptrs.empty()) return out;
            i64 xlo = kInf, xhi = -kInf, ylo = kInf, yhi = -kInf;
            size_t xmax = 0, ymax = 0;
            for (auto& [h, f] : x.terms) {
                xlo = std::min(xlo, f.lo); xhi = std::max(xhi, f.end()); xmax = std::max(xmax, f.c.size());
            }
            for (auto* f : piece_ptrs) {
                ylo = std::min(ylo, f->lo); yhi = std::max(yhi, f->end()); ymax = std::max(ymax, f->c.size());
            }
            const LaurentSeries& f0 = x.terms.begin()->second;
            detail::DenseAccumulator acc(f0.modulus(), xlo + ylo, size_t((xhi - xlo) + (yhi - ylo)));
            if (acc.fits(std::min(xmax, ymax))) {
                for (auto& [h2, ps] : ypieces)
                    for (u64 i = 0; i < ps.size(); ++i) {
                        if (ps[i].is_zero()) continue;
                        for (auto& [h1, r1] : x.terms) {
                            HKey conj = need_pieces ? HKey{h1.y, submod(h1.z, mulmod(i % q.mod, h1.y, q.mod), q.mod)} : h1;
                            acc.add(hmul(q, conj, h2), r1, ps[i]);
                        }
                    }
                for (auto& [key, vp] : acc.buf) {
                    LaurentSeries r;
                    r.p = q.p; r.prec = f0.prec; r.shift = 0; r.lo = acc.lo; r.exact = true;
                    r.cert = cert_join(f0.cert, y.terms.begin()->second.cert);
                    r.c = std::move(vp.first);
                    r.normalize();
                    if (!r.is_zero()) out.terms[key] = std::move(r);
                }
                return out;
            }
        }
    }
    for (auto& [h2, r2] : y.terms) {
        std::vector<LaurentSeries> pieces;
        if (need_pieces) pieces = detail::expand_pieces(r2, c);
        for (auto& [h1, r1] : x.terms) {
            if (!need_pieces || h1.y == 0) {
                skew_put(out, hmul(q, h1, h2), ser_mul(r1, r2));
                continue;
            }
            // iota(i)^-1 h1 iota(i) only depends on i*y1 mod p^(k-1)
            std::map<u64, LaurentSeries> groups;
            for (u64 i = 0; i < npieces; ++i) {
                if (pieces[i].exact && pieces[i].is_zero()) continue;
                u64 s = mulmod(i % q.mod, h1.y, q.mod);
                auto it = groups.find(s);
                if (it == groups.end()) groups.emplace(s, pieces[i]);
                else it->second = ser_add(it->second, pieces[i]);
            }
            for (auto& [s, sum] : groups) {
                HKey conj{h1.y, submod(h1.z, s, q.mod)};
                skew_put(out, hmul(q, conj, h2), ser_mul(r1, sum));
            }
        }
    }
    return out;
}

inline SkewElt operator+(const SkewElt& a, const SkewElt& b) { return skew_add(a, b); }
inline SkewElt operator-(const SkewElt& a, const SkewElt& b) { return skew_sub(a, b); }
inline SkewElt operator*(const SkewElt& a, const SkewElt& b) { return skew_mul(a, b); }

inline bool skew_is_zero(const SkewElt& x) {
    for (auto& [h, f] : x.terms)
        if (!f.is_zero()) return false;
    return true;
}

inline bool skew_agree(const SkewElt& x, const SkewElt& y) {
    same_ring(x, y);
    return skew_is_zero(skew_sub(x, y));
}

// phi(r h) = phi(r) phi(h)
inline SkewElt skew_phi(const SkewElt& x) {
    SkewElt out = skew_zero(x.q, x.prec, x.cert);
    for (auto& [h, f] : x.terms) skew_put(out, phi_key(x.q, h), frobenius_series(f, 1));
    return out;
}

// phi from level k-1 into level k (phi(H_{k-1}) lies in H_k)
inline SkewElt skew_phi_up(const SkewElt& x) {
    QuotientSpec q = quotient_spec(x.q.n, x.q.p, x.q.k + 1);
    SkewElt out = skew_zero(q, x.prec, x.cert);
    for (auto& [h, f] : x.terms) {
        HKey img = hkey(q, i64(h.y) * i64(q.p), i64(h.z) * i64(q.p * q.p));
        skew_put(out, img, frobenius_series(f, 1));
    }
    return out;
}

// GL_3 element (x, y, z) of H_0 = N_0 as iota(x) h with h = (0, y, z - x y)
// chi_k(iota(x) h) = (1+T)^x (h H_k); negative x is truncated at T^W
inline SkewElt chi_k_embed(const QuotientSpec& q, i64 x, i64 y, i64 z, int prec, i64 W = 32) {
    HKey h{0, 0};
    if (!q.trivial()) h = {reduce(y, q.mod), submod(reduce(z, q.mod), mulmod(reduce(x, q.mod), reduce(y, q.mod), q.mod), q.mod)};
    return skew_term(q, h, chi_int(q.p, prec, x, W));
}

inline SkewElt chi_k_embed(const QuotientSpec& q, const UnitriangularElt& g, int prec, i64 W = 32) {
    if (g.n == 2) return chi_k_embed(q, g.x(), 0, 0, prec, W);
    if (g.L != 0 && i64(g.L) < q.k - 1) fail("PreconditionFailed", "group element known to too low a level");
    return chi_k_embed(q, g.x(), g.y(), g.z(), prec, W);
}

inline SkewElt reduce_level(const SkewElt& x, int k) {
    if (k > x.q.k) fail("PreconditionFailed", "cannot reduce to a higher level");
    if (k < 1) fail("PreconditionFailed", "levels start at 1");
    QuotientSpec q = quotient_spec(x.q.n, x.q.p, k);
    SkewElt out = skew_zero(q, x.prec, x.cert);
    for (auto& [h, f] : x.terms) skew_put(out, hkey(q, i64(h.y), i64(h.z)), f);
    return out;
}

// x in I_k: the image at level k vanishes
inline bool ideal_member(const SkewElt& x, int k) { return skew_is_zero(reduce_level(x, k)); }

// ---------------------------------------------------------------- etale decomposition

// w = v iota(i) with v = n_beta(a) n_gamma(b), a < p, b < p^2, i < p
struct WKey {
    u64 i = 0;
    u64 a = 0;
    u64 b = 0;
    friend bool operator<(const WKey& l, const WKey& r) {
        return std::tie(l.i, l.a, l.b) < std::tie(r.i, r.a, r.b);
    }
    friend bool operator==(const WKey& l, const WKey& r) { return l.i == r.i && l.a == r.a && l.b == r.b; }
};

constexpr int kSkewDecomposeMinLevel = 3;

// chi_k(v iota(i)) = (1+T)^i (a, b - i a)
inline SkewElt chi_k_of_w(const QuotientSpec& q, const WKey& w, int prec) {
    return skew_term(q, hkey(q, i64(w.a), i64(w.b) - i64(w.i * w.a)), chi_pow(q.p, prec, w.i));
}

// x = sum_w phi(y_w) chi_k(w); components live at level k-1 with the canonical
// keys of factor_phi (z below p^(k-3))
inline std::map<WKey, SkewElt> skew_etale_decompose(const SkewElt& x) {
    const QuotientSpec& q = x.q;
    if (q.n != 3 || q.k < kSkewDecomposeMinLevel)
        fail("LevelTooSmall", "H_k lies in phi(H_0) only from level 3 on");
    QuotientSpec qd = quotient_spec(3, q.p, q.k - 1);
    std::map<WKey, SkewElt> out;
    for (auto& [h, r] : x.terms) {
        auto parts = etale_decompose(r, 1);
        for (u64 i = 0; i < parts.size(); ++i) {
            if (parts[i].exact && parts[i].is_zero()) continue;
            // (1+T)^i h = chi_k(iota(i) h) and iota(i) h = (i, y, z + i y) = phi(u) v iota(i)
            auto [u, v] = factor_phi(q, HKey{h.y, addmod(h.z, mulmod(i, h.y, q.mod), q.mod)});
            WKey w{i, v.y, v.z};
            auto it = out.find(w);
            if (it == out.end()) it = out.emplace(w, skew_zero(qd, x.prec, x.cert)).first;
            skew_put(it->second, u, parts[i]);
        }
    }
    return out;
}

inline SkewElt skew_etale_recombine(const std::map<WKey, SkewElt>& comps, const QuotientSpec& q, int prec) {
    SkewElt acc = skew_zero(q, prec);
    for (auto& [w, y] : comps) acc = skew_add(acc, skew_mul(skew_phi_up(y), chi_k_of_w(q, w, prec)));
    return acc;
}

// ---------------------------------------------------------------- change of splitting

// The phi-equivariant splittings of ell for GL_3 are iota'(x) = (x, x y0, x^2 y0 / 2)
// (y0 even when p = 2); they conjugate H_1 like iota, so c_k' = c_k.
inline HKey splitting_defect(const QuotientSpec& q, i64 y0, i64 i) {
    // iota(i)^-1 iota'(i) = (0, i y0, -i^2 y0 / 2)
    if (q.trivial()) return {0, 0};
    u64 M = q.mod;
    u64 half_y0;
    if (q.p == 2) {
        if (y0 % 2 != 0) fail("PreconditionFailed", "for p = 2 the splitting parameter must be even");
        half_y0 = reduce(y0 / 2, M);
    } else {
        half_y0 = mulmod(reduce(y0, M), invmod(2 % M == 0 ? 1 : 2, M), M);
    }
    u64 ii = reduce(i, M);
    return {mulmod(ii, reduce(y0, M), M), submod(0, mulmod(mulmod(ii, ii, M), half_y0, M), M)};
}

// minimal m with H_1^(p^m) in H_k (H_1/H_k is abelian of exponent p^(k-1))
inline int splitting_mk(const QuotientSpec& q) { return q.trivial() ? 0 : q.k - 1; }

// r h -> sum_i (1+T)^i phi^m(r_i) (iota(i)^-1 iota'(i)) h
inline SkewElt iota_transport(const SkewElt& x, i64 y0, int m) {
    const QuotientSpec& q = x.q;
    int need = splitting_mk(q) + q.c;
    if (m < need) fail("DepthTooShallow", "transport depth " + std::to_string(m) + " below " + std::to_string(need));
    if (y0 == 0 || q.trivial()) return x;
    SkewElt out = skew_zero(q, x.prec, x.cert);
    for (auto& [h, r] : x.terms) {
        auto pieces = detail::expand_pieces(r, m);
        for (u64 i = 0; i < pieces.size(); ++i) {
            if (pieces[i].exact && pieces[i].is_zero()) continue;
            skew_put(out, hmul(q, splitting_defect(q, y0, i64(i)), h), pieces[i]);
        }
    }
    return out;
}

}  // namespace phigamma

#endif
