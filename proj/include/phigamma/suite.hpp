#ifndef PHIGAMMA_SUITE_HPP
#define PHIGAMMA_SUITE_HPP

#include <random>
#include <string>
#include <vector>

#include "phigamma/norms.hpp"
#include "phigamma/phimod.hpp"

// Randomized property checks shared by the CLI selftest and the acceptance
// binary.  Each check counts its cases and keeps the first failure.

namespace phigamma::suite {

struct Check {
    std::string name;
    bool ok = true;
    i64 cases = 0;
    i64 failures = 0;
    std::string detail;

    void expect(bool cond, const std::string& what) {
        ++cases;
        if (cond) return;
        ++failures;
        if (ok) detail = what;
        ok = false;
    }
    void absorb(const Check& c) {
        cases += c.cases;
        failures += c.failures;
        if (!c.ok && ok) detail = c.name + ": " + c.detail;
        ok = ok && c.ok;
    }
};

// ---------------------------------------------------------------- generators

inline const Cert kOECert{CertClass::OE, std::nullopt};

inline LaurentSeries rand_laurent(std::mt19937_64& rng, u64 p, int N, i64 lo, int len) {
    std::vector<i64> c;
    u64 M = ipow(p, N);
    for (int i = 0; i < len; ++i) c.push_back(i64(rng() % M));
    return series_from(p, N, lo, c);
}

inline SkewElt rand_skew(std::mt19937_64& rng, const QuotientSpec& q, int N, int nterms, i64 lo = -2, int len = 4) {
    SkewElt x = skew_zero(q, N);
    auto keys = all_keys(q);
    for (int t = 0; t < nterms; ++t) skew_put(x, keys[rng() % keys.size()], rand_laurent(rng, q.p, N, lo, len));
    return x;
}

inline LaurentSeries rand_oe_poly(std::mt19937_64& rng, u64 p, int N, i64 lo, int len) {
    return with_cert(rand_laurent(rng, p, N, lo, len), kOECert);
}

inline LaurentSeries rand_unit_monomial(std::mt19937_64& rng, u64 p, int N) {
    i64 u;
    do { u = i64(rng() % ipow(p, N)); } while (u % i64(p) == 0);
    return with_cert(monomial(p, N, i64(rng() % 3) - 1, u), kOECert);
}

// triangular products of unit monomials and polynomials are exactly invertible
inline SerMat rand_invertible(std::mt19937_64& rng, u64 p, int N, size_t d) {
    if (d == 1) return {{rand_unit_monomial(rng, p, N)}};
    SerMat U = {{rand_unit_monomial(rng, p, N), rand_oe_poly(rng, p, N, 0, 2)},
                {with_cert(ser_zero(p, N), kOECert), rand_unit_monomial(rng, p, N)}};
    SerMat L = sermat_identity(p, N, 2, kOECert);
    L[1][0] = rand_oe_poly(rng, p, N, 0, 2);
    return sermat_mul(L, U);
}

// sums of r (h - 1): an element of I_1
inline SkewElt rand_I1(std::mt19937_64& rng, const QuotientSpec& q, int N, int nterms) {
    SkewElt x = skew_zero(q, N, kOECert);
    auto keys = all_keys(q);
    for (int t = 0; t < nterms; ++t) {
        auto r = rand_oe_poly(rng, q.p, N, 0, 2);
        skew_put(x, keys[rng() % keys.size()], r);
        skew_put(x, {0, 0}, ser_neg(r));
    }
    return x;
}

inline SkewMat rand_B(std::mt19937_64& rng, const QuotientSpec& q, int N, size_t d) {
    SkewMat B(d);
    for (size_t i = 0; i < d; ++i)
        for (size_t j = 0; j < d; ++j) B[i].push_back(rand_I1(rng, q, N, 2));
    return B;
}

// polynomial in the b_beta of total degree <= deg, level 0
inline DistElt rand_dist_poly(std::mt19937_64& rng, const RootDatum& D, u64 p, int N, int deg, int terms) {
    std::map<Coords, i64> m;
    for (int i = 0; i < terms; ++i) {
        Coords k(D.roots.size(), 0);
        int left = int(rng() % u64(deg + 1));
        for (size_t r = 0; r < k.size() && left > 0; ++r) {
            int take = int(rng() % u64(left + 1));
            k[r] = take;
            left -= take;
        }
        if (left > 0) k.back() += left;
        m[k] = i64(rng() % 50) - 25;
    }
    return dist_from_monomials(D, p, 0, N, m);
}

// ---------------------------------------------------------------- series

// decompose/recombine are mutually inverse; depth 2 is depth 1 twice with i = k + p j
inline Check series_etale(std::mt19937_64& rng, u64 p, int count, int N, i64 lo, i64 hi) {
    Check c{"etale decomposition of series is a bijection", true, 0, 0, ""};
    int len = int(hi - lo);
    for (int it = 0; it < count; ++it) {
        auto exact = rand_laurent(rng, p, N, lo, len);
        auto f = truncate(exact, hi);
        for (int depth : {1, 2}) {
            auto parts = etale_decompose(f, depth);
            c.expect(ser_agree(etale_recombine(parts, depth), f), "recombine(decompose(f)) != f at depth " + std::to_string(depth));
            c.expect(ser_identical(etale_recombine(etale_decompose(exact, depth), depth), exact), "exact round trip failed");
        }
        std::vector<LaurentSeries> parts;
        for (u64 i = 0; i < p; ++i) parts.push_back(truncate(rand_laurent(rng, p, N, lo / i64(p), len / int(p)), hi / i64(p)));
        auto back = etale_decompose(etale_recombine(parts, 1), 1);
        for (u64 i = 0; i < p; ++i) c.expect(ser_agree(back[i], parts[i]), "decompose(recombine(parts)) != parts");
        auto d2 = etale_decompose(f, 2);
        auto d1 = etale_decompose(f, 1);
        for (u64 k = 0; k < p; ++k) {
            auto dk = etale_decompose(d1[k], 1);
            for (u64 j = 0; j < p; ++j) c.expect(ser_agree(d2[k + p * j], dk[j]), "depth 2 differs from iterated depth 1");
        }
    }
    return c;
}

// ---------------------------------------------------------------- skew ring

inline Check skew_axioms(std::mt19937_64& rng, u64 p, int level, int count, int N) {
    Check c{"skew multiplication is associative and independent of the expansion depth", true, 0, 0, ""};
    auto q = quotient_spec(3, p, level);
    for (int it = 0; it < count; ++it) {
        auto x = rand_skew(rng, q, N, 3), y = rand_skew(rng, q, N, 3), z = rand_skew(rng, q, N, 3);
        c.expect(skew_agree(skew_mul(skew_mul(x, y), z), skew_mul(x, skew_mul(y, z))), "(xy)z != x(yz)");
        c.expect(skew_agree(skew_mul(x, y), skew_mul(x, y, q.c + 1)), "digits and digits + p^c expansions differ");
        c.expect(skew_agree(skew_mul(x, y + z), skew_mul(x, y) + skew_mul(x, z)), "left distributivity");
    }
    return c;
}

inline Check phi_homomorphism(std::mt19937_64& rng, u64 p, int level, int count, int N) {
    Check c{"phi is multiplicative on the skew ring", true, 0, 0, ""};
    auto q = quotient_spec(3, p, level);
    for (int it = 0; it < count; ++it) {
        auto a = rand_skew(rng, q, N, 3), b = rand_skew(rng, q, N, 3);
        c.expect(skew_agree(skew_phi(skew_mul(a, b)), skew_mul(skew_phi(a), skew_phi(b))), "phi(ab) != phi(a)phi(b)");
    }
    return c;
}

// phi(I_k) lies in I_(k+1), checked at level k+2
inline Check phi_ideal_filtration(std::mt19937_64& rng, u64 p, int k, int count, int N) {
    Check c{"phi maps I_k into I_(k+1)", true, 0, 0, ""};
    auto q = quotient_spec(3, p, k + 2);
    for (int it = 0; it < count; ++it) {
        auto a = rand_skew(rng, q, N, 4);
        auto red = reduce_level(a, k);
        for (auto& [h, f] : red.terms) a = a - skew_term(q, h, f);
        c.expect(ideal_member(a, k), "constructed element is not in I_k");
        c.expect(ideal_member(skew_phi(a), k + 1), "phi(I_k) not inside I_(k+1) for k = " + std::to_string(k));
    }
    return c;
}

// Probes in the kernel of phi at finite level l: sums r (h - h') with
// phi(h) = phi(h').  Reports how many vanish at level l-1 and at level l-2.
struct KernelProbe {
    i64 probes = 0;
    i64 zero_at_l1 = 0;
    i64 zero_at_l2 = 0;
    std::string counterexample;
};

inline KernelProbe phi_kernel_probe(std::mt19937_64& rng, u64 p, int l, int count, int N) {
    KernelProbe out;
    auto q = quotient_spec(3, p, l);
    u64 dy = ipow(p, l - 2), dz = ipow(p, l - 3);
    auto record = [&](const SkewElt& x, const std::string& what) {
        if (!skew_is_zero(skew_phi(x))) return;
        ++out.probes;
        bool z1 = ideal_member(x, l - 1), z2 = l - 2 < 1 || ideal_member(x, l - 2);
        out.zero_at_l1 += z1;
        out.zero_at_l2 += z2;
        if (!z1 && out.counterexample.empty()) out.counterexample = what;
    };
    // n_gamma(p^(l-3)) - 1
    record(skew_group(q, {0, dz % q.mod}, N) - skew_one(q, N),
           "n_gamma(" + std::to_string(dz) + ") - 1 at level " + std::to_string(l) + ", p = " + std::to_string(p));
    for (int it = 0; it < count; ++it) {
        SkewElt x = skew_zero(q, N);
        for (int t = 0; t < 3; ++t) {
            HKey h{rng() % q.mod, rng() % q.mod};
            HKey h2 = hkey(q, i64(h.y + dy * (rng() % p)), i64(h.z + dz * (rng() % (p * p))));
            auto r = rand_laurent(rng, p, N, -1, 3);
            x = x + skew_term(q, h, r) - skew_term(q, h2, r);
        }
        record(x, "random kernel probe at level " + std::to_string(l));
    }
    return out;
}

// ---------------------------------------------------------------- modules

inline Check solver(std::mt19937_64& rng, u64 p, int count, int N) {
    Check c{"X and Y solve the conjugation equations modulo I_K", true, 0, 0, ""};
    for (int it = 0; it < count; ++it) {
        size_t d = 1 + size_t(it % 2);
        int K = 2 + (it / 2) % 2;
        auto q = quotient_spec(3, p, K);
        SkewMat A = skewmat_iota(rand_invertible(rng, p, N, d), q);
        SkewMat B = rand_B(rng, q, N, d);
        auto X = solve_X(A, B, K);
        auto Y = solve_Y(A, B, K);
        c.expect(skewmat_is_zero(x_residual(A, B, X.sum)), "phi(id+X)(A+B) != A(id+X)");
        c.expect(skewmat_is_zero(y_residual(A, B, Y.sum)), "(A+B)(id+Y) != phi(id+Y)A");
        SkewMat I = skewmat_identity(q, N, d, kOECert);
        c.expect(skewmat_agree(skewmat_mul(skewmat_add(I, X.sum), skewmat_add(I, Y.sum)), I), "(id+X)(id+Y) != id");
        for (size_t k = 0; k < X.terms.size(); ++k)
            c.expect(skewmat_in_ideal(X.terms[k], int(k) + 1), "X term " + std::to_string(k) + " not in I_(k+1)");
    }
    return c;
}

// ---------------------------------------------------------------- norms

inline Check closed_form_grid(u64 p) {
    Check c{"closed form for ||phi_t(b_beta)|| matches the expansion", true, 0, 0, ""};
    auto D = root_datum(3);
    TorusElt s = s_elt(D, p), b = s_bar(D, p);
    std::vector<std::pair<std::string, TorusElt>> ts = {{"s", s}, {"sbar", b}, {"s*sbar", torus_mul(s, b)}};
    for (auto& [tn, t] : ts)
        for (Rat e : {Rat(1, 2), Rat(1, 4), Rat(1, 8)})
            for (int r = 0; r < 3; ++r) {
                RhoExponent rho(e);
                c.expect(phi_t_norm_closed(D, r, t, rho) == phi_t_norm_brute(D, r, t, rho),
                         "root " + std::to_string(r) + ", t = " + tn + ", rho exponent " + e.str());
            }
    return c;
}

inline Check sandwich(std::mt19937_64& rng, u64 p, int count, int deg, int N) {
    Check c{"q_t norm lies between ||x|| and rho^-S ||x||", true, 0, 0, ""};
    auto D = root_datum(3);
    auto t = s_elt(D, p);
    RhoExponent rho(Rat(1, 4));
    for (int it = 0; it < count; ++it) {
        auto x = rand_dist_poly(rng, D, p, N, deg, 4);
        if (dist_is_zero(x)) { --it; continue; }
        auto rep = qt_sandwich(x, t, rho);
        c.expect(rep.left, "||x||_rho > q_t(x)");
        c.expect(rep.right, "q_t(x) > rho^-S ||x||_rho");
    }
    return c;
}

inline Check sandwich_tight_gl2() {
    Check c{"GL2 sandwich is tight at x = b, p = 2", true, 0, 0, ""};
    auto D = root_datum(2);
    auto b = dist_b(D, 2, 0, 8, D.alpha);
    auto rep = qt_sandwich(b, s_elt(D, 2), RhoExponent(Rat(1, 2)));
    c.expect(rep.left && rep.right, "sandwich fails");
    c.expect(rep.upper == rep.q, "upper bound not attained");
    return c;
}

struct PairNorm {
    std::string pair;
    NormValue product_norm;
    NormValue norm_product;
    bool ok = false;
};

// ||b_i b_j|| against ||b_i|| ||b_j|| over all ordered pairs of generators
inline std::vector<PairNorm> generator_multiplicativity(u64 p, const RhoExponent& rho, int N) {
    auto D = root_datum(3);
    const char* names[] = {"b_gamma", "b_beta", "b_alpha"};
    std::vector<PairNorm> out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            auto bi = dist_b(D, p, 0, N, i), bj = dist_b(D, p, 0, N, j);
            PairNorm r;
            r.pair = std::string(names[i]) + " * " + names[j];
            r.product_norm = dist_norm(dist_mul(bi, bj), rho);
            r.norm_product = norm_mul(dist_norm(bi, rho), dist_norm(bj, rho));
            r.ok = r.product_norm == r.norm_product;
            out.push_back(r);
        }
    return out;
}

inline Check region_round_trip(std::mt19937_64& rng, u64 p, const std::vector<i64>& rs, const RhoExponent& rho2, int N) {
    Check c{"t_of_region followed by region_of_t covers the region", true, 0, 0, ""};
    auto D = root_datum(3);
    for (i64 r : rs) {
        Region reg{rho2, r};
        auto t = t_of_region(D, p, reg);
        auto back = region_of_t(D, t, region_rho0(D, t, reg));
        c.expect(region_covers(back, reg), "r = " + std::to_string(r) + " not covered");
        // transported finitely supported elements, including a b_alpha^-1 part
        auto y = rand_dist_poly(rng, D, p, N, 3, 3);
        y = dist_add(y, dist_mul(rand_dist_poly(rng, D, p, N, 2, 2), dist_b_alpha_inv(D, p, 0, N, 1)));
        auto x = dist_phi_t(t, y);
        for (Rat e : {rho2.e * Rat(2, 3), rho2.e * Rat(1, 2), rho2.e * Rat(1, 4)}) {
            bool finite = false;
            try {
                finite = !dist_is_zero(x) && !dist_norm(x, RhoExponent(e)).is_zero;
            } catch (const Error&) {
                finite = false;
            }
            c.expect(finite, "norm not certified at rho exponent " + e.str() + ", r = " + std::to_string(r));
        }
    }
    return c;
}

inline Check witness_table(u64 p, i64 n_max) {
    Check c{"Example table: plain norms 1, transported norms p^-n", true, 0, 0, ""};
    auto D = root_datum(3);
    auto tab = witness_series_ex(D, p, n_max, s_elt(D, p), RhoExponent(Rat(1, 2)));
    c.expect(i64(tab.rows.size()) == n_max, "wrong number of rows");
    for (auto& row : tab.rows) {
        c.expect(row.plain == NormValue::one(), "plain norm != 1 at n = " + std::to_string(row.n));
        // for p = 2 the ratio rho^(p^2) / max(rho^p, rho / p) is 2^-1
        if (p == 2) c.expect(row.transported == NormValue::of_exp(Rat(row.n)), "transported norm != 2^-n at n = " + std::to_string(row.n));
    }
    c.expect(tab.plain_verdict == "not null" && tab.transported_verdict == "null geometric", "verdicts");
    return c;
}

inline Check log_division(u64 p, int r, int M) {
    Check c{"log division quotient meets the valuation bound", true, 0, 0, ""};
    auto rep = log_division_check(p, r, M, 8);
    c.expect(rep.bound_ok, "bound fails first at i = " + std::to_string(rep.first_violation) + " (p = " + std::to_string(p) +
                               ", r = " + std::to_string(r) + ")");
    c.expect(rep.identity_ok, "phi^r(log) != p^r log");
    return c;
}

// ---------------------------------------------------------------- degenerations and transports

inline Check gl2_degeneration(std::mt19937_64& rng, int count) {
    Check c{"GL2 skew ring collapses to the series ring", true, 0, 0, ""};
    u64 p = 2;
    int N = 6;
    for (int k : {1, 2, 3}) {
        auto q = quotient_spec(2, p, k);
        c.expect(q.trivial(), "H_1/H_k is not trivial for GL2");
        for (int it = 0; it < count; ++it) {
            auto f = rand_laurent(rng, p, N, -2, 4), g = rand_laurent(rng, p, N, -1, 4);
            auto x = skew_term(q, {0, 0}, f), y = skew_term(q, {0, 0}, g);
            c.expect(skew_agree(skew_mul(x, y), skew_term(q, {0, 0}, f * g)), "product differs from series product");
            c.expect(skew_agree(skew_phi(x), skew_term(q, {0, 0}, frobenius_series(f, 1))), "phi differs");
            c.expect(skew_agree(x + y, skew_term(q, {0, 0}, f + g)), "sum differs");
            SeriesModule S{1, SerMat{{rand_unit_monomial(rng, p, N)}}, {}};
            c.expect(sermat_agree(functor_D(functor_M(S, q)).A, S.A), "functor_D o functor_M != id");
        }
    }
    // b under t = s splits as -1 + n * 1, the series split of T = (1+T) - 1
    auto D = root_datum(2);
    auto comps = dist_coset_decompose(dist_b(D, p, 0, N, D.alpha), s_elt(D, p));
    auto parts = etale_decompose(ser_T(p, N), 1);
    c.expect(comps.size() == 2 && parts.size() == 2, "component count");
    for (i64 i = 0; i < 2; ++i) {
        auto& xn = comps.at(Coords{i});
        u64 a = xn.g.count(Coords{0}) ? xn.g.at(Coords{0}) : 0;
        c.expect(xn.g.size() <= 1 && parts[size_t(i)].exact && parts[size_t(i)].low() >= 0 && parts[size_t(i)].end() <= 1 &&
                     a == parts[size_t(i)].raw(0) % xn.modulus(),
                 "coset component " + std::to_string(i) + " differs from the series part");
    }
    c.expect(parts[0].signed_coeff(0) == -1 && parts[1].signed_coeff(0) == 1, "series parts are not (-1, 1)");
    return c;
}

inline Check iota_independence(std::mt19937_64& rng, u64 p, int count, int N) {
    Check c{"change of splitting is a phi-equivariant ring isomorphism", true, 0, 0, ""};
    auto q = quotient_spec(3, p, 2);
    i64 y0 = p == 2 ? 2 : 1;
    int m = splitting_mk(q) + q.c;
    auto u = skew_term(q, {0, 0}, chi_one(p, N));
    c.expect(!skew_agree(iota_transport(u, y0, m), u), "second splitting acts trivially");
    for (int it = 0; it < count; ++it) {
        auto a = rand_skew(rng, q, N, 3), b = rand_skew(rng, q, N, 3);
        auto ta = iota_transport(a, y0, m), tb = iota_transport(b, y0, m);
        c.expect(skew_agree(iota_transport(skew_mul(a, b), y0, m), skew_mul(ta, tb)), "not multiplicative");
        c.expect(skew_agree(skew_phi(ta), iota_transport(skew_phi(a), y0, m)), "does not commute with phi");
        c.expect(skew_agree(iota_transport(a, y0, m + 1), ta), "depends on the depth");
        c.expect(skew_agree(iota_transport(iota_transport(a, y0, m), -y0, m), a), "not invertible by the opposite splitting");
    }
    return c;
}

inline Check pi_H(std::mt19937_64& rng, u64 p, int level, int count, int N) {
    Check c{"pi_H is multiplicative and keeps integral inputs overconvergent", true, 0, 0, ""};
    auto D = root_datum(3);
    for (int it = 0; it < count; ++it) {
        auto x = rand_dist_poly(rng, D, p, N, 3, 3), y = rand_dist_poly(rng, D, p, N, 3, 3);
        // b_alpha^-j may only sit on the right factor
        if (it % 3 == 0) y = dist_mul(y, dist_b_alpha_inv(D, p, 0, N, 1));
        auto px = pi_H_map(x, level), py = pi_H_map(y, level);
        c.expect(skew_agree(pi_H_map(dist_mul(x, y), level), skew_mul(px, py)), "pi_H(xy) != pi_H(x) pi_H(y)");
        auto xm = dist_convert(x, Rep::Monomial);
        c.expect(skew_all_certified(py, CertClass::OEdagger), "finite support lost the certificate");
        if (coeff_class_check(mono_scalars(xm)).cls == CoeffClass::Integral)
            c.expect(skew_all_certified(px, CertClass::OEdagger) && skew_all_certified(skew_mul(px, py), CertClass::OEdagger),
                     "certificate lost");
    }
    return c;
}

}  // namespace phigamma::suite

#endif
