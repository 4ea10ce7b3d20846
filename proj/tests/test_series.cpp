#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "phigamma/series.hpp"

using namespace phigamma;

namespace {

LaurentSeries rand_laurent(std::mt19937_64& rng, u64 p, int N, i64 lo, i64 hi) {
    std::vector<i64> v;
    for (i64 e = lo; e < hi; ++e) v.push_back(i64(rng() % ipow(p, N)));
    return series_from(p, N, lo, v);
}

LaurentSeries poly(u64 p, int N, std::map<i64, i64> m) { return series_from_map(p, N, m); }

}  // namespace

TEST_CASE("products") {
    CHECK(ser_identical(ser_T(5, 4) * ser_T(5, 4), monomial(5, 4, 2)));
    CHECK(ser_identical(monomial(3, 4, -1) * poly(3, 4, {{2, 1}, {1, 3}}), poly(3, 4, {{1, 1}, {0, 3}})));
    auto geo = series_from(2, 6, 0, {1, -1, 1, -1, 1, -1}, false, 6);
    auto prod = chi_one(2, 6) * geo;
    CHECK_FALSE(prod.exact);
    CHECK(prod.hi == 6);
    CHECK(ser_agree(prod, ser_one(2, 6)));
}

TEST_CASE("product window rule") {
    auto f = series_from(3, 5, -2, {1, 2, 0, 1}, false, 2);
    auto g = series_from(3, 5, 1, {2, 1, 1}, false, 4);
    auto h = f * g;
    // min(hi_f + lo_g, hi_g + lo_f) = min(3, 2)
    CHECK(h.lo == -1);
    CHECK(h.hi == 2);
    CHECK_FALSE(h.exact);
}

TEST_CASE("inversion examples") {
    CHECK(ser_identical(ser_invert(ser_T(2, 5)), monomial(2, 5, -1)));
    auto g = ser_invert(chi_one(3, 4), 8);
    CHECK(g.hi == 8);
    for (i64 n = 0; n < 8; ++n) CHECK(g.signed_coeff(n) == (n % 2 ? -1 : 1));
    // p = 2: (T^2 + 2T)^-1 = T^-2 - 2T^-3 + 4T^-4 modulo 8, a Laurent polynomial
    auto f = poly(2, 3, {{2, 1}, {1, 2}});
    auto fi = ser_invert(f);
    CHECK(fi.exact);
    CHECK(ser_identical(fi, poly(2, 3, {{-2, 1}, {-3, -2}, {-4, 4}})));
    CHECK(ser_identical(f * fi, ser_one(2, 3)));
}

TEST_CASE("inversion errors") {
    try {
        (void)ser_invert(poly(3, 4, {{0, 3}, {2, 6}}));
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code == "NotAUnit");
    }
    Cert iw{CertClass::Iwasawa, {}};
    auto f = series_from(3, 4, 0, {3, 1}, false, 5, iw);
    CHECK_THROWS_AS(ser_invert(f), Error);
    auto g = series_from(3, 4, 0, {1, 3}, false, 5, iw);
    auto gi = ser_invert(g);
    CHECK(gi.cert.cls == CertClass::Iwasawa);
    CHECK(ser_agree(g * gi, ser_one(3, 4)));
}

TEST_CASE("non-integral inversion keeps digits honest") {
    // (3 + 3T)^-1 = 3^-1 (1 - T + ...) with one digit lost
    Cert ed{CertClass::Edagger, {}};
    auto f = series_from(3, 4, 0, {3, 3}, true, 0, ed);
    auto fi = ser_invert(f, 6);
    CHECK(fi.hi == 6);
    CHECK(fi.min_val() == -1);
    CHECK(fi.prec == 2);
    CHECK(ser_agree(f * fi, ser_one(3, 4)));
}

TEST_CASE("substitution examples") {
    auto g = poly(2, 6, {{2, 1}, {1, 2}});
    CHECK(ser_identical(ser_subst(ser_T(2, 6), g), g));
    auto h = ser_subst(poly(2, 6, {{2, 1}, {1, 2}}), ser_T(2, 6));
    CHECK(ser_identical(h, g));
    auto k = ser_subst(monomial(2, 3, -1), poly(2, 3, {{2, 1}, {1, 2}}));
    CHECK(ser_identical(k, ser_invert(poly(2, 3, {{2, 1}, {1, 2}}))));
    CHECK_THROWS_AS(ser_subst(ser_T(2, 4), ser_one(2, 4)), Error);
    CHECK_THROWS_AS(ser_subst(monomial(2, 4, -1), poly(2, 4, {{1, 2}})), Error);
}

TEST_CASE("Frobenius examples") {
    CHECK(ser_identical(frobenius_series(ser_one(2, 5), 1), ser_one(2, 5)));
    CHECK(ser_identical(frobenius_series(ser_T(2, 5), 1), poly(2, 5, {{2, 1}, {1, 2}})));
    CHECK(ser_identical(frobenius_series(ser_T(2, 5), 2), poly(2, 5, {{4, 1}, {3, 4}, {2, 6}, {1, 4}})));
    for (u64 p : {2, 3, 5})
        for (int c = 1; c <= 2; ++c)
            CHECK(ser_identical(ser_sub(ser_pow(chi_one(p, 6), ipow(p, c)), ser_one(p, 6)), frobenius_series(ser_T(p, 6), c)));
}

TEST_CASE("Gamma examples") {
    auto f = rand_laurent(*std::make_unique<std::mt19937_64>(3), 3, 5, 0, 6);
    CHECK(ser_identical(gamma_act(1, f), f));
    auto g = gamma_act(-1, ser_T(2, 6), 10);
    CHECK(g.hi == 10);
    for (i64 n = 1; n < 10; ++n) CHECK(g.signed_coeff(n) == (n % 2 ? -1 : 1));
    CHECK(g.signed_coeff(0) == 0);
    // gamma_3 then gamma_{1/3}, p = 2, N = 5
    std::mt19937_64 rng(5);
    auto third = PadicScalar::from_int(2, 1, 40) / PadicScalar::from_int(2, 3, 40);
    for (int it = 0; it < 20; ++it) {
        auto h = rand_laurent(rng, 2, 5, 0, 8);
        auto r = gamma_act(third, gamma_act(3, h), 8);
        CHECK(r.hi == 8);
        CHECK(ser_agree(r, h));
    }
}

TEST_CASE("etale decomposition examples") {
    auto one = etale_decompose(ser_one(3, 4), 1);
    REQUIRE(one.size() == 3);
    CHECK(ser_identical(one[0], ser_one(3, 4)));
    CHECK(one[1].is_zero());
    CHECK(one[2].is_zero());
    auto t = etale_decompose(ser_T(2, 6), 1);
    CHECK(ser_identical(t[0], monomial(2, 6, 0, -1)));
    CHECK(ser_identical(t[1], ser_one(2, 6)));
    auto ti = etale_decompose(monomial(2, 6, -1), 1);
    CHECK(ser_identical(ti[0], monomial(2, 6, -1)));
    CHECK(ser_identical(ti[1], monomial(2, 6, -1)));
    CHECK(ser_identical(etale_recombine({monomial(2, 6, 0, -1), ser_one(2, 6)}, 1), ser_T(2, 6)));
    CHECK(ser_identical(etale_recombine({ser_one(2, 6), ser_zero(2, 6)}, 1), ser_one(2, 6)));
}

TEST_CASE("etale decomposition against a linear-algebra oracle") {
    // p = 3, f = T^-2 + 2T + 5T^3
    auto d = etale_decompose(poly(3, 6, {{-2, 1}, {1, 2}, {3, 5}}), 1);
    CHECK(ser_identical(d[0], poly(3, 6, {{1, 5}, {0, -2}, {-1, 2}, {-2, 3}})));
    CHECK(ser_identical(d[1], poly(3, 6, {{0, 17}, {-1, 1}, {-2, 3}})));
    CHECK(ser_identical(d[2], poly(3, 6, {{0, -15}, {-2, 3}})));
    // p = 2, c = 2, f = 3T^-1 + T^2
    auto e = etale_decompose(poly(2, 6, {{-1, 3}, {2, 1}}), 2);
    CHECK(ser_identical(e[0], poly(2, 6, {{0, 1}, {-1, 3}})));
    CHECK(ser_identical(e[1], poly(2, 6, {{0, -2}, {-1, 3}})));
    CHECK(ser_identical(e[2], poly(2, 6, {{0, 1}, {-1, 3}})));
    CHECK(ser_identical(e[3], poly(2, 6, {{-1, 3}})));
}

TEST_CASE("Frobenius is multiplicative") {
    std::mt19937_64 rng(21);
    for (u64 p : {2, 3}) {
        for (int it = 0; it < 100; ++it) {
            auto f = rand_laurent(rng, p, 5, -3, 4), g = rand_laurent(rng, p, 5, -2, 5);
            CHECK(ser_identical(frobenius_series(f * g, 1), frobenius_series(f, 1) * frobenius_series(g, 1)));
        }
    }
}

TEST_CASE("Frobenius and Gamma commute") {
    std::mt19937_64 rng(22);
    for (u64 p : {2, 3}) {
        for (int it = 0; it < 20; ++it) {
            auto f = rand_laurent(rng, p, 5, 0, 5);
            i64 a = p == 2 ? 5 : 7;
            auto lhs = gamma_act(a, frobenius_series(f, 1));
            auto rhs = frobenius_series(gamma_act(a, f), 1);
            CHECK(ser_identical(lhs, rhs));
            auto h = rand_laurent(rng, p, 5, -2, 4);
            auto l2 = gamma_act(-1, frobenius_series(h, 1), 6);
            auto r2 = frobenius_series(gamma_act(-1, h, 6), 1);
            CHECK(ser_agree(l2, r2));
        }
    }
}

TEST_CASE("decomposition is a bijection") {
    std::mt19937_64 rng(23);
    for (u64 p : {2, 3, 5}) {
        for (int it = 0; it < 100; ++it) {
            auto f = rand_laurent(rng, p, 4, -3, 5);
            int c = 1 + int(rng() % 2);
            if (p == 5) c = 1;
            CHECK(ser_identical(etale_recombine(etale_decompose(f, c), c), f));
        }
        for (int it = 0; it < 30; ++it) {
            std::vector<LaurentSeries> parts;
            for (u64 i = 0; i < p; ++i) parts.push_back(rand_laurent(rng, p, 4, -2, 3));
            auto back = etale_decompose(etale_recombine(parts, 1), 1);
            for (u64 i = 0; i < p; ++i) CHECK(ser_identical(back[i], parts[i]));
        }
    }
}

TEST_CASE("decomposition keeps overconvergent classes") {
    std::mt19937_64 rng(25);
    for (CertClass k : {CertClass::Iwasawa, CertClass::OEdagger, CertClass::Edagger, CertClass::Robba}) {
        auto f = with_cert(rand_laurent(rng, 3, 4, -3, 5), Cert{k, std::nullopt});
        auto back = etale_recombine(etale_decompose(f, 1), 1);
        CHECK(ser_identical(back, f));
        CHECK(back.cert.cls == k);
    }
}

TEST_CASE("depth composition") {
    std::mt19937_64 rng(24);
    for (u64 p : {2, 3}) {
        for (int it = 0; it < 30; ++it) {
            auto f = rand_laurent(rng, p, 4, -3, 6);
            auto d2 = etale_decompose(f, 2);
            auto d1 = etale_decompose(f, 1);
            for (u64 k = 0; k < p; ++k) {
                auto dk = etale_decompose(d1[k], 1);
                for (u64 j = 0; j < p; ++j) CHECK(ser_identical(d2[k + p * j], dk[j]));
            }
        }
    }
}

TEST_CASE("window rules are sound on truncations") {
    std::mt19937_64 rng(25);
    for (u64 p : {2, 3}) {
        for (int it = 0; it < 40; ++it) {
            auto f = rand_laurent(rng, p, 4, -2, 8);
            auto g = rand_laurent(rng, p, 4, 0, 8);
            auto ft = truncate(f, 3), gt = truncate(g, 4);
            CHECK(ser_agree(ft * gt, f * g));
            CHECK(ser_agree(frobenius_series(ft, 1), frobenius_series(f, 1)));
            auto dt = etale_decompose(ft, 1);
            auto de = etale_decompose(f, 1);
            for (u64 i = 0; i < p; ++i) CHECK(ser_agree(dt[i], de[i]));
            LaurentSeries u = ser_add(g, ser_one(p, 4));
            if (u.raw(0) % p == 0) u = ser_add(u, ser_one(p, 4));
            auto ut = truncate(u, 5);
            auto inv_exact = ser_invert(u, 12);
            CHECK(ser_agree(u * inv_exact, ser_one(p, 4)));
            CHECK(ser_agree(ser_invert(ut), inv_exact));
            auto gsub = ser_mul(ser_T(p, 4), ser_add(g, ser_one(p, 4)));
            if (gsub.raw(1) % p == 0) continue;
            CHECK(ser_agree(ser_subst(ft, truncate(gsub, 6)), ser_subst(f, gsub, 10)));
        }
    }
}
