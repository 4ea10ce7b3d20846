#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "phigamma/padic.hpp"

using namespace phigamma;

namespace {

PadicScalar rand_scalar(std::mt19937_64& rng, u64 p, int N, int vmin, int vmax) {
    std::uniform_int_distribution<int> vd(vmin, vmax);
    u64 M = ipow(p, N);
    u64 u;
    do { u = rng() % M; } while (u % p == 0);
    PadicScalar s;
    s.p = p; s.v = vd(rng); s.u = u; s.N = N; s.zero = false;
    return s;
}

}  // namespace

TEST_CASE("scalar arithmetic examples") {
    auto x = PadicScalar::from_int(3, 1, 6) + PadicScalar::from_int(3, 2, 6);
    CHECK(x.v == 1);
    CHECK(x.u == 1);
    CHECK_FALSE(x.zero);

    PadicScalar a = PadicScalar::from_int(2, 1, 6), b = PadicScalar::from_int(2, 1, 6);
    a.v = -1;
    b.v = 3;
    auto m = a * b;
    CHECK(m.v == 2);
    CHECK(m.u == 1);

    // 3 * 11 = 33 = 1 mod 16
    auto q = PadicScalar::from_int(2, 1, 4) / PadicScalar::from_int(2, 3, 4);
    CHECK(q.v == 0);
    CHECK(q.u == 11);
    CHECK(q.N == 4);
}

TEST_CASE("cancellation lowers relative precision and ends in certified zero") {
    auto a = PadicScalar::from_int(5, 1, 4);
    auto b = PadicScalar::from_int(5, -1 + 125, 4);  // 124 = -1 mod 125
    auto s = a + b;
    CHECK(s.v == 3);
    CHECK(s.N == 1);
    auto z = a - a;
    CHECK(z.zero);
    CHECK(z.abs_prec() == 4);
}

TEST_CASE("division errors") {
    auto z = PadicScalar::zero_at(3, 5);
    auto one = PadicScalar::from_int(3, 1, 5);
    CHECK_THROWS_AS(one / z, Error);
    try {
        (void)(one / z);
    } catch (const Error& e) {
        CHECK(e.code == "DivisionByZeroAtPrecision");
    }
}

TEST_CASE("binom examples") {
    auto a = PadicScalar::from_int(2, 7, 8);
    auto b0 = binom(a, 0);
    CHECK(b0.v == 0);
    CHECK(b0.u == 1);
    auto b1 = binom(PadicScalar::from_int(2, 2, 8), 1);
    CHECK(b1.v == 1);
    CHECK(b1.u == 1);
    auto bm = binom(PadicScalar::from_int(2, -1, 4), 2);
    CHECK(bm.residue(3) == 1);
}

TEST_CASE("binom against frozen rational values") {
    // a = -1/3 in Z_2 to 12 digits
    auto a = PadicScalar::from_int(2, 1, 12) / PadicScalar::from_int(2, -3, 12);
    struct Row { u64 k; i64 v; u64 u; int N; };
    const Row rows[] = {{1, 0, 1365, 12}, {2, 1, 569, 10}, {3, 1, 809, 10},
                        {4, 0, 17, 10}, {5, 0, 941, 10}, {6, 3, 123, 7}};
    for (auto r : rows) {
        auto b = binom(a, r.k);
        CHECK(b.v == r.v);
        CHECK(b.N == r.N);
        CHECK(b.u == r.u);
    }
    CHECK(binom(PadicScalar::from_int(3, 1000003, 14), 5).residue(12) == 454032);
    CHECK(binom(PadicScalar::from_int(5, 1000003, 12), 9).residue(10) == 1703125);
}

TEST_CASE("binom runs out of digits") {
    auto a = PadicScalar::from_int(2, 5, 3);
    CHECK_THROWS_AS(binom(a, 8), Error);
}

TEST_CASE("ring axioms on random triples") {
    std::mt19937_64 rng(11);
    for (u64 p : {2, 3, 5, 7}) {
        for (int it = 0; it < 300; ++it) {
            auto x = rand_scalar(rng, p, 8, -3, 3);
            auto y = rand_scalar(rng, p, 6, -3, 3);
            auto z = rand_scalar(rng, p, 7, -3, 3);
            CHECK(same_value((x * y) * z, x * (y * z)));
            CHECK(same_value((x + y) + z, x + (y + z)));
            CHECK(same_value(x * (y + z), x * y + x * z));
            CHECK(same_value(x + y, y + x));
            CHECK(same_value((x / y) * y, x));
        }
    }
}

TEST_CASE("Pascal rule for binom") {
    std::mt19937_64 rng(12);
    for (u64 p : {2, 3, 5}) {
        for (int it = 0; it < 100; ++it) {
            auto a = rand_scalar(rng, p, 12, 0, 2);
            auto one = PadicScalar::from_int(p, 1, 20);
            for (u64 k = 1; k <= 20; ++k) {
                if (a.abs_prec() - floor_log(p, k) <= 0) break;
                auto lhs = binom(a, k);
                auto rhs = binom(a - one, k) + binom(a - one, k - 1);
                CHECK(same_value(lhs, rhs));
            }
        }
    }
}

TEST_CASE("valuation estimate for binom") {
    std::mt19937_64 rng(13);
    for (u64 p : {2, 3, 5}) {
        for (int it = 0; it < 500; ++it) {
            auto a = rand_scalar(rng, p, 10, 0, 3);
            u64 k = 1 + rng() % 30;
            auto b = binom(a, k);
            i64 bound = a.v - val_int(i64(k), p);
            CHECK(b.valuation() >= bound);
        }
    }
}

TEST_CASE("norm value arithmetic") {
    auto h = NormValue::of_exp(Rat(1, 2));
    CHECK(norm_mul(h, h) == NormValue::of_exp(Rat(1)));
    CHECK(norm_max(NormValue::zero(), NormValue::of_exp(Rat(3))) == NormValue::of_exp(Rat(3)));
    CHECK(norm_pow(NormValue::of_exp(Rat(1, 8)), 9) == NormValue::of_exp(Rat(9, 8)));
    CHECK(norm_mul(NormValue::zero(), h).is_zero);
    CHECK(NormValue::zero() < h);
    CHECK(NormValue::of_exp(Rat(2)) < NormValue::of_exp(Rat(1)));
}

TEST_CASE("norm value laws") {
    std::mt19937_64 rng(14);
    auto rnd = [&] { return NormValue::of_exp(Rat(i64(rng() % 41) - 20, 1 + i64(rng() % 12))); };
    for (int it = 0; it < 500; ++it) {
        auto a = rnd(), b = rnd(), c = rnd();
        CHECK(norm_mul(a, b) == norm_mul(b, a));
        CHECK(norm_mul(norm_mul(a, b), c) == norm_mul(a, norm_mul(b, c)));
        int ab = norm_cmp(a, b), bc = norm_cmp(b, c), ac = norm_cmp(a, c);
        CHECK(ab == -norm_cmp(b, a));
        if (ab <= 0 && bc <= 0) CHECK(ac <= 0);
    }
}

TEST_CASE("rho exponent range") {
    CHECK_NOTHROW(RhoExponent(Rat(1, 4)));
    CHECK_THROWS_AS(RhoExponent(Rat(1)), Error);
    CHECK_THROWS_AS(RhoExponent(Rat(0)), Error);
}
