#include <doctest.h>

#include <random>

#include "dimest/field.hpp"
#include "dimest/json_io.hpp"

using namespace dimest;

TEST_CASE("absolute values") {
    REQUIRE(abs_value(Scalar::real(-3.5)) == 3.5);

    Valuation q5 = Valuation::padic(5);
    CHECK(abs_value(Scalar::padic(Rational(1, 5), q5)) == 5.0);
    // 50 = 2 * 5^2, so v_5 = 2 and |50| = 1/25
    CHECK(abs_value(Scalar::padic(Rational(50), q5)) == doctest::Approx(0.04).epsilon(1e-14));
    CHECK(padic_valuation(Rational(50), 5) == 2);
    CHECK(abs_value(Scalar::zero(q5)) == 0.0);
}

TEST_CASE("theta constants") {
    CHECK(theta(Valuation::padic(5)) == 0.2);
    CHECK(theta(Valuation::padic(2)) == 0.5);
    CHECK(theta(Valuation::real()) == 1.0 - 0x1p-20);
    CHECK(Valuation::real().dense());
    CHECK_FALSE(Valuation::padic(5).dense());
}

TEST_CASE("trivial and malformed valuations rejected") {
    CHECK_THROWS_AS(Valuation::padic(4), std::invalid_argument);
    CHECK_THROWS_AS(Valuation::padic(1), std::invalid_argument);
    CHECK_THROWS_AS(Valuation::real(1.0), std::invalid_argument);
    CHECK_THROWS_AS(Valuation::real(0.0), std::invalid_argument);
}

TEST_CASE("mixed-valuation arithmetic rejected") {
    Scalar a = Scalar::real(1.0);
    Scalar b = Scalar::padic(Rational(1), Valuation::padic(5));
    CHECK_THROWS_AS(a + b, std::invalid_argument);
    CHECK_THROWS_AS(a * b, std::invalid_argument);
}

TEST_CASE("annulus normalization") {
    SUBCASE("archimedean lands on the unit sphere exactly") {
        KVector x{Scalar::real(4.0), Scalar::real(-2.0)};
        AnnulusResult r = normalize_annulus(x);
        CHECK(r.k.real_value() == 0.25);
        CHECK(sup_norm(r.y) == 1.0);
    }
    SUBCASE("p-adic |x| = 25") {
        Valuation q5 = Valuation::padic(5);
        KVector x{Scalar::padic(Rational(1, 25), q5), Scalar::padic(Rational(1, 5), q5)};
        REQUIRE(sup_norm(x) == 25.0);
        AnnulusResult r = normalize_annulus(x);
        CHECK(sup_norm(r.y) == 1.0);
        CHECK(abs_value(r.k) == doctest::Approx(1.0 / 25.0).epsilon(1e-14));
    }
    SUBCASE("p-adic |x| = 1/5") {
        Valuation q5 = Valuation::padic(5);
        KVector x{Scalar::padic(Rational(5), q5), Scalar::padic(Rational(25), q5)};
        REQUIRE(sup_norm(x) == 0.2);
        AnnulusResult r = normalize_annulus(x);
        CHECK(sup_norm(r.y) == 1.0);
        CHECK(abs_value(r.k) == 5.0);
    }
    SUBCASE("zero vector rejected") {
        KVector x{Scalar::real(0.0)};
        CHECK_THROWS_AS(normalize_annulus(x), std::invalid_argument);
    }
}

TEST_CASE("annulus invariant on random vectors") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-100.0, 100.0);
    std::uniform_int_distribution<int> N(-30, 30), D(1, 9);
    Valuation q5 = Valuation::padic(5);
    for (int rep = 0; rep < 1000; ++rep) {
        KVector xr{Scalar::real(U(rng)), Scalar::real(U(rng)), Scalar::real(U(rng))};
        if (sup_norm(xr) > 0.0) {
            AnnulusResult r = normalize_annulus(xr);
            double ny = sup_norm(r.y);
            CHECK(ny <= 1.0);
            CHECK(ny >= theta(Valuation::real()));
            CHECK(abs_value(r.k) >= ny / sup_norm(xr) * (1.0 - 1e-12));
        }
        int n = N(rng);
        KVector xp{Scalar::padic(Rational(n == 0 ? 1 : n, D(rng)), q5),
                   Scalar::padic(Rational(N(rng), D(rng)), q5)};
        AnnulusResult r = normalize_annulus(xp);
        double ny = sup_norm(r.y);
        CHECK(ny == 1.0);  // discrete group: exact landing
        CHECK(abs_value(r.k) * sup_norm(xp) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("multiplicativity of the absolute value") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> U(-50.0, 50.0);
    std::uniform_int_distribution<int> N(-40, 40), D(1, 12);
    Valuation q5 = Valuation::padic(5);
    for (int rep = 0; rep < 10000; ++rep) {
        Scalar a = Scalar::real(U(rng)), b = Scalar::real(U(rng));
        double lhs = abs_value(a * b), rhs = abs_value(a) * abs_value(b);
        CHECK(std::fabs(lhs - rhs) <= 1e-12 * std::max(1.0, rhs));
        int na = N(rng), nb = N(rng);
        Scalar pa = Scalar::padic(Rational(na, D(rng)), q5);
        Scalar pb = Scalar::padic(Rational(nb, D(rng)), q5);
        // exact multiplicativity: v_p(ab) = v_p(a) + v_p(b)
        if (!pa.is_zero() && !pb.is_zero())
            CHECK(padic_valuation((pa * pb).rational_value(), 5) ==
                  padic_valuation(pa.rational_value(), 5) +
                      padic_valuation(pb.rational_value(), 5));
    }
}

TEST_CASE("ultrametric inequality is exact") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> N(-60, 60), D(1, 15);
    Valuation q5 = Valuation::padic(5);
    int equality_cases = 0;
    for (int rep = 0; rep < 10000; ++rep) {
        Scalar a = Scalar::padic(Rational(N(rng), D(rng)), q5);
        Scalar b = Scalar::padic(Rational(N(rng), D(rng)), q5);
        double s = abs_value(a + b);
        double ma = abs_value(a), mb = abs_value(b);
        CHECK(s <= std::max(ma, mb));
        if (ma != mb) {
            CHECK(s == std::max(ma, mb));
            ++equality_cases;
        }
    }
    CHECK(equality_cases > 1000);
}

TEST_CASE("rational arithmetic stays reduced and detects overflow") {
    Rational r(6, -4);
    CHECK(r.num == -3);
    CHECK(r.den == 2);
    Rational big(std::int64_t(1) << 62);
    CHECK_THROWS_AS(big * big, std::overflow_error);
    CHECK_THROWS_AS(Rational(1, 0), std::invalid_argument);
}

TEST_CASE("valuation JSON round trip") {
    Json jr = to_json(Valuation::real());
    CHECK(jr["kind"] == "real");
    CHECK(valuation_from_json(jr) == Valuation::real());
    Json jp = to_json(Valuation::padic(5));
    CHECK(jp["p"] == 5);
    CHECK(valuation_from_json(jp) == Valuation::padic(5));
    CHECK_THROWS_AS(valuation_from_json(Json{{"kind", "quaternion"}}),
                    std::invalid_argument);
}

TEST_CASE("value group floor") {
    Valuation q5 = Valuation::padic(5);
    CHECK(value_group_floor(q5, 1.0) == 1.0);
    CHECK(value_group_floor(q5, 0.3) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(value_group_floor(q5, 5.0) == 5.0);
    CHECK(value_group_floor(q5, 24.9) == 5.0);
    CHECK(value_group_floor(Valuation::real(), 0.77) == 0.77);
}
