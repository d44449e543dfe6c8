#include <doctest.h>

#include <cmath>
#include <random>

#include "dimest/dde.hpp"
#include "dimest/growth.hpp"

using namespace dimest;

namespace {
const Valuation R = Valuation::real();
const Valuation Q5 = Valuation::padic(5);
} // namespace

TEST_CASE("ladder construction rules") {
    CHECK_THROWS_AS(CompactnessLadder(R, {{0, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(CompactnessLadder(R, {{1, 1.0}, {2, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(CompactnessLadder(R, {{0, 1.0}, {0, 1.0}}), std::invalid_argument);
    CompactnessLadder lad(R, {{0, 2.0}, {1, 0.5}});
    CHECK_THROWS_AS(lad.rung(5), std::out_of_range);
}

TEST_CASE("rho_infinity profiles") {
    SUBCASE("constant ladder telescopes to rho^{1 - 1/s}") {
        CompactnessLadder lad = power_ladder(R, 1, 0.5, 1.0);
        RhoInfinityResult r = rho_infinity(lad, 50);
        for (int s = 2; s <= 50; ++s)
            CHECK(r.profile[s - 2] ==
                  doctest::Approx(std::pow(0.5, 1.0 - 1.0 / s)).epsilon(1e-13));
        CHECK(r.value == r.profile.back());
    }
    SUBCASE("delay ladder profile at s = 3") {
        RhoInfinityResult r = rho_infinity(ladder_from_delay(1.0, 1), 3);
        CHECK(r.profile.back() == doctest::Approx(std::pow(0.5, 1.0 / 3.0)).epsilon(1e-14));
        CHECK(r.profile.back() == doctest::Approx(0.7937).epsilon(1e-4));
    }
    SUBCASE("geometric ladder drives the profile to zero") {
        CompactnessLadder lad = power_ladder(R, 1, 1.0, 0.5);
        RhoInfinityResult r = rho_infinity(lad, 60);
        for (int s = 2; s <= 60; ++s)
            CHECK(r.profile[s - 2] ==
                  doctest::Approx(std::pow(2.0, -0.5 * (s - 1))).epsilon(1e-11));
        CHECK(r.value < 1e-8);
    }
    SUBCASE("insufficient rungs without a generator") {
        CompactnessLadder lad(R, {{0, 1.0}, {1, 0.5}, {2, 0.25}});
        CHECK_THROWS_AS(rho_infinity(lad, 10), std::out_of_range);
    }
}

TEST_CASE("Xi decompositions") {
    CompactnessLadder delay = ladder_from_delay(1.0, 1);

    SUBCASE("m = p k_1 collapses to the growth constant") {
        XiResult x = xi(delay, 2, 2);  // m = 2 k_1, rho_0 = e keeps s = 0 out
        CHECK(x.value == doctest::Approx(2.0).epsilon(1e-12));  // g(1, 2)
        CHECK(x.r == 0);
    }
    SUBCASE("m = 1, p = 1 on a ladder with k_1 = 1") {
        XiResult x = xi(delay, 1, 1);
        CHECK(x.value == doctest::Approx(1.0).epsilon(1e-12));  // g(1, 1)
    }
    SUBCASE("delay ladder, p = 1, m = k_3 = 3") {
        XiResult x = xi(delay, 3, 1);
        CHECK(x.value == doctest::Approx(2.0).epsilon(1e-12));  // 4 * 1 * 1/2
        CHECK(x.candidates.size() == 2);  // (s, r) = (3, 0) and (2, 1) tie
        for (const XiCandidate& c : x.candidates)
            CHECK(std::exp(c.log_value) == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("decompositions beyond the stored rungs surface as errors") {
        CompactnessLadder lad(R, {{0, 1.0}, {3, 0.5}, {4, 0.25}});
        CHECK_THROWS_AS(xi(lad, 10, 1), std::out_of_range);
    }
    SUBCASE("ultrametric flat ladder gives exactly 1") {
        CompactnessLadder lad = power_ladder(Q5, 1, 1.0, 1.0);
        XiResult x = xi(lad, 6, 2);
        CHECK(x.value == 1.0);
        CHECK(x.exact);
    }
}

TEST_CASE("Upsilon") {
    CompactnessLadder delay = ladder_from_delay(1.0, 1);
    SUBCASE("p = 1 is the single r = 1 term") {
        UpsilonResult u = upsilon(delay, 3, 1);
        CHECK(u.value == doctest::Approx(xi(delay, 3, 1).value).epsilon(1e-12));
    }
    SUBCASE("delay ladder m = 3, p = 2 is finite and positive") {
        UpsilonResult u = upsilon(delay, 3, 2);
        CHECK(u.value > 0.0);
        CHECK(std::isfinite(u.value));
        CHECK(u.value == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("flat real ladder: padded variant matches g^{1 + 1/p}") {
        CompactnessLadder flat = power_ladder(R, 1, 1.0, 1.0);
        UpsilonResult u = upsilon(flat, 3, 2);
        double g = 4.0;  // g(1, 3)
        CHECK(u.value_padded == doctest::Approx(std::pow(g, 1.5)).epsilon(1e-12));
        CHECK(u.value_padded <= g * g);
        CHECK(u.value == doctest::Approx(g).epsilon(1e-12));  // empty-block reading
    }
}

TEST_CASE("search_mp") {
    SUBCASE("constant ladder rho = 1/2 with varpi = 0.9") {
        SearchParams params;
        params.varpi = 0.9;
        SearchResult sr = search_mp(power_ladder(R, 1, 0.5, 1.0), params);
        REQUIRE(sr.certificate.has_value());
        CHECK(std::exp(sr.certificate->log_xi /
                       double(sr.certificate->m * sr.certificate->p)) < 0.9);
        CHECK(sr.certificate->chi_star < 1.0);
    }
    SUBCASE("varpi below the profile estimate fails with a diagnostic") {
        SearchParams params;
        params.varpi = 0.4;
        SearchResult sr = search_mp(power_ladder(R, 1, 0.5, 1.0), params);
        CHECK_FALSE(sr.certificate.has_value());
        CHECK(sr.diagnostic.find("rho_infinity") != std::string::npos);
    }
    SUBCASE("delay ladder with varpi = 0.95") {
        SearchParams params;
        params.varpi = 0.95;
        params.p_max = 2;
        params.s_max = 5;
        SearchResult sr = search_mp(ladder_from_delay(1.0, 1), params);
        REQUIRE(sr.certificate.has_value());
        CHECK(sr.certificate->m >= 1);
        CHECK(sr.certificate->p >= 1);
        CHECK(sr.certificate->chi_star < 1.0);
        CHECK(sr.certificate->varrho > sr.certificate->chi_star);
    }
    SUBCASE("serial and parallel grids agree") {
        SearchParams params;
        params.varpi = 0.95;
        params.p_max = 3;
        params.s_max = 5;
        CompactnessLadder lad = ladder_from_delay(1.0, 1);
        SearchResult a = search_mp(lad, params, Exec::serial);
        SearchResult b = search_mp(lad, params, Exec::parallel);
        REQUIRE(a.grid.size() == b.grid.size());
        for (std::size_t i = 0; i < a.grid.size(); ++i) {
            CHECK(a.grid[i].ratio == b.grid[i].ratio);
            CHECK(a.grid[i].feasible == b.grid[i].feasible);
        }
        CHECK(a.certificate->m == b.certificate->m);
    }
    SUBCASE("infeasible limits report the best ratio") {
        SearchParams params;
        params.varpi = 0.9;  // above the estimate but limits too tight
        params.p_max = 1;
        params.s_max = 3;
        SearchResult sr = search_mp(ladder_from_delay(1.0, 1), params);
        CHECK_FALSE(sr.certificate.has_value());
        CHECK(sr.best_ratio > 0.0);
        CHECK(sr.diagnostic.find("best ratio") != std::string::npos);
    }
}

TEST_CASE("decay envelope") {
    GrowthCertificate cert;
    cert.valuation = R;
    cert.m = 1;
    cert.p = 1;
    cert.log_upsilon = 0.0;
    cert.log_g_m = 0.0;
    cert.c = 1.0;
    cert.chi_star = 0.5;
    CHECK(decay_envelope(cert, 3) == doctest::Approx(0.125).epsilon(1e-14));
    CHECK(decay_envelope(cert, 0) == doctest::Approx(1.0).epsilon(1e-14));
    GrowthCertificate doubled = cert;
    doubled.c = 2.0;
    for (int n : {0, 1, 5})
        CHECK(decay_envelope(doubled, n) ==
              doctest::Approx(0.5 * decay_envelope(cert, n)).epsilon(1e-12));
    for (int n = 0; n < 20; ++n)
        CHECK(decay_envelope(cert, n + 1) < decay_envelope(cert, n));
}

TEST_CASE("direction neighborhood") {
    GrowthCertificate cert;
    cert.valuation = Valuation::real(1.0 - 1e-12);
    cert.m = 2;
    cert.chi_star = 0.25;
    cert.varrho = 1.0;
    cert.varkappa = 1.0;
    DirectionNeighborhood d1 = direction_neighborhood(cert, 0.5, 1);
    CHECK(d1.radius == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(d1.coefficient_bound == doctest::Approx(2.0).epsilon(1e-9));
    DirectionNeighborhood d2 = direction_neighborhood(cert, 0.5, 2);
    CHECK(d2.radius == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    // radius -> 0 geometrically when chi < varrho
    double prev = 1e300;
    for (int n = 1; n <= 40; ++n) {
        double r = direction_neighborhood(cert, 0.5, n).radius;
        CHECK(r < prev);
        prev = r;
    }
    CHECK(prev < 1e-11);
    CHECK_THROWS_AS(direction_neighborhood(cert, 0.2, 1), std::invalid_argument);
    GrowthCertificate tight = cert;
    tight.varkappa = 0.1;
    // kappa rho^N <= chi^N at small N: no neighborhood yet
    CHECK_THROWS_AS(direction_neighborhood(tight, 0.9, 1), std::domain_error);
}

TEST_CASE("Minkowski bound") {
    GrowthCertificate cert;
    cert.valuation = R;
    cert.m = 3;
    cert.chi_star = 0.25;
    cert.varrho = 0.5;
    CHECK(minkowski_bound(cert) == doctest::Approx(4.0).epsilon(1e-13));
    cert.varrho = 1.0;
    CHECK(minkowski_bound(cert) == 2.0);  // exactly m - 1
    cert.m = 7;
    CHECK(minkowski_bound(cert) == 6.0);
    // monotone nonincreasing in varrho
    cert.m = 3;
    double prev = 1e300;
    for (double rho : {0.3, 0.5, 0.7, 0.9, 1.0}) {
        cert.varrho = rho;
        double b = minkowski_bound(cert);
        CHECK(b <= prev + 1e-12);
        CHECK(b >= double(cert.m - 1));
        prev = b;
    }
    cert.varrho = 0.2;  // below chi*
    CHECK_THROWS_AS(minkowski_bound(cert), std::domain_error);
    cert.valuation = Q5;
    cert.varrho = 0.5;
    CHECK_THROWS_AS(minkowski_bound(cert), std::invalid_argument);
}

TEST_CASE("nonlinear eta") {
    SUBCASE("M = C = L = 1, Lambda = 2 converges to 4/3") {
        EtaResult e = nonlinear_eta(1.0, 1.0, 1.0, 2.0, 0);
        CHECK(e.finite);
        CHECK(e.q == 4.0);
        CHECK(e.value == doctest::Approx(4.0 / 3.0).epsilon(1e-9));
        // closed form of the increasing limit: M q / (q - 1)
        CHECK(e.value == doctest::Approx(1.0 * 4.0 / 3.0).epsilon(1e-9));
    }
    SUBCASE("q = 1 diverges with a diagnostic") {
        EtaResult e = nonlinear_eta(1.0, 0.0, 1.0, 2.0, 0);
        CHECK_FALSE(e.finite);
        CHECK(std::isinf(e.value));
        CHECK(e.diagnostic.find("q") != std::string::npos);
    }
    SUBCASE("M = 0 gives zero") { CHECK(nonlinear_eta(0.0, 1.0, 1.0, 2.0, 0).value == 0.0); }
    SUBCASE("N0 does not change the supremum when q > 1") {
        CHECK(nonlinear_eta(1.0, 1.0, 1.0, 2.0, 10).value ==
              doctest::Approx(4.0 / 3.0).epsilon(1e-9));
    }
    CHECK_THROWS_AS(nonlinear_eta(1.0, 1.0, 0.0, 2.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(nonlinear_eta(1.0, 1.0, 1.0, 1.0, 0), std::invalid_argument);
}

TEST_CASE("perturbation gate") {
    NonlinearityBudget b;
    b.M = 1.0;
    b.L = 1.0;
    b.C = 1.0;
    b.Lambda = 2.0;
    b.gamma = 1.0;
    CHECK(perturbation_gate(b, 1.0, 3) == doctest::Approx(1.0 / 64.0).epsilon(1e-12));
    CHECK(perturbation_gate(b, 1.0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    // A = (L+C)^Lambda cancels the exponents
    for (long long n : {0, 1, 7, 30})
        CHECK(perturbation_gate(b, 4.0, n) == doctest::Approx(1.0).epsilon(1e-11));
}

TEST_CASE("budget construction derives eta and gamma") {
    NonlinearityBudget b = NonlinearityBudget::make(1.0, 1.0, 1.0, 2.0, 0, 0.5, 0.25);
    CHECK(b.eta == doctest::Approx(4.0 / 3.0).epsilon(1e-9));
    CHECK(b.gamma == doctest::Approx((0.25) / (4.0 / 3.0)).epsilon(1e-9));
    CHECK_THROWS_AS(NonlinearityBudget::make(1.0, 1.0, 1.0, 2.0, 0, 0.2, 0.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(NonlinearityBudget::make(1.0, 0.0, 1.0, 2.0, 0, 0.5, 0.25),
                    std::domain_error);  // q = 1: eta infinite
}

TEST_CASE("error recursion") {
    NonlinearityBudget b;
    b.M = 1.0;
    b.L = 1.0;
    b.C = 1.0;
    b.Lambda = 2.0;

    SUBCASE("M = 0 keeps the error at zero") {
        NonlinearityBudget z = b;
        z.M = 0.0;
        RecursionResult r = error_recursion(z, 1.0, {2.0, 4.0, 8.0}, 3);
        for (double e : r.iterates) CHECK(e == 0.0);
    }
    SUBCASE("hand iteration with geometric pathwise bounds") {
        RecursionResult r = error_recursion(b, 1.0, {2.0, 4.0, 8.0}, 3);
        CHECK(r.iterates[0] == 1.0);  // e_0 = M d0^Lambda
        CHECK(r.iterates[1] == 5.0);  // M 2^2 + C e_0
        CHECK(r.iterates[2] == 21.0);
        CHECK(r.iterates[3] == 85.0);
        // bounds from the (L+C)^{k+1} chain match the majorant exactly
        RecursionResult exact = error_recursion(b, 1.0, {2.0, 4.0, 8.0}, 3);
        CHECK(exact.final_value == doctest::Approx(exact.majorant).epsilon(1e-12));
    }
    SUBCASE("random draws stay below the closed-form majorant") {
        std::mt19937_64 rng(41);
        std::uniform_real_distribution<double> U(0.1, 2.0);
        for (int rep = 0; rep < 1000; ++rep) {
            NonlinearityBudget q;
            q.M = U(rng);
            q.L = U(rng);
            q.C = U(rng) + 0.5;
            q.Lambda = 1.0 + U(rng);
            double d0 = U(rng) / 2.0;
            int N = 10;
            std::vector<double> path;
            for (int k = 0; k < N; ++k)
                path.push_back(std::pow(q.L + q.C, double(k + 1)) * d0);
            RecursionResult r = error_recursion(q, d0, path, N);
            CHECK(r.final_value <= r.majorant * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("synthetic cocycle obeys the decay envelope") {
    SearchParams params;
    params.varpi = 0.9;
    params.p_max = 1;
    params.s_max = 3;
    CocycleCheck cc = verify_cocycle_envelope({0.9, 0.3, 0.15, 0.075}, params, 30);
    CHECK(cc.hypothesis_ok);
    CHECK(cc.passed);
    CHECK(cc.certificate.m == 3);
    for (const CocycleRow& row : cc.rows) CHECK(row.separation <= row.envelope);
}

TEST_CASE("stability cap") {
    CompactnessLadder delay = ladder_from_delay(1.0, 1);
    StabilityCap c1 = stability_cap(1.0, delay);
    CHECK(c1.level == 2);
    CHECK(c1.dimension_cap == 2);
    StabilityCap c2 = stability_cap(0.5, delay);
    CHECK(c2.level == 1);
    CHECK(c2.dimension_cap == 1);
    // M large: level grows like log2(tau M)
    StabilityCap c3 = stability_cap(1e6, delay);
    CHECK(c3.level >= 20);
    CHECK(c3.level <= 23);
    CompactnessLadder fixed(Valuation::real(), {{0, 3.0}, {1, 2.0}});
    CHECK_THROWS_AS(stability_cap(1.0, fixed), std::out_of_range);
}

TEST_CASE("delay ladder values") {
    SUBCASE("tau = 1, d = 1") {
        CompactnessLadder lad = ladder_from_delay(1.0, 1);
        long long k_expect[] = {0, 1, 2, 3, 5, 9, 17};
        double rho_expect[] = {std::exp(1.0), 1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125};
        for (int i = 0; i < 7; ++i) {
            CHECK(lad.rung(i).k == k_expect[i]);
            CHECK(lad.rung(i).rho == doctest::Approx(rho_expect[i]).epsilon(1e-15));
        }
    }
    SUBCASE("tau = 4, d = 2") {
        CompactnessLadder lad = ladder_from_delay(4.0, 2);
        CHECK(lad.rung(1).k == 2);
        CHECK(lad.rung(2).k == 4);
        CHECK(lad.rung(3).k == 6);
        CHECK(lad.rung(4).k == 10);
        CHECK(lad.rung(0).rho == doctest::Approx(std::exp(4.0)).epsilon(1e-15));
        CHECK(lad.rung(1).rho == doctest::Approx(std::exp(3.0)).epsilon(1e-15));
        CHECK(lad.rung(2).rho == doctest::Approx(std::exp(2.0)).epsilon(1e-15));
        CHECK(lad.rung(3).rho == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(lad.rung(4).rho == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("branch boundary at tau = 1") {
        // exp(tau - 2^{i-1}) and tau/2^{i-1} agree at i = 1
        CHECK(std::exp(1.0 - 1.0) == 1.0);
        CHECK(ladder_from_delay(1.0, 1).rung(1).rho == 1.0);
    }
    CHECK_THROWS_AS(ladder_from_delay(0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(ladder_from_delay(1.0, 0), std::invalid_argument);
}
