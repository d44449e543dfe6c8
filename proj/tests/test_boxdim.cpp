#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dimest/boxdim.hpp"
#include "oracles.hpp"

using namespace dimest;

TEST_CASE("covering numbers") {
    SUBCASE("single point occupies one box at every scale") {
        PointCloud c = PointCloud::from_points({{0.3, 0.7}});
        for (double eps : {1.0, 0.1, 0.003}) CHECK(covering_number(c, eps) == 1);
    }
    SUBCASE("two points at sup distance 1") {
        PointCloud c = PointCloud::from_points({{0.0, 0.25}, {1.0, 0.25}});
        CHECK(covering_number(c, 0.25) == 2);
        CHECK(covering_number(c, 2.0) == 1);
    }
    SUBCASE("uniform square fills all four quadrant boxes") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        std::vector<std::vector<double>> pts;
        for (int i = 0; i < 10000; ++i) pts.push_back({U(rng), U(rng)});
        PointCloud c = PointCloud::from_points(std::move(pts));
        CHECK(covering_number(c, 0.5) == 4);
    }
    SUBCASE("monotone nonincreasing in eps") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        std::vector<std::vector<double>> pts;
        for (int i = 0; i < 3000; ++i) pts.push_back({U(rng), U(rng), U(rng)});
        PointCloud c = PointCloud::from_points(std::move(pts));
        std::int64_t prev = -1;
        for (double eps : {1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4, 1.0 / 2, 1.0}) {
            std::int64_t k = covering_number(c, eps);
            if (prev >= 0) CHECK(k <= prev);
            prev = k;
        }
    }
    SUBCASE("serial equals parallel") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        std::vector<std::vector<double>> pts;
        for (int i = 0; i < 20000; ++i) pts.push_back({U(rng), U(rng)});
        PointCloud c = PointCloud::from_points(std::move(pts));
        for (double eps : {0.3, 0.05, 0.01})
            CHECK(covering_number(c, eps, 0.0, Exec::serial) ==
                  covering_number(c, eps, 0.0, Exec::parallel));
    }
    SUBCASE("anchor shift changes counts by at most 2^D") {
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        std::vector<std::vector<double>> pts;
        for (int i = 0; i < 5000; ++i) pts.push_back({U(rng), U(rng)});
        PointCloud c = PointCloud::from_points(std::move(pts));
        for (double eps : {1.0 / 16, 1.0 / 8, 1.0 / 4}) {
            double k0 = double(covering_number(c, eps));
            double k1 = double(covering_number(c, eps, eps / 2.0));
            CHECK(k1 <= 4.0 * k0);
            CHECK(k0 <= 4.0 * k1);
        }
    }
    CHECK_THROWS_AS(covering_number(PointCloud::from_points({{0.0}}), 0.0),
                    std::invalid_argument);
}

TEST_CASE("dimension fits") {
    SUBCASE("single point has dimension zero") {
        PointCloud c = PointCloud::from_points({{0.5, 0.5}});
        DimensionFit fit = minkowski_dim(c, 1.0 / 64.0, 0.5);
        CHECK(fit.estimate == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(fit.r_squared == 1.0);
    }
    SUBCASE("points on a segment fit dimension 1") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        std::vector<std::vector<double>> pts;
        for (int i = 0; i < 10000; ++i) {
            double t = U(rng);
            pts.push_back({t, 0.25 + 0.5 * t});
        }
        PointCloud c = PointCloud::from_points(std::move(pts));
        DimensionFit fit = minkowski_dim(c, 1.0 / 128.0, 0.5);
        CHECK(fit.estimate == doctest::Approx(1.0).epsilon(0.05));
    }
    SUBCASE("Cantor middle thirds at depth 10") {
        std::vector<std::vector<double>> pts;
        for (double x : oracles::cantor_endpoints(10)) pts.push_back({x});
        PointCloud c = PointCloud::from_points(std::move(pts));
        DimensionFit fit = minkowski_dim(c, 1.5e-4, 0.5);
        CHECK(fit.estimate ==
              doctest::Approx(std::log(2.0) / std::log(3.0)).epsilon(0.08));
    }
    SUBCASE("estimate never exceeds the ambient dimension by much") {
        std::mt19937_64 rng(13);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        std::vector<std::vector<double>> pts;
        for (int i = 0; i < 20000; ++i) pts.push_back({U(rng), U(rng)});
        PointCloud c = PointCloud::from_points(std::move(pts));
        DimensionFit fit = minkowski_dim(c, 1.0 / 32.0, 0.5);
        CHECK(fit.estimate <= 2.0 + 0.1);
        CHECK(fit.estimate == doctest::Approx(2.0).epsilon(0.05));
        CHECK(fit.reliable);
    }
    SUBCASE("fewer than three scales is an error") {
        PointCloud c = PointCloud::from_points({{0.0}, {1.0}});
        CHECK_THROWS_AS(minkowski_dim(c, 0.4, 0.5), std::invalid_argument);
    }
}

TEST_CASE("trajectory embedding") {
    SUBCASE("constant trajectory collapses to one box") {
        DelaySystem sys = scalar_delay_system(0.0, 1.0, 0.0);
        Trajectory x = integrate(sys, [](double) { return Vec{2.0}; }, 0.0, 6.0, 0.05);
        PointCloud c = embed_trajectory(x, 1.0, 4, 0.05);
        CHECK(covering_number(c, 0.01) == 1);
    }
    SUBCASE("periodic trajectory embeds as a closed curve") {
        const double w = std::numbers::pi / 2.0;
        DelaySystem sys = scalar_delay_system(-w, 1.0, w);
        auto phi = [w](double t) { return Vec{std::cos(w * t)}; };
        Trajectory x = integrate(sys, phi, 0.0, 10.0, 2e-3);
        PointCloud c = embed_trajectory(x, 1.0, 8, 5e-4);
        DimensionFit fit = minkowski_dim(c, 1.0 / 64.0, 0.25);
        CHECK(fit.estimate == doctest::Approx(1.0).epsilon(0.1));
    }
    SUBCASE("scalar embedding stays within dimension one") {
        const double w = std::numbers::pi / 2.0;
        DelaySystem sys = scalar_delay_system(-w, 1.0, w);
        auto phi = [w](double t) { return Vec{std::cos(w * t)}; };
        Trajectory x = integrate(sys, phi, 0.0, 10.0, 2e-3);
        PointCloud c = embed_trajectory(x, 1.0, 1, 5e-4);
        CHECK(c.dim == 1);
        DimensionFit fit = minkowski_dim(c, 1.0 / 64.0, 0.25);
        CHECK(fit.estimate <= 1.1);
    }
    SUBCASE("insufficient coverage is an error") {
        DelaySystem sys = scalar_delay_system(0.0, 1.0, 0.0);
        Trajectory x = integrate(sys, [](double) { return Vec{1.0}; }, 0.0, 0.5, 0.125);
        CHECK_THROWS_AS(embed_trajectory(x, 1.0, 4, 0.05), std::invalid_argument);
    }
}

TEST_CASE("cloud CSV round trip") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(-5.0, 5.0);
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 200; ++i) pts.push_back({U(rng), U(rng), U(rng)});
    PointCloud c = PointCloud::from_points(pts);
    PointCloud back = cloud_from_csv(cloud_to_csv(c));
    REQUIRE(back.points.size() == c.points.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (int j = 0; j < 3; ++j) CHECK(back.points[i][j] == c.points[i][j]);
}
