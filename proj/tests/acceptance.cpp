// Acceptance suite: every criterion runs at its stated tolerance and prints
// one pass/fail line.  Exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dimest/boxdim.hpp"
#include "dimest/pipeline.hpp"
#include "oracles.hpp"

using namespace dimest;

namespace {

struct Criterion {
    int id;
    std::string label;
    double limit_seconds;
    std::function<bool(std::string&)> run;
};

const Valuation R = Valuation::real();
const Valuation Q5 = Valuation::padic(5);

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

// ---- 1: g-oracle exact values and the Hadamard bound -----------------------

bool crit_g_oracle(std::string& detail) {
    bool ok = true;
    GValue g2 = g_oracle(1.0, 2, R);
    GValue g3 = g_oracle(1.0, 3, R);
    ok &= g2.value == 2.0 && g2.exact;
    ok &= g3.value == 4.0 && g3.exact;
    for (int n = 1; n <= 5; ++n) {
        GValue g = g_oracle(1.0, n, R);
        ok &= g.exact;
        ok &= g.value <= std::pow(double(n), 0.5 * double(n)) * (1.0 + 1e-12);
    }
    detail = "g(1,2) = " + fmt(g2.value) + ", g(1,3) = " + fmt(g3.value) +
             ", g(1,5) = " + fmt(g_oracle(1.0, 5, R).value);
    return ok;
}

// ---- 2: determinant multiplicativity ---------------------------------------

bool crit_det_multiplicative(std::string& detail) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> dim(1, 4), entry(-4, 4);
    double worst = 0.0;
    bool exact = true;
    for (int rep = 0; rep < 1000; ++rep) {
        int n = dim(rng);
        NormedSpace SR = NormedSpace::sup(R, n);
        Mat A = Mat::zero(R, n, n), B = Mat::zero(R, n, n);
        for (int i = 0; i < n * n; ++i) {
            A.a[i] = Scalar::real(entry(rng));
            B.a[i] = Scalar::real(entry(rng));
        }
        LinearMap T(SR, SR, A), S(SR, SR, B);
        double lhs = pullback_det(compose(S, T));
        double rhs = pullback_det(S) * pullback_det(T);
        worst = std::max(worst, std::fabs(lhs - rhs) / std::max(1.0, rhs));

        NormedSpace SQ = NormedSpace::sup(Q5, n);
        Mat Aq = Mat::zero(Q5, n, n), Bq = Mat::zero(Q5, n, n);
        for (int i = 0; i < n * n; ++i) {
            Aq.a[i] = Scalar::padic(Rational(entry(rng)), Q5);
            Bq.a[i] = Scalar::padic(Rational(entry(rng)), Q5);
        }
        LinearMap Tq(SQ, SQ, Aq), Sq(SQ, SQ, Bq);
        Scalar dc = matrix_determinant(compose(Sq, Tq).entries);
        Scalar dp = matrix_determinant(Sq.entries) * matrix_determinant(Tq.entries);
        exact &= dc == dp;  // exact rational multiplicativity
        double lq = pullback_det(compose(Sq, Tq));
        double rq = pullback_det(Sq) * pullback_det(Tq);
        exact &= std::fabs(lq - rq) <= 1e-14 * std::max(1.0, rq);
    }
    detail = "10^3 pairs, real rel err " + fmt(worst) + ", Q_5 exact: " +
             (exact ? "yes" : "no");
    return worst <= 1e-9 && exact;
}

// ---- 3: rho_infinity profiles ----------------------------------------------

bool crit_rho_infinity(std::string& detail) {
    const double rho = 0.9995;
    RhoInfinityResult cst = rho_infinity(power_ladder(R, 1, rho, 1.0), 1000);
    double err_const = std::fabs(cst.value - rho);
    RhoInfinityResult del = rho_infinity(ladder_from_delay(1.0, 1), 3);
    double err_delay = std::fabs(del.profile.back() - std::pow(0.5, 1.0 / 3.0));
    detail = "constant-ladder gap " + fmt(err_const) + ", delay profile_3 gap " +
             fmt(err_delay);
    return err_const <= 1e-6 && err_delay <= 1e-12;
}

// ---- 4: Minkowski bound closed form ----------------------------------------

bool crit_minkowski_bound(std::string& detail) {
    GrowthCertificate cert;
    cert.valuation = R;
    cert.chi_star = 0.5;
    cert.varrho = 1.0;
    bool ok = true;
    for (long long m : {2, 3, 5, 17}) {
        cert.m = m;
        ok &= minkowski_bound(cert) == double(m - 1);
    }
    cert.m = 3;
    cert.chi_star = 0.25;
    cert.varrho = 0.5;
    double v = minkowski_bound(cert);
    ok &= std::fabs(v - 4.0) <= 1e-12;
    detail = "varrho = 1 gives exactly m - 1; (0.25, 0.5, 3) -> " + fmt(v);
    return ok;
}

// ---- 5: synthetic cocycle against the decay envelope ------------------------

bool crit_cocycle(std::string& detail) {
    SearchParams params;
    params.varpi = 0.9;
    params.p_max = 1;
    params.s_max = 3;
    CocycleCheck cc = verify_cocycle_envelope({0.9, 0.3, 0.15, 0.075}, params, 30);
    bool ok = cc.hypothesis_ok && cc.passed;
    for (const CocycleRow& row : cc.rows) ok &= row.separation <= row.envelope;
    detail = "m = " + std::to_string(cc.certificate.m) +
             ", chi* = " + fmt(cc.certificate.chi_star) + ", A_30 = " +
             fmt(cc.rows.back().separation) + " <= " + fmt(cc.rows.back().envelope);
    return ok;
}

// ---- 6: DDE integrator accuracy ---------------------------------------------

bool crit_integrator(std::string& detail) {
    const double w = std::numbers::pi / 2.0;
    DelaySystem sys = scalar_delay_system(-w, 1.0, w);
    auto phi = [w](double t) { return Vec{std::cos(w * t)}; };
    Trajectory x = integrate(sys, phi, 0.0, 10.0, 1e-3);
    double err = 0.0;
    for (double t = 0.0; t <= 10.0 + 1e-12; t += 5e-4)
        err = std::max(err, std::fabs(x.eval(std::min(t, 10.0))[0] - std::cos(w * t)));

    DelaySystem unit = scalar_delay_system(-1.0, 1.0, 1.0);
    Trajectory y = integrate(unit, [](double) { return Vec{1.0}; }, 0.0, 1.5, 1e-3);
    double at_one = std::fabs(y.eval(1.0)[0]);

    detail = "cosine sup err " + fmt(err) + ", |x(1)| = " + fmt(at_one);
    return err <= 1e-6 && at_one <= 1e-9;
}

// ---- 7: rescaling -------------------------------------------------------------

bool crit_rescaling(std::string& detail) {
    DelaySystem sys = scalar_delay_system(-2.0, 1.0, 2.0);
    RescaleResult rs = rescale_time(sys);
    auto phi = [](double t) { return Vec{std::cos(t)}; };
    Trajectory x = integrate(sys, phi, 0.0, 8.0, 1.0 / 128.0);
    InitialFn phi2 = [&phi](double s) { return phi(s / 2.0); };
    Trajectory xt = integrate(rs.transformed, phi2, 0.0, 16.0, 1.0 / 128.0);
    double err = 0.0;
    for (double s = 0.0; s <= 16.0; s += 0.01)
        err = std::max(err, std::fabs(xt.eval(s)[0] - x.eval(s / 2.0)[0]));
    double worst = 0.0;
    for (double s = 0.0; s <= 16.0; s += 0.01)
        worst = std::max(worst, lipschitz_bound_at(rs.transformed, s));
    detail = "r = " + fmt(rs.r) + ", trajectory mismatch " + fmt(err) +
             ", transformed majorant sup " + fmt(worst);
    return rs.r == 2.0 && err <= 1e-4 && worst <= 1.0 + 1e-12;
}

// ---- 8: restricted norms against the dyadic ladder ---------------------------

bool crit_restricted(std::string& detail) {
    double worst = 0.0;
    bool ok = true;
    std::vector<DelaySystem> family;
    family.push_back(scalar_delay_system(-1.0, 1.0, 1.0));
    family.push_back(scalar_delay_system(1.0, 1.0, 1.0));
    {
        // sign-switching coefficient at tau/2
        DelaySystem sw;
        sw.tau = 1.0;
        sw.d = 1;
        sw.linear = true;
        LinearTerm term;
        term.A = MatPiecewise{{0.5}, {DMat{1.0}, DMat{-1.0}}};
        term.sigma = Piecewise::constant(1.0);
        sw.terms.push_back(term);
        sw.majorant = Piecewise::constant(1.0);
        sw.breakpoints = {0.5};
        sw.label = "sign switch";
        family.push_back(sw);
    }
    {
        // shorter delay, still majorant 1
        DelaySystem sh = scalar_delay_system(1.0, 1.0, 1.0);
        sh.terms[0].sigma = Piecewise::constant(0.5);
        sh.label = "sigma = 1/2";
        family.push_back(sh);
    }
    for (const DelaySystem& sys : family) {
        RestrictedNormResult r = restricted_norm_estimate(sys, 2, 100, 1.0 / 64.0, 77);
        worst = std::max(worst, r.estimate);
        ok &= r.estimate <= 0.55;
    }
    detail = "worst level-2 estimate " + fmt(worst) + " <= 0.55 (rho_2 = 1/2 + 10%)";
    return ok;
}

// ---- 9: variational convergence ----------------------------------------------

bool crit_variational(std::string& detail) {
    DelaySystem sys = logistic_delay_system();
    auto phi = [](double t) { return Vec{0.5 + 0.2 * t}; };
    auto xi = [](double t) { return Vec{1.0 + 0.5 * t}; };
    double T = 2.0, hint = 1e-3;
    Trajectory V = variational_solve(sys, phi, xi, T, hint);
    Trajectory base = integrate(sys, phi, 0.0, T, hint);
    std::vector<double> lx, ly;
    for (double h : {1e-2, 1e-3, 1e-4}) {
        auto pert = [&phi, &xi, h](double t) { return Vec{phi(t)[0] + h * xi(t)[0]}; };
        Trajectory xp = integrate(sys, pert, 0.0, T, hint);
        double err = 0.0;
        for (double t = 0.0; t <= T; t += 0.01)
            err = std::max(err, std::fabs(xp.eval(t)[0] - base.eval(t)[0] - h * V.eval(t)[0]));
        lx.push_back(std::log(h));
        ly.push_back(std::log(err / h));
    }
    double n = 3, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < 3; ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    detail = "log-log slope " + fmt(slope);
    return slope >= 0.9;
}

// ---- 10: box counting ----------------------------------------------------------

bool crit_boxdim(std::string& detail) {
    std::vector<std::vector<double>> cantor;
    for (double x : oracles::cantor_endpoints(10)) cantor.push_back({x});
    DimensionFit cf = minkowski_dim(PointCloud::from_points(std::move(cantor)), 1.5e-4, 0.5);
    double target = std::log(2.0) / std::log(3.0);

    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<std::vector<double>> square;
    for (int i = 0; i < 10000; ++i) square.push_back({U(rng), U(rng)});
    DimensionFit sf = minkowski_dim(PointCloud::from_points(std::move(square)),
                                    1.0 / 32.0, 0.5);

    detail = "Cantor " + fmt(cf.estimate) + " (target " + fmt(target) + "), square " +
             fmt(sf.estimate);
    return std::fabs(cf.estimate - target) <= 0.05 && std::fabs(sf.estimate - 2.0) <= 0.05;
}

// ---- 11: nonlinear budget -------------------------------------------------------

bool crit_budget(std::string& detail) {
    EtaResult eta = nonlinear_eta(1.0, 1.0, 1.0, 2.0, 0);
    bool ok = eta.finite && std::fabs(eta.value - 4.0 / 3.0) <= 1e-9;

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.1, 2.0);
    for (int rep = 0; rep < 1000; ++rep) {
        NonlinearityBudget b;
        b.M = U(rng);
        b.L = U(rng);
        b.C = U(rng) + 0.5;
        b.Lambda = 1.0 + U(rng);
        double d0 = U(rng) / 2.0;
        int N = 12;
        std::vector<double> path;
        for (int k = 0; k < N; ++k) path.push_back(std::pow(b.L + b.C, double(k + 1)) * d0);
        RecursionResult r = error_recursion(b, d0, path, N);
        ok &= r.final_value <= r.majorant * (1.0 + 1e-9);
    }
    detail = "eta = " + fmt(eta.value) + " (target 4/3), 10^3 recursion draws dominated";
    return ok;
}

// ---- 12: end-to-end determinism ------------------------------------------------

bool crit_pipeline_deterministic(std::string& detail) {
    std::filesystem::path spec_path;
    for (const char* cand : {"data/delay_tau1_d1.json", "../data/delay_tau1_d1.json",
                             "../../data/delay_tau1_d1.json"}) {
        if (std::filesystem::exists(cand)) {
            spec_path = cand;
            break;
        }
    }
    if (spec_path.empty()) {
        detail = "shipped example data/delay_tau1_d1.json not found";
        return false;
    }
    PipelineSpec spec = parse_spec(spec_path.string());
    auto tmp = std::filesystem::temp_directory_path();
    std::string dir_a = (tmp / "dimest_acceptance_a").string();
    std::string dir_b = (tmp / "dimest_acceptance_b").string();
    PipelineResult ra = run_pipeline(spec);
    PipelineResult rb = run_pipeline(spec);
    write_pipeline_artifacts(ra, dir_a);
    write_pipeline_artifacts(rb, dir_b);
    bool ok = ra.exit_code == 0 && rb.exit_code == 0;
    for (const char* name : {"report.json", "certificate.json", "bound.csv"}) {
        std::ifstream fa(std::filesystem::path(dir_a) / name, std::ios::binary);
        std::ifstream fb(std::filesystem::path(dir_b) / name, std::ios::binary);
        std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
        std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
        ok &= !sa.empty() && sa == sb;
    }
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
    double bound = ra.report.contains("dimension_bound")
                       ? ra.report["dimension_bound"]["value"].get<double>()
                       : -1.0;
    detail = "two seeded runs byte-identical, bound = " + fmt(bound);
    return ok;
}

} // namespace

int main() {
    std::vector<Criterion> criteria{
        {1, "g-oracle exact values, Hadamard bound for n <= 5", 10.0, crit_g_oracle},
        {2, "determinant multiplicativity over R and Q_5", 30.0, crit_det_multiplicative},
        {3, "rho_infinity convergence and delay profile", 30.0, crit_rho_infinity},
        {4, "Minkowski bound closed form", 10.0, crit_minkowski_bound},
        {5, "synthetic cocycle within the decay envelope", 60.0, crit_cocycle},
        {6, "DDE integrator accuracy", 30.0, crit_integrator},
        {7, "time rescaling to operator norm <= 1", 30.0, crit_rescaling},
        {8, "restricted norms vs the dyadic ladder", 120.0, crit_restricted},
        {9, "variational convergence on logistic delay", 60.0, crit_variational},
        {10, "box counting: Cantor set and unit square", 60.0, crit_boxdim},
        {11, "nonlinear budget: eta and the error recursion", 30.0, crit_budget},
        {12, "end-to-end pipeline determinism", 60.0, crit_pipeline_deterministic},
    };

    int failures = 0;
    for (Criterion& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool pass = false;
        try {
            pass = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool in_time = secs <= c.limit_seconds;
        bool ok = pass && in_time;
        std::printf("[%2d] %s  %s (%.2fs%s)  %s\n", c.id, ok ? "PASS" : "FAIL",
                    c.label.c_str(), secs, in_time ? "" : " OVER LIMIT", detail.c_str());
        if (!ok) ++failures;
    }
    if (failures == 0)
        std::printf("all %zu acceptance criteria passed\n", criteria.size());
    else
        std::printf("%d acceptance criteria FAILED\n", failures);
    return failures;
}
