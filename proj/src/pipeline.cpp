#include "dimest/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace dimest {

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
    throw std::invalid_argument(path + ": " + what);
}

Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    Json j;
    in >> j;
    return j;
}

std::string fmt(double x) {
    char buf[40];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    (void)ec;
    return std::string(buf, end);
}

} // namespace

PipelineSpec parse_spec(const std::string& path) {
    Json j = load_json_file(path);
    return parse_spec_json(j, std::filesystem::path(path).parent_path().string());
}

PipelineSpec parse_spec_json(const Json& j, const std::string& base_dir) {
    if (!j.is_object()) bad("$", "pipeline spec must be a JSON object");
    PipelineSpec spec;
    spec.echo = j;

    if (!j.contains("input") || !j.at("input").is_object())
        bad("$.input", "need an input object with a ladder or delay_system");
    const Json& input = j.at("input");
    auto resolve = [&](const Json& node) -> Json {
        if (node.is_string()) {
            std::filesystem::path p = node.get<std::string>();
            if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
            return load_json_file(p.string());
        }
        return node;
    };
    if (input.contains("ladder") == input.contains("delay_system"))
        bad("$.input", "exactly one of ladder or delay_system is required");
    if (input.contains("ladder")) spec.ladder = ladder_from_json(resolve(input.at("ladder")));
    if (input.contains("delay_system"))
        spec.delay_system = delay_system_from_json(resolve(input.at("delay_system")));

    if (!j.contains("varpi")) bad("$.varpi", "missing (growth rate threshold)");
    spec.search.varpi = j.at("varpi").get<double>();
    if (!(spec.search.varpi > 0.0)) bad("$.varpi", "must be positive");
    spec.search.varrho = j.value("varrho", 1.0);
    if (!(spec.search.varrho > 0.0 && spec.search.varrho <= 1.0))
        bad("$.varrho", "must lie in (0, 1]");
    spec.search.varkappa = j.value("varkappa", 1.0);
    if (!(spec.search.varkappa > 0.0 && spec.search.varkappa <= 1.0))
        bad("$.varkappa", "must lie in (0, 1]");
    spec.search.c = j.value("c", 1.0);
    if (!(spec.search.c > 0.0)) bad("$.c", "must be positive");
    spec.search.p_max = j.value("p_max", 8);
    spec.search.s_max = j.value("s_max", 12);
    if (spec.search.p_max < 1 || spec.search.p_max > 64) bad("$.p_max", "must lie in 1..64");
    if (spec.search.s_max < 2 || spec.search.s_max > 64) bad("$.s_max", "must lie in 2..64");
    spec.iota = j.value("iota", 1.0);
    if (!(spec.iota > 0.0)) bad("$.iota", "must be positive");
    spec.seed = j.value("seed", std::uint64_t(0));
    spec.output_dir = j.value("output_dir", std::string{});

    if (j.contains("crosscheck")) {
        const Json& c = j.at("crosscheck");
        spec.crosscheck.horizon = c.value("horizon", spec.crosscheck.horizon);
        spec.crosscheck.step = c.value("step", spec.crosscheck.step);
        spec.crosscheck.restricted_level =
            c.value("restricted_level", spec.crosscheck.restricted_level);
        spec.crosscheck.restricted_samples =
            c.value("restricted_samples", spec.crosscheck.restricted_samples);
        spec.crosscheck.restricted_step =
            c.value("restricted_step", spec.crosscheck.restricted_step);
        spec.crosscheck.embed_dim = c.value("embed_dim", spec.crosscheck.embed_dim);
        spec.crosscheck.embed_stride = c.value("embed_stride", spec.crosscheck.embed_stride);
        if (!(spec.crosscheck.horizon > 0.0)) bad("$.crosscheck.horizon", "must be positive");
        if (!(spec.crosscheck.step > 0.0)) bad("$.crosscheck.step", "must be positive");
        if (spec.crosscheck.restricted_level < 0)
            bad("$.crosscheck.restricted_level", "must be >= 0");
        if (spec.crosscheck.embed_dim < 1) bad("$.crosscheck.embed_dim", "must be >= 1");
    }
    return spec;
}

namespace {

std::string bound_table_csv(const SearchResult& sr,
                            const std::optional<double>& dimension_bound) {
    std::string csv = "section,p,s,m,value,ratio,feasible\n";
    for (std::size_t i = 0; i < sr.rho_profile.profile.size(); ++i) {
        csv += "profile,,," + std::to_string(i + 2) + "," +
               fmt(sr.rho_profile.profile[i]) + ",,\n";
    }
    for (const SearchCell& cell : sr.grid) {
        if (cell.m < 1) continue;
        csv += "grid," + std::to_string(cell.p) + "," + std::to_string(cell.s) + "," +
               std::to_string(cell.m) + "," + fmt(cell.log_xi) + "," + fmt(cell.ratio) +
               "," + (cell.feasible ? "1" : "0") + "\n";
    }
    if (dimension_bound) csv += "bound,,,," + fmt(*dimension_bound) + ",,\n";
    return csv;
}

} // namespace

PipelineResult run_pipeline(const PipelineSpec& spec, Exec exec) {
    PipelineResult out;
    Json& rep = out.report;
    rep["seed"] = spec.seed;
    rep["spec"] = spec.echo;

    CompactnessLadder ladder =
        spec.ladder ? *spec.ladder
                    : ladder_from_delay(spec.delay_system->tau, spec.delay_system->d);
    rep["ladder"] = to_json(ladder);

    SearchResult sr = search_mp(ladder, spec.search, exec);
    rep["rho_infinity"] = Json{{"estimate", sr.rho_profile.value},
                               {"s_max", sr.rho_profile.s_max},
                               {"formula", "min_s [prod_{i<s} rho_i^{k_{i+1}-k_i}]^{1/k_s}"}};
    if (!sr.certificate) {
        out.violations.push_back("certificate search failed: " + sr.diagnostic);
        rep["search"] = Json{{"status", "failed"},
                             {"diagnostic", sr.diagnostic},
                             {"best_ratio", sr.best_ratio}};
        out.bound_csv = bound_table_csv(sr, std::nullopt);
        rep["violations"] = out.violations;
        out.exit_code = 2;
        return out;
    }
    const GrowthCertificate& cert = *sr.certificate;
    out.certificate = to_json(cert);
    rep["certificate"] = out.certificate;
    rep["formulas"] =
        Json{{"chi_star", "varpi^{-1} Xi(m,p)^{1/(m p)}"},
             {"xi", "G(m) rho_s^{p r} prod_{i<s} rho_i^{p^2 (k_{i+1}-k_i)}"},
             {"upsilon", "sup_{0<=r<=p} Xi(m,r) Xi(m,p)^{-(r-1)/p}"},
             {"envelope", "[Upsilon m^m c^{-m} G(m)]^{1/m} (chi*)^N"},
             {"dimension_bound", "(m-1) ln(chi*) / (ln(chi*) - ln(varrho))"}};

    std::optional<double> bound;
    if (cert.valuation.is_real() && cert.varrho > cert.chi_star) {
        bound = minkowski_bound(cert);
        rep["dimension_bound"] = Json{{"value", *bound},
                                      {"m", cert.m},
                                      {"varrho", cert.varrho},
                                      {"chi_star", cert.chi_star}};
    } else if (cert.valuation.is_real()) {
        out.violations.push_back("varrho = " + fmt(cert.varrho) +
                                 " does not exceed chi* = " + fmt(cert.chi_star) +
                                 "; no dimension bound");
    }
    out.bound_csv = bound_table_csv(sr, bound);

    if (spec.delay_system) {
        const DelaySystem& sys = *spec.delay_system;
        Json cc;
        // simulation with the constant unit initial segment
        InitialFn phi = [d = sys.d](double) { return Vec(d, 1.0); };
        Trajectory traj =
            integrate(sys, phi, 0.0, spec.crosscheck.horizon, spec.crosscheck.step);
        cc["simulation"] = Json{{"label", sys.label},
                                {"horizon", spec.crosscheck.horizon},
                                {"step", spec.crosscheck.step},
                                {"sup_norm", traj.sup_window(0.0, spec.crosscheck.horizon)},
                                {"final", traj.eval(spec.crosscheck.horizon)}};

        RestrictedNormResult rn = restricted_norm_estimate(
            sys, spec.crosscheck.restricted_level, spec.crosscheck.restricted_samples,
            spec.crosscheck.restricted_step, spec.seed + 1, exec);
        cc["restricted_norm"] = Json{{"level", rn.level},
                                     {"estimate", rn.estimate},
                                     {"rho_i", rn.rho_i},
                                     {"decay_bound", rn.decay_bound},
                                     {"samples", rn.samples_used}};
        if (rn.estimate > rn.rho_i * 1.1)
            out.violations.push_back("restricted norm estimate " + fmt(rn.estimate) +
                                     " exceeds rho_i * 1.1 = " + fmt(rn.rho_i * 1.1));

        RescaleResult rs = rescale_time(sys);
        double worst = 0.0;
        for (int k = 0; k <= 64; ++k) {
            double s = rs.r + double(k) * (3.0 * rs.r / 64.0);
            worst = std::max(worst, lipschitz_bound_at(rs.transformed, s));
        }
        cc["rescale"] = Json{{"r", rs.r}, {"transformed_majorant_sup", worst}};
        if (worst > 1.0 + 1e-12)
            out.violations.push_back("transformed majorant " + fmt(worst) +
                                     " exceeds 1 + 1e-12");

        PointCloud cloud = embed_trajectory(traj, sys.tau, spec.crosscheck.embed_dim,
                                            spec.crosscheck.embed_stride);
        double span = 0.0;
        for (int j = 0; j < cloud.dim; ++j)
            span = std::max(span, cloud.bbox_max[j] - cloud.bbox_min[j]);
        Json bd;
        if (span > 0.0) {
            DimensionFit fit = minkowski_dim(cloud, span / 256.0, span / 2.0, exec);
            bd = Json{{"embed_dim", spec.crosscheck.embed_dim},
                      {"points", cloud.points.size()},
                      {"estimate", fit.estimate},
                      {"r_squared", fit.r_squared},
                      {"reliable", fit.reliable}};
            if (bound) bd["certificate_bound"] = *bound;
        } else {
            bd = Json{{"embed_dim", spec.crosscheck.embed_dim},
                      {"points", cloud.points.size()},
                      {"estimate", 0.0},
                      {"note", "degenerate cloud (single point)"}};
        }
        cc["boxdim"] = std::move(bd);
        rep["crosscheck"] = std::move(cc);
    }

    rep["violations"] = out.violations;
    out.exit_code = out.violations.empty() ? 0 : 2;
    return out;
}

void write_pipeline_artifacts(const PipelineResult& result, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    auto write = [&](const std::string& name, const std::string& content) {
        std::ofstream out(std::filesystem::path(out_dir) / name, std::ios::binary);
        out << content;
    };
    write("report.json", result.report.dump(2) + "\n");
    if (!result.certificate.is_null()) write("certificate.json", result.certificate.dump(2) + "\n");
    write("bound.csv", result.bound_csv);
}

// ---- property suite ---------------------------------------------------------

namespace {

struct Suite {
    std::vector<CheckResult> results;
    void add(const std::string& name, bool pass, const std::string& detail) {
        results.push_back({name, pass, detail});
    }
    template <class Fn>
    void guarded(const std::string& name, Fn&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            add(name, false, std::string("exception: ") + e.what());
        }
    }
};

Scalar random_padic(std::mt19937_64& rng, const Valuation& v) {
    std::uniform_int_distribution<int> num(-40, 40), den(1, 12), pw(-2, 2);
    Rational r(num(rng) == 0 ? 1 : num(rng), den(rng));
    int e = pw(rng);
    for (int i = 0; i < std::abs(e); ++i)
        r = e > 0 ? r * Rational(v.p) : r / Rational(v.p);
    return Scalar::padic(r, v);
}

} // namespace

std::vector<CheckResult> run_property_suite(std::uint64_t seed, double tolerance,
                                            Exec exec) {
    Suite suite;
    std::mt19937_64 rng(seed == 0 ? 0x9e3779b97f4a7c15ull : seed);
    std::uniform_real_distribution<double> U(-10.0, 10.0);
    const Valuation R = Valuation::real();
    const Valuation Q5 = Valuation::padic(5);

    suite.guarded("field.abs-multiplicative", [&] {
        double worst = 0.0;
        for (int i = 0; i < 10000; ++i) {
            Scalar a = Scalar::real(U(rng)), b = Scalar::real(U(rng));
            double lhs = abs_value(a * b), rhs = abs_value(a) * abs_value(b);
            if (rhs > 0.0) worst = std::max(worst, std::fabs(lhs - rhs) / rhs);
        }
        bool exact = true;
        for (int i = 0; i < 10000; ++i) {
            Scalar a = random_padic(rng, Q5), b = random_padic(rng, Q5);
            if (a.is_zero() || b.is_zero()) continue;
            exact &= padic_valuation((a * b).rational_value(), 5) ==
                     padic_valuation(a.rational_value(), 5) +
                         padic_valuation(b.rational_value(), 5);
        }
        suite.add("field.abs-multiplicative", worst <= 1e-12 && exact,
                  "real rel err " + fmt(worst) + ", p-adic exact=" + (exact ? "yes" : "no"));
    });

    suite.guarded("field.ultrametric", [&] {
        bool ok = true;
        for (int i = 0; i < 10000; ++i) {
            Scalar a = random_padic(rng, Q5), b = random_padic(rng, Q5);
            double s = abs_value(a + b), ma = abs_value(a), mb = abs_value(b);
            ok &= s <= std::max(ma, mb);
            if (ma != mb) ok &= s == std::max(ma, mb);
        }
        suite.add("field.ultrametric", ok, "10^4 pairs, exact");
    });

    suite.guarded("field.annulus", [&] {
        bool ok = true;
        for (int i = 0; i < 1000; ++i) {
            KVector xr{Scalar::real(U(rng)), Scalar::real(U(rng)), Scalar::real(U(rng))};
            if (sup_norm(xr) == 0.0) continue;
            AnnulusResult ar = normalize_annulus(xr);
            double ny = sup_norm(ar.y);
            ok &= ny <= 1.0 && ny >= theta(R);
            ok &= abs_value(ar.k) >= ny / sup_norm(xr) * (1.0 - 1e-12);
            KVector xp{random_padic(rng, Q5), random_padic(rng, Q5)};
            if (sup_norm(xp) == 0.0) continue;
            AnnulusResult ap = normalize_annulus(xp);
            double np = sup_norm(ap.y);
            ok &= np <= 1.0 && np >= theta(Q5);
        }
        suite.add("field.annulus", ok, "Theta <= |y| <= 1 and |k| >= |y|/|x|");
    });

    suite.guarded("linalg.det-multiplicative", [&] {
        std::uniform_int_distribution<int> dim(1, 4), entry(-4, 4);
        double worst = 0.0;
        bool exact = true;
        for (int rep = 0; rep < 300; ++rep) {
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
            exact &= dc == dp;
        }
        suite.add("linalg.det-multiplicative", worst <= 1e-9 && exact,
                  "real rel err " + fmt(worst));
    });

    suite.guarded("linalg.det-isometry", [&] {
        std::uniform_int_distribution<int> dim(1, 4), coin(0, 1);
        bool ok = true;
        for (int rep = 0; rep < 200; ++rep) {
            int n = dim(rng);
            std::vector<int> perm(n);
            for (int i = 0; i < n; ++i) perm[i] = i;
            std::shuffle(perm.begin(), perm.end(), rng);
            NormedSpace SR = NormedSpace::sup(R, n);
            Mat A = Mat::zero(R, n, n);
            for (int i = 0; i < n; ++i)
                A.at(i, perm[i]) = Scalar::real(coin(rng) ? 1.0 : -1.0);
            LinearMap T(SR, SR, A);
            // sampled isometry: |Tx| = |x|
            for (int s = 0; s < 5; ++s) {
                KVector x;
                for (int i = 0; i < n; ++i) x.push_back(Scalar::real(U(rng)));
                ok &= std::fabs(SR.norm(mat_apply(A, x)) - SR.norm(x)) <= 1e-12 * SR.norm(x);
            }
            ok &= std::fabs(pullback_det(T) - 1.0) <= 1e-12;
        }
        suite.add("linalg.det-isometry", ok, "signed permutations have det 1");
    });

    suite.guarded("linalg.g-bounds", [&] {
        bool ok = true;
        for (int n = 1; n <= 5; ++n) {
            GValue g = g_oracle(1.0, n, R, exec);
            GValue gs = g_oracle(1.0, n, R, Exec::serial);
            ok &= g.value == gs.value && g.exact;
            ok &= g.value <= std::pow(double(n), 0.5 * n) * (1.0 + 1e-12);
            double th = 0.7;
            GValue gt = g_oracle(th, n, R, exec);
            double fact = 1.0;
            for (int i = 2; i <= n; ++i) fact *= i;
            ok &= gt.value <= std::pow(th, n) * fact * (1.0 + 1e-12);
        }
        ok &= g_oracle(1.0, 7, Q5, exec).value == 1.0;
        suite.add("linalg.g-bounds", ok, "Hadamard/factorial bounds, serial == parallel");
    });

    suite.guarded("linalg.triangular", [&] {
        KVector v1{Scalar::real(1.0), Scalar::real(0.0)};
        KVector v2{Scalar::real(1.0), Scalar::real(1.0)};
        TriangularBasisResult tb = triangular_basis({v1, v2}, 0.5, 1e-6);
        bool ok = tb.coefficient_bound <= 2.0 * (1.0 + 1e-6) + 1e-9;
        // reconstruction coefficients of sampled unit-ball points
        for (int s = 0; s < 1000 && ok; ++s) {
            double y0 = U(rng) / 10.0, y1 = U(rng) / 10.0;
            double f1 = tb.functionals[0][0].real_value() * y0 +
                        tb.functionals[0][1].real_value() * y1;
            double f2 = tb.functionals[1][0].real_value() * y0 +
                        tb.functionals[1][1].real_value() * y1;
            ok &= std::fabs(f1) <= 2.0 * (1.0 + 1e-6) + 1e-9 &&
                  std::fabs(f2) <= 2.0 * (1.0 + 1e-6) + 1e-9;
            // exactness: y = f1 u1 + f2 u2
            double r0 = f1 * tb.u[0][0].real_value() + f2 * tb.u[1][0].real_value() - y0;
            double r1 = f1 * tb.u[0][1].real_value() + f2 * tb.u[1][1].real_value() - y1;
            ok &= std::fabs(r0) <= 1e-9 && std::fabs(r1) <= 1e-9;
        }
        suite.add("linalg.triangular", ok,
                  "coefficient bound " + fmt(tb.coefficient_bound) + " <= (1/kappa)(1+eps)");
    });

    suite.guarded("linalg.chain-bound", [&] {
        bool ok = true;
        for (int rep = 0; rep < 50; ++rep) {
            int n = 3;
            NormedSpace S = NormedSpace::sup(R, n);
            std::vector<double> diag;
            for (int i = 0; i < n; ++i) diag.push_back(std::fabs(U(rng)) / 5.0 + 0.1);
            std::sort(diag.rbegin(), diag.rend());
            Mat A = Mat::zero(R, n, n);
            for (int i = 0; i < n; ++i) A.at(i, i) = Scalar::real(diag[i]);
            LinearMap T(S, S, A);
            std::vector<std::vector<KVector>> chain;
            std::vector<double> kappas;
            for (int j = 0; j < n; ++j) {
                std::vector<KVector> span;
                for (int b = j; b < n; ++b) {
                    KVector e(n, Scalar::zero(R));
                    e[b] = Scalar::one(R);
                    span.push_back(e);
                }
                chain.push_back(span);
                kappas.push_back(diag[j]);
            }
            ChainBoundResult cb = det_chain_bound(T, chain, kappas, seed + rep);
            ok &= cb.hypothesis_verified && cb.bound >= cb.det_value * (1.0 - 1e-12);
        }
        suite.add("linalg.chain-bound", ok, "G(n) prod kappa_j dominates det");
    });

    suite.guarded("growth.certificate", [&] {
        SearchParams params;
        params.varpi = 0.95;
        params.p_max = 2;
        params.s_max = 5;
        SearchResult sr = search_mp(ladder_from_delay(1.0, 1), params, exec);
        bool ok = sr.certificate.has_value();
        if (ok) {
            ok &= sr.certificate->chi_star < 1.0;
            ok &= sr.certificate->varrho > sr.certificate->chi_star &&
                  sr.certificate->varrho <= 1.0;
        }
        suite.add("growth.certificate", ok,
                  ok ? "chi* = " + fmt(sr.certificate->chi_star) : sr.diagnostic);
    });

    suite.guarded("growth.minkowski-monotone", [&] {
        GrowthCertificate cert;
        cert.valuation = R;
        cert.m = 3;
        cert.chi_star = 0.25;
        bool ok = true;
        double prev = std::numeric_limits<double>::infinity();
        for (double rho : {0.3, 0.5, 0.8, 1.0}) {
            cert.varrho = rho;
            double b = minkowski_bound(cert);
            ok &= b <= prev + 1e-12;
            prev = b;
        }
        cert.varrho = 1.0;
        ok &= minkowski_bound(cert) == double(cert.m - 1);
        suite.add("growth.minkowski-monotone", ok, "nonincreasing in varrho, m-1 at 1");
    });

    suite.guarded("growth.envelope-cocycle", [&] {
        SearchParams params;
        params.varpi = 0.9;
        params.p_max = 1;
        params.s_max = 3;
        CocycleCheck cc = verify_cocycle_envelope({0.9, 0.3, 0.15, 0.075}, params, 30, exec);
        suite.add("growth.envelope-cocycle", cc.passed && cc.hypothesis_ok,
                  "m = " + std::to_string(cc.certificate.m) +
                      ", chi* = " + fmt(cc.certificate.chi_star));
    });

    suite.guarded("growth.recursion-majorant", [&] {
        bool ok = true;
        std::uniform_real_distribution<double> P(0.1, 2.0);
        for (int rep = 0; rep < 1000; ++rep) {
            double M = P(rng), L = P(rng), C = P(rng) + 0.5, Lam = 1.0 + P(rng);
            NonlinearityBudget b;
            b.M = M;
            b.L = L;
            b.C = C;
            b.Lambda = Lam;
            double d0 = P(rng) / 2.0;
            int N = 12;
            std::vector<double> path;
            for (int k = 0; k < N; ++k)
                path.push_back(std::pow(L + C, double(k + 1)) * d0);
            RecursionResult rr = error_recursion(b, d0, path, N);
            ok &= rr.final_value <= rr.majorant * (1.0 + 1e-9);
        }
        suite.add("growth.recursion-majorant", ok, "10^3 random draws");
    });

    suite.guarded("growth.xi-ultrametric", [&] {
        CompactnessLadder lad = power_ladder(Q5, 1, 1.0, 1.0);
        XiResult x = xi(lad, 6, 2, exec);
        suite.add("growth.xi-ultrametric", x.value == 1.0 && x.exact,
                  "Xi = " + fmt(x.value));
    });

    suite.guarded("dde.gronwall", [&] {
        bool ok = true;
        std::uniform_real_distribution<double> C(-1.0, 1.0);
        for (int rep = 0; rep < 10; ++rep) {
            double a = C(rng);
            DelaySystem sys = scalar_delay_system(a, 1.0, std::fabs(a) + 0.01);
            double pa = C(rng), pb = C(rng), qa = C(rng), qb = C(rng);
            InitialFn phi = [pa, pb](double t) { return Vec{pa + pb * t}; };
            InitialFn psi = [qa, qb](double t) { return Vec{qa + qb * t}; };
            double T = 3.0, h = 1.0 / 64.0;
            Trajectory x = integrate(sys, phi, 0.0, T, h);
            Trajectory y = integrate(sys, psi, 0.0, T, h);
            double diff = 0.0;
            for (double t = 0.0; t <= T + 1e-12; t += h)
                diff = std::max(diff, std::fabs(x.eval(t)[0] - y.eval(t)[0]));
            double init = std::max(std::fabs(pa - qa), std::fabs((pa - qa) - (pb - qb)));
            double gronwall = std::exp((std::fabs(a) + 0.01) * T) * init;
            ok &= diff <= gronwall * (1.0 + 1e-6);
        }
        suite.add("dde.gronwall", ok, "|x-y| <= exp(int n) |phi-psi|");
    });

    suite.guarded("dde.rescale-majorant", [&] {
        DelaySystem sys = scalar_delay_system(-2.0, 1.0, 2.0);
        RescaleResult rs = rescale_time(sys);
        double worst = 0.0;
        for (int k = 0; k <= 200; ++k)
            worst = std::max(worst, lipschitz_bound_at(rs.transformed, rs.r + 0.05 * k));
        suite.add("dde.rescale-majorant", worst <= 1.0 + 1e-12, "sup = " + fmt(worst));
    });

    suite.guarded("dde.composition", [&] {
        DelaySystem sys;
        sys.tau = 1.0;
        sys.d = 1;
        sys.linear = true;
        LinearTerm term;
        term.A = MatPiecewise{{1.0, 2.0}, {DMat{-1.0}, DMat{0.0}, DMat{-2.0}}};
        term.sigma = Piecewise::constant(1.0);
        sys.terms.push_back(term);
        sys.majorant = Piecewise{{1.0, 2.0}, {1.0, 0.0, 2.0}};
        sys.breakpoints = {1.0, 2.0};
        InitialFn phi = [](double t) { return Vec{std::cos(t)}; };
        double T = 5.0;
        Trajectory x = integrate(sys, phi, 0.0, T, 1.0 / 64.0);
        RescaleResult rs = rescale_time(sys);
        double s_end = rs.maps.f(T);
        Trajectory pulled = pullback_trajectory(x, rs.maps, 0.0, s_end, 1.0 / 128.0);
        double s1 = std::max(rs.r, rs.maps.f(sys.tau));
        InitialFn hist = [&pulled](double s) { return pulled.eval(std::max(s, 0.0)); };
        Trajectory direct = integrate(rs.transformed, hist, s1, s_end, rs.r / 128.0);
        double worst = 0.0;
        for (double s = s1; s <= s_end + 1e-9; s += rs.r / 64.0) {
            double tt = std::min(s, s_end);
            worst = std::max(worst, std::fabs(direct.eval(tt)[0] - pulled.eval(tt)[0]));
        }
        suite.add("dde.composition", worst <= 1e-4,
                  "simulate-then-rescale vs rescale-then-simulate sup err " + fmt(worst));
    });

    suite.guarded("dde.restricted-vs-ladder", [&] {
        bool ok = true;
        double worst = 0.0;
        for (double a : {-1.0, 1.0}) {
            DelaySystem sys = scalar_delay_system(a, 1.0, 1.0);
            RestrictedNormResult rn =
                restricted_norm_estimate(sys, 2, 40, 1.0 / 32.0, seed + 7, exec);
            worst = std::max(worst, rn.estimate);
            ok &= rn.estimate <= rn.rho_i * 1.1;
        }
        suite.add("dde.restricted-vs-ladder", ok, "worst estimate " + fmt(worst));
    });

    suite.guarded("dde.deterministic", [&] {
        DelaySystem sys = scalar_delay_system(-1.0, 1.0, 1.0);
        InitialFn phi = [](double) { return Vec{1.0}; };
        Trajectory a = integrate(sys, phi, 0.0, 4.0, 1e-2);
        Trajectory b = integrate(sys, phi, 0.0, 4.0, 1e-2);
        bool ok = a.values().size() == b.values().size();
        for (std::size_t i = 0; ok && i < a.values().size(); ++i)
            ok &= a.values()[i] == b.values()[i];
        suite.add("dde.deterministic", ok, "bit-identical repeat");
    });

    suite.guarded("boxdim.monotone", [&] {
        std::vector<std::vector<double>> pts;
        for (int i = 0; i < 4000; ++i) pts.push_back({U(rng) / 10.0, U(rng) / 10.0});
        PointCloud cloud = PointCloud::from_points(pts);
        bool ok = true;
        std::int64_t prev = -1;
        for (double eps : {1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4, 1.0 / 2}) {
            std::int64_t K = covering_number(cloud, eps, 0.0, exec);
            if (prev >= 0) ok &= K <= prev;
            prev = K;
        }
        suite.add("boxdim.monotone", ok, "K nonincreasing in eps");
    });

    suite.guarded("boxdim.dim-cap", [&] {
        std::vector<std::vector<double>> pts;
        for (int i = 0; i < 6000; ++i) pts.push_back({U(rng) / 10.0, U(rng) / 10.0});
        PointCloud cloud = PointCloud::from_points(pts);
        DimensionFit fit = minkowski_dim(cloud, 1.0 / 32.0, 1.0 / 2.0, exec);
        suite.add("boxdim.dim-cap", fit.estimate <= 2.0 + 0.1,
                  "estimate " + fmt(fit.estimate));
    });

    suite.guarded("boxdim.anchor", [&] {
        std::vector<std::vector<double>> pts;
        for (int i = 0; i < 5000; ++i) pts.push_back({U(rng) / 10.0, U(rng) / 10.0});
        PointCloud cloud = PointCloud::from_points(pts);
        bool ok = true;
        for (double eps : {1.0 / 16, 1.0 / 8, 1.0 / 4}) {
            std::int64_t k0 = covering_number(cloud, eps, 0.0, exec);
            std::int64_t k1 = covering_number(cloud, eps, eps / 2.0, exec);
            ok &= double(k1) <= std::pow(2.0, cloud.dim) * double(k0) &&
                  double(k0) <= std::pow(2.0, cloud.dim) * double(k1);
        }
        suite.add("boxdim.anchor", ok, "ln K shift within D ln 2");
    });

    (void)tolerance;
    return suite.results;
}

} // namespace dimest
