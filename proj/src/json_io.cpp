#include "dimest/json_io.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace dimest {

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
    throw std::invalid_argument(path + ": " + what);
}

double need_number(const Json& j, const std::string& path) {
    if (!j.is_number()) bad(path, "must be a number");
    return j.get<double>();
}

} // namespace

Json to_json(const Valuation& v) {
    Json j;
    if (v.is_real()) {
        j["kind"] = "real";
        j["theta"] = v.theta();
    } else {
        j["kind"] = "padic";
        j["p"] = v.p;
    }
    return j;
}

Valuation valuation_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("kind")) bad("$.valuation", "needs a kind field");
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "real") {
        double theta = j.contains("theta") ? need_number(j.at("theta"), "$.valuation.theta")
                                           : Valuation::default_real_theta;
        return Valuation::real(theta);
    }
    if (kind == "padic") {
        if (!j.contains("p")) bad("$.valuation", "p-adic kind needs a prime p");
        return Valuation::padic(j.at("p").get<std::int64_t>());
    }
    bad("$.valuation.kind", "must be \"real\" or \"padic\"");
}

Json to_json(const Scalar& s) {
    if (s.valuation().is_real()) return Json(s.real_value());
    Json j;
    j["num"] = s.rational_value().num;
    j["den"] = s.rational_value().den;
    return j;
}

Scalar scalar_from_json(const Json& j, const Valuation& v) {
    if (v.is_real()) {
        if (!j.is_number()) bad("$.scalar", "real scalars are plain numbers");
        return Scalar::real(j.get<double>(), v);
    }
    if (j.is_number_integer()) return Scalar::padic(Rational(j.get<std::int64_t>()), v);
    if (!j.is_object() || !j.contains("num") || !j.contains("den"))
        bad("$.scalar", "p-adic scalars are {num, den} objects");
    return Scalar::padic(
        Rational(j.at("num").get<std::int64_t>(), j.at("den").get<std::int64_t>()), v);
}

Json to_json(const Mat& m) {
    Json rows = Json::array();
    for (int i = 0; i < m.rows; ++i) {
        Json row = Json::array();
        for (int j = 0; j < m.cols; ++j) row.push_back(to_json(m.at(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat mat_from_json(const Json& j, const Valuation& v) {
    if (!j.is_array() || j.empty() || !j.front().is_array())
        bad("$.matrix", "must be an array of rows");
    Mat m = Mat::zero(v, int(j.size()), int(j.front().size()));
    for (int i = 0; i < m.rows; ++i) {
        if (int(j[i].size()) != m.cols) bad("$.matrix", "ragged rows");
        for (int c = 0; c < m.cols; ++c) m.at(i, c) = scalar_from_json(j[i][c], v);
    }
    return m;
}

Json to_json(const NormedSpace& s) {
    Json j;
    j["valuation"] = to_json(s.valuation);
    j["dim"] = s.dim;
    if (!s.weights.empty()) j["weights"] = s.weights;
    return j;
}

NormedSpace space_from_json(const Json& j) {
    Valuation v = valuation_from_json(j.at("valuation"));
    if (j.contains("weights"))
        return NormedSpace::weighted_sup(v, j.at("weights").get<std::vector<double>>());
    return NormedSpace::sup(v, j.at("dim").get<int>());
}

Json to_json(const GValue& g) {
    Json j;
    j["value"] = g.value;
    j["flag"] = g.exact ? "exact" : "bound";
    return j;
}

Json to_json(const CompactnessLadder& ladder) {
    Json j;
    j["valuation"] = to_json(ladder.valuation());
    Json k = Json::array(), rho = Json::array();
    for (std::size_t i = 0; i < ladder.stored_rungs(); ++i) {
        Rung r = ladder.rung(int(i));
        k.push_back(r.k);
        rho.push_back(r.rho);
    }
    j["k"] = std::move(k);
    j["rho"] = std::move(rho);
    const LadderGenerator& g = ladder.generator();
    if (g.type == LadderGenerator::Type::delay)
        j["generator"] = Json{{"type", "delay"}, {"tau", g.tau}, {"d", g.d}};
    else if (g.type == LadderGenerator::Type::power)
        j["generator"] = Json{{"type", "power"},
                              {"k_step", g.k_step},
                              {"scale", g.scale},
                              {"ratio", g.ratio}};
    return j;
}

CompactnessLadder ladder_from_json(const Json& j) {
    if (!j.is_object()) bad("$.ladder", "must be an object");
    Valuation v = j.contains("valuation") ? valuation_from_json(j.at("valuation"))
                                          : Valuation::real();
    LadderGenerator gen;
    if (j.contains("generator")) {
        const Json& g = j.at("generator");
        std::string type = g.at("type").get<std::string>();
        if (type == "delay") {
            gen.type = LadderGenerator::Type::delay;
            gen.tau = need_number(g.at("tau"), "$.ladder.generator.tau");
            gen.d = g.at("d").get<int>();
            if (!(gen.tau > 0.0)) bad("$.ladder.generator.tau", "must be positive");
            if (gen.d < 1) bad("$.ladder.generator.d", "must be >= 1");
        } else if (type == "power") {
            gen.type = LadderGenerator::Type::power;
            gen.k_step = g.value("k_step", std::int64_t(1));
            gen.scale = need_number(g.at("scale"), "$.ladder.generator.scale");
            gen.ratio = need_number(g.at("ratio"), "$.ladder.generator.ratio");
        } else {
            bad("$.ladder.generator.type", "must be \"delay\" or \"power\"");
        }
    }
    std::vector<Rung> rungs;
    if (j.contains("k") || j.contains("rho")) {
        auto ks = j.value("k", std::vector<long long>{});
        auto rhos = j.value("rho", std::vector<double>{});
        if (ks.size() != rhos.size()) bad("$.ladder", "k and rho must have equal length");
        for (std::size_t i = 0; i < ks.size(); ++i) rungs.push_back({ks[i], rhos[i]});
    }
    return CompactnessLadder(v, std::move(rungs), gen);
}

Json to_json(const GrowthCertificate& cert) {
    Json j;
    j["valuation"] = to_json(cert.valuation);
    j["varpi"] = cert.varpi;
    j["m"] = cert.m;
    j["p"] = cert.p;
    j["s"] = cert.s;
    j["r"] = cert.r;
    j["log_xi"] = cert.log_xi;
    j["xi"] = cert.xi_value();
    j["xi_flag"] = cert.xi_exact ? "exact" : "bound";
    j["log_upsilon"] = cert.log_upsilon;
    j["upsilon"] = cert.upsilon_value();
    j["log_upsilon_r1"] = cert.log_upsilon_r1;
    j["log_upsilon_padded"] = cert.log_upsilon_padded;
    j["log_g_m"] = cert.log_g_m;
    j["g_m_flag"] = cert.g_m_exact ? "exact" : "bound";
    j["chi_star"] = cert.chi_star;
    j["varrho"] = cert.varrho;
    j["varkappa"] = cert.varkappa;
    j["c"] = cert.c;
    j["rho_inf_estimate"] = cert.rho_inf_estimate;
    return j;
}

GrowthCertificate certificate_from_json(const Json& j) {
    GrowthCertificate c;
    c.valuation = valuation_from_json(j.at("valuation"));
    c.varpi = j.at("varpi").get<double>();
    c.m = j.at("m").get<long long>();
    c.p = j.at("p").get<long long>();
    c.s = j.at("s").get<int>();
    c.r = j.at("r").get<long long>();
    c.log_xi = j.at("log_xi").get<double>();
    c.xi_exact = j.value("xi_flag", "exact") == std::string("exact");
    c.log_upsilon = j.at("log_upsilon").get<double>();
    c.log_upsilon_r1 = j.value("log_upsilon_r1", c.log_upsilon);
    c.log_upsilon_padded = j.value("log_upsilon_padded", c.log_upsilon);
    c.log_g_m = j.at("log_g_m").get<double>();
    c.g_m_exact = j.value("g_m_flag", "exact") == std::string("exact");
    c.chi_star = j.at("chi_star").get<double>();
    c.varrho = j.at("varrho").get<double>();
    c.varkappa = j.at("varkappa").get<double>();
    c.c = j.at("c").get<double>();
    c.rho_inf_estimate = j.value("rho_inf_estimate", 0.0);
    return c;
}

Json to_json(const Piecewise& p) {
    if (p.knots.empty()) return Json(p.values.front());
    Json j;
    j["breakpoints"] = p.knots;
    j["values"] = p.values;
    return j;
}

Piecewise piecewise_from_json(const Json& j) {
    if (j.is_number()) return Piecewise::constant(j.get<double>());
    if (!j.is_object()) bad("$.piecewise", "must be a number or {breakpoints, values}");
    Piecewise p;
    p.knots = j.value("breakpoints", std::vector<double>{});
    p.values = j.at("values").get<std::vector<double>>();
    if (p.values.size() != p.knots.size() + 1)
        bad("$.piecewise", "needs one more value than breakpoints");
    for (std::size_t i = 0; i + 1 < p.knots.size(); ++i)
        if (!(p.knots[i] < p.knots[i + 1])) bad("$.piecewise.breakpoints", "must increase");
    return p;
}

namespace {

Json dmat_to_json(const DMat& m, int d) {
    Json rows = Json::array();
    for (int i = 0; i < d; ++i) {
        Json row = Json::array();
        for (int j = 0; j < d; ++j) row.push_back(m[std::size_t(i) * d + j]);
        rows.push_back(std::move(row));
    }
    return rows;
}

DMat dmat_from_json(const Json& j, int d, const std::string& path) {
    if (j.is_number() && d == 1) return DMat{j.get<double>()};
    if (!j.is_array() || int(j.size()) != d) bad(path, "must be a d x d matrix");
    DMat m(std::size_t(d) * d, 0.0);
    for (int i = 0; i < d; ++i) {
        if (!j[i].is_array() || int(j[i].size()) != d) bad(path, "must be a d x d matrix");
        for (int c = 0; c < d; ++c) m[std::size_t(i) * d + c] = j[i][c].get<double>();
    }
    return m;
}

} // namespace

Json delay_system_to_json(const DelaySystem& sys) {
    Json j;
    j["tau"] = sys.tau;
    j["d"] = sys.d;
    Json terms = Json::array();
    for (const LinearTerm& t : sys.terms) {
        if (t.A_fn || t.sigma_fn)
            throw std::invalid_argument("analytic terms have no JSON form");
        Json jt;
        if (t.A.knots.empty()) {
            jt["A"] = dmat_to_json(t.A.values.front(), sys.d);
        } else {
            Json va = Json::array();
            for (const DMat& m : t.A.values) va.push_back(dmat_to_json(m, sys.d));
            jt["A"] = Json{{"breakpoints", t.A.knots}, {"values", std::move(va)}};
        }
        jt["sigma"] = to_json(t.sigma);
        terms.push_back(std::move(jt));
    }
    j["terms"] = std::move(terms);
    j["majorant"] = to_json(sys.majorant);
    if (!sys.label.empty()) j["label"] = sys.label;
    return j;
}

DelaySystem delay_system_from_json(const Json& j) {
    DelaySystem sys;
    if (!j.is_object()) bad("$", "delay system must be an object");
    if (!j.contains("tau")) bad("$.tau", "missing");
    sys.tau = need_number(j.at("tau"), "$.tau");
    if (!(sys.tau > 0.0)) bad("$.tau", "must be positive");
    sys.d = j.value("d", 1);
    if (sys.d < 1) bad("$.d", "must be >= 1");
    sys.linear = true;
    sys.label = j.value("label", std::string{});
    if (!j.contains("terms") || !j.at("terms").is_array() || j.at("terms").empty())
        bad("$.terms", "need at least one delayed term");
    int ti = 0;
    for (const Json& jt : j.at("terms")) {
        std::string path = "$.terms[" + std::to_string(ti++) + "]";
        LinearTerm term;
        const Json& ja = jt.at("A");
        if (ja.is_object() && ja.contains("breakpoints")) {
            term.A.knots = ja.at("breakpoints").get<std::vector<double>>();
            for (const Json& m : ja.at("values"))
                term.A.values.push_back(dmat_from_json(m, sys.d, path + ".A"));
            if (term.A.values.size() != term.A.knots.size() + 1)
                bad(path + ".A", "needs one more value than breakpoints");
        } else {
            term.A.values.push_back(dmat_from_json(ja, sys.d, path + ".A"));
        }
        term.sigma = jt.contains("sigma") ? piecewise_from_json(jt.at("sigma"))
                                          : Piecewise::constant(sys.tau);
        for (double v : term.sigma.values)
            if (v < 0.0 || v > sys.tau + 1e-12)
                bad(path + ".sigma", "delays must lie in [0, tau]");
        for (double k : term.A.knots) sys.breakpoints.push_back(k);
        for (double k : term.sigma.knots) sys.breakpoints.push_back(k);
        sys.terms.push_back(std::move(term));
    }
    sys.majorant = j.contains("majorant") ? piecewise_from_json(j.at("majorant"))
                                          : Piecewise::constant(1.0);
    for (double v : sys.majorant.values)
        if (v < 0.0) bad("$.majorant", "must be nonnegative");
    for (double k : sys.majorant.knots) sys.breakpoints.push_back(k);
    std::sort(sys.breakpoints.begin(), sys.breakpoints.end());
    sys.breakpoints.erase(std::unique(sys.breakpoints.begin(), sys.breakpoints.end()),
                          sys.breakpoints.end());
    // the declared majorant must dominate the Lipschitz constant at samples
    std::vector<double> probes{0.0, sys.tau * 0.37, sys.tau};
    for (double k : sys.breakpoints) {
        probes.push_back(k - 1e-6);
        probes.push_back(k + 1e-6);
    }
    for (double t : probes) {
        double lip = lipschitz_bound_at(sys, t);
        if (lip > sys.majorant.at(t) * (1.0 + 1e-9) + 1e-15)
            bad("$.majorant", "smaller than the Lipschitz constant " + std::to_string(lip) +
                                  " at t = " + std::to_string(t));
    }
    return sys;
}

std::string trajectory_to_csv(const Trajectory& traj, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("csv step must be positive");
    std::string out = "t";
    for (int c = 1; c <= traj.dim(); ++c) out += ",x" + std::to_string(c);
    out += "\n";
    char buf[40];
    auto put = [&](double x, char sep) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
        (void)ec;
        out.append(buf, end);
        out.push_back(sep);
    };
    long long n = (long long)std::floor((traj.end_time() - traj.start_time()) / step + 1e-9);
    for (long long k = 0; k <= n; ++k) {
        double t = traj.start_time() + double(k) * step;
        Vec v = traj.eval(t);
        put(t, ',');
        for (int c = 0; c < traj.dim(); ++c) put(v[c], c + 1 == traj.dim() ? '\n' : ',');
    }
    return out;
}

} // namespace dimest
