#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "dimest/pipeline.hpp"

using namespace dimest;

namespace {

int g_jobs = 0;
std::uint64_t g_seed = 0;
double g_tolerance = 0.1;
std::string g_output_dir;

void apply_globals() {
    if (g_jobs > 0) par::set_threads(g_jobs);
}

void emit(const std::string& name, const std::string& content) {
    if (g_output_dir.empty()) {
        std::cout << content;
        return;
    }
    std::filesystem::create_directories(g_output_dir);
    std::ofstream out(std::filesystem::path(g_output_dir) / name, std::ios::binary);
    out << content;
    std::cout << (std::filesystem::path(g_output_dir) / name).string() << "\n";
}

DelaySystem load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--system", "cannot open " + path);
    Json j;
    in >> j;
    return delay_system_from_json(j);
}

InitialFn constant_phi(const std::vector<double>& values, int d) {
    Vec v(values.begin(), values.end());
    if (int(v.size()) == 1 && d > 1) v.assign(d, values.front());
    if (int(v.size()) != d)
        throw CLI::ValidationError("--phi", "needs 1 or d components");
    return [v](double) { return v; };
}

std::string schema_footer() {
    return "JSON schemas (shipped under schemas/):\n"
           "  pipeline.json     {input:{ladder|delay_system: path-or-object}, varpi,\n"
           "                     varrho, varkappa, c, iota, p_max, s_max, seed,\n"
           "                     output_dir, crosscheck:{...}}\n"
           "  ladder.json       {valuation, k:[...], rho:[...], generator?}\n"
           "  delay_system.json {tau, d, terms:[{A: pw, sigma: pw}], majorant: pw}\n"
           "  piecewise values  number | {breakpoints:[...], values:[...]}\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dimension estimates for nonautonomous systems over valued fields"};
    app.footer(schema_footer());
    app.require_subcommand(1);
    app.add_option("--seed", g_seed, "seed for all stochastic sampling")->capture_default_str();
    app.add_option("--jobs", g_jobs, "worker thread cap (0 = library default)");
    app.add_option("--tolerance", g_tolerance, "allowance for property comparisons")
        ->capture_default_str();
    app.add_option("--output-dir", g_output_dir, "write artifacts here instead of stdout");

    // ladder
    auto* lad = app.add_subcommand("ladder", "emit the dyadic delay ladder (k_i, rho_i)");
    lad->fallthrough();
    double lad_tau = 1.0;
    int lad_d = 1, lad_rungs = 8;
    lad->add_option("--tau", lad_tau, "delay horizon")->capture_default_str();
    lad->add_option("--d", lad_d, "value dimension")->capture_default_str();
    lad->add_option("--rungs", lad_rungs, "rungs to print")->capture_default_str();
    lad->callback([&] {
        apply_globals();
        CompactnessLadder ladder = ladder_from_delay(lad_tau, lad_d);
        ladder.rung(lad_rungs - 1);
        emit("ladder.json", to_json(ladder).dump(2) + "\n");
    });

    // bound
    auto* bound = app.add_subcommand(
        "bound", "run the pipeline: ladder -> certificate -> dimension bound");
    bound->fallthrough();
    std::string bound_spec;
    double bound_varpi = 0.0;
    bound->add_option("spec", bound_spec, "pipeline spec JSON, or a bare ladder file")
        ->required();
    bound->add_option("--varpi", bound_varpi, "growth threshold when a bare ladder is given");
    bound->callback([&] {
        apply_globals();
        std::ifstream probe(bound_spec);
        if (!probe) throw CLI::ValidationError("spec", "cannot open " + bound_spec);
        Json j;
        probe >> j;
        PipelineSpec spec;
        if (j.contains("input")) {
            spec = parse_spec_json(
                j, std::filesystem::path(bound_spec).parent_path().string());
        } else {
            // bare ladder file: wrap with defaults
            Json wrapped{{"input", Json{{"ladder", j}}}, {"varpi", bound_varpi}};
            spec = parse_spec_json(
                wrapped, std::filesystem::path(bound_spec).parent_path().string());
        }
        if (g_seed != 0) spec.seed = g_seed;
        PipelineResult res = run_pipeline(spec);
        std::string dir = !g_output_dir.empty()
                              ? g_output_dir
                              : (!spec.output_dir.empty() ? spec.output_dir : "out");
        write_pipeline_artifacts(res, dir);
        std::cout << "report: " << (std::filesystem::path(dir) / "report.json").string()
                  << "\n";
        if (res.report.contains("dimension_bound"))
            std::cout << "dimension bound: "
                      << res.report["dimension_bound"]["value"].dump() << "\n";
        for (const std::string& v : res.violations) std::cerr << "violation: " << v << "\n";
        std::exit(res.exit_code);
    });

    // simulate
    auto* sim = app.add_subcommand("simulate", "integrate a delay system, CSV output");
    sim->fallthrough();
    std::string sim_system;
    std::vector<double> sim_phi{1.0};
    double sim_T = 10.0, sim_h = 1e-3;
    sim->add_option("--system", sim_system, "delay system JSON")->required();
    sim->add_option("--phi", sim_phi, "constant initial segment components");
    sim->add_option("--horizon", sim_T, "end time")->capture_default_str();
    sim->add_option("--step", sim_h, "step size (must divide tau)")->capture_default_str();
    sim->callback([&] {
        apply_globals();
        DelaySystem sys = load_system(sim_system);
        Trajectory traj = integrate(sys, constant_phi(sim_phi, sys.d), 0.0, sim_T, sim_h);
        emit("trajectory.csv", trajectory_to_csv(traj, sim_h));
    });

    // rescale
    auto* resc = app.add_subcommand(
        "rescale", "rescale time so the right-hand side has operator norm <= 1");
    resc->fallthrough();
    std::string resc_system;
    resc->add_option("--system", resc_system, "delay system JSON")->required();
    resc->callback([&] {
        apply_globals();
        DelaySystem sys = load_system(resc_system);
        RescaleResult rs = rescale_time(sys);
        double worst = 0.0;
        for (int k = 0; k <= 256; ++k)
            worst = std::max(worst, lipschitz_bound_at(rs.transformed, rs.r * (1.0 + 0.05 * k)));
        Json out{{"r", rs.r},
                 {"s_valid", rs.s_valid},
                 {"transformed_majorant_sup", worst},
                 {"f_at_tau", rs.maps.f(sys.tau)}};
        emit("rescale.json", out.dump(2) + "\n");
        if (worst > 1.0 + 1e-12) std::exit(2);
    });

    // restricted-norm
    auto* rn = app.add_subcommand("restricted-norm",
                                  "estimate |Q| on the dyadic vanishing subspace");
    rn->fallthrough();
    std::string rn_system;
    int rn_level = 2, rn_samples = 100;
    double rn_step = 1.0 / 64.0;
    rn->add_option("--system", rn_system, "delay system JSON")->required();
    rn->add_option("--level", rn_level, "dyadic level i")->capture_default_str();
    rn->add_option("--samples", rn_samples, "random null-space samples")
        ->capture_default_str();
    rn->add_option("--step", rn_step, "hat-basis resolution")->capture_default_str();
    rn->callback([&] {
        apply_globals();
        DelaySystem sys = load_system(rn_system);
        RestrictedNormResult res =
            restricted_norm_estimate(sys, rn_level, rn_samples, rn_step, g_seed + 1);
        Json out{{"level", res.level},       {"estimate", res.estimate},
                 {"rho_i", res.rho_i},       {"decay_bound", res.decay_bound},
                 {"rank", res.rank},         {"null_dim", res.null_dim},
                 {"samples", res.samples_used}};
        emit("restricted_norm.json", out.dump(2) + "\n");
        if (res.estimate > res.rho_i * (1.0 + g_tolerance)) std::exit(2);
    });

    // variational
    auto* var = app.add_subcommand("variational",
                                   "variational-equation convergence / linearity check");
    var->fallthrough();
    std::string var_system, var_builtin;
    double var_T = 2.0;
    std::vector<double> var_hs{1e-2, 1e-3, 1e-4};
    var->add_option("--system", var_system, "linear delay system JSON");
    var->add_option("--builtin", var_builtin, "named nonlinear system: logistic");
    var->add_option("--horizon", var_T, "end time")->capture_default_str();
    var->add_option("--hs", var_hs, "perturbation sizes for the convergence fit");
    var->callback([&] {
        apply_globals();
        DelaySystem sys;
        if (!var_builtin.empty()) {
            if (var_builtin != "logistic")
                throw CLI::ValidationError("--builtin", "unknown system " + var_builtin);
            sys = logistic_delay_system();
        } else if (!var_system.empty()) {
            sys = load_system(var_system);
        } else {
            throw CLI::ValidationError("variational", "need --system or --builtin");
        }
        double hint = 1e-3;
        InitialFn phi = [d = sys.d](double t) { return Vec(d, 0.5 + 0.2 * t); };
        InitialFn xi = [d = sys.d](double t) { return Vec(d, 1.0 + 0.5 * t); };
        Trajectory V = variational_solve(sys, phi, xi, var_T, hint);
        Trajectory base = integrate(sys, phi, 0.0, var_T, hint);
        Json rows = Json::array();
        std::vector<double> lx, ly;
        for (double h : var_hs) {
            InitialFn pert = [&phi, &xi, h](double t) {
                Vec a = phi(t), b = xi(t);
                for (std::size_t c = 0; c < a.size(); ++c) a[c] += h * b[c];
                return a;
            };
            Trajectory xp = integrate(sys, pert, 0.0, var_T, hint);
            double err = 0.0;
            for (double t = 0.0; t <= var_T + 1e-12; t += 0.01) {
                Vec a = xp.eval(t), b = base.eval(t), v = V.eval(t);
                for (std::size_t c = 0; c < a.size(); ++c)
                    err = std::max(err, std::fabs(a[c] - b[c] - h * v[c]));
            }
            rows.push_back(Json{{"h", h}, {"normalized_error", err / h}});
            lx.push_back(std::log(h));
            ly.push_back(std::log(err / h));
        }
        double n = double(lx.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sx += lx[i];
            sy += ly[i];
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
        }
        double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        Json out{{"rows", rows}, {"loglog_slope", slope}};
        emit("variational.json", out.dump(2) + "\n");
        if (slope < 0.9) std::exit(2);
    });

    // boxdim
    auto* box = app.add_subcommand("boxdim", "box-counting dimension of a point cloud");
    box->fallthrough();
    std::string box_points, box_system;
    double box_eps_min = 1.0 / 128.0, box_eps_max = 0.5;
    int box_embed = 8;
    double box_stride = 0.005, box_T = 40.0, box_h = 2e-3;
    box->add_option("--points", box_points, "CSV of coordinates, one point per row");
    box->add_option("--system", box_system, "delay system to simulate and embed");
    box->add_option("--eps-min", box_eps_min, "")->capture_default_str();
    box->add_option("--eps-max", box_eps_max, "")->capture_default_str();
    box->add_option("--embed-dim", box_embed, "")->capture_default_str();
    box->add_option("--stride", box_stride, "")->capture_default_str();
    box->add_option("--horizon", box_T, "")->capture_default_str();
    box->add_option("--step", box_h, "")->capture_default_str();
    box->callback([&] {
        apply_globals();
        PointCloud cloud;
        if (!box_points.empty()) {
            std::ifstream in(box_points);
            if (!in) throw CLI::ValidationError("--points", "cannot open " + box_points);
            std::stringstream ss;
            ss << in.rdbuf();
            cloud = cloud_from_csv(ss.str());
        } else if (!box_system.empty()) {
            DelaySystem sys = load_system(box_system);
            Trajectory traj = integrate(
                sys, [d = sys.d](double) { return Vec(d, 1.0); }, 0.0, box_T, box_h);
            cloud = embed_trajectory(traj, sys.tau, box_embed, box_stride);
        } else {
            throw CLI::ValidationError("boxdim", "need --points or --system");
        }
        DimensionFit fit = minkowski_dim(cloud, box_eps_min, box_eps_max);
        Json scales = Json::array();
        for (std::size_t i = 0; i < fit.epsilons.size(); ++i)
            scales.push_back(Json{{"eps", fit.epsilons[i]}, {"K", fit.counts[i]}});
        Json out{{"scales", scales},
                 {"slope", fit.estimate},
                 {"r_squared", fit.r_squared},
                 {"reliable", fit.reliable}};
        emit("boxdim.json", out.dump(2) + "\n");
    });

    // verify
    auto* ver = app.add_subcommand("verify", "run the property suite");
    ver->fallthrough();
    ver->callback([&] {
        apply_globals();
        std::vector<CheckResult> results = run_property_suite(g_seed, g_tolerance);
        bool all = true;
        for (const CheckResult& r : results) {
            std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << "  (" << r.detail
                      << ")\n";
            all &= r.pass;
        }
        std::cout << (all ? "all checks passed\n" : "property violations detected\n");
        std::exit(all ? 0 : 2);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;  // usage error
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
