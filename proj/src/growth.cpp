#include "dimest/growth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dimest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Rung delay_rung(double tau, int d, int i) {
    if (i > 60) throw std::domain_error("delay ladder rung index too large");
    Rung r;
    if (i == 0)
        r.k = 0;
    else if (i == 1)
        r.k = d;
    else if (i == 2)
        r.k = 2ll * d;
    else
        r.k = ((1ll << (i - 2)) + 1) * d;
    if (i == 0) {
        r.rho = std::exp(tau);
    } else if (tau <= 1.0) {
        r.rho = tau / std::pow(2.0, double(i - 1));
    } else {
        double cutoff = std::log(tau) / std::log(2.0) + 1.0;
        if (double(i) <= cutoff + 1e-12)
            r.rho = std::exp(tau - std::pow(2.0, double(i - 1)));
        else
            r.rho = tau / std::pow(2.0, double(i - 1));
    }
    return r;
}

} // namespace

CompactnessLadder::CompactnessLadder(Valuation v, std::vector<Rung> rungs,
                                     LadderGenerator gen)
    : val_(v), rungs_(std::move(rungs)), gen_(gen) {
    if (rungs_.size() < 2 && !has_generator())
        throw std::invalid_argument("ladder needs at least two rungs");
    if (has_generator() && rungs_.size() < 2) rung(1);  // materialize the head
    if (rungs_.front().k != 0) throw std::invalid_argument("ladder must start at k_0 = 0");
    for (std::size_t i = 0; i + 1 < rungs_.size(); ++i)
        if (!(rungs_[i].k < rungs_[i + 1].k))
            throw std::invalid_argument("ladder indices k_i must be strictly increasing");
    for (const Rung& r : rungs_)
        if (!(r.rho >= 0.0)) throw std::invalid_argument("ladder bounds rho_i must be >= 0");
}

Rung CompactnessLadder::rung(int i) const {
    if (i < 0) throw std::invalid_argument("negative rung index");
    if (i < int(rungs_.size())) return rungs_[i];
    switch (gen_.type) {
        case LadderGenerator::Type::delay:
            while (int(rungs_.size()) <= i)
                rungs_.push_back(delay_rung(gen_.tau, gen_.d, int(rungs_.size())));
            return rungs_[i];
        case LadderGenerator::Type::power:
            while (int(rungs_.size()) <= i) {
                int j = int(rungs_.size());
                rungs_.push_back(
                    {gen_.k_step * j, gen_.scale * std::pow(gen_.ratio, double(j))});
            }
            return rungs_[i];
        case LadderGenerator::Type::none:
        default:
            throw std::out_of_range("ladder has " + std::to_string(rungs_.size()) +
                                    " rungs and no generator (requested rung " +
                                    std::to_string(i) + ")");
    }
}

CompactnessLadder power_ladder(const Valuation& v, long long k_step, double scale,
                               double ratio) {
    if (k_step <= 0) throw std::invalid_argument("k_step must be positive");
    if (!(scale >= 0.0 && ratio >= 0.0))
        throw std::invalid_argument("power ladder needs nonnegative scale/ratio");
    LadderGenerator g;
    g.type = LadderGenerator::Type::power;
    g.k_step = k_step;
    g.scale = scale;
    g.ratio = ratio;
    return CompactnessLadder(v, {}, g);
}

CompactnessLadder ladder_from_diagonal_profile(const std::vector<double>& sigma) {
    if (sigma.size() < 2) throw std::invalid_argument("profile needs at least two entries");
    for (std::size_t i = 0; i + 1 < sigma.size(); ++i)
        if (sigma[i + 1] > sigma[i])
            throw std::invalid_argument("diagonal profile must be nonincreasing");
    std::vector<Rung> rungs;
    for (std::size_t i = 0; i < sigma.size(); ++i)
        rungs.push_back({(long long)i, sigma[i]});
    // terminal rung: the chain bottoms out at the zero subspace
    rungs.push_back({(long long)sigma.size(), 0.0});
    return CompactnessLadder(Valuation::real(), std::move(rungs));
}

RhoInfinityResult rho_infinity(const CompactnessLadder& ladder, int s_max) {
    if (s_max < 2) throw std::invalid_argument("rho_infinity needs s_max >= 2");
    ladder.rung(s_max);  // fail early if rungs are missing
    RhoInfinityResult res;
    res.s_max = s_max;
    res.value = kInf;
    double log_acc = 0.0;  // sum_{i=1}^{s-1} (k_{i+1}-k_i) ln rho_i
    bool zero = false;
    for (int s = 2; s <= s_max; ++s) {
        const Rung lo = ladder.rung(s - 1);
        const Rung hi = ladder.rung(s);
        double dk = double(hi.k - lo.k);
        if (lo.rho == 0.0)
            zero = true;
        else
            log_acc += dk * std::log(lo.rho);
        double profile = zero ? 0.0 : std::exp(log_acc / double(hi.k));
        res.profile.push_back(profile);
        res.value = std::min(res.value, profile);
    }
    return res;
}

LogValue log_growth_constant(const Valuation& v, int m, Exec exec) {
    if (m <= 0) throw std::invalid_argument("growth constant needs m >= 1");
    if (v.is_padic()) return {0.0, true};  // ultrametric g(1, m) = 1
    if (m <= 5) {
        GValue g = g_oracle(1.0, m, v, exec);
        return {std::log(g.value), g.exact};
    }
    double log_fact = std::lgamma(double(m) + 1.0);
    double log_hadamard = 0.5 * double(m) * std::log(double(m));
    return {std::min(log_fact, log_hadamard), false};
}

XiResult xi(const CompactnessLadder& ladder, long long m, long long p, Exec exec) {
    if (m <= 0 || p <= 0) throw std::invalid_argument("Xi needs positive m, p");
    LogValue G = log_growth_constant(ladder.valuation(), int(std::min<long long>(m, 1 << 20)),
                                     exec);
    XiResult res;
    res.exact = G.exact;
    bool found = false;
    double log_tail = 0.0;  // p^2 sum_{i<s} (k_{i+1}-k_i) ln rho_i
    bool tail_zero = false;
    for (int s = 0;; ++s) {
        Rung ks = ladder.rung(s);
        if (p * ks.k > m) break;
        Rung ks1 = ladder.rung(s + 1);
        if (s >= 1) {
            // accumulate the i = s-1 factor into the tail product
            Rung prev = ladder.rung(s - 1);
            if (s - 1 >= 1) {
                double dk = double(ks.k - prev.k);
                if (prev.rho == 0.0)
                    tail_zero = true;
                else
                    log_tail += double(p) * double(p) * dk * std::log(prev.rho);
            }
        }
        long long r = m - p * ks.k;
        if (r < 0 || r > p * (ks1.k - ks.k)) continue;
        double log_val;
        if (tail_zero)
            log_val = -kInf;
        else {
            log_val = G.log + log_tail;
            if (r > 0) {
                if (ks.rho == 0.0)
                    log_val = -kInf;
                else
                    log_val += double(p) * double(r) * std::log(ks.rho);
            }
        }
        res.candidates.push_back({s, r, log_val});
        if (!found || log_val < res.log_value) {
            res.log_value = log_val;
            res.s = s;
            res.r = r;
            found = true;
        }
    }
    if (!found)
        throw std::domain_error("no admissible decomposition m = p k_s + r for m = " +
                                std::to_string(m) + ", p = " + std::to_string(p));
    res.value = std::exp(res.log_value);
    return res;
}

UpsilonResult upsilon(const CompactnessLadder& ladder, long long m, long long p,
                      Exec exec) {
    if (m <= 0 || p <= 0) throw std::invalid_argument("Upsilon needs positive m, p");
    XiResult xp = xi(ladder, m, p, exec);
    if (xp.log_value == -kInf)
        throw std::domain_error("Upsilon undefined: Xi(m, p) = 0");
    UpsilonResult res;
    // r = 0: empty remainder block contributes factor 1.
    res.log_value = xp.log_value / double(p);
    double log_xi1 = 0.0;
    bool have_r1 = false;
    for (long long r = 1; r <= p; ++r) {
        XiResult xr = xi(ladder, m, r, exec);
        if (r == 1) log_xi1 = xr.log_value;
        double term = xr.log_value - (double(r - 1) / double(p)) * xp.log_value;
        if (!have_r1 || term > res.log_value_r1) {
            res.log_value_r1 = term;
            have_r1 = true;
        }
        res.log_value = std::max(res.log_value, term);
    }
    res.log_value_padded =
        std::max(res.log_value_r1, log_xi1 + xp.log_value / double(p));
    res.value = std::exp(res.log_value);
    res.value_r1 = std::exp(res.log_value_r1);
    res.value_padded = std::exp(res.log_value_padded);
    return res;
}

double GrowthCertificate::xi_value() const { return std::exp(log_xi); }
double GrowthCertificate::upsilon_value() const { return std::exp(log_upsilon); }

SearchResult search_mp(const CompactnessLadder& ladder, const SearchParams& params,
                       Exec exec) {
    if (!(params.varpi > 0.0)) throw std::invalid_argument("varpi must be positive");
    if (params.p_max < 1 || params.s_max < 1)
        throw std::invalid_argument("search limits must be >= 1");
    if (!(params.varrho > 0.0 && params.varrho <= 1.0))
        throw std::invalid_argument("varrho must lie in (0, 1]");
    if (!(params.varkappa > 0.0 && params.varkappa <= 1.0))
        throw std::invalid_argument("varkappa must lie in (0, 1]");
    if (!(params.c > 0.0)) throw std::invalid_argument("c must be positive");

    int s_hi = params.s_max;
    if (!ladder.has_generator())
        s_hi = std::min<int>(s_hi, int(ladder.stored_rungs()) - 2);
    if (s_hi < 1) throw std::invalid_argument("ladder too short for the requested search");

    SearchResult res;
    res.rho_profile = rho_infinity(ladder, std::max(2, s_hi));
    if (!(params.varpi > res.rho_profile.value)) {
        res.best_ratio = kInf;
        res.diagnostic = "varpi = " + std::to_string(params.varpi) +
                         " does not exceed the rho_infinity estimate " +
                         std::to_string(res.rho_profile.value);
        return res;
    }

    struct Key {
        long long p;
        int s;
    };
    std::vector<Key> keys;
    for (long long p = 1; p <= params.p_max; ++p)
        for (int s = 1; s <= s_hi; ++s) keys.push_back({p, s});
    std::vector<SearchCell> grid(keys.size());
    // Cells are independent; rung extension is pre-forced so the parallel
    // path never mutates the ladder cache concurrently.
    ladder.rung(s_hi + 1);
    par::for_each_index(exec, (std::int64_t)keys.size(), [&](std::int64_t i) {
        const Key key = keys[i];
        SearchCell cell;
        cell.p = key.p;
        cell.s = key.s;
        cell.m = key.p * ladder.rung(key.s).k;
        if (cell.m >= 1) {
            XiResult x = xi(ladder, cell.m, key.p, Exec::serial);
            cell.log_xi = x.log_value;
            cell.exact = x.exact;
            cell.ratio = std::exp(x.log_value / (double(cell.m) * double(key.p)));
            cell.feasible = cell.ratio < params.varpi;
        }
        grid[i] = cell;
    });
    res.grid = std::move(grid);

    const SearchCell* best = nullptr;
    res.best_ratio = kInf;
    for (const SearchCell& cell : res.grid) {
        if (cell.m < 1) continue;
        res.best_ratio = std::min(res.best_ratio, cell.ratio);
        if (!cell.feasible) continue;
        if (!best || cell.ratio < best->ratio - 1e-15 ||
            (std::fabs(cell.ratio - best->ratio) <= 1e-15 && cell.m < best->m))
            best = &cell;
    }
    if (!best) {
        res.diagnostic =
            "no (m, p) within limits satisfies Xi^{1/mp} < varpi; best ratio " +
            std::to_string(res.best_ratio) +
            " (larger p eventually succeeds whenever varpi > rho_infinity)";
        return res;
    }

    GrowthCertificate cert;
    cert.valuation = ladder.valuation();
    cert.varpi = params.varpi;
    cert.m = best->m;
    cert.p = best->p;
    XiResult x = xi(ladder, best->m, best->p, exec);
    cert.log_xi = x.log_value;
    cert.xi_exact = x.exact;
    cert.s = x.s;
    cert.r = x.r;
    UpsilonResult u = upsilon(ladder, best->m, best->p, exec);
    cert.log_upsilon = u.log_value;
    cert.log_upsilon_r1 = u.log_value_r1;
    cert.log_upsilon_padded = u.log_value_padded;
    LogValue g = log_growth_constant(ladder.valuation(), int(best->m), exec);
    cert.log_g_m = g.log;
    cert.g_m_exact = g.exact;
    cert.chi_star = best->ratio / params.varpi;
    cert.varrho = params.varrho;
    cert.varkappa = params.varkappa;
    cert.c = params.c;
    cert.rho_inf_estimate = res.rho_profile.value;
    res.certificate = cert;
    return res;
}

double decay_envelope(const GrowthCertificate& cert, int N) {
    if (N < 0) throw std::invalid_argument("N must be nonnegative");
    double m = double(cert.m);
    double log_k = (cert.log_upsilon + m * std::log(m) - m * std::log(cert.c) +
                    cert.log_g_m) /
                   m;
    return std::exp(log_k + double(N) * std::log(cert.chi_star));
}

DirectionNeighborhood direction_neighborhood(const GrowthCertificate& cert, double chi,
                                             int N) {
    if (!(chi > cert.chi_star && chi < cert.varrho))
        throw std::invalid_argument("chi must lie in (chi*, varrho)");
    if (N <= 0) throw std::invalid_argument("N must be positive");
    double th = theta(cert.valuation);
    // kappa rho^N - chi^N = rho^N (kappa - (chi/rho)^N), evaluated in logs
    double log_rho_n = double(N) * std::log(cert.varrho);
    double gap = cert.varkappa - std::exp(double(N) * std::log(chi / cert.varrho));
    if (!(gap > 0.0))
        throw std::domain_error("kappa varrho^N - chi^N <= 0: N too small for this chi");
    double log_den = log_rho_n + std::log(gap);
    DirectionNeighborhood out;
    out.radius = std::exp(std::log(th) + double(N) * std::log(chi) - log_den);
    out.coefficient_bound = std::exp(std::log(th) - log_den);
    return out;
}

double minkowski_bound(const GrowthCertificate& cert) {
    if (!cert.valuation.is_real())
        throw std::invalid_argument("Minkowski bound requires the archimedean field");
    if (!(cert.chi_star > 0.0 && cert.chi_star < 1.0))
        throw std::domain_error("certificate violates chi* in (0, 1)");
    if (!(cert.varrho > cert.chi_star && cert.varrho <= 1.0))
        throw std::domain_error("varrho must lie in (chi*, 1]");
    if (cert.varrho == 1.0) return double(cert.m - 1);
    double lc = std::log(cert.chi_star);
    double lr = std::log(cert.varrho);
    return double(cert.m - 1) * lc / (lc - lr);
}

EtaResult nonlinear_eta(double M, double L, double C, double Lambda, long long N0) {
    if (!(C > 0.0)) throw std::invalid_argument("eta needs C > 0");
    if (!(Lambda > 1.0)) throw std::invalid_argument("eta needs Lambda > 1");
    if (M < 0.0 || L < 0.0) throw std::invalid_argument("eta needs M, L >= 0");
    EtaResult res;
    res.q = std::pow(L + C, Lambda) / C;
    if (M == 0.0) {
        res.value = 0.0;
        return res;
    }
    if (std::fabs(res.q - 1.0) <= 1e-14) {
        res.value = kInf;
        res.finite = false;
        res.diagnostic = "q = (L+C)^Lambda / C equals 1: term_N = M(1+N) diverges";
        return res;
    }
    if (res.q < 1.0) {
        res.value = kInf;
        res.finite = false;
        res.diagnostic = "q < 1: C^N dominates (L+C)^{Lambda N} and the terms diverge";
        return res;
    }
    // q > 1: the terms increase to M q/(q-1); evaluate until increments fade.
    const double a = 1.0 / res.q;
    double best = 0.0;
    double aN = std::pow(a, double(N0));
    for (long long n = N0;; ++n) {
        double sum_factor = 1.0 + res.q * (std::pow(res.q, double(n)) - 1.0) / (res.q - 1.0);
        double term = M * aN * sum_factor;
        double inc = term - best;
        best = std::max(best, term);
        res.n_stop = n;
        if (n > N0 && std::fabs(inc) < 1e-12 * std::max(1.0, best)) break;
        if (n - N0 > 200000) break;
        aN *= a;
    }
    res.value = best;
    return res;
}

NonlinearityBudget NonlinearityBudget::make(double M, double L, double C, double Lambda,
                                            long long N0, double delta,
                                            double delta_prime) {
    if (!(delta > 0.0 && delta_prime > 0.0 && delta_prime < delta))
        throw std::invalid_argument("need 0 < delta' < delta");
    NonlinearityBudget b;
    b.M = M;
    b.L = L;
    b.C = C;
    b.Lambda = Lambda;
    b.N0 = N0;
    b.delta = delta;
    b.delta_prime = delta_prime;
    EtaResult e = nonlinear_eta(M, L, C, Lambda, N0);
    if (!e.finite)
        throw std::domain_error("eta is infinite for these constants: " + e.diagnostic);
    b.eta = e.value;
    b.gamma = b.eta > 0.0 ? std::pow((delta - delta_prime) / b.eta, 1.0 / (Lambda - 1.0))
                          : 1.0;
    return b;
}

double perturbation_gate(const NonlinearityBudget& budget, double A, long long N) {
    if (!(budget.Lambda > 1.0)) throw std::invalid_argument("gate needs Lambda > 1");
    if (!(A > 0.0)) throw std::invalid_argument("gate needs A > 0");
    if (N < 0) throw std::invalid_argument("gate needs N >= 0");
    double expo = double(N) / (budget.Lambda - 1.0);
    double log_r = std::log(budget.gamma) +
                   expo * (std::log(A) - budget.Lambda * std::log(budget.L + budget.C));
    return std::exp(log_r);
}

RecursionResult error_recursion(const NonlinearityBudget& budget, double d0,
                                const std::vector<double>& pathwise_bounds, int N) {
    if (d0 < 0.0) throw std::invalid_argument("d0 must be nonnegative");
    if (int(pathwise_bounds.size()) < N)
        throw std::invalid_argument("need a pathwise bound for each step");
    for (double b : pathwise_bounds)
        if (b < 0.0) throw std::invalid_argument("pathwise bounds must be nonnegative");
    RecursionResult res;
    res.iterates.reserve(std::size_t(N) + 1);
    double e = budget.M * std::pow(d0, budget.Lambda);
    res.iterates.push_back(e);
    for (int k = 0; k < N; ++k) {
        e = budget.M * std::pow(pathwise_bounds[k], budget.Lambda) + budget.C * e;
        res.iterates.push_back(e);
    }
    res.final_value = e;
    double q = std::pow(budget.L + budget.C, budget.Lambda) / budget.C;
    double sum_factor = std::fabs(q - 1.0) <= 1e-14
                            ? 1.0 + double(N)
                            : 1.0 + q * (std::pow(q, double(N)) - 1.0) / (q - 1.0);
    res.majorant = budget.M * std::pow(budget.C, double(N)) * sum_factor *
                   std::pow(d0, budget.Lambda);
    return res;
}

CocycleCheck verify_cocycle_envelope(const std::vector<double>& sigma,
                                     const SearchParams& params, int n_max, Exec exec) {
    const int D = int(sigma.size());
    CompactnessLadder ladder = ladder_from_diagonal_profile(sigma);
    SearchResult sr = search_mp(ladder, params, exec);
    if (!sr.certificate)
        throw std::domain_error("no certificate for the declared profile: " + sr.diagnostic);
    CocycleCheck check;
    check.certificate = *sr.certificate;
    const long long m = check.certificate.m;
    if (m > D)
        throw std::domain_error("certificate m exceeds the cocycle dimension; widen sigma");

    // Frame of m directions all growing at sigma_1: e_1 and e_1 + e_i.
    for (int N = 1; N <= n_max; ++N) {
        std::vector<std::vector<double>> frame;
        for (int i = 0; i < int(m); ++i) {
            std::vector<double> x(D, 0.0);
            x[0] = 1.0;
            if (i > 0) x[i] = std::pow(sigma[i] / sigma[0], double(N));
            frame.push_back(std::move(x));
        }
        // hypothesis |T^N y| >= c varpi^N |y| for every frame direction
        double growth = std::pow(sigma[0], double(N));
        if (growth < check.certificate.c *
                         std::pow(check.certificate.varpi, double(N)) * (1.0 - 1e-12))
            check.hypothesis_ok = false;
        CocycleRow row;
        row.N = N;
        row.separation = frame_separation(frame);
        row.envelope = decay_envelope(check.certificate, N);
        if (row.separation > row.envelope * (1.0 + 1e-6)) check.passed = false;
        check.rows.push_back(row);
    }
    return check;
}

} // namespace dimest
