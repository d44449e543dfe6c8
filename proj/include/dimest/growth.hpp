#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dimest/field.hpp"
#include "dimest/linalg.hpp"
#include "dimest/parallel.hpp"

namespace dimest {

// The subspace-chain data (k_i, rho_i) of a uniformly compact cocycle:
// codim X^i <= k_i and |T_n restricted to X^i| <= rho_i.  Ladders either
// store explicit rungs or extend on demand through a closed-form generator.

struct Rung {
    long long k = 0;
    double rho = 0.0;
};

struct LadderGenerator {
    enum class Type { none, delay, power };
    Type type = Type::none;
    // delay: dyadic solution-operator ladder parameters
    double tau = 0.0;
    int d = 0;
    // power: k_i = k_step * i, rho_i = scale * ratio^i
    long long k_step = 1;
    double scale = 1.0;
    double ratio = 1.0;
};

class CompactnessLadder {
public:
    CompactnessLadder(Valuation v, std::vector<Rung> rungs,
                      LadderGenerator gen = LadderGenerator{});

    const Valuation& valuation() const { return val_; }
    const LadderGenerator& generator() const { return gen_; }
    bool has_generator() const { return gen_.type != LadderGenerator::Type::none; }
    std::size_t stored_rungs() const { return rungs_.size(); }

    // Rung access, extending through the generator when needed; throws on
    // insufficient rungs without a generator.
    Rung rung(int i) const;

private:
    Valuation val_;
    mutable std::vector<Rung> rungs_;
    LadderGenerator gen_;
};

// Power-tail ladder: k_i = k_step*i, rho_i = scale*ratio^i.
CompactnessLadder power_ladder(const Valuation& v, long long k_step, double scale,
                               double ratio);

// Ladder declared by a decreasing diagonal profile sigma over R^D with the
// sup norm: k_i = i, rho_i = sigma[i].
CompactnessLadder ladder_from_diagonal_profile(const std::vector<double>& sigma);

struct RhoInfinityResult {
    double value = 0.0;                // running minimum (upper estimate)
    std::vector<double> profile;       // profile_s for s = 2..s_max
    int s_max = 0;
};

// Finite-horizon surrogate for rho_infinity = liminf of the geometric-mean
// profile; reported as an upper estimate.
RhoInfinityResult rho_infinity(const CompactnessLadder& ladder, int s_max);

struct LogValue {
    double log = 0.0;
    bool exact = true;
};

// log of the growth constant G(m) entering Xi: the g-oracle at theta = 1
// (exactly 1 in the ultrametric case).  Beyond the exact-oracle range the
// certified Hadamard/factorial upper bound is used and flagged.
LogValue log_growth_constant(const Valuation& v, int m, Exec exec = Exec::parallel);

struct XiCandidate {
    int s = 0;
    long long r = 0;
    double log_value = 0.0;
};

struct XiResult {
    double log_value = 0.0;
    double value = 0.0;  // exp(log_value); may under/overflow as double
    int s = 0;
    long long r = 0;
    bool exact = true;
    std::vector<XiCandidate> candidates;  // all admissible decompositions
};

// Xi(m, p) = G(m) * rho_s^{p r} * prod_{i<s} rho_i^{p^2 (k_{i+1}-k_i)} over
// the admissible decompositions m = p k_s + r; the minimizing s is chosen
// and all candidates are reported.
XiResult xi(const CompactnessLadder& ladder, long long m, long long p,
            Exec exec = Exec::parallel);

// The r = 0 term of the Upsilon supremum is ambiguous (empty remainder
// block): all three readings are emitted.  The primary value counts the
// empty block as factor 1; the padded variant substitutes Xi(m, 1).
struct UpsilonResult {
    double log_value = 0.0;  // sup over r in 0..p, empty block = 1
    double value = 0.0;
    double log_value_r1 = 0.0;  // sup restricted to r in 1..p
    double value_r1 = 0.0;
    double log_value_padded = 0.0;  // r = 0 term treated as the r = 1 value
    double value_padded = 0.0;
};

UpsilonResult upsilon(const CompactnessLadder& ladder, long long m, long long p,
                      Exec exec = Exec::parallel);

struct GrowthCertificate {
    Valuation valuation;
    double varpi = 0.0;
    long long m = 0;
    long long p = 0;
    int s = 0;
    long long r = 0;
    double log_xi = 0.0;
    bool xi_exact = true;
    double log_upsilon = 0.0;         // r = 0 term counted as an empty block
    double log_upsilon_r1 = 0.0;      // restricted to r in 1..p
    double log_upsilon_padded = 0.0;  // r = 0 term treated as the r = 1 value
    double log_g_m = 0.0;
    bool g_m_exact = true;
    double chi_star = 0.0;  // varpi^{-1} Xi^{1/mp}
    double varrho = 1.0;
    double varkappa = 1.0;
    double c = 1.0;
    double rho_inf_estimate = 0.0;

    double xi_value() const;
    double upsilon_value() const;
};

struct SearchParams {
    double varpi = 0.0;
    int p_max = 8;
    int s_max = 12;
    double varrho = 1.0;
    double varkappa = 1.0;
    double c = 1.0;
};

struct SearchCell {
    long long p = 0;
    int s = 0;
    long long m = 0;
    double log_xi = 0.0;
    double ratio = 0.0;  // Xi^{1/mp}
    bool feasible = false;
    bool exact = true;
};

struct SearchResult {
    std::optional<GrowthCertificate> certificate;
    std::vector<SearchCell> grid;
    RhoInfinityResult rho_profile;
    double best_ratio = 0.0;  // best ratio achieved anywhere on the grid
    std::string diagnostic;
};

// Scan m = p k_s over the (p, s) grid for the certificate minimizing
// Xi^{1/mp} subject to Xi^{1/mp} < varpi, ties broken toward smaller m.
SearchResult search_mp(const CompactnessLadder& ladder, const SearchParams& params,
                       Exec exec = Exec::parallel);

// Upper envelope K * (chi*)^N for the frame separation A_N, with
// K = [Upsilon m^m c^{-m} G(m)]^{1/m}.
double decay_envelope(const GrowthCertificate& cert, int N);

struct DirectionNeighborhood {
    double radius = 0.0;
    double coefficient_bound = 0.0;
};

// Theta chi^N / (kappa rho^N - chi^N) closeness of any further growth
// direction to the span of the m-1 frame vectors.
DirectionNeighborhood direction_neighborhood(const GrowthCertificate& cert, double chi,
                                             int N);

// (m-1) ln(chi*) / (ln(chi*) - ln(varrho)); requires K = R and
// varrho in (chi*, 1].
double minkowski_bound(const GrowthCertificate& cert);

// ---- nonlinear budget ------------------------------------------------------

struct EtaResult {
    double value = 0.0;
    bool finite = true;
    double q = 0.0;  // (L+C)^Lambda / C
    long long n_stop = 0;
    std::string diagnostic;
};

EtaResult nonlinear_eta(double M, double L, double C, double Lambda, long long N0);

struct NonlinearityBudget {
    double M = 0.0, L = 0.0, C = 0.0;
    double Lambda = 2.0;
    long long N0 = 0;
    double eta = 0.0;
    double gamma = 0.0;
    double delta = 0.0, delta_prime = 0.0;

    static NonlinearityBudget make(double M, double L, double C, double Lambda,
                                   long long N0, double delta, double delta_prime);
};

// gamma * A^{N/(Lambda-1)} / (L+C)^{Lambda N/(Lambda-1)}: the closeness gate
// under which expansion of the nonlinear orbit forces expansion of the
// linearization.
double perturbation_gate(const NonlinearityBudget& budget, double A, long long N);

struct RecursionResult {
    std::vector<double> iterates;  // e_0 .. e_N
    double final_value = 0.0;
    double majorant = 0.0;  // M C^N (1 + q(q^N-1)/(q-1)) d0^Lambda
};

// Iterate e_{k+1} = M b_k^Lambda + C e_k exactly and report the closed-form
// majorant for comparison.
RecursionResult error_recursion(const NonlinearityBudget& budget, double d0,
                                const std::vector<double>& pathwise_bounds, int N);

// ---- empirical cocycle check ----------------------------------------------

struct CocycleRow {
    int N = 0;
    double separation = 0.0;
    double envelope = 0.0;
};

struct CocycleCheck {
    bool hypothesis_ok = true;
    bool passed = true;
    GrowthCertificate certificate;
    std::vector<CocycleRow> rows;
};

// Diagonal cocycle T = diag(sigma) on R^D: declares the matching ladder,
// searches for a certificate at varpi = sigma_1, and measures the frame
// separation of m growth-achieving directions against the decay envelope.
CocycleCheck verify_cocycle_envelope(const std::vector<double>& sigma,
                                     const SearchParams& params, int n_max,
                                     Exec exec = Exec::parallel);

} // namespace dimest
