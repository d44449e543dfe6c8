#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dimest/growth.hpp"
#include "dimest/parallel.hpp"

namespace dimest {

// Delay-equation engine over R^d with the sup norm on values and segments.
// Coefficients, delays and the Lipschitz majorant are piecewise-constant
// data (with analytic overrides so rescaled systems stay exact).

using Vec = std::vector<double>;
using DMat = std::vector<double>;  // d x d row-major

// Right-continuous piecewise-constant function: values[i] on
// [knots[i-1], knots[i]), constant-extended at both ends.
struct Piecewise {
    std::vector<double> knots;
    std::vector<double> values{0.0};

    static Piecewise constant(double v) { return Piecewise{{}, {v}}; }
    double at(double t) const;
};

struct MatPiecewise {
    std::vector<double> knots;
    std::vector<DMat> values;
    const DMat& at(double t) const;
};

class Trajectory;

// History accessor handed to right-hand sides: evaluates the solution (or a
// perturbation) at an absolute time in the covered past.
using HistFn = std::function<Vec(double)>;
using InitialFn = std::function<Vec(double)>;

struct LinearTerm {
    MatPiecewise A;
    Piecewise sigma;
    std::function<DMat(double)> A_fn;        // analytic override
    std::function<double(double)> sigma_fn;  // analytic override

    DMat coeff(double t) const { return A_fn ? A_fn(t) : A.at(t); }
    double delay(double t) const { return sigma_fn ? sigma_fn(t) : sigma.at(t); }
};

// Nonlinear right-hand side F(t, x_t) evaluated with the current value and a
// history accessor; the derivative provider returns d2F(t, x_t)[V_t].
using RhsFn = std::function<Vec(double t, const Vec& now, const HistFn& hist)>;
using DerivFn = std::function<Vec(double t, const HistFn& x_hist, const Vec& v_now,
                                  const HistFn& v_hist)>;

struct DelaySystem {
    double tau = 1.0;
    int d = 1;
    bool linear = true;
    std::vector<LinearTerm> terms;
    Piecewise majorant = Piecewise::constant(1.0);
    std::vector<double> breakpoints;  // sub-step points for the integrator
    RhsFn rhs;                        // nonlinear systems only
    DerivFn deriv;                    // directional-derivative provider
    std::string label;
};

// Sum of induced sup-norm operator bounds of the coefficient matrices at t:
// an upper bound for |F(t, .)| used to verify the declared majorant.
double lipschitz_bound_at(const DelaySystem& sys, double t);

// Dense-output solution: cubic Hermite pieces between knots, with separate
// left/right derivatives so coefficient jumps keep their order.
class Trajectory {
public:
    Trajectory(double t_start, double tau, int d, InitialFn phi);

    double start_time() const { return t_start_; }
    double end_time() const { return knots_.empty() ? t_start_ : knots_.back(); }
    double tau() const { return tau_; }
    int dim() const { return d_; }

    Vec eval(double t) const;
    Vec eval_derivative(double t) const;
    // sup over [a, b] of the componentwise absolute value (exact on the
    // interpolant over the computed range; the initial segment is sampled).
    double sup_window(double a, double b) const;

    const std::vector<double>& knots() const { return knots_; }
    const std::vector<Vec>& values() const { return values_; }

    // integration hooks
    void append_knot(double t, Vec x, Vec m_left, Vec m_right);
    const Vec& last_value() const { return values_.back(); }

    // linear combination of trajectories sharing a knot grid
    static Trajectory combine(const std::vector<const Trajectory*>& parts,
                              const std::vector<double>& coeffs);

private:
    double t_start_;
    double tau_;
    int d_;
    InitialFn phi_;
    std::vector<double> knots_;
    std::vector<Vec> values_;
    std::vector<Vec> m_in_, m_out_;
    double interval_sup(std::size_t i, double a, double b) const;
};

// Method-of-steps advance with the classical 4-stage one-step scheme and
// cubic dense output; sub-steps are inserted at coefficient/majorant
// breakpoints.  h must divide tau; delays must be 0 or at least one
// sub-step long at every evaluation time.
Trajectory integrate(const DelaySystem& sys, const InitialFn& phi, double t0, double T,
                     double h);

// ---- time rescaling --------------------------------------------------------

// f(t) = int_0^t n and its generalized inverse g(s) = inf{u >= 0: f(u) = s},
// built exactly from the piecewise-constant majorant (constant-extended
// outside its knot range).
class TimeMaps {
public:
    explicit TimeMaps(const Piecewise& n);
    double f(double t) const;
    struct GPoint {
        double t = 0.0;
        double slope = 0.0;  // majorant value on the locating segment
    };
    GPoint g(double s) const;

private:
    std::vector<double> ts_;
    std::vector<double> fs_;
    std::vector<double> slope_;  // slope on [ts_i, ts_{i+1}); back() extends
};

struct RescaleResult {
    DelaySystem transformed;  // majorant identically 1, delay horizon r
    TimeMaps maps;
    double r = 0.0;        // sup_t int_t^{t+tau} n
    double s_valid = 0.0;  // transformed dynamics hold for s >= r
};

// Rescale time by the running integral of the majorant so the transformed
// right-hand side has operator norm at most 1.
RescaleResult rescale_time(const DelaySystem& sys);

// Sampled pullback x~(s) = x(g(s)) of a computed trajectory onto rescaled
// time, for comparisons against directly integrating the transformed system.
Trajectory pullback_trajectory(const Trajectory& x, const TimeMaps& maps, double s_lo,
                               double s_hi, double ds);

// ---- ladder, restricted norms, stability -----------------------------------

// The explicit dyadic-decay (k_i, rho_i) ladder of the solution operator:
// k = (0, d, 2d, (2^{i-2}+1) d) with rho_0 = exp(tau) and contraction
// factors tau/2^{i-1}, with exponential corrections while tau > 2^{i-1}.
CompactnessLadder ladder_from_delay(double tau, int d);

struct RestrictedNormResult {
    int level = 0;
    double estimate = 0.0;
    double rho_i = 0.0;        // dyadic-ladder bound for this level
    double decay_bound = 0.0;  // dyadic-decay bound tau/2^i or exp(tau - 2^i)
    int rank = 0;
    int null_dim = 0;
    int samples_used = 0;
};

// Empirical restricted norm |Q| on the subspace of initial functions whose
// solutions vanish on the level-i dyadic grid k tau / 2^{i-1}: builds a hat
// basis at resolution h, solves the vanishing constraints, and samples
// unit-norm elements of the null space.
RestrictedNormResult restricted_norm_estimate(const DelaySystem& sys, int level,
                                              int samples, double h,
                                              std::uint64_t seed = 1,
                                              Exec exec = Exec::parallel);

enum class MyshkisStatus { pass, fail, hypothesis_unmet };

struct MyshkisReport {
    MyshkisStatus status = MyshkisStatus::pass;
    double zero_violation = 0.0;  // max |x| over the dyadic grid
    double bound = 0.0;           // claimed sup bound
    double max_abs = 0.0;         // measured sup over [0, tau]
    bool exp_branch = false;      // tau >= 2^i branch
};

// Check the dyadic vanishing pattern and the resulting decay bound; failure
// certifies that no majorant-1 system produces the trajectory.
MyshkisReport myshkis_check(const Trajectory& traj, double tau, int level,
                            double phi_norm, double zero_tol = 1e-8);

struct StabilityCap {
    int level = 0;
    long long dimension_cap = 0;
    double rho_times_m = 0.0;
};

// Smallest i with rho_i * M < 1 and the corresponding k_i: the dimension cap
// for initial data of solutions that do not tend to zero.
StabilityCap stability_cap(double M, const CompactnessLadder& ladder,
                           int max_level = 200);

// Integrate the variational equation V' = d2F(t, x_t) V_t with V_0 = xi
// along the trajectory of phi, reusing the one-step integrator on the frozen
// linearization.
Trajectory variational_solve(const DelaySystem& sys, const InitialFn& phi,
                             const InitialFn& xi, double T, double h);

// ---- canned systems --------------------------------------------------------

// x'(t) = a x(t - tau), constant scalar coefficient.
DelaySystem scalar_delay_system(double a, double tau, double majorant);

// logistic delay x'(t) = x(t-1)(1 - x(t)) with its derivative provider.
DelaySystem logistic_delay_system();

} // namespace dimest
