#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "dimest/field.hpp"
#include "dimest/parallel.hpp"

namespace dimest {

// Finite-dimensional normed spaces over a valued field with (optionally
// weighted) sup norms: |x| = max_j w_j |x_j|.  Weighted sup norms keep the
// operator norm, the top-form norm and the determinant exactly computable
// over both fields.

struct NormedSpace {
    Valuation valuation;
    int dim = 0;
    std::vector<double> weights;  // empty = all ones

    static NormedSpace sup(const Valuation& v, int dim);
    static NormedSpace weighted_sup(const Valuation& v, std::vector<double> w);

    double weight(int j) const { return weights.empty() ? 1.0 : weights[j]; }
    // Largest achievable |x_j| on the unit ball (value-group floor of 1/w_j).
    double coordinate_cap(int j) const;

    double norm(const KVector& x) const;
};

struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<Scalar> a;  // row-major

    static Mat zero(const Valuation& v, int r, int c);
    static Mat identity(const Valuation& v, int n);
    Scalar& at(int i, int j) { return a[std::size_t(i) * cols + j]; }
    const Scalar& at(int i, int j) const { return a[std::size_t(i) * cols + j]; }
};

Mat mat_mul(const Mat& A, const Mat& B);
KVector mat_apply(const Mat& A, const KVector& x);

// |det| of a square scalar matrix: LU over the reals, exact rational
// elimination over Q_p.
Scalar matrix_determinant(const Mat& A);

struct LinearMap {
    NormedSpace domain;
    NormedSpace codomain;
    Mat entries;  // codomain.dim x domain.dim

    LinearMap(NormedSpace dom, NormedSpace cod, Mat m);
};

LinearMap compose(const LinearMap& S, const LinearMap& T);  // S after T

// Exact operator norm for weighted sup norms: weighted absolute row sums in
// the archimedean case, weighted entry maxima in the ultrametric case.
double operator_norm(const LinearMap& T);

// Top-degree alternating form: one-dimensional, so a single coefficient
// relative to the coordinate determinant form suffices.
struct TopForm {
    NormedSpace space;
    Scalar coefficient;
};

struct GValue {
    double value = 0.0;
    bool exact = true;
};

// Raw enumeration kernel: sup of |det| over all 2^(n^2) sign matrices.
double max_sign_determinant(int n, Exec exec = Exec::parallel);

// g(theta, n) = sup over |a_ij| <= theta of |det(a_ij)|.  Archimedean: exact
// vertex enumeration (the sup is attained at vertices by multilinearity) up
// to n = 5, the Hadamard/factorial upper bound beyond, flagged inexact.
// Ultrametric: exactly theta'^n with theta' the value-group floor of theta.
// Enumeration results are cached per n.
GValue g_oracle(double theta, int n, const Valuation& v, Exec exec = Exec::parallel);

// Norm of the coordinate determinant form on the unit ball of the space.
GValue unit_ball_det_sup(const NormedSpace& space, Exec exec = Exec::parallel);

GValue form_norm(const TopForm& alpha, Exec exec = Exec::parallel);
TopForm pullback(const LinearMap& T, const TopForm& alpha);

// det T = |T* alpha| / |alpha|: for weighted sup norms this collapses to
// |det(entries)| times the ratio of coordinate caps, with the g-factor
// cancelling between domain and codomain.
double pullback_det(const LinearMap& T);

// ---- chain and basis constructions -----------------------------------------

struct TriangularBasisResult {
    std::vector<std::vector<Scalar>> eta;  // strictly upper triangular
    std::vector<KVector> u;
    std::vector<KVector> functionals;      // dual row vectors f_k
    std::vector<double> functional_norms;  // |f_k| on the ambient ball
    std::vector<double> achieved_infima;   // per-index tail distances
    double coefficient_bound = 0.0;        // max_k |f_k| <= (1/kappa)(1+eps)
};

// Triangularize vectors with |v_i| <= 1 and tail distance >= kappa so that
// every unit-ball vector expands over the u_k with coefficients of absolute
// value at most (1/kappa)(1+eps).  Dual functionals are found by exact
// finite-dimensional norm minimization (active-set enumeration over R,
// ultrametric elimination over Q_p).
TriangularBasisResult triangular_basis(const std::vector<KVector>& v, double kappa,
                                       double eps);

struct ChainBoundResult {
    double bound = 0.0;
    GValue g_used;           // growth constant actually used: g(1, n)
    GValue g_paper_discrete; // g(1/Theta, n), reported for discrete groups
    double det_value = 0.0;
    bool hypothesis_verified = true;
    double worst_contraction_ratio = 0.0;  // max sampled |Tx|/(kappa_j |x|)
};

// Bound det T by G(n) * prod kappa_j given a chain V_1 > ... > V_n with
// dim V_j = n-j+1 and |Tx| <= kappa_j |x| on V_j (verified by sampling).
ChainBoundResult det_chain_bound(const LinearMap& T,
                                 const std::vector<std::vector<KVector>>& chain,
                                 const std::vector<double>& kappas,
                                 std::uint64_t seed = 1);

// ---- supporting exact solvers (shared with tests) -------------------------

// min over lambda of |v - W lambda|_inf for real vectors (columns of W).
// Exact active-set enumeration for dim <= enum_limit, sampled descent above.
double chebyshev_distance(const std::vector<std::vector<double>>& w_columns,
                          const std::vector<double>& v, int enum_limit = 12);

// min over c of |a0 + N c|_1 for real vectors; returns the minimizer.
struct L1MinResult {
    double value = 0.0;
    std::vector<double> c;
};
L1MinResult l1_affine_min(const std::vector<double>& a0,
                          const std::vector<std::vector<double>>& n_columns);

// Exact sup-norm distance from x to the span of the given columns over Q_p,
// together with the combination coefficients realizing it.
struct UltraDistResult {
    double distance = 0.0;
    std::vector<Rational> coeffs;
    std::vector<Rational> residual;
};
UltraDistResult ultrametric_distance(const std::vector<std::vector<Rational>>& columns,
                                     const std::vector<Rational>& x, std::int64_t p);

// Numerical rank of a family of vectors (exact over Q_p).
int family_rank(const std::vector<KVector>& vs, double rel_tol = 1e-10);

// inf over max|eta_i| = 1 of |sum eta_i x_i|_inf for real frames; exact for
// m <= 2, cyclic exact line minimization with restarts for larger m (an
// upper estimate of the infimum).
double frame_separation(const std::vector<std::vector<double>>& frame,
                        int restarts = 8, std::uint64_t seed = 1);

} // namespace dimest
