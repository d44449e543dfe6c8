#include "dimest/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <limits>
#include <numeric>

namespace dimest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double det2(const double* m) { return m[0] * m[3] - m[1] * m[2]; }

double det3(const double* m) {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
}

double det4(const double* m) {
    double s = 0.0;
    double minor3[9];
    for (int j = 0; j < 4; ++j) {
        int c = 0;
        for (int jj = 0; jj < 4; ++jj) {
            if (jj == j) continue;
            minor3[c] = m[4 + jj];
            minor3[3 + c] = m[8 + jj];
            minor3[6 + c] = m[12 + jj];
            ++c;
        }
        double term = m[j] * det3(minor3);
        s += (j % 2 == 0) ? term : -term;
    }
    return s;
}

double det5(const double* m) {
    double s = 0.0;
    double minor4[16];
    for (int j = 0; j < 5; ++j) {
        int c = 0;
        for (int r = 1; r < 5; ++r)
            for (int jj = 0; jj < 5; ++jj) {
                if (jj == j) continue;
                minor4[c++] = m[5 * r + jj];
            }
        double term = m[j] * det4(minor4);
        s += (j % 2 == 0) ? term : -term;
    }
    return s;
}

double det_small(const double* m, int n) {
    switch (n) {
        case 1: return m[0];
        case 2: return det2(m);
        case 3: return det3(m);
        case 4: return det4(m);
        case 5: return det5(m);
        default: return 0.0;
    }
}

double lu_abs_det(std::vector<double> a, int n) {
    double det = 1.0;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::fabs(a[r * n + c]) > std::fabs(a[piv * n + c])) piv = r;
        if (a[piv * n + c] == 0.0) return 0.0;
        if (piv != c)
            for (int j = 0; j < n; ++j) std::swap(a[piv * n + j], a[c * n + j]);
        det *= a[c * n + c];
        for (int r = c + 1; r < n; ++r) {
            double f = a[r * n + c] / a[c * n + c];
            for (int j = c; j < n; ++j) a[r * n + j] -= f * a[c * n + j];
        }
    }
    return std::fabs(det);
}

Rational rational_det(std::vector<Rational> a, int n) {
    Rational det(1);
    int sign = 1;
    for (int c = 0; c < n; ++c) {
        int piv = -1;
        for (int r = c; r < n; ++r)
            if (!a[r * n + c].is_zero()) {
                piv = r;
                break;
            }
        if (piv < 0) return Rational(0);
        if (piv != c) {
            for (int j = 0; j < n; ++j) std::swap(a[piv * n + j], a[c * n + j]);
            sign = -sign;
        }
        det = det * a[c * n + c];
        for (int r = c + 1; r < n; ++r) {
            if (a[r * n + c].is_zero()) continue;
            Rational f = a[r * n + c] / a[c * n + c];
            for (int j = c; j < n; ++j) a[r * n + j] = a[r * n + j] - f * a[c * n + j];
        }
    }
    if (sign < 0) det = -det;
    return det;
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

} // namespace

NormedSpace NormedSpace::sup(const Valuation& v, int dim) {
    if (dim <= 0) throw std::invalid_argument("space dimension must be positive");
    NormedSpace s;
    s.valuation = v;
    s.dim = dim;
    return s;
}

NormedSpace NormedSpace::weighted_sup(const Valuation& v, std::vector<double> w) {
    NormedSpace s = sup(v, int(w.size()));
    for (double x : w)
        if (!(x > 0.0)) throw std::invalid_argument("weights must be strictly positive");
    s.weights = std::move(w);
    return s;
}

double NormedSpace::coordinate_cap(int j) const {
    return value_group_floor(valuation, 1.0 / weight(j));
}

double NormedSpace::norm(const KVector& x) const {
    if (int(x.size()) != dim) throw std::invalid_argument("vector/space dimension mismatch");
    double m = 0.0;
    for (int j = 0; j < dim; ++j) {
        if (x[j].valuation() != valuation)
            throw std::invalid_argument("mixed-valuation operands rejected");
        m = std::max(m, weight(j) * abs_value(x[j]));
    }
    return m;
}

Mat Mat::zero(const Valuation& v, int r, int c) {
    Mat m;
    m.rows = r;
    m.cols = c;
    m.a.assign(std::size_t(r) * c, Scalar::zero(v));
    return m;
}

Mat Mat::identity(const Valuation& v, int n) {
    Mat m = zero(v, n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = Scalar::one(v);
    return m;
}

Mat mat_mul(const Mat& A, const Mat& B) {
    if (A.cols != B.rows) throw std::invalid_argument("matrix shape mismatch");
    const Valuation v = A.a.front().valuation();
    Mat C = Mat::zero(v, A.rows, B.cols);
    for (int i = 0; i < A.rows; ++i)
        for (int k = 0; k < A.cols; ++k) {
            const Scalar& aik = A.at(i, k);
            if (aik.is_zero()) continue;
            for (int j = 0; j < B.cols; ++j)
                C.at(i, j) = C.at(i, j) + aik * B.at(k, j);
        }
    return C;
}

KVector mat_apply(const Mat& A, const KVector& x) {
    if (A.cols != int(x.size())) throw std::invalid_argument("matrix/vector shape mismatch");
    const Valuation v = A.a.front().valuation();
    KVector y(A.rows, Scalar::zero(v));
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) y[i] = y[i] + A.at(i, j) * x[j];
    return y;
}

Scalar matrix_determinant(const Mat& A) {
    if (A.rows != A.cols) throw std::invalid_argument("determinant of non-square matrix");
    const int n = A.rows;
    const Valuation v = A.a.front().valuation();
    if (v.is_real()) {
        std::vector<double> d(std::size_t(n) * n);
        for (int i = 0; i < n * n; ++i) d[i] = A.a[i].real_value();
        // keep the sign: redo LU tracking sign via pivot parity
        double det = 1.0;
        std::vector<double> a = d;
        for (int c = 0; c < n; ++c) {
            int piv = c;
            for (int r = c + 1; r < n; ++r)
                if (std::fabs(a[r * n + c]) > std::fabs(a[piv * n + c])) piv = r;
            if (a[piv * n + c] == 0.0) return Scalar::real(0.0, v);
            if (piv != c) {
                for (int j = 0; j < n; ++j) std::swap(a[piv * n + j], a[c * n + j]);
                det = -det;
            }
            det *= a[c * n + c];
            for (int r = c + 1; r < n; ++r) {
                double f = a[r * n + c] / a[c * n + c];
                for (int j = c; j < n; ++j) a[r * n + j] -= f * a[c * n + j];
            }
        }
        return Scalar::real(det, v);
    }
    std::vector<Rational> r(std::size_t(n) * n);
    for (int i = 0; i < n * n; ++i) r[i] = A.a[i].rational_value();
    return Scalar::padic(rational_det(std::move(r), n), v);
}

LinearMap::LinearMap(NormedSpace dom, NormedSpace cod, Mat m)
    : domain(std::move(dom)), codomain(std::move(cod)), entries(std::move(m)) {
    if (domain.valuation != codomain.valuation)
        throw std::invalid_argument("mixed-valuation operands rejected");
    if (entries.rows != codomain.dim || entries.cols != domain.dim)
        throw std::invalid_argument("entry shape does not match spaces");
}

LinearMap compose(const LinearMap& S, const LinearMap& T) {
    if (S.domain.dim != T.codomain.dim || S.domain.valuation != T.codomain.valuation ||
        S.domain.weights != T.codomain.weights)
        throw std::invalid_argument("composition through mismatched middle space");
    return LinearMap(T.domain, S.codomain, mat_mul(S.entries, T.entries));
}

double operator_norm(const LinearMap& T) {
    const NormedSpace& X = T.domain;
    const NormedSpace& Y = T.codomain;
    double best = 0.0;
    for (int i = 0; i < Y.dim; ++i) {
        double row = 0.0;
        for (int j = 0; j < X.dim; ++j) {
            double e = abs_value(T.entries.at(i, j)) * X.coordinate_cap(j);
            if (X.valuation.is_real())
                row += e;
            else
                row = std::max(row, e);
        }
        best = std::max(best, Y.weight(i) * row);
    }
    return best;
}

double max_sign_determinant(int n, Exec exec) {
    if (n <= 0 || n > 5)
        throw std::invalid_argument("sign enumeration supports 1 <= n <= 5");
    const std::int64_t total = std::int64_t(1) << (n * n);
    const int nn = n * n;
    return par::max_over(exec, total, [n, nn](std::int64_t bits) {
        double m[25];
        for (int k = 0; k < nn; ++k) m[k] = (bits >> k & 1) ? 1.0 : -1.0;
        return std::fabs(det_small(m, n));
    });
}

GValue g_oracle(double theta, int n, const Valuation& v, Exec exec) {
    if (!(theta > 0.0)) throw std::invalid_argument("g_oracle requires theta > 0");
    if (n <= 0) throw std::invalid_argument("g_oracle requires n >= 1");
    if (v.is_padic()) {
        double tp = value_group_floor(v, theta);
        return {std::pow(tp, double(n)), true};
    }
    if (n > 5) {
        double bound = std::min(std::pow(theta, n) * factorial(n),
                                std::pow(theta * std::sqrt(double(n)), double(n)));
        return {bound, false};
    }
    // Exact vertex enumeration: by multilinearity the sup over the cube
    // [-theta, theta]^(n^2) is attained at a sign matrix.  The sign-matrix
    // sup depends only on n, so it is computed once.
    static std::once_flag flags[5];
    static double cache[5];
    std::call_once(flags[n - 1], [n, exec] { cache[n - 1] = max_sign_determinant(n, exec); });
    return {cache[n - 1] * std::pow(theta, double(n)), true};
}

GValue unit_ball_det_sup(const NormedSpace& space, Exec exec) {
    GValue g = g_oracle(1.0, space.dim, space.valuation, exec);
    double caps = 1.0;
    for (int j = 0; j < space.dim; ++j) caps *= space.coordinate_cap(j);
    return {g.value * caps, g.exact};
}

GValue form_norm(const TopForm& alpha, Exec exec) {
    GValue s = unit_ball_det_sup(alpha.space, exec);
    return {abs_value(alpha.coefficient) * s.value, s.exact};
}

TopForm pullback(const LinearMap& T, const TopForm& alpha) {
    if (T.domain.dim != T.codomain.dim)
        throw std::invalid_argument("pullback of top form needs a square map");
    if (alpha.space.dim != T.codomain.dim)
        throw std::invalid_argument("form does not live on the codomain");
    return TopForm{T.domain, alpha.coefficient * matrix_determinant(T.entries)};
}

double pullback_det(const LinearMap& T) {
    if (T.domain.dim != T.codomain.dim)
        throw std::invalid_argument("pullback determinant needs a square map");
    double d = abs_value(matrix_determinant(T.entries));
    double ratio = 1.0;
    for (int j = 0; j < T.domain.dim; ++j)
        ratio *= T.domain.coordinate_cap(j) / T.codomain.coordinate_cap(j);
    return d * ratio;
}

// ---- exact 1-d and small LP-style minimizers ------------------------------

namespace {

double maxabs_affine(const std::vector<double>& a, const std::vector<double>& b, double t) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] + t * b[i]));
    return m;
}

// Exact minimizer of t -> max_i |a_i + t b_i| over [lo, hi] (convex
// piecewise linear; the minimum sits at a crossing, a zero, or an end).
std::pair<double, double> min_maxabs_affine_1d(const std::vector<double>& a,
                                               const std::vector<double>& b, double lo,
                                               double hi) {
    std::vector<double> cand{lo, hi};
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (b[i] != 0.0) cand.push_back(-a[i] / b[i]);
        for (std::size_t j = i + 1; j < n; ++j) {
            double d1 = b[i] - b[j];
            if (d1 != 0.0) cand.push_back((a[j] - a[i]) / d1);
            double d2 = b[i] + b[j];
            if (d2 != 0.0) cand.push_back(-(a[i] + a[j]) / d2);
        }
    }
    double bt = lo, bv = kInf;
    for (double t : cand) {
        if (!(t >= lo && t <= hi)) continue;
        double v = maxabs_affine(a, b, t);
        if (v < bv) {
            bv = v;
            bt = t;
        }
    }
    return {bt, bv};
}

std::vector<int> independent_columns(const std::vector<std::vector<double>>& cols,
                                     double rel_tol = 1e-12) {
    if (cols.empty()) return {};
    const std::size_t m = cols.front().size();
    std::vector<std::vector<double>> work = cols;
    std::vector<int> keep;
    std::vector<bool> used_row(m, false);
    double scale = 0.0;
    for (const auto& c : cols)
        for (double x : c) scale = std::max(scale, std::fabs(x));
    if (scale == 0.0) return {};
    for (std::size_t j = 0; j < cols.size(); ++j) {
        // find the largest unused-row entry in this column
        std::size_t piv = m;
        double pv = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            if (!used_row[i] && std::fabs(work[j][i]) > pv) {
                pv = std::fabs(work[j][i]);
                piv = i;
            }
        if (piv == m || pv <= rel_tol * scale) continue;
        keep.push_back(int(j));
        used_row[piv] = true;
        for (std::size_t l = j + 1; l < cols.size(); ++l) {
            double f = work[l][piv] / work[j][piv];
            if (f == 0.0) continue;
            for (std::size_t i = 0; i < m; ++i) work[l][i] -= f * work[j][i];
        }
    }
    return keep;
}

bool solve_dense(std::vector<double> a, std::vector<double> rhs, int n,
                 std::vector<double>& out) {
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::fabs(a[r * n + c]) > std::fabs(a[piv * n + c])) piv = r;
        if (std::fabs(a[piv * n + c]) < 1e-13) return false;
        if (piv != c) {
            for (int j = 0; j < n; ++j) std::swap(a[piv * n + j], a[c * n + j]);
            std::swap(rhs[piv], rhs[c]);
        }
        for (int r = c + 1; r < n; ++r) {
            double f = a[r * n + c] / a[c * n + c];
            rhs[r] -= f * rhs[c];
            for (int j = c; j < n; ++j) a[r * n + j] -= f * a[c * n + j];
        }
    }
    out.assign(n, 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double s = rhs[r];
        for (int j = r + 1; j < n; ++j) s -= a[r * n + j] * out[j];
        out[r] = s / a[r * n + r];
    }
    return true;
}

} // namespace

double chebyshev_distance(const std::vector<std::vector<double>>& w_columns,
                          const std::vector<double>& v, int enum_limit) {
    const int m = int(v.size());
    std::vector<int> keep = independent_columns(w_columns);
    const int r = int(keep.size());
    if (r == 0) {
        double s = 0.0;
        for (double x : v) s = std::max(s, std::fabs(x));
        return s;
    }
    std::vector<std::vector<double>> W(r, std::vector<double>(m));
    for (int j = 0; j < r; ++j) W[j] = w_columns[keep[j]];

    auto residual_max = [&](const std::vector<double>& lam) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) {
            double x = v[i];
            for (int j = 0; j < r; ++j) x -= W[j][i] * lam[j];
            s = std::max(s, std::fabs(x));
        }
        return s;
    };

    if (m <= enum_limit) {
        // Active-set enumeration: an optimal vertex has r+1 tight residuals.
        std::vector<int> idx(r + 1);
        std::vector<double> best_lam;
        double best = kInf;
        std::function<void(int, int)> rec = [&](int pos, int start) {
            if (pos == r + 1) {
                const int k = r + 1;
                for (int smask = 0; smask < (1 << r); ++smask) {
                    std::vector<double> A(std::size_t(k) * k), rhs(k);
                    for (int e = 0; e < k; ++e) {
                        int row = idx[e];
                        for (int j = 0; j < r; ++j) A[e * k + j] = W[j][row];
                        double sign = (e == 0) ? 1.0 : ((smask >> (e - 1) & 1) ? 1.0 : -1.0);
                        A[e * k + r] = sign;
                        rhs[e] = v[row];
                    }
                    std::vector<double> sol;
                    if (!solve_dense(A, rhs, k, sol)) continue;
                    double t = sol[r];
                    if (t < -1e-12) continue;
                    std::vector<double> lam(sol.begin(), sol.begin() + r);
                    double full = residual_max(lam);
                    if (full <= std::fabs(t) * (1.0 + 1e-9) + 1e-12 && full < best) {
                        best = full;
                        best_lam = lam;
                    }
                }
                return;
            }
            for (int i = start; i <= m - (r + 1 - pos); ++i) {
                idx[pos] = i;
                rec(pos + 1, i + 1);
            }
        };
        rec(0, 0);
        if (best < kInf) return best;
    }

    // Fallback: cyclic exact line minimization with restarts.
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double best = kInf;
    for (int rs = 0; rs < 16; ++rs) {
        std::vector<double> lam(r, 0.0);
        if (rs > 0)
            for (double& x : lam) x = U(rng);
        double cur = residual_max(lam);
        for (int pass = 0; pass < 200; ++pass) {
            double before = cur;
            for (int j = 0; j < r; ++j) {
                std::vector<double> a(m), b(m);
                for (int i = 0; i < m; ++i) {
                    double x = v[i];
                    for (int l = 0; l < r; ++l)
                        if (l != j) x -= W[l][i] * lam[l];
                    a[i] = x;
                    b[i] = -W[j][i];
                }
                auto [t, val] = min_maxabs_affine_1d(a, b, -1e6, 1e6);
                lam[j] = t;
                cur = val;
            }
            if (before - cur < 1e-15) break;
        }
        best = std::min(best, cur);
    }
    return best;
}

L1MinResult l1_affine_min(const std::vector<double>& a0,
                          const std::vector<std::vector<double>>& n_columns) {
    const int m = int(a0.size());
    std::vector<int> keep = independent_columns(n_columns);
    const int k = int(keep.size());
    L1MinResult res;
    res.c.assign(n_columns.size(), 0.0);
    auto l1_of = [&](const std::vector<double>& c_red) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) {
            double x = a0[i];
            for (int j = 0; j < k; ++j) x += n_columns[keep[j]][i] * c_red[j];
            s += std::fabs(x);
        }
        return s;
    };
    if (k == 0) {
        res.value = l1_of({});
        return res;
    }
    // An l1 optimum over an affine family has k zero residuals.
    std::vector<int> idx(k);
    double best = kInf;
    std::vector<double> best_c;
    std::function<void(int, int)> rec = [&](int pos, int start) {
        if (pos == k) {
            std::vector<double> A(std::size_t(k) * k), rhs(k);
            for (int e = 0; e < k; ++e) {
                for (int j = 0; j < k; ++j) A[e * k + j] = n_columns[keep[j]][idx[e]];
                rhs[e] = -a0[idx[e]];
            }
            std::vector<double> sol;
            if (!solve_dense(A, rhs, k, sol)) return;
            double val = l1_of(sol);
            if (val < best) {
                best = val;
                best_c = sol;
            }
            return;
        }
        for (int i = start; i <= m - (k - pos); ++i) {
            idx[pos] = i;
            rec(pos + 1, i + 1);
        }
    };
    rec(0, 0);
    if (best == kInf) {
        res.value = l1_of(std::vector<double>(k, 0.0));
        return res;
    }
    res.value = best;
    for (int j = 0; j < k; ++j) res.c[keep[j]] = best_c[j];
    return res;
}

UltraDistResult ultrametric_distance(const std::vector<std::vector<Rational>>& columns,
                                     const std::vector<Rational>& x, std::int64_t p) {
    const int m = int(x.size());
    const int r = int(columns.size());
    // Augment columns with identity tags so elimination tracks coefficients.
    std::vector<std::vector<Rational>> cols(r);
    for (int j = 0; j < r; ++j) {
        cols[j] = columns[j];
        cols[j].resize(std::size_t(m) + r, Rational(0));
        cols[j][std::size_t(m) + j] = Rational(1);
    }
    std::vector<bool> col_done(r, false), row_used(m, false);
    struct Pivot {
        int row;
        int col;
    };
    std::vector<Pivot> pivots;
    for (int step = 0; step < r; ++step) {
        // global min-valuation pivot over remaining columns / unused rows
        int bi = -1, bj = -1;
        long bv = 0;
        for (int j = 0; j < r; ++j) {
            if (col_done[j]) continue;
            for (int i = 0; i < m; ++i) {
                if (row_used[i] || cols[j][i].is_zero()) continue;
                long v = padic_valuation(cols[j][i], p);
                if (bi < 0 || v < bv) {
                    bv = v;
                    bi = i;
                    bj = j;
                }
            }
        }
        if (bi < 0) break;  // remaining columns vanish: dependent
        Rational piv = cols[bj][bi];
        for (auto& e : cols[bj]) e = e / piv;
        for (int j = 0; j < r; ++j) {
            if (j == bj || col_done[j] || cols[j][bi].is_zero()) continue;
            Rational f = cols[j][bi];
            for (int i = 0; i < m + r; ++i) cols[j][i] = cols[j][i] - f * cols[bj][i];
        }
        col_done[bj] = true;
        row_used[bi] = true;
        pivots.push_back({bi, bj});
    }
    // Eliminate x along the pivots; the tag accumulates the coefficients.
    std::vector<Rational> work = x;
    work.resize(std::size_t(m) + r, Rational(0));
    for (const Pivot& pv : pivots) {
        Rational f = work[pv.row];
        if (f.is_zero()) continue;
        for (int i = 0; i < m + r; ++i) work[i] = work[i] - f * cols[pv.col][i];
    }
    UltraDistResult res;
    res.residual.assign(work.begin(), work.begin() + m);
    res.coeffs.assign(r, Rational(0));
    for (int j = 0; j < r; ++j) res.coeffs[j] = -work[std::size_t(m) + j];
    double d = 0.0;
    for (const Rational& e : res.residual)
        if (!e.is_zero())
            d = std::max(d, std::pow(double(p), -double(padic_valuation(e, p))));
    res.distance = d;
    return res;
}

int family_rank(const std::vector<KVector>& vs, double rel_tol) {
    if (vs.empty()) return 0;
    const Valuation v = vs.front().front().valuation();
    const int m = int(vs.front().size());
    const int n = int(vs.size());
    if (v.is_real()) {
        std::vector<std::vector<double>> rows(n, std::vector<double>(m));
        double scale = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) {
                rows[i][j] = vs[i][j].real_value();
                scale = std::max(scale, std::fabs(rows[i][j]));
            }
        if (scale == 0.0) return 0;
        int rank = 0;
        std::vector<bool> used(n, false);
        for (int c = 0; c < m && rank < n; ++c) {
            int piv = -1;
            double pv = rel_tol * scale;
            for (int i = 0; i < n; ++i)
                if (!used[i] && std::fabs(rows[i][c]) > pv) {
                    pv = std::fabs(rows[i][c]);
                    piv = i;
                }
            if (piv < 0) continue;
            used[piv] = true;
            ++rank;
            for (int i = 0; i < n; ++i) {
                if (i == piv || used[i]) continue;
                double f = rows[i][c] / rows[piv][c];
                for (int j = 0; j < m; ++j) rows[i][j] -= f * rows[piv][j];
            }
        }
        return rank;
    }
    std::vector<std::vector<Rational>> rows(n, std::vector<Rational>(m));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) rows[i][j] = vs[i][j].rational_value();
    int rank = 0;
    std::vector<bool> used(n, false);
    for (int c = 0; c < m && rank < n; ++c) {
        int piv = -1;
        for (int i = 0; i < n; ++i)
            if (!used[i] && !rows[i][c].is_zero()) {
                piv = i;
                break;
            }
        if (piv < 0) continue;
        used[piv] = true;
        ++rank;
        for (int i = 0; i < n; ++i) {
            if (i == piv || used[i]) continue;
            if (rows[i][c].is_zero()) continue;
            Rational f = rows[i][c] / rows[piv][c];
            for (int j = 0; j < m; ++j) rows[i][j] = rows[i][j] - f * rows[piv][j];
        }
    }
    return rank;
}

// ---- Triangular basis (dual-functional construction) ----------------------

namespace {

// Particular solution + null-space basis of the underdetermined system
// rows * a = rhs over the reals.
struct AffineSolution {
    std::vector<double> particular;
    std::vector<std::vector<double>> null_basis;
};

AffineSolution solve_affine_real(std::vector<std::vector<double>> rows,
                                 std::vector<double> rhs) {
    const int q = int(rows.size());
    const int D = int(rows.front().size());
    std::vector<int> pivot_col(q, -1);
    int rank = 0;
    for (int rr = 0; rr < q; ++rr) {
        // partial pivot over columns within this row-echelon step
        int pc = -1;
        double pv = 1e-13;
        int prow = -1;
        for (int i = rank; i < q; ++i)
            for (int j = 0; j < D; ++j)
                if (std::fabs(rows[i][j]) > pv) {
                    pv = std::fabs(rows[i][j]);
                    prow = i;
                    pc = j;
                }
        if (prow < 0) break;
        std::swap(rows[rank], rows[prow]);
        std::swap(rhs[rank], rhs[prow]);
        double d = rows[rank][pc];
        for (int j = 0; j < D; ++j) rows[rank][j] /= d;
        rhs[rank] /= d;
        for (int i = 0; i < q; ++i) {
            if (i == rank) continue;
            double f = rows[i][pc];
            if (f == 0.0) continue;
            for (int j = 0; j < D; ++j) rows[i][j] -= f * rows[rank][j];
            rhs[i] -= f * rhs[rank];
        }
        pivot_col[rank] = pc;
        ++rank;
    }
    for (int i = rank; i < q; ++i)
        if (std::fabs(rhs[i]) > 1e-9)
            throw std::domain_error("inconsistent functional constraints (dependent vectors)");
    AffineSolution sol;
    sol.particular.assign(D, 0.0);
    std::vector<bool> is_pivot(D, false);
    for (int i = 0; i < rank; ++i) {
        sol.particular[pivot_col[i]] = rhs[i];
        is_pivot[pivot_col[i]] = true;
    }
    for (int j = 0; j < D; ++j) {
        if (is_pivot[j]) continue;
        std::vector<double> nb(D, 0.0);
        nb[j] = 1.0;
        for (int i = 0; i < rank; ++i) nb[pivot_col[i]] = -rows[i][j];
        sol.null_basis.push_back(std::move(nb));
    }
    return sol;
}

struct AffineSolutionQ {
    std::vector<Rational> particular;
    std::vector<std::vector<Rational>> null_basis;
};

AffineSolutionQ solve_affine_rational(std::vector<std::vector<Rational>> rows,
                                      std::vector<Rational> rhs) {
    const int q = int(rows.size());
    const int D = int(rows.front().size());
    std::vector<int> pivot_col(q, -1);
    int rank = 0;
    for (int rr = 0; rr < q; ++rr) {
        int prow = -1, pc = -1;
        for (int i = rank; i < q && prow < 0; ++i)
            for (int j = 0; j < D; ++j)
                if (!rows[i][j].is_zero()) {
                    prow = i;
                    pc = j;
                    break;
                }
        if (prow < 0) break;
        std::swap(rows[rank], rows[prow]);
        std::swap(rhs[rank], rhs[prow]);
        Rational d = rows[rank][pc];
        for (int j = 0; j < D; ++j) rows[rank][j] = rows[rank][j] / d;
        rhs[rank] = rhs[rank] / d;
        for (int i = 0; i < q; ++i) {
            if (i == rank) continue;
            Rational f = rows[i][pc];
            if (f.is_zero()) continue;
            for (int j = 0; j < D; ++j) rows[i][j] = rows[i][j] - f * rows[rank][j];
            rhs[i] = rhs[i] - f * rhs[rank];
        }
        pivot_col[rank] = pc;
        ++rank;
    }
    for (int i = rank; i < q; ++i)
        if (!rhs[i].is_zero())
            throw std::domain_error("inconsistent functional constraints (dependent vectors)");
    AffineSolutionQ sol;
    sol.particular.assign(D, Rational(0));
    std::vector<bool> is_pivot(D, false);
    for (int i = 0; i < rank; ++i) {
        sol.particular[pivot_col[i]] = rhs[i];
        is_pivot[pivot_col[i]] = true;
    }
    for (int j = 0; j < D; ++j) {
        if (is_pivot[j]) continue;
        std::vector<Rational> nb(D, Rational(0));
        nb[j] = Rational(1);
        for (int i = 0; i < rank; ++i) nb[pivot_col[i]] = -rows[i][j];
        sol.null_basis.push_back(std::move(nb));
    }
    return sol;
}

} // namespace

TriangularBasisResult triangular_basis(const std::vector<KVector>& v, double kappa,
                                       double eps) {
    if (v.empty()) throw std::invalid_argument("no vectors supplied");
    if (!(kappa > 0.0 && kappa <= 1.0)) throw std::invalid_argument("kappa must lie in (0,1]");
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    const int m = int(v.size());
    const int D = int(v.front().size());
    const Valuation val = v.front().front().valuation();
    for (const KVector& x : v) {
        if (int(x.size()) != D) throw std::invalid_argument("ragged vector family");
        double nx = sup_norm(x);
        if (nx > 1.0 + 1e-12)
            throw std::invalid_argument("vectors must lie in the unit ball");
    }

    TriangularBasisResult res;
    res.achieved_infima.assign(m, 0.0);

    // Tail-distance precondition: inf over lambda of |v_i + sum lambda_j v_j|.
    for (int i = 0; i < m; ++i) {
        double dist;
        if (val.is_real()) {
            std::vector<std::vector<double>> tail;
            for (int j = i + 1; j < m; ++j) {
                std::vector<double> c(D);
                for (int t = 0; t < D; ++t) c[t] = v[j][t].real_value();
                tail.push_back(std::move(c));
            }
            std::vector<double> vi(D);
            for (int t = 0; t < D; ++t) vi[t] = v[i][t].real_value();
            dist = chebyshev_distance(tail, vi);
        } else {
            std::vector<std::vector<Rational>> tail;
            for (int j = i + 1; j < m; ++j) {
                std::vector<Rational> c(D);
                for (int t = 0; t < D; ++t) c[t] = v[j][t].rational_value();
                tail.push_back(std::move(c));
            }
            std::vector<Rational> vi(D);
            for (int t = 0; t < D; ++t) vi[t] = v[i][t].rational_value();
            dist = ultrametric_distance(tail, vi, val.p).distance;
        }
        res.achieved_infima[i] = dist;
        if (dist < kappa * (1.0 - 1e-9))
            throw std::domain_error("tail-distance precondition fails at index " +
                                    std::to_string(i + 1) + ": achieved infimum " +
                                    std::to_string(dist) + " < kappa");
    }

    // Dual functionals f_k with f_k(v_k) = 1, f_k(v_j) = 0 for j > k, of
    // minimal norm on the ambient ball.
    res.functionals.resize(m);
    res.functional_norms.assign(m, 0.0);
    for (int k = 0; k < m; ++k) {
        if (val.is_real()) {
            std::vector<std::vector<double>> rows;
            std::vector<double> rhs;
            for (int j = k; j < m; ++j) {
                std::vector<double> row(D);
                for (int t = 0; t < D; ++t) row[t] = v[j][t].real_value();
                rows.push_back(std::move(row));
                rhs.push_back(j == k ? 1.0 : 0.0);
            }
            AffineSolution sol = solve_affine_real(std::move(rows), std::move(rhs));
            L1MinResult opt = l1_affine_min(sol.particular, sol.null_basis);
            std::vector<double> a = sol.particular;
            for (std::size_t j = 0; j < sol.null_basis.size(); ++j)
                for (int t = 0; t < D; ++t) a[t] += sol.null_basis[j][t] * opt.c[j];
            KVector fk(D, Scalar::zero(val));
            for (int t = 0; t < D; ++t) fk[t] = Scalar::real(a[t], val);
            res.functionals[k] = std::move(fk);
            res.functional_norms[k] = opt.value;
        } else {
            std::vector<std::vector<Rational>> rows;
            std::vector<Rational> rhs;
            for (int j = k; j < m; ++j) {
                std::vector<Rational> row(D);
                for (int t = 0; t < D; ++t) row[t] = v[j][t].rational_value();
                rows.push_back(std::move(row));
                rhs.push_back(Rational(j == k ? 1 : 0));
            }
            AffineSolutionQ sol = solve_affine_rational(std::move(rows), std::move(rhs));
            // minimize max_j |a0 + N c|: distance from -a0 to the null span
            std::vector<Rational> neg(D);
            for (int t = 0; t < D; ++t) neg[t] = -sol.particular[t];
            UltraDistResult ud = ultrametric_distance(sol.null_basis, neg, val.p);
            KVector fk(D, Scalar::zero(val));
            for (int t = 0; t < D; ++t) fk[t] = Scalar::padic(-ud.residual[t], val);
            res.functionals[k] = std::move(fk);
            res.functional_norms[k] = ud.distance;
        }
    }
    res.coefficient_bound = 0.0;
    for (double n : res.functional_norms)
        res.coefficient_bound = std::max(res.coefficient_bound, n);
    double allowed = (1.0 / kappa) * (1.0 + eps) * (1.0 + 1e-9);
    if (res.coefficient_bound > allowed)
        throw std::domain_error("dual functional norm " +
                                std::to_string(res.coefficient_bound) +
                                " exceeds (1/kappa)(1+eps)");

    // eta by forward elimination against the functionals: u_i ends up with
    // f_k(u_i) = delta_{ik}.
    auto apply = [&](const KVector& f, const KVector& x) {
        Scalar s = Scalar::zero(val);
        for (int t = 0; t < D; ++t) s = s + f[t] * x[t];
        return s;
    };
    res.eta.assign(m, std::vector<Scalar>(m, Scalar::zero(val)));
    res.u.resize(m);
    for (int i = 0; i < m; ++i) {
        KVector w = v[i];
        for (int k = i + 1; k < m; ++k) {
            Scalar e = -apply(res.functionals[k], w);
            res.eta[i][k] = e;
            for (int t = 0; t < D; ++t) w[t] = w[t] + e * v[k][t];
        }
        res.u[i] = std::move(w);
    }
    return res;
}

ChainBoundResult det_chain_bound(const LinearMap& T,
                                 const std::vector<std::vector<KVector>>& chain,
                                 const std::vector<double>& kappas, std::uint64_t seed) {
    if (T.domain.dim != T.codomain.dim)
        throw std::invalid_argument("chain bound needs a square map");
    const int n = T.domain.dim;
    if (int(chain.size()) != n || int(kappas.size()) != n)
        throw std::invalid_argument("need one subspace and one kappa per dimension step");
    const Valuation val = T.domain.valuation;

    for (int j = 0; j < n; ++j) {
        int rank = family_rank(chain[j]);
        if (rank != n - j)
            throw std::invalid_argument("chain dimensions not strictly decreasing by 1 (V_" +
                                        std::to_string(j + 1) + " has rank " +
                                        std::to_string(rank) + ", expected " +
                                        std::to_string(n - j) + ")");
    }

    ChainBoundResult res;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::uniform_int_distribution<int> Z(-9, 9);
    res.worst_contraction_ratio = 0.0;
    for (int j = 0; j < n; ++j) {
        for (int s = 0; s < 64; ++s) {
            KVector x(n, Scalar::zero(val));
            for (const KVector& g : chain[j]) {
                Scalar c = val.is_real() ? Scalar::real(U(rng), val)
                                         : Scalar::padic(Rational(Z(rng)), val);
                for (int t = 0; t < n; ++t) x[t] = x[t] + c * g[t];
            }
            double nx = T.domain.norm(x);
            if (nx == 0.0) continue;
            double ny = T.codomain.norm(mat_apply(T.entries, x));
            double ratio = kappas[j] > 0.0 ? ny / (kappas[j] * nx)
                                           : (ny > 0.0 ? kInf : 0.0);
            res.worst_contraction_ratio = std::max(res.worst_contraction_ratio, ratio);
            if (ny > kappas[j] * nx * (1.0 + 1e-9) + 1e-15) res.hypothesis_verified = false;
        }
    }

    res.g_used = g_oracle(1.0, n, val);
    res.g_paper_discrete =
        val.dense() ? res.g_used : g_oracle(1.0 / theta(val), n, val);
    double prod = 1.0;
    for (double k : kappas) prod *= k;
    res.bound = res.g_used.value * prod;
    res.det_value = pullback_det(T);
    if (res.hypothesis_verified && res.det_value > res.bound * (1.0 + 1e-9) + 1e-300)
        throw std::logic_error("determinant exceeds the chain bound on a verified chain");
    return res;
}

double frame_separation(const std::vector<std::vector<double>>& frame, int restarts,
                        std::uint64_t seed) {
    const int m = int(frame.size());
    if (m == 0) throw std::invalid_argument("empty frame");
    const int D = int(frame.front().size());
    auto supn = [&](const std::vector<double>& x) {
        double s = 0.0;
        for (double t : x) s = std::max(s, std::fabs(t));
        return s;
    };
    if (m == 1) return supn(frame[0]);

    double best = kInf;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int face = 0; face < m; ++face) {
        // eta_face = 1 (global sign symmetry), others in [-1, 1]
        std::vector<int> others;
        for (int j = 0; j < m; ++j)
            if (j != face) others.push_back(j);
        if (m == 2) {
            std::vector<double> a = frame[face], b = frame[others[0]];
            auto [t, val] = min_maxabs_affine_1d(a, b, -1.0, 1.0);
            (void)t;
            best = std::min(best, val);
            continue;
        }
        for (int rs = 0; rs < std::max(1, restarts); ++rs) {
            std::vector<double> eta(others.size(), 0.0);
            if (rs > 0)
                for (double& e : eta) e = U(rng);
            double cur = kInf;
            for (int pass = 0; pass < 60; ++pass) {
                double before = cur;
                for (std::size_t oj = 0; oj < others.size(); ++oj) {
                    std::vector<double> a(D), b(D);
                    for (int t = 0; t < D; ++t) {
                        double x = frame[face][t];
                        for (std::size_t ol = 0; ol < others.size(); ++ol)
                            if (ol != oj) x += eta[ol] * frame[others[ol]][t];
                        a[t] = x;
                        b[t] = frame[others[oj]][t];
                    }
                    auto [t1, val] = min_maxabs_affine_1d(a, b, -1.0, 1.0);
                    eta[oj] = t1;
                    cur = val;
                }
                if (!(before - cur > 1e-16)) break;
            }
            best = std::min(best, cur);
        }
    }
    return best;
}

} // namespace dimest
