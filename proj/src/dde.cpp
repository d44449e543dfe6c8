#include "dimest/dde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <set>

namespace dimest {

namespace {

constexpr double kTimeTol = 1e-12;

double comp_max(const Vec& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

} // namespace

double Piecewise::at(double t) const {
    if (values.size() != knots.size() + 1)
        throw std::invalid_argument("piecewise spec needs one more value than breakpoints");
    std::size_t i = std::upper_bound(knots.begin(), knots.end(), t) - knots.begin();
    return values[i];
}

const DMat& MatPiecewise::at(double t) const {
    if (values.size() != knots.size() + 1)
        throw std::invalid_argument("piecewise spec needs one more value than breakpoints");
    std::size_t i = std::upper_bound(knots.begin(), knots.end(), t) - knots.begin();
    return values[i];
}

double lipschitz_bound_at(const DelaySystem& sys, double t) {
    // exact operator norm of F(t, .) on sup-norm segments: terms sharing a
    // delay act on the same point, so their matrices add before taking norms
    std::vector<std::pair<double, DMat>> groups;
    for (const LinearTerm& term : sys.terms) {
        double sg = term.delay(t);
        DMat A = term.coeff(t);
        bool merged = false;
        for (auto& [delay, sum] : groups) {
            if (std::fabs(delay - sg) <= 1e-12) {
                for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += A[i];
                merged = true;
                break;
            }
        }
        if (!merged) groups.emplace_back(sg, std::move(A));
    }
    double total = 0.0;
    for (const auto& [delay, A] : groups) {
        double norm = 0.0;
        for (int i = 0; i < sys.d; ++i) {
            double row = 0.0;
            for (int j = 0; j < sys.d; ++j) row += std::fabs(A[std::size_t(i) * sys.d + j]);
            norm = std::max(norm, row);
        }
        total += norm;
    }
    return total;
}

// ---- Trajectory ------------------------------------------------------------

Trajectory::Trajectory(double t_start, double tau, int d, InitialFn phi)
    : t_start_(t_start), tau_(tau), d_(d), phi_(std::move(phi)) {
    if (d_ <= 0) throw std::invalid_argument("dimension must be positive");
    if (tau_ < 0.0) throw std::invalid_argument("negative history span");
}

void Trajectory::append_knot(double t, Vec x, Vec m_left, Vec m_right) {
    if (!knots_.empty() && !(t > knots_.back())) throw std::logic_error("non-increasing knot");
    knots_.push_back(t);
    values_.push_back(std::move(x));
    m_in_.push_back(std::move(m_left));
    m_out_.push_back(std::move(m_right));
}

namespace {

// cubic coefficients of the Hermite piece in the normalized variable s
struct Cubic {
    double c0, c1, c2, c3;
    double at(double s) const { return c0 + s * (c1 + s * (c2 + s * c3)); }
};

Cubic hermite_cubic(double xa, double ma, double xb, double mb, double h) {
    Cubic c;
    c.c0 = xa;
    c.c1 = ma * h;
    c.c2 = -3.0 * xa - 2.0 * ma * h + 3.0 * xb - mb * h;
    c.c3 = 2.0 * xa + ma * h - 2.0 * xb + mb * h;
    return c;
}

} // namespace

Vec Trajectory::eval(double t) const {
    if (t <= t_start_ + kTimeTol) {
        if (t < t_start_ - tau_ - 1e-9 * std::max(1.0, tau_))
            throw std::out_of_range("delayed lookup before the history start");
        if (t > t_start_) t = t_start_;
        return phi_(t);
    }
    if (knots_.size() < 2) throw std::out_of_range("trajectory has no computed range");
    if (t > knots_.back() + 1e-9) throw std::out_of_range("lookup beyond the computed range");
    t = std::min(t, knots_.back());
    std::size_t i = std::upper_bound(knots_.begin(), knots_.end(), t) - knots_.begin();
    i = std::min(std::max<std::size_t>(i, 1), knots_.size() - 1) - 1;
    double h = knots_[i + 1] - knots_[i];
    double s = (t - knots_[i]) / h;
    Vec out(d_);
    for (int c = 0; c < d_; ++c)
        out[c] = hermite_cubic(values_[i][c], m_out_[i][c], values_[i + 1][c],
                               m_in_[i + 1][c], h)
                     .at(s);
    return out;
}

Vec Trajectory::eval_derivative(double t) const {
    if (knots_.size() < 2) throw std::out_of_range("trajectory has no computed range");
    t = std::min(std::max(t, knots_.front()), knots_.back());
    std::size_t i = std::upper_bound(knots_.begin(), knots_.end(), t) - knots_.begin();
    i = std::min(std::max<std::size_t>(i, 1), knots_.size() - 1) - 1;
    double h = knots_[i + 1] - knots_[i];
    double s = (t - knots_[i]) / h;
    Vec out(d_);
    for (int c = 0; c < d_; ++c) {
        Cubic cc = hermite_cubic(values_[i][c], m_out_[i][c], values_[i + 1][c],
                                 m_in_[i + 1][c], h);
        out[c] = (cc.c1 + s * (2.0 * cc.c2 + s * 3.0 * cc.c3)) / h;
    }
    return out;
}

double Trajectory::interval_sup(std::size_t i, double a, double b) const {
    double ta = knots_[i], tb = knots_[i + 1];
    double h = tb - ta;
    double slo = std::max(0.0, (a - ta) / h);
    double shi = std::min(1.0, (b - ta) / h);
    if (shi < slo) return 0.0;
    double best = 0.0;
    for (int c = 0; c < d_; ++c) {
        Cubic cc = hermite_cubic(values_[i][c], m_out_[i][c], values_[i + 1][c],
                                 m_in_[i + 1][c], h);
        best = std::max({best, std::fabs(cc.at(slo)), std::fabs(cc.at(shi))});
        // critical points: 3 c3 s^2 + 2 c2 s + c1 = 0
        double A = 3.0 * cc.c3, B = 2.0 * cc.c2, C = cc.c1;
        if (std::fabs(A) < 1e-300) {
            if (B != 0.0) {
                double s = -C / B;
                if (s > slo && s < shi) best = std::max(best, std::fabs(cc.at(s)));
            }
        } else {
            double disc = B * B - 4.0 * A * C;
            if (disc >= 0.0) {
                double sq = std::sqrt(disc);
                for (double s : {(-B + sq) / (2.0 * A), (-B - sq) / (2.0 * A)})
                    if (s > slo && s < shi) best = std::max(best, std::fabs(cc.at(s)));
            }
        }
    }
    return best;
}

double Trajectory::sup_window(double a, double b) const {
    if (b < a) throw std::invalid_argument("empty window");
    double best = 0.0;
    if (a < t_start_) {
        // sampled over the initial segment
        double hi = std::min(b, t_start_);
        int n = 256;
        for (int k = 0; k <= n; ++k) {
            double t = a + (hi - a) * double(k) / double(n);
            best = std::max(best, comp_max(phi_(t)));
        }
    }
    if (b > t_start_ && knots_.size() >= 2) {
        for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
            if (knots_[i + 1] < a || knots_[i] > b) continue;
            best = std::max(best, interval_sup(i, a, b));
        }
    }
    return best;
}

Trajectory Trajectory::combine(const std::vector<const Trajectory*>& parts,
                               const std::vector<double>& coeffs) {
    if (parts.empty() || parts.size() != coeffs.size())
        throw std::invalid_argument("combine needs matching parts and coefficients");
    const Trajectory& head = *parts.front();
    for (const Trajectory* p : parts)
        if (p->knots_.size() != head.knots_.size() || p->d_ != head.d_)
            throw std::invalid_argument("combine needs a shared knot grid");
    std::vector<InitialFn> phis;
    for (const Trajectory* p : parts) phis.push_back(p->phi_);
    std::vector<double> cs = coeffs;
    Trajectory out(head.t_start_, head.tau_, head.d_, [phis, cs](double t) {
        Vec v;
        for (std::size_t k = 0; k < phis.size(); ++k) {
            Vec w = phis[k](t);
            if (v.empty()) v.assign(w.size(), 0.0);
            for (std::size_t c = 0; c < w.size(); ++c) v[c] += cs[k] * w[c];
        }
        return v;
    });
    for (std::size_t i = 0; i < head.knots_.size(); ++i) {
        Vec x(head.d_, 0.0), ml(head.d_, 0.0), mr(head.d_, 0.0);
        for (std::size_t k = 0; k < parts.size(); ++k)
            for (int c = 0; c < head.d_; ++c) {
                x[c] += coeffs[k] * parts[k]->values_[i][c];
                ml[c] += coeffs[k] * parts[k]->m_in_[i][c];
                mr[c] += coeffs[k] * parts[k]->m_out_[i][c];
            }
        out.append_knot(head.knots_[i], std::move(x), std::move(ml), std::move(mr));
    }
    return out;
}

// ---- integrator ------------------------------------------------------------

namespace {

Vec eval_linear_rhs(const DelaySystem& sys, double t, double tc, const Vec& y,
                    const HistFn& hist) {
    Vec out(sys.d, 0.0);
    for (const LinearTerm& term : sys.terms) {
        // piecewise data is constant inside a sub-step, so the midpoint tc
        // dodges boundary ambiguity; analytic terms vary and take the stage
        // time itself
        double sg = term.sigma_fn ? term.delay(t) : term.delay(tc);
        Vec v;
        if (sg < 1e-14) {
            v = y;
        } else {
            v = hist(t - sg);
        }
        DMat A = term.A_fn ? term.coeff(t) : term.coeff(tc);
        for (int i = 0; i < sys.d; ++i) {
            double s = 0.0;
            for (int j = 0; j < sys.d; ++j) s += A[std::size_t(i) * sys.d + j] * v[j];
            out[i] += s;
        }
    }
    return out;
}

Vec eval_rhs(const DelaySystem& sys, double t, double tc, const Vec& y,
             const HistFn& hist) {
    if (sys.linear) return eval_linear_rhs(sys, t, tc, y, hist);
    if (!sys.rhs) throw std::invalid_argument("nonlinear system without a right-hand side");
    return sys.rhs(t, y, hist);
}

} // namespace

Trajectory integrate(const DelaySystem& sys, const InitialFn& phi, double t0, double T,
                     double h) {
    if (!(h > 0.0)) throw std::invalid_argument("step must be positive");
    if (!(T > t0)) throw std::invalid_argument("empty integration horizon");
    double ratio = sys.tau / h;
    if (std::fabs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
        throw std::invalid_argument("step h must divide the delay tau");

    if (sys.d <= 0) throw std::invalid_argument("system dimension must be positive");
    Trajectory traj(t0, sys.tau, sys.d, phi);
    double floor_time = t0;
    HistFn hist = [&traj, &floor_time](double t) {
        if (t > floor_time + kTimeTol)
            throw std::runtime_error(
                "delayed lookup past the current step; delays must be 0 or at least one "
                "sub-step long");
        return traj.eval(t);
    };

    Vec x = phi(t0);
    if (int(x.size()) != sys.d) throw std::invalid_argument("initial function has wrong dimension");
    Vec m0 = eval_rhs(sys, t0, t0, x, hist);
    traj.append_knot(t0, x, m0, m0);

    // sorted breakpoints for sub-stepping
    std::vector<double> bps = sys.breakpoints;
    std::sort(bps.begin(), bps.end());

    long long n_base = (long long)std::ceil((T - t0) / h - 1e-12);
    double t_cur = t0;
    for (long long k = 0; k < n_base; ++k) {
        double t_next = std::min(t0 + double(k + 1) * h, T);
        // sub-points strictly inside (t_cur, t_next)
        std::vector<double> subs;
        for (double b : bps)
            if (b > t_cur + kTimeTol && b < t_next - kTimeTol) subs.push_back(b);
        subs.push_back(t_next);
        for (double sp : subs) {
            double hs = sp - t_cur;
            double tc = t_cur + 0.5 * hs;  // coefficients are constant inside
            floor_time = t_cur;
            Vec k1 = eval_rhs(sys, t_cur, tc, x, hist);
            Vec y(sys.d);
            for (int c = 0; c < sys.d; ++c) y[c] = x[c] + 0.5 * hs * k1[c];
            Vec k2 = eval_rhs(sys, t_cur + 0.5 * hs, tc, y, hist);
            for (int c = 0; c < sys.d; ++c) y[c] = x[c] + 0.5 * hs * k2[c];
            Vec k3 = eval_rhs(sys, t_cur + 0.5 * hs, tc, y, hist);
            for (int c = 0; c < sys.d; ++c) y[c] = x[c] + hs * k3[c];
            Vec k4 = eval_rhs(sys, sp, tc, y, hist);
            Vec xn(sys.d);
            for (int c = 0; c < sys.d; ++c)
                xn[c] = x[c] + hs / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            Vec m_left = eval_rhs(sys, sp, tc, xn, hist);
            Vec m_right = eval_rhs(sys, sp, sp, xn, hist);
            traj.append_knot(sp, xn, std::move(m_left), std::move(m_right));
            x = traj.last_value();
            t_cur = sp;
        }
    }
    return traj;
}

// ---- time maps and rescaling ------------------------------------------------

TimeMaps::TimeMaps(const Piecewise& n) {
    std::set<double> pts(n.knots.begin(), n.knots.end());
    pts.insert(0.0);
    ts_.assign(pts.begin(), pts.end());
    slope_.resize(ts_.size() + 1);
    slope_[0] = n.at(ts_.front() - 1.0);
    for (std::size_t i = 0; i < ts_.size(); ++i) {
        double probe = (i + 1 < ts_.size()) ? 0.5 * (ts_[i] + ts_[i + 1]) : ts_[i] + 0.5;
        slope_[i + 1] = n.at(probe);
    }
    for (double s : slope_)
        if (s < 0.0) throw std::invalid_argument("majorant must be nonnegative");
    // f at the knots, anchored at f(0) = 0
    fs_.assign(ts_.size(), 0.0);
    std::size_t zero = std::lower_bound(ts_.begin(), ts_.end(), 0.0) - ts_.begin();
    for (std::size_t i = zero; i + 1 < ts_.size(); ++i)
        fs_[i + 1] = fs_[i] + slope_[i + 1] * (ts_[i + 1] - ts_[i]);
    for (std::size_t i = zero; i-- > 0;)
        fs_[i] = fs_[i + 1] - slope_[i + 1] * (ts_[i + 1] - ts_[i]);
}

double TimeMaps::f(double t) const {
    if (t < ts_.front()) return fs_.front() + slope_.front() * (t - ts_.front());
    std::size_t i = std::upper_bound(ts_.begin(), ts_.end(), t) - ts_.begin();
    if (i == ts_.size()) return fs_.back() + slope_.back() * (t - ts_.back());
    return fs_[i - 1] + slope_[i] * (t - ts_[i - 1]);
}

TimeMaps::GPoint TimeMaps::g(double s) const {
    if (s < -kTimeTol) throw std::invalid_argument("g is defined for s >= 0");
    s = std::max(s, 0.0);
    std::size_t zero = std::lower_bound(ts_.begin(), ts_.end(), 0.0) - ts_.begin();
    double t_lo = 0.0, f_lo = 0.0;
    for (std::size_t seg = zero; seg < ts_.size(); ++seg) {
        double t_hi = (seg + 1 < ts_.size()) ? ts_[seg + 1] : std::numeric_limits<double>::infinity();
        double sl = slope_[seg + 1];
        if (std::isinf(t_hi)) {
            if (sl <= 0.0) {
                if (s <= f_lo + kTimeTol) return {t_lo, slope_[seg] > 0.0 ? slope_[seg] : sl};
                throw std::domain_error("f is bounded: the majorant vanishes eventually");
            }
            return {t_lo + (s - f_lo) / sl, sl};
        }
        double f_hi = f_lo + sl * (t_hi - t_lo);
        if (sl > 0.0 && s <= f_hi + kTimeTol) {
            double t = t_lo + (s - f_lo) / sl;
            return {std::min(t, t_hi), sl};
        }
        t_lo = t_hi;
        f_lo = f_hi;
    }
    throw std::domain_error("g: ran out of segments");
}

RescaleResult rescale_time(const DelaySystem& sys) {
    if (!sys.linear) throw std::invalid_argument("rescaling is defined for linear systems");
    bool any_positive = false;
    for (double v : sys.majorant.values) any_positive |= v > 0.0;
    if (!any_positive) throw std::invalid_argument("majorant vanishes identically; no rescaling");

    TimeMaps maps(sys.majorant);
    // r = sup_t [f(t + tau) - f(t)]: piecewise linear in t, so knots and
    // shifted knots are the only candidates.
    std::vector<double> cand{-sys.tau - 1.0, 0.0};
    for (double k : sys.majorant.knots) {
        cand.push_back(k);
        cand.push_back(k - sys.tau);
        cand.push_back(k + 1.0);
    }
    double r = 0.0;
    for (double t : cand) r = std::max(r, maps.f(t + sys.tau) - maps.f(t));
    if (!(r > 0.0))
        throw std::invalid_argument("majorant vanishes on every delay window; no rescaling");

    RescaleResult out{DelaySystem{}, maps, r, r};
    DelaySystem& tr = out.transformed;
    tr.tau = r;
    tr.d = sys.d;
    tr.linear = true;
    tr.majorant = Piecewise::constant(1.0);
    tr.label = sys.label.empty() ? "rescaled" : sys.label + " (rescaled)";
    for (const LinearTerm& term : sys.terms) {
        LinearTerm t2;
        t2.A_fn = [maps, term, d = sys.d](double s) {
            TimeMaps::GPoint gp = maps.g(s);
            DMat A = term.coeff(gp.t);
            for (double& e : A) e /= gp.slope;
            return A;
        };
        t2.sigma_fn = [maps, term](double s) {
            TimeMaps::GPoint gp = maps.g(s);
            double sg = term.delay(gp.t);
            double shifted = s - maps.f(gp.t - sg);
            return std::max(shifted, 0.0);
        };
        tr.terms.push_back(std::move(t2));
    }
    std::set<double> bps;
    std::vector<double> source = sys.breakpoints;
    for (double k : sys.majorant.knots) source.push_back(k);
    for (const LinearTerm& term : sys.terms) {
        for (double k : term.A.knots) source.push_back(k);
        for (double k : term.sigma.knots) source.push_back(k);
    }
    source.push_back(0.0);
    for (double b : source) {
        if (maps.f(b) > 0.0) bps.insert(maps.f(b));
        for (const LinearTerm& term : sys.terms) {
            double shifted = maps.f(b + term.delay(b));
            if (shifted > 0.0) bps.insert(shifted);
        }
    }
    tr.breakpoints.assign(bps.begin(), bps.end());
    return out;
}

Trajectory pullback_trajectory(const Trajectory& x, const TimeMaps& maps, double s_lo,
                               double s_hi, double ds) {
    if (!(ds > 0.0 && s_hi > s_lo)) throw std::invalid_argument("bad pullback grid");
    TimeMaps m2 = maps;
    Trajectory out(s_lo, std::max(s_lo, 0.0), x.dim(),
                   [m2, &x](double s) { return x.eval(m2.g(std::max(s, 0.0)).t); });
    long long n = (long long)std::round((s_hi - s_lo) / ds);
    for (long long k = 0; k <= n; ++k) {
        double s = s_lo + double(k) * ds;
        TimeMaps::GPoint gp = maps.g(s);
        Vec v = x.eval(gp.t);
        Vec mder = x.eval_derivative(gp.t);
        for (double& e : mder) e /= gp.slope;
        if (k == 0) {
            out.append_knot(s, v, mder, mder);
        } else {
            out.append_knot(s, std::move(v), mder, mder);
        }
    }
    return out;
}

// ---- ladder / restricted norms / stability ----------------------------------

CompactnessLadder ladder_from_delay(double tau, int d) {
    if (!(tau > 0.0)) throw std::invalid_argument("delay tau must be positive");
    if (d < 1) throw std::invalid_argument("value dimension d must be >= 1");
    LadderGenerator g;
    g.type = LadderGenerator::Type::delay;
    g.tau = tau;
    g.d = d;
    return CompactnessLadder(Valuation::real(), {}, g);
}

RestrictedNormResult restricted_norm_estimate(const DelaySystem& sys, int level,
                                              int samples, double h, std::uint64_t seed,
                                              Exec exec) {
    if (!sys.linear) throw std::invalid_argument("restricted norms need a linear system");
    if (level < 0) throw std::invalid_argument("level must be nonnegative");
    if (samples < 1) throw std::invalid_argument("need at least one sample");
    double ratio = sys.tau / h;
    long long B = (long long)std::round(ratio);
    if (std::fabs(ratio - double(B)) > 1e-9 || B < 2)
        throw std::invalid_argument("grid step must divide tau");

    const int d = sys.d;
    const int n_basis = int((B + 1) * d);
    // hat basis at resolution h on [-tau, 0]
    auto hat = [&](int b, double theta) {
        double center = -sys.tau + double(b) * h;
        double w = 1.0 - std::fabs(theta - center) / h;
        return std::max(w, 0.0);
    };
    std::vector<Trajectory> basis;
    basis.reserve(n_basis);
    for (int idx = 0; idx < n_basis; ++idx) {
        int b = idx / d, c = idx % d;
        InitialFn phi = [&hat, b, c, d](double t) {
            Vec v(d, 0.0);
            v[c] = hat(b, t);
            return v;
        };
        basis.push_back(integrate(sys, phi, 0.0, sys.tau, h));
    }

    // vanishing constraints on the dyadic grid k tau / 2^{level-1}
    std::vector<double> points;
    if (level >= 1) {
        long long half = 1ll << (level - 1);
        for (long long k = 0; k <= half; ++k)
            points.push_back(sys.tau * double(k) / double(half));
    }
    const int n_rows = int(points.size()) * d;

    RestrictedNormResult res;
    res.level = level;

    std::vector<std::vector<double>> rows(n_rows, std::vector<double>(n_basis, 0.0));
    for (int pi = 0; pi < int(points.size()); ++pi) {
        double t = std::min(points[pi], sys.tau);
        for (int col = 0; col < n_basis; ++col) {
            Vec v = basis[col].eval(t);
            for (int c = 0; c < d; ++c) rows[pi * d + c][col] = v[c];
        }
    }
    // null space by row elimination with relative rank tolerance
    std::vector<std::vector<double>> work = rows;
    std::vector<int> pivot_cols;
    double scale = 1e-300;
    for (const auto& r : work)
        for (double x : r) scale = std::max(scale, std::fabs(x));
    int rank = 0;
    for (int col = 0; col < n_basis && rank < n_rows; ++col) {
        int piv = -1;
        double pv = 1e-10 * scale;
        for (int r = rank; r < n_rows; ++r)
            if (std::fabs(work[r][col]) > pv) {
                pv = std::fabs(work[r][col]);
                piv = r;
            }
        if (piv < 0) continue;
        std::swap(work[rank], work[piv]);
        double dpv = work[rank][col];
        for (int j = 0; j < n_basis; ++j) work[rank][j] /= dpv;
        for (int r = 0; r < n_rows; ++r) {
            if (r == rank) continue;
            double f = work[r][col];
            if (f == 0.0) continue;
            for (int j = 0; j < n_basis; ++j) work[r][j] -= f * work[rank][j];
        }
        pivot_cols.push_back(col);
        ++rank;
    }
    if (rank < n_rows)
        throw std::runtime_error("constraint system rank-deficient beyond tolerance (rank " +
                                 std::to_string(rank) + " of " + std::to_string(n_rows) + ")");
    res.rank = rank;
    const int q = n_basis - rank;
    res.null_dim = q;
    std::vector<std::vector<double>> null_basis;
    std::vector<bool> is_pivot(n_basis, false);
    for (int c : pivot_cols) is_pivot[c] = true;
    for (int j = 0; j < n_basis; ++j) {
        if (is_pivot[j]) continue;
        std::vector<double> nb(n_basis, 0.0);
        nb[j] = 1.0;
        for (int r = 0; r < rank; ++r) nb[pivot_cols[r]] = -work[r][j];
        null_basis.push_back(std::move(nb));
    }

    // samples: the null basis itself plus seeded random combinations
    std::vector<std::vector<double>> coeff_sets = null_basis;
    if (level == 0) {
        // constants propagate: include the constant initial functions
        for (int c = 0; c < d; ++c) {
            std::vector<double> cs(n_basis, 0.0);
            for (long long b = 0; b <= B; ++b) cs[std::size_t(b) * d + c] = 1.0;
            coeff_sets.push_back(std::move(cs));
        }
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int s = 0; s < samples; ++s) {
        std::vector<double> mix(q);
        for (double& m : mix) m = U(rng);
        std::vector<double> cs(n_basis, 0.0);
        for (int j = 0; j < q; ++j)
            for (int t = 0; t < n_basis; ++t) cs[t] += mix[j] * null_basis[j][t];
        coeff_sets.push_back(std::move(cs));
    }
    res.samples_used = int(coeff_sets.size());

    std::vector<const Trajectory*> parts;
    for (const Trajectory& b : basis) parts.push_back(&b);
    std::vector<double> ratios(coeff_sets.size(), 0.0);
    par::for_each_index(exec, (std::int64_t)coeff_sets.size(), [&](std::int64_t i) {
        const std::vector<double>& cs = coeff_sets[i];
        double phi_norm = 0.0;
        for (double c : cs) phi_norm = std::max(phi_norm, std::fabs(c));
        if (phi_norm == 0.0) return;
        Trajectory sol = Trajectory::combine(parts, cs);
        ratios[i] = sol.sup_window(0.0, sys.tau) / phi_norm;
    });
    res.estimate = 0.0;
    for (double r : ratios) res.estimate = std::max(res.estimate, r);

    res.rho_i = ladder_from_delay(sys.tau, d).rung(level).rho;
    if (level == 0)
        res.decay_bound = std::exp(sys.tau);
    else
        res.decay_bound = sys.tau <= std::pow(2.0, level)
                              ? sys.tau / std::pow(2.0, level)
                              : std::exp(sys.tau - std::pow(2.0, level));
    return res;
}

MyshkisReport myshkis_check(const Trajectory& traj, double tau, int level,
                            double phi_norm, double zero_tol) {
    if (traj.start_time() > 1e-12 || traj.end_time() < tau * (1.0 - 1e-12))
        throw std::invalid_argument("trajectory must cover [0, tau]");
    MyshkisReport rep;
    std::vector<double> pts{0.0};
    if (level >= 1) {
        long long half = 1ll << (level - 1);
        pts.clear();
        for (long long k = 0; k <= half; ++k) pts.push_back(tau * double(k) / double(half));
    }
    for (double t : pts)
        rep.zero_violation = std::max(rep.zero_violation, comp_max(traj.eval(std::min(t, traj.end_time()))));
    rep.exp_branch = tau >= std::pow(2.0, level);
    rep.bound = tau <= std::pow(2.0, level) ? (tau / std::pow(2.0, level)) * phi_norm
                                            : std::exp(tau - std::pow(2.0, level)) * phi_norm;
    rep.max_abs = traj.sup_window(0.0, tau);
    if (rep.zero_violation > zero_tol * std::max(phi_norm, 1e-300)) {
        rep.status = MyshkisStatus::hypothesis_unmet;
        return rep;
    }
    rep.status = rep.max_abs <= rep.bound * (1.0 + 1e-9) + 1e-12 ? MyshkisStatus::pass
                                                                 : MyshkisStatus::fail;
    return rep;
}

StabilityCap stability_cap(double M, const CompactnessLadder& ladder, int max_level) {
    if (!(M > 0.0)) throw std::invalid_argument("stability constant must be positive");
    for (int i = 0; i <= max_level; ++i) {
        Rung r;
        try {
            r = ladder.rung(i);
        } catch (const std::out_of_range&) {
            throw std::out_of_range(
                "no rung with rho_i * M < 1 within the stored ladder; extend it to depth "
                "~ log2(tau M) or supply a generator");
        }
        if (r.rho * M < 1.0) return {i, r.k, r.rho * M};
    }
    throw std::domain_error("no level with rho_i * M < 1 up to the requested depth");
}

Trajectory variational_solve(const DelaySystem& sys, const InitialFn& phi,
                             const InitialFn& xi, double T, double h) {
    DerivFn deriv = sys.deriv;
    if (!deriv) {
        if (!sys.linear)
            throw std::invalid_argument("derivative provider missing for nonlinear system");
        // the derivative of a linear system is the system itself
        deriv = [&sys](double t, const HistFn&, const Vec& v_now, const HistFn& v_hist) {
            return eval_linear_rhs(sys, t, t, v_now, v_hist);
        };
    }
    auto x_traj = std::make_shared<Trajectory>(integrate(sys, phi, 0.0, T, h));
    DelaySystem lin;
    lin.tau = sys.tau;
    lin.d = sys.d;
    lin.linear = false;
    lin.breakpoints = sys.breakpoints;
    lin.label = sys.label + " (variational)";
    HistFn x_hist = [x_traj](double t) { return x_traj->eval(t); };
    lin.rhs = [deriv, x_hist](double t, const Vec& now, const HistFn& hist) {
        return deriv(t, x_hist, now, hist);
    };
    return integrate(lin, xi, 0.0, T, h);
}

DelaySystem scalar_delay_system(double a, double tau, double majorant) {
    DelaySystem sys;
    sys.tau = tau;
    sys.d = 1;
    sys.linear = true;
    LinearTerm term;
    term.A = MatPiecewise{{}, {DMat{a}}};
    term.sigma = Piecewise::constant(tau);
    sys.terms.push_back(std::move(term));
    sys.majorant = Piecewise::constant(majorant);
    sys.label = "x' = " + std::to_string(a) + " x(t - " + std::to_string(tau) + ")";
    return sys;
}

DelaySystem logistic_delay_system() {
    DelaySystem sys;
    sys.tau = 1.0;
    sys.d = 1;
    sys.linear = false;
    sys.majorant = Piecewise::constant(2.0);
    sys.label = "logistic delay";
    sys.rhs = [](double t, const Vec& now, const HistFn& hist) {
        double xd = hist(t - 1.0)[0];
        return Vec{xd * (1.0 - now[0])};
    };
    sys.deriv = [](double t, const HistFn& x_hist, const Vec& v_now, const HistFn& v_hist) {
        double xt = x_hist(t)[0];
        double xd = x_hist(t - 1.0)[0];
        double vd = v_hist(t - 1.0)[0];
        return Vec{vd * (1.0 - xt) - xd * v_now[0]};
    };
    return sys;
}

} // namespace dimest
