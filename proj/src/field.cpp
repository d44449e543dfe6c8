#include "dimest/field.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace dimest {

namespace {

bool is_prime(std::int64_t n) {
    if (n < 2) return false;
    for (std::int64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

std::int64_t checked_cast(__int128 v, const char* what) {
    if (v > std::numeric_limits<std::int64_t>::max() ||
        v < std::numeric_limits<std::int64_t>::min())
        throw std::overflow_error(std::string("rational overflow in ") + what);
    return static_cast<std::int64_t>(v);
}

} // namespace

Valuation Valuation::real(double theta) {
    if (!(theta > 0.0 && theta < 1.0))
        throw std::invalid_argument("archimedean Theta must lie in (0,1)");
    Valuation v;
    v.kind = Kind::real;
    v.theta_ = theta;
    return v;
}

Valuation Valuation::padic(std::int64_t p) {
    if (!is_prime(p))
        throw std::invalid_argument("p-adic valuation requires a prime p >= 2");
    Valuation v;
    v.kind = Kind::padic;
    v.p = p;
    v.theta_ = 1.0 / double(p);
    return v;
}

std::string Valuation::describe() const {
    if (is_real()) return "real";
    return "Q_" + std::to_string(p);
}

Rational::Rational(std::int64_t n, std::int64_t d) {
    if (d == 0) throw std::invalid_argument("rational with zero denominator");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    std::int64_t g = std::gcd(n < 0 ? -n : n, d);
    if (g > 1) {
        n /= g;
        d /= g;
    }
    num = n;
    den = d;
}

Rational Rational::operator+(const Rational& o) const {
    __int128 n = (__int128)num * o.den + (__int128)o.num * den;
    __int128 d = (__int128)den * o.den;
    // reduce in 128 bits before casting down
    auto gcd128 = [](__int128 a, __int128 b) {
        if (a < 0) a = -a;
        if (b < 0) b = -b;
        while (b) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        return a;
    };
    __int128 gg = gcd128(n, d);
    if (gg > 1) {
        n /= gg;
        d /= gg;
    }
    return Rational(checked_cast(n, "add"), checked_cast(d, "add"));
}

Rational Rational::operator-(const Rational& o) const { return *this + Rational(-o.num, o.den); }

Rational Rational::operator*(const Rational& o) const {
    Rational a(num, o.den);   // cross-reduce first to keep intermediates small
    Rational b(o.num, den);
    __int128 n = (__int128)a.num * b.num;
    __int128 d = (__int128)a.den * b.den;
    return Rational(checked_cast(n, "mul"), checked_cast(d, "mul"));
}

Rational Rational::operator/(const Rational& o) const {
    if (o.num == 0) throw std::domain_error("rational division by zero");
    return *this * Rational(o.den, o.num);
}

int padic_valuation(const Rational& r, std::int64_t p) {
    if (r.num == 0) throw std::domain_error("v_p(0) is +infinity");
    int v = 0;
    std::int64_t n = r.num < 0 ? -r.num : r.num;
    while (n % p == 0) {
        n /= p;
        ++v;
    }
    std::int64_t d = r.den;
    while (d % p == 0) {
        d /= p;
        --v;
    }
    return v;
}

Scalar Scalar::real(double x, const Valuation& v) {
    if (!v.is_real()) throw std::invalid_argument("real payload with non-real valuation");
    Scalar s;
    s.val_ = v;
    s.x_ = x;
    return s;
}

Scalar Scalar::padic(Rational r, const Valuation& v) {
    if (!v.is_padic()) throw std::invalid_argument("rational payload with non-p-adic valuation");
    Scalar s;
    s.val_ = v;
    s.r_ = r;
    return s;
}

Scalar Scalar::zero(const Valuation& v) {
    return v.is_real() ? real(0.0, v) : padic(Rational(0), v);
}

Scalar Scalar::one(const Valuation& v) {
    return v.is_real() ? real(1.0, v) : padic(Rational(1), v);
}

bool Scalar::is_zero() const { return val_.is_real() ? x_ == 0.0 : r_.is_zero(); }

double Scalar::real_value() const {
    if (!val_.is_real()) throw std::logic_error("not a real scalar");
    return x_;
}

const Rational& Scalar::rational_value() const {
    if (!val_.is_padic()) throw std::logic_error("not a p-adic scalar");
    return r_;
}

void Scalar::check_same(const Scalar& o) const {
    if (val_ != o.val_)
        throw std::invalid_argument("mixed-valuation operands rejected");
}

Scalar Scalar::operator+(const Scalar& o) const {
    check_same(o);
    if (val_.is_real()) return real(x_ + o.x_, val_);
    return padic(r_ + o.r_, val_);
}

Scalar Scalar::operator-(const Scalar& o) const {
    check_same(o);
    if (val_.is_real()) return real(x_ - o.x_, val_);
    return padic(r_ - o.r_, val_);
}

Scalar Scalar::operator*(const Scalar& o) const {
    check_same(o);
    if (val_.is_real()) return real(x_ * o.x_, val_);
    return padic(r_ * o.r_, val_);
}

Scalar Scalar::operator/(const Scalar& o) const {
    check_same(o);
    if (o.is_zero()) throw std::domain_error("scalar division by zero");
    if (val_.is_real()) return real(x_ / o.x_, val_);
    return padic(r_ / o.r_, val_);
}

Scalar Scalar::operator-() const {
    if (val_.is_real()) return real(-x_, val_);
    return padic(-r_, val_);
}

bool Scalar::operator==(const Scalar& o) const {
    if (val_ != o.val_) return false;
    return val_.is_real() ? x_ == o.x_ : r_ == o.r_;
}

namespace {

// correctly rounded p^{-vp}: exact integer power plus one division
double padic_abs_pow(std::int64_t p, int vp) {
    int a = vp < 0 ? -vp : vp;
    double acc = 1.0;
    for (int i = 0; i < a; ++i) {
        acc *= double(p);
        if (acc > 9.0e15) return std::pow(double(p), double(-vp));
    }
    return vp >= 0 ? 1.0 / acc : acc;
}

} // namespace

double abs_value(const Scalar& s) {
    const Valuation& v = s.valuation();
    if (v.is_real()) return std::fabs(s.real_value());
    if (s.is_zero()) return 0.0;
    return padic_abs_pow(v.p, padic_valuation(s.rational_value(), v.p));
}

double theta(const Valuation& v) { return v.theta(); }

double sup_norm(const KVector& x) {
    if (x.empty()) throw std::invalid_argument("empty vector");
    const Valuation& v = x.front().valuation();
    double m = 0.0;
    for (const Scalar& s : x) {
        if (s.valuation() != v)
            throw std::invalid_argument("mixed-valuation operands rejected");
        m = std::max(m, abs_value(s));
    }
    return m;
}

namespace {

Rational pow_rational(std::int64_t p, int e) {
    Rational r(1);
    Rational base = e >= 0 ? Rational(p) : Rational(1, p);
    int n = e >= 0 ? e : -e;
    for (int i = 0; i < n; ++i) r = r * base;
    return r;
}

} // namespace

AnnulusResult normalize_annulus(const KVector& x) {
    if (x.empty()) throw std::invalid_argument("empty vector");
    const Valuation& v = x.front().valuation();
    double nx = sup_norm(x);
    if (nx == 0.0) throw std::invalid_argument("zero vector has no annulus representative");

    AnnulusResult res;
    if (v.is_real()) {
        // Dividing the attained coordinate by the norm yields exactly +-1.
        res.k = Scalar::real(1.0 / nx, v);
        res.y.reserve(x.size());
        for (const Scalar& s : x) res.y.push_back(Scalar::real(s.real_value() / nx, v));
        return res;
    }
    // |x| = p^{-v*} with v* the minimal coordinate valuation; k = p^{-v*}
    // shifts every coordinate valuation up by -v*, landing the sup at 1.
    int vstar = std::numeric_limits<int>::max();
    for (const Scalar& s : x)
        if (!s.is_zero()) vstar = std::min(vstar, padic_valuation(s.rational_value(), v.p));
    Rational k = pow_rational(v.p, -vstar);
    res.k = Scalar::padic(k, v);
    res.y.reserve(x.size());
    for (const Scalar& s : x) res.y.push_back(Scalar::padic(s.rational_value() * k, v));
    return res;
}

double value_group_floor(const Valuation& v, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("value_group_floor requires t > 0");
    if (v.dense()) return t;
    // Largest p^k <= t, with a relative fudge so that doubles that are meant
    // to be exact powers (e.g. 0.2 for p = 5) round to themselves.
    const double p = double(v.p);
    const double eps = 1.0 + 8.0 * std::numeric_limits<double>::epsilon();
    int k = (int)std::floor(std::log(t * eps) / std::log(p));
    double pk = std::pow(p, double(k));
    while (pk * p <= t * eps) {
        pk *= p;
        ++k;
    }
    while (pk > t * eps) {
        pk /= p;
        --k;
    }
    return pk;
}

} // namespace dimest
