#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dimest {

// Scalar arithmetic over the two supported valued fields: the reals with the
// usual absolute value (dense value group) and Q_p with the p-adic absolute
// value (discrete value group p^Z).  The trivial valuation is rejected.

struct Valuation {
    enum class Kind { real, padic };

    Kind kind = Kind::real;
    std::int64_t p = 0;   // prime, p-adic only
    double theta_ = 0.0;  // annulus constant

    // Dense archimedean case: Theta is any constant below 1; the default sits
    // close to 1 so downstream bounds lose almost nothing.
    static constexpr double default_real_theta = 1.0 - 0x1p-20;

    static Valuation real(double theta = default_real_theta);
    static Valuation padic(std::int64_t p);

    bool is_real() const { return kind == Kind::real; }
    bool is_padic() const { return kind == Kind::padic; }
    // Value group dense in (0, inf)?
    bool dense() const { return kind == Kind::real; }
    double theta() const { return theta_; }

    bool operator==(const Valuation& o) const {
        return kind == o.kind && p == o.p && theta_ == o.theta_;
    }
    bool operator!=(const Valuation& o) const { return !(*this == o); }

    std::string describe() const;
};

// Exact rational on int64 storage, always reduced, denominator positive.
// Overflow in intermediates is detected via 128-bit arithmetic and throws,
// which is the honest failure mode at desk scale.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n) : num(n), den(1) {}
    Rational(std::int64_t n, std::int64_t d);

    bool is_zero() const { return num == 0; }

    Rational operator+(const Rational& o) const;
    Rational operator-(const Rational& o) const;
    Rational operator*(const Rational& o) const;
    Rational operator/(const Rational& o) const;
    Rational operator-() const { return Rational(-num, den); }
    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }

    double to_double() const { return double(num) / double(den); }
};

// p-adic valuation v_p(r) of a nonzero rational; throws on zero.
int padic_valuation(const Rational& r, std::int64_t p);

// A field element tagged with its valuation.  Real scalars carry a double,
// p-adic scalars an exact rational (so |s| = p^{-v_p(s)} is exact).
class Scalar {
public:
    Scalar() = default;
    static Scalar real(double x, const Valuation& v = Valuation::real());
    static Scalar padic(Rational r, const Valuation& v);
    static Scalar zero(const Valuation& v);
    static Scalar one(const Valuation& v);

    const Valuation& valuation() const { return val_; }
    bool is_zero() const;
    double real_value() const;
    const Rational& rational_value() const;

    Scalar operator+(const Scalar& o) const;
    Scalar operator-(const Scalar& o) const;
    Scalar operator*(const Scalar& o) const;
    Scalar operator/(const Scalar& o) const;
    Scalar operator-() const;
    bool operator==(const Scalar& o) const;

private:
    Valuation val_ = Valuation::real();
    double x_ = 0.0;
    Rational r_;
    void check_same(const Scalar& o) const;
};

// |s|: multiplicative absolute value.  p-adic values land in {0} u p^Z.
double abs_value(const Scalar& s);

// The annulus constant Theta of the valuation: 1/p for Q_p (value group
// p^Z), the configured constant below 1 for the reals.
double theta(const Valuation& v);

// Vectors over K with the (unweighted) sup norm.
using KVector = std::vector<Scalar>;

double sup_norm(const KVector& x);

struct AnnulusResult {
    Scalar k;   // scaling field element
    KVector y;  // y = k*x with Theta <= |y| <= 1
};

// Scale a nonzero vector into the annulus Theta <= |y| <= 1.  Both supported
// fields admit |y| = 1 exactly: divide by the attained sup over R, shift the
// valuation by p^{-v} over Q_p.
AnnulusResult normalize_annulus(const KVector& x);

// Largest element of the value group |K^x| that is <= t (t > 0).  For dense
// groups this is t itself; for Q_p it is the power p^k <= t.
double value_group_floor(const Valuation& v, double t);

} // namespace dimest
