#pragma once

#include <compare>
#include <cstdint>
#include <optional>

namespace simpson {

/// Reduced fraction with positive denominator. Small by construction; the
/// kernel constants all have denominators dividing 6^k.
class Rational {
public:
    constexpr Rational() = default;
    Rational(std::int64_t num, std::int64_t den = 1);

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }
    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator/(const Rational& a, const Rational& b);
    friend bool operator==(const Rational&, const Rational&) = default;
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

/// Simpson kernel: t - 1/6 on [0, 1/2), t - 5/6 on [1/2, 1].
/// Throws std::domain_error outside [0, 1].
double eval_m(double t);

/// Kernel moment over one half, (1 + 2^(p+1)) / (6^(p+1) (p+1)).
/// Equals both the integral of |t - 1/6|^p over [0, 1/2] and of |t - 5/6|^p
/// over [1/2, 1]. Exact rational for integral p <= kMaxExactMomentOrder,
/// log space above p = 50. Throws std::domain_error for p < 1.
double moment_p(double p);

constexpr int kMaxExactMomentOrder = 20;

/// log of moment_p(p); finite for every finite p >= 1.
double log_moment(double p);

/// (scale * moment_p(p))^(1/p), formed in log space so it stays accurate
/// where moment_p underflows (p in the thousands, q just above 1).
double moment_root(double p, double scale = 1.0);

/// Quadrature value of the integral of |t - 1/6|^p over [0, 1/2], split at 1/6.
double numeric_moment(double p, double abs_tol = 1e-14);

/// Exact value of moment_p for integral p in [1, kMaxExactMomentOrder].
std::optional<Rational> moment_rational(int p);

/// Integrals of |m(t)| against the preinvex weights (1 - t) and t on each
/// half of [0, 1]. Computed by exact piecewise polynomial integration.
struct WeightedMoments {
    Rational left_a;   ///< over [0, 1/2] against (1 - t)
    Rational left_b;   ///< over [0, 1/2] against t
    Rational right_a;  ///< over [1/2, 1] against (1 - t)
    Rational right_b;  ///< over [1/2, 1] against t
};

WeightedMoments weighted_moments();

/// Integrals of (1 - t) and t over a half of [0, 1].
struct HalfWeights {
    Rational a;
    Rational b;
};

HalfWeights half_weights();         ///< over [0, 1/2]: (3/8, 1/8)
HalfWeights mirrored_half_weights();  ///< over [1/2, 1]: (1/8, 3/8)

}  // namespace simpson
