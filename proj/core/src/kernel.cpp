#include "simpson/kernel.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "simpson/quadrature.hpp"

namespace simpson {

Rational::Rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw std::domain_error("Rational: zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const std::int64_t g = std::gcd(num, den);
    num_ = g ? num / g : 0;
    den_ = g ? den / g : 1;
}

Rational operator+(const Rational& a, const Rational& b) {
    return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
}
Rational operator-(const Rational& a, const Rational& b) {
    return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_};
}
Rational operator*(const Rational& a, const Rational& b) { return {a.num_ * b.num_, a.den_ * b.den_}; }
Rational operator/(const Rational& a, const Rational& b) { return {a.num_ * b.den_, a.den_ * b.num_}; }

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    return a.num_ * b.den_ <=> b.num_ * a.den_;
}

double eval_m(double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("kernel m(t) defined on [0, 1], got t=" + std::to_string(t));
    return t < 0.5 ? t - 1.0 / 6.0 : t - 5.0 / 6.0;
}

std::optional<Rational> moment_rational(int p) {
    if (p < 1 || p > kMaxExactMomentOrder) return std::nullopt;
    std::int64_t two = 1;
    std::int64_t six = 1;
    for (int i = 0; i < p + 1; ++i) {
        two *= 2;
        six *= 6;
    }
    // (1 + 2^(p+1)) / 6^(p+1) first, so the denominator stays below 2^63.
    return Rational(1 + two, six) / Rational(p + 1);
}

double moment_p(double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw std::domain_error("moment_p requires finite p >= 1");
    if (p == std::floor(p) && p <= kMaxExactMomentOrder) return moment_rational(static_cast<int>(p))->to_double();
    if (p > 50.0) {
        const double log_num = (p + 1.0) * std::log(2.0) + std::log1p(std::exp2(-(p + 1.0)));
        return std::exp(log_num - (p + 1.0) * std::log(6.0) - std::log(p + 1.0));
    }
    return (1.0 + std::exp2(p + 1.0)) / (std::pow(6.0, p + 1.0) * (p + 1.0));
}

double log_moment(double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw std::domain_error("log_moment requires finite p >= 1");
    if (p <= 50.0) return std::log(moment_p(p));
    return (p + 1.0) * std::log(2.0) + std::log1p(std::exp2(-(p + 1.0))) - (p + 1.0) * std::log(6.0) -
           std::log(p + 1.0);
}

double moment_root(double p, double scale) {
    if (p <= 50.0) return std::pow(scale * moment_p(p), 1.0 / p);
    return std::exp((std::log(scale) + log_moment(p)) / p);
}

double numeric_moment(double p, double abs_tol) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw std::domain_error("numeric_moment requires finite p >= 1");
    const std::array<double, 1> split{1.0 / 6.0};
    const auto g = [p](double t) { return std::pow(std::fabs(t - 1.0 / 6.0), p); };
    return integrate_with_breakpoints(g, 0.0, 0.5, split, QuadratureOptions{abs_tol}).value;
}

namespace {

// Polynomial c0 + c1 t + c2 t^2 with rational coefficients.
using Poly = std::array<Rational, 3>;

Poly multiply_linear(const Rational& c0, const Rational& c1, const Rational& d0, const Rational& d1) {
    return {c0 * d0, c0 * d1 + c1 * d0, c1 * d1};
}

Rational antiderivative(const Poly& p, const Rational& t) {
    return p[0] * t + p[1] * t * t / Rational(2) + p[2] * t * t * t / Rational(3);
}

Rational integrate(const Poly& p, const Rational& lo, const Rational& hi) {
    return antiderivative(p, hi) - antiderivative(p, lo);
}

// Integral of |t - root| * (w0 + w1 t) over [lo, hi], with lo < root < hi.
Rational abs_kernel_against(const Rational& root, const Rational& lo, const Rational& hi, const Rational& w0,
                            const Rational& w1) {
    const Poly below = multiply_linear(root, Rational(-1), w0, w1);         // (root - t)(w0 + w1 t)
    const Poly above = multiply_linear(Rational(0) - root, Rational(1), w0, w1);  // (t - root)(w0 + w1 t)
    return integrate(below, lo, root) + integrate(above, root, hi);
}

}  // namespace

WeightedMoments weighted_moments() {
    const Rational zero(0), half(1, 2), one(1);
    const Rational r1(1, 6), r2(5, 6);
    return {
        abs_kernel_against(r1, zero, half, one, Rational(-1)),
        abs_kernel_against(r1, zero, half, zero, one),
        abs_kernel_against(r2, half, one, one, Rational(-1)),
        abs_kernel_against(r2, half, one, zero, one),
    };
}

HalfWeights half_weights() {
    const Rational zero(0), half(1, 2), one(1);
    return {integrate(Poly{one, Rational(-1), zero}, zero, half), integrate(Poly{zero, one, zero}, zero, half)};
}

HalfWeights mirrored_half_weights() {
    const Rational zero(0), half(1, 2), one(1);
    return {integrate(Poly{one, Rational(-1), zero}, half, one), integrate(Poly{zero, one, zero}, half, one)};
}

}  // namespace simpson
