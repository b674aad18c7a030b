#include "simpson/bounds.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "simpson/kernel.hpp"

namespace simpson {

std::string_view to_string(TheoremId id) {
    switch (id) {
    case TheoremId::T3_1: return "T3.1";
    case TheoremId::T3_2: return "T3.2";
    case TheoremId::T3_3: return "T3.3";
    case TheoremId::T3_4: return "T3.4";
    case TheoremId::T4_1: return "T4.1";
    case TheoremId::T4_2: return "T4.2";
    case TheoremId::T4_3: return "T4.3";
    case TheoremId::C4_1: return "C4.1";
    case TheoremId::C4_2: return "C4.2";
    case TheoremId::Classical: return "CLASSICAL";
    }
    return "?";
}

std::optional<TheoremId> parse_theorem(std::string_view text) {
    for (const TheoremId id : kAllTheorems)
        if (to_string(id) == text) return id;
    return std::nullopt;
}

ExponentUse exponent_use(TheoremId id) {
    switch (id) {
    case TheoremId::T3_2:
    case TheoremId::T3_3:
    case TheoremId::T4_2:
    case TheoremId::T4_3:
        return ExponentUse::GreaterThanOne;
    case TheoremId::T3_4:
    case TheoremId::T4_1:
        return ExponentUse::AtLeastOne;
    default:
        return ExponentUse::None;
    }
}

std::string_view to_string(BoundsError::Code code) {
    switch (code) {
    case BoundsError::Code::InvalidEta: return "InvalidEta";
    case BoundsError::Code::DomainError: return "DomainError";
    case BoundsError::Code::PreconditionUnmet: return "PreconditionUnmet";
    case BoundsError::Code::MissingFourthDerivative: return "MissingFourthDerivative";
    case BoundsError::Code::InvalidExponent: return "InvalidExponent";
    }
    return "?";
}

BoundsError::BoundsError(Code code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

BoundValue with_slack(BoundValue bound, double lhs, double quadrature_error) {
    bound.lhs = lhs;
    bound.slack = bound.rhs - (lhs - quadrature_error);
    return bound;
}

namespace {

void require_eta(double eta) {
    if (!(eta > 0.0) || !std::isfinite(eta))
        throw BoundsError(BoundsError::Code::InvalidEta, "eta(b,a) = " + std::to_string(eta) + " must be positive");
}

void require_path(const FunctionModel& model, double a, double eta) {
    require_eta(eta);
    const double slack = 1e-12 * std::max(1.0, std::max(std::fabs(model.domain.lo), std::fabs(model.domain.hi)));
    if (!model.domain.contains(a, slack) || !model.domain.contains(a + eta, slack))
        throw BoundsError(BoundsError::Code::DomainError,
                          "path [" + std::to_string(a) + ", " + std::to_string(a + eta) + "] leaves domain [" +
                              std::to_string(model.domain.lo) + ", " + std::to_string(model.domain.hi) + "]");
}

void require_q(double q, ExponentUse use) {
    const bool ok = std::isfinite(q) && (use == ExponentUse::GreaterThanOne ? q > 1.0 : q >= 1.0);
    if (!ok)
        throw BoundsError(BoundsError::Code::InvalidExponent,
                          "q = " + std::to_string(q) + (use == ExponentUse::GreaterThanOne ? " must exceed 1" : " must be >= 1"));
}

// (alpha*x^q + beta*y^q)^(1/q) for x, y >= 0; rescaled by max(x, y) for q > 100.
double power_mean(double alpha, double x, double beta, double y, double q) {
    if (q == 1.0) return alpha * x + beta * y;
    if (q > 100.0) {
        const double scale = std::max(x, y);
        if (scale == 0.0) return 0.0;
        const double inner = alpha * std::pow(x / scale, q) + beta * std::pow(y / scale, q);
        return scale * std::exp(std::log(inner) / q);
    }
    return std::pow(alpha * std::pow(x, q) + beta * std::pow(y, q), 1.0 / q);
}

double abs_derivative(const FunctionModel& model, double x) { return std::fabs(model.derivative(x)); }

}  // namespace

double conjugate_exponent(double q) { return q / (q - 1.0); }

namespace rhs {

double t3_1(double eta, double fa, double fb) { return moment_p(1.0) * eta * (fa + fb); }

double t3_2(double eta, double fa, double fb, double q) {
    const double p = conjugate_exponent(q);
    const HalfWeights left = half_weights();
    const HalfWeights right = mirrored_half_weights();
    const double first = power_mean(left.a.to_double(), fa, left.b.to_double(), fb, q);
    const double second = power_mean(right.a.to_double(), fa, right.b.to_double(), fb, q);
    return eta * moment_root(p) * (first + second);
}

double t3_3(double eta, double fa, double fb, double q) {
    const double p = conjugate_exponent(q);
    return eta * moment_root(p, 2.0) * power_mean(0.5, fa, 0.5, fb, q);
}

double t3_4(double eta, double fa, double fb, double q) {
    const WeightedMoments w = weighted_moments();
    const double first = power_mean(w.left_a.to_double(), fa, w.left_b.to_double(), fb, q);
    const double second = power_mean(w.right_a.to_double(), fa, w.right_b.to_double(), fb, q);
    return eta * std::pow(moment_p(1.0), 1.0 - 1.0 / q) * (first + second);
}

// max(A^q, B^q)^(1/q) = max(|f'(a)|, |f'(b)|) exactly; no power is formed.
double t4_1(double eta, double fa, double fb, double /*q*/) { return 2.0 * moment_p(1.0) * eta * std::max(fa, fb); }

double t4_2(double eta, double fa, double fb, double q) {
    const double p = conjugate_exponent(q);
    return 2.0 * eta * moment_root(p) * std::max(fa, fb) * std::exp2(-1.0 / q);
}

double t4_3(double eta, double fa, double fb, double q) {
    const double p = conjugate_exponent(q);
    return eta * moment_root(p, 2.0) * std::max(fa, fb) * std::exp2(-1.0 / q);
}

double c4_1(double eta, double fa, double fb) { return 2.0 * moment_p(1.0) * eta * std::max(fa, fb); }

double classical(double eta, double d4sup) { return d4sup * std::pow(eta, 4) / 2880.0; }

}  // namespace rhs

SimpsonDefect simpson_defect(const FunctionModel& model, double a, double eta, const QuadratureOptions& oracle) {
    require_path(model, a, eta);
    const double end = a + eta;
    SimpsonDefect d;
    const double fa = model.value(a), fm = model.value(a + 0.5 * eta), fe = model.value(end);
    d.simpson_value = (fa + 4.0 * fm + fe) / 6.0;
    // Rounding of the three-point combination and of the mean, a few ulps of the summands.
    constexpr double ulps = 8.0 * std::numeric_limits<double>::epsilon();
    d.quadrature_error = ulps * (std::fabs(fa) + 4.0 * std::fabs(fm) + std::fabs(fe)) / 6.0;
    if (model.antiderivative) {
        const Expr& F = *model.antiderivative;
        const double Fa = F(a), Fe = F(end);
        d.mean_integral = (Fe - Fa) / eta;
        d.quadrature_error += ulps * (std::fabs(Fa) + std::fabs(Fe)) / eta;
    } else {
        const QuadratureResult r = integrate([&model](double x) { return model.value(x); }, a, end, oracle);
        d.mean_integral = r.value / eta;
        d.quadrature_error += r.error_estimate / eta;
        d.evaluations = r.evaluations;
    }
    d.defect = d.simpson_value - d.mean_integral;
    return d;
}

QuadratureResult lemma_rhs(const FunctionModel& model, double a, double eta, const QuadratureOptions& oracle) {
    require_path(model, a, eta);
    static constexpr std::array<double, 3> kBreaks{1.0 / 6.0, 0.5, 5.0 / 6.0};
    QuadratureOptions scaled = oracle;
    scaled.abs_tol = oracle.abs_tol / eta;
    QuadratureResult r = integrate_with_breakpoints(
        [&](double t) { return eval_m(t) * model.derivative(a + t * eta); }, 0.0, 1.0, kBreaks, scaled);
    r.value *= eta;
    r.error_estimate *= eta;
    return r;
}

double midpoint_defect(const FunctionModel& model, double a, double eta, const SimpsonDefect& defect) {
    return std::fabs(model.value(a + 0.5 * eta) - defect.mean_integral);
}

namespace {

BoundValue make(TheoremId id, double value, std::optional<double> q = std::nullopt) {
    BoundValue b;
    b.theorem = id;
    b.rhs = value;
    if (q) {
        b.q = q;
        if (exponent_use(id) == ExponentUse::GreaterThanOne) b.p = conjugate_exponent(*q);
    }
    return b;
}

}  // namespace

BoundValue bound_T3_1(const FunctionModel& model, double a, double b, double eta) {
    require_eta(eta);
    return make(TheoremId::T3_1, rhs::t3_1(eta, abs_derivative(model, a), abs_derivative(model, b)));
}

BoundValue bound_T3_2(const FunctionModel& model, double a, double b, double eta, double q) {
    require_eta(eta);
    require_q(q, ExponentUse::GreaterThanOne);
    return make(TheoremId::T3_2, rhs::t3_2(eta, abs_derivative(model, a), abs_derivative(model, b), q), q);
}

BoundValue bound_T3_3(const FunctionModel& model, double a, double b, double eta, double q) {
    require_eta(eta);
    require_q(q, ExponentUse::GreaterThanOne);
    return make(TheoremId::T3_3, rhs::t3_3(eta, abs_derivative(model, a), abs_derivative(model, b), q), q);
}

BoundValue bound_T3_4(const FunctionModel& model, double a, double b, double eta, double q) {
    require_eta(eta);
    require_q(q, ExponentUse::AtLeastOne);
    return make(TheoremId::T3_4, rhs::t3_4(eta, abs_derivative(model, a), abs_derivative(model, b), q), q);
}

BoundValue bound_T4_1(const FunctionModel& model, double a, double b, double eta, double q) {
    require_eta(eta);
    require_q(q, ExponentUse::AtLeastOne);
    return make(TheoremId::T4_1, rhs::t4_1(eta, abs_derivative(model, a), abs_derivative(model, b), q), q);
}

BoundValue bound_T4_2(const FunctionModel& model, double a, double b, double eta, double q) {
    require_eta(eta);
    require_q(q, ExponentUse::GreaterThanOne);
    return make(TheoremId::T4_2, rhs::t4_2(eta, abs_derivative(model, a), abs_derivative(model, b), q), q);
}

BoundValue bound_T4_3(const FunctionModel& model, double a, double b, double eta, double q) {
    require_eta(eta);
    require_q(q, ExponentUse::GreaterThanOne);
    return make(TheoremId::T4_3, rhs::t4_3(eta, abs_derivative(model, a), abs_derivative(model, b), q), q);
}

BoundValue bound_C4_1(const FunctionModel& model, double a, double b, double eta) {
    require_eta(eta);
    return make(TheoremId::C4_1, rhs::c4_1(eta, abs_derivative(model, a), abs_derivative(model, b)));
}

BoundValue bound_C4_2_midpoint(const FunctionModel& model, double a, double b, double eta) {
    require_path(model, a, eta);
    const double fa = model.value(a);
    const double fm = model.value(a + 0.5 * eta);
    const double fe = model.value(a + eta);
    if (std::fabs(fa - fm) > kMidpointEqualityTol || std::fabs(fm - fe) > kMidpointEqualityTol)
        throw BoundsError(BoundsError::Code::PreconditionUnmet,
                          "midpoint corollary needs f(a) = f(mid) = f(a+eta); got " + std::to_string(fa) + ", " +
                              std::to_string(fm) + ", " + std::to_string(fe));
    return make(TheoremId::C4_2, rhs::c4_1(eta, abs_derivative(model, a), abs_derivative(model, b)));
}

BoundValue bound_classical(const FunctionModel& model, double /*a*/, double eta) {
    require_eta(eta);
    if (!model.d4sup)
        throw BoundsError(BoundsError::Code::MissingFourthDerivative, "classical bound needs sup|f''''| (d4sup)");
    return make(TheoremId::Classical, rhs::classical(eta, *model.d4sup));
}

BoundValue evaluate_bound(TheoremId id, const FunctionModel& model, double a, double b, double eta,
                          std::optional<double> q) {
    const auto need_q = [&] {
        if (!q) throw BoundsError(BoundsError::Code::InvalidExponent, std::string(to_string(id)) + " needs q");
        return *q;
    };
    switch (id) {
    case TheoremId::T3_1: return bound_T3_1(model, a, b, eta);
    case TheoremId::T3_2: return bound_T3_2(model, a, b, eta, need_q());
    case TheoremId::T3_3: return bound_T3_3(model, a, b, eta, need_q());
    case TheoremId::T3_4: return bound_T3_4(model, a, b, eta, need_q());
    case TheoremId::T4_1: return bound_T4_1(model, a, b, eta, need_q());
    case TheoremId::T4_2: return bound_T4_2(model, a, b, eta, need_q());
    case TheoremId::T4_3: return bound_T4_3(model, a, b, eta, need_q());
    case TheoremId::C4_1: return bound_C4_1(model, a, b, eta);
    case TheoremId::C4_2: return bound_C4_2_midpoint(model, a, b, eta);
    case TheoremId::Classical: return bound_classical(model, a, eta);
    }
    throw std::logic_error("unknown theorem id");
}

}  // namespace simpson
