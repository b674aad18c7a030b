#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "simpson/model.hpp"
#include "simpson/quadrature.hpp"

namespace simpson {

enum class TheoremId { T3_1, T3_2, T3_3, T3_4, T4_1, T4_2, T4_3, C4_1, C4_2, Classical };

inline constexpr std::array<TheoremId, 10> kAllTheorems{
    TheoremId::T3_1, TheoremId::T3_2, TheoremId::T3_3, TheoremId::T3_4, TheoremId::T4_1,
    TheoremId::T4_2, TheoremId::T4_3, TheoremId::C4_1, TheoremId::C4_2, TheoremId::Classical,
};

/// "T3.1" ... "C4.2", "CLASSICAL".
std::string_view to_string(TheoremId id);
std::optional<TheoremId> parse_theorem(std::string_view text);

/// Exponent regime of a theorem.
enum class ExponentUse {
    None,           ///< no q (T3.1, C4.1, C4.2, classical)
    AtLeastOne,     ///< q >= 1 (T3.4, T4.1)
    GreaterThanOne  ///< q > 1, p = q/(q-1) (T3.2, T3.3, T4.2, T4.3)
};
ExponentUse exponent_use(TheoremId id);

class BoundsError : public std::runtime_error {
public:
    enum class Code { InvalidEta, DomainError, PreconditionUnmet, MissingFourthDerivative, InvalidExponent };

    BoundsError(Code code, const std::string& detail);
    Code code() const noexcept { return code_; }

private:
    Code code_;
};

std::string_view to_string(BoundsError::Code code);

/// Simpson combination minus mean value over [a, a + eta].
struct SimpsonDefect {
    double simpson_value = 0.0;
    double mean_integral = 0.0;
    double defect = 0.0;
    /// Error estimate of the defect: quadrature error of mean_integral (if
    /// no antiderivative) plus a rounding bound for the subtraction.
    double quadrature_error = 0.0;
    std::size_t evaluations = 0;
};

struct BoundValue {
    TheoremId theorem = TheoremId::T3_1;
    std::optional<double> q;
    std::optional<double> p;
    double rhs = 0.0;
    /// Left side the rhs is compared against (|defect|, or the midpoint
    /// defect for C4.2).
    double lhs = 0.0;
    /// rhs - (lhs - quadrature_error): negative only when the inequality
    /// fails by more than the oracle's own error.
    double slack = 0.0;
};

/// Attaches lhs and slack to a computed bound.
BoundValue with_slack(BoundValue bound, double lhs, double quadrature_error);

SimpsonDefect simpson_defect(const FunctionModel& model, double a, double eta,
                             const QuadratureOptions& oracle = {});

/// eta * integral over [0,1] of m(t) f'(a + t eta), split at 1/6, 1/2, 5/6.
QuadratureResult lemma_rhs(const FunctionModel& model, double a, double eta, const QuadratureOptions& oracle = {});

/// |f(mid) - mean| for the midpoint corollary.
double midpoint_defect(const FunctionModel& model, double a, double eta, const SimpsonDefect& defect);

/// Closed-form right-hand sides in terms of |f'(a)|, |f'(b)|.
namespace rhs {
double t3_1(double eta, double fa, double fb);
double t3_2(double eta, double fa, double fb, double q);
double t3_3(double eta, double fa, double fb, double q);
double t3_4(double eta, double fa, double fb, double q);
double t4_1(double eta, double fa, double fb, double q);
double t4_2(double eta, double fa, double fb, double q);
double t4_3(double eta, double fa, double fb, double q);
double c4_1(double eta, double fa, double fb);
double classical(double eta, double d4sup);
}  // namespace rhs

/// Conjugate exponent q/(q-1).
double conjugate_exponent(double q);

BoundValue bound_T3_1(const FunctionModel& model, double a, double b, double eta);
BoundValue bound_T3_2(const FunctionModel& model, double a, double b, double eta, double q);
BoundValue bound_T3_3(const FunctionModel& model, double a, double b, double eta, double q);
BoundValue bound_T3_4(const FunctionModel& model, double a, double b, double eta, double q);
BoundValue bound_T4_1(const FunctionModel& model, double a, double b, double eta, double q);
BoundValue bound_T4_2(const FunctionModel& model, double a, double b, double eta, double q);
BoundValue bound_T4_3(const FunctionModel& model, double a, double b, double eta, double q);
BoundValue bound_C4_1(const FunctionModel& model, double a, double b, double eta);

constexpr double kMidpointEqualityTol = 1e-9;

/// Requires f(a) = f(mid) = f(a + eta) within kMidpointEqualityTol.
BoundValue bound_C4_2_midpoint(const FunctionModel& model, double a, double b, double eta);
BoundValue bound_classical(const FunctionModel& model, double a, double eta);

/// Dispatches on id; q is ignored for q-free theorems.
BoundValue evaluate_bound(TheoremId id, const FunctionModel& model, double a, double b, double eta,
                          std::optional<double> q);

}  // namespace simpson
