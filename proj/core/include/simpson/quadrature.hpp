#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace simpson {

using Integrand = std::function<double(double)>;

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t evaluations = 0;
};

struct QuadratureOptions {
    double abs_tol = 1e-11;
    std::size_t max_evaluations = 1'000'000;
};

class QuadratureError : public std::runtime_error {
public:
    enum class Kind {
        BudgetExhausted,
        NonFinite,
        /// Every remaining panel is at the rounding floor; the tolerance
        /// cannot be met in double precision.
        RoundoffLimited,
    };

    QuadratureError(Kind kind, double abscissa, const std::string& what)
        : std::runtime_error(what), kind_(kind), abscissa_(abscissa) {}

    Kind kind() const noexcept { return kind_; }
    double abscissa() const noexcept { return abscissa_; }

private:
    Kind kind_;
    double abscissa_;
};

/// Globally adaptive Gauss-Kronrod (7, 15) quadrature. The panel error is
/// |K15 - G7|; the worst panel is bisected until the summed error is at most
/// abs_tol. Panel sums are reduced in left-to-right order.
QuadratureResult integrate(const Integrand& g, double lo, double hi, const QuadratureOptions& options = {});

inline QuadratureResult integrate(const Integrand& g, double lo, double hi, double abs_tol) {
    return integrate(g, lo, hi, QuadratureOptions{abs_tol});
}

/// Integrates each panel between consecutive breakpoints separately; each
/// panel receives a share of abs_tol proportional to its width. Breakpoints
/// must be sorted and strictly inside (lo, hi).
QuadratureResult integrate_with_breakpoints(const Integrand& g, double lo, double hi,
                                            std::span<const double> breakpoints,
                                            const QuadratureOptions& options = {});

inline QuadratureResult integrate_with_breakpoints(const Integrand& g, double lo, double hi,
                                                   std::span<const double> breakpoints, double abs_tol) {
    return integrate_with_breakpoints(g, lo, hi, breakpoints, QuadratureOptions{abs_tol});
}

}  // namespace simpson
