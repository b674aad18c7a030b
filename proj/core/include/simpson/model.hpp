#pragma once

#include <optional>
#include <string>

#include "simpson/expr.hpp"

namespace simpson {

/// Closed interval [lo, hi] with lo < hi.
struct Domain {
    double lo = 0.0;
    double hi = 1.0;

    Domain() = default;
    Domain(double lo_, double hi_);

    double width() const noexcept { return hi - lo; }
    /// Membership with an absolute slack of `tol` on either side.
    bool contains(double x, double tol = 0.0) const noexcept { return x >= lo - tol && x <= hi + tol; }
    /// Signed distance outside the interval; non-positive inside.
    double excess(double x) const noexcept;
};

/// f, f' and optional antiderivative / fourth-derivative bound on a domain.
struct FunctionModel {
    std::string name;
    Expr f;
    Expr df;
    std::optional<Expr> antiderivative;
    std::optional<double> d4sup;
    Domain domain;

    double value(double x) const { return f(x); }
    double derivative(double x) const { return df(x); }
};

}  // namespace simpson
