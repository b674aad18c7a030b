#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace simpson {

/// Raised by Expr::parse. position is a character offset into the source,
/// at most source.size() (an offset equal to the size means "at end of input").
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t position, const std::string& message);

    std::size_t position() const noexcept { return position_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::size_t position_;
    std::string detail_;
};

/// Raised by Expr::eval when an operation leaves its domain (log of a
/// non-positive value, sqrt of a negative value, division by zero) or
/// produces a non-finite result.
class DomainError : public std::runtime_error {
public:
    DomainError(std::string subexpression, double argument, std::string bindings,
                const std::string& what);

    const std::string& subexpression() const noexcept { return subexpression_; }
    double argument() const noexcept { return argument_; }
    const std::string& bindings() const noexcept { return bindings_; }

private:
    std::string subexpression_;
    double argument_;
    std::string bindings_;
};

namespace detail {
struct ExprTree;
}

/// Immutable arithmetic expression over a declared set of variables.
///
/// Grammar (lowest to highest precedence):
///   or < and < comparison < + - < * / < unary minus < ^ < call/atom
/// `^` is right-associative. Comparisons and `and`/`or` produce conditions,
/// which are only accepted as the first argument of `if(cond, then, else)`.
/// Built-in functions: sin cos exp log abs sqrt. The constant `pi` is
/// predefined unless shadowed by a declared variable.
///
/// Copies share the parsed tree; eval is const and thread-safe.
class Expr {
public:
    static Expr parse(std::string_view source, std::vector<std::string> variables);

    /// Values are positional, in the order of variables().
    double eval(std::span<const double> values) const;
    double eval(const std::map<std::string, double>& bindings) const;
    /// Shorthand for single-variable expressions.
    double operator()(double x) const;

    /// Fully parenthesised rendering that reparses to an identical tree.
    std::string to_string() const;
    const std::string& source() const noexcept;
    const std::vector<std::string>& variables() const noexcept;

private:
    explicit Expr(std::shared_ptr<const detail::ExprTree> tree) : tree_(std::move(tree)) {}
    std::shared_ptr<const detail::ExprTree> tree_;
};

/// Result of comparing a user-supplied derivative against finite differences.
struct DerivativeReport {
    bool passed = true;
    double worst_mismatch = 0.0;
    std::optional<double> witness_x;
    double witness_df = 0.0;
    double witness_fd = 0.0;
    std::size_t samples = 0;
};

constexpr double kDerivativeRelTol = 1e-4;

/// Central differences of f at `points` evenly spaced abscissae over [lo, hi]
/// (endpoints excluded), step max(1e-6, 1e-6*|x|). Mismatch at a point is
/// |df - fd| / max(|df|, |fd|, 1); the check fails when it exceeds rel_tol.
DerivativeReport check_derivative(const Expr& f, const Expr& df, double lo, double hi,
                                  std::size_t points, double rel_tol = kDerivativeRelTol);

}  // namespace simpson
