#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "simpson/expr.hpp"
#include "simpson/model.hpp"

namespace simpson {

/// The bifunction eta(v, u) defining the invex structure.
class EtaMap {
public:
    enum class Kind { Difference, AbsExample, Expression };

    /// eta(v, u) = v - u; recovers convexity.
    static EtaMap difference();
    /// v - u when v and u share a sign (zero counting as both), else u - v.
    static EtaMap abs_example();
    /// User expression over the variables {v, u}.
    static EtaMap expression(std::string_view source);
    /// kind is "difference", "abs_example" or "expression"; value is only
    /// read for "expression". Throws std::invalid_argument / ParseError.
    static EtaMap from_spec(std::string_view kind, std::string_view value = {});

    double operator()(double v, double u) const;

    Kind kind() const noexcept { return kind_; }
    const std::string& name() const noexcept { return name_; }

private:
    EtaMap(Kind kind, std::string name, std::optional<Expr> expr)
        : kind_(kind), name_(std::move(name)), expr_(std::move(expr)) {}

    Kind kind_;
    std::string name_;
    std::optional<Expr> expr_;
};

/// Points a + t*eta(b,a), t in [0, 1]. Construction fails if the step is
/// not positive or the path leaves `ambient`.
class EtaPath {
public:
    EtaPath(double base, double step, const Domain& ambient, double tol = 1e-12);

    double base() const noexcept { return base_; }
    double step() const noexcept { return step_; }
    double end() const noexcept { return base_ + step_; }
    double at(double t) const noexcept { return base_ + t * step_; }

private:
    double base_;
    double step_;
};

enum class Property { InvexSet, Preinvex, Prequasiinvex };
enum class Verdict { VerifiedOnSamples, Violated };

std::string_view to_string(Property p);
std::string_view to_string(Verdict v);

struct Witness {
    double u = 0.0;
    double v = 0.0;
    double t = 0.0;

    friend auto operator<=>(const Witness&, const Witness&) = default;
};

/// Outcome of a sampled check. VerifiedOnSamples is sampling evidence only.
/// worst_violation is the largest excess seen, divided by max(1, |values
/// involved|) so the tolerance is absolute for values up to 1 and relative
/// above. Non-positive when every sample held with room to spare.
struct PropertyReport {
    Property property = Property::InvexSet;
    double exponent_q = 1.0;
    Verdict verdict = Verdict::VerifiedOnSamples;
    double worst_violation = 0.0;
    std::optional<Witness> witness;
    std::size_t samples = 0;
    std::string note;

    bool verified() const noexcept { return verdict == Verdict::VerifiedOnSamples; }
};

/// Grid over u x v x t plus uniformly random triples. Extra witnesses are
/// evaluated first, so re-running with a previous witness cannot lose it.
struct SamplingPlan {
    std::size_t grid_u = 41;
    std::size_t grid_v = 41;
    std::size_t grid_t = 21;
    std::size_t random_triples = 2000;
    std::uint64_t seed = 0x5eed5eedULL;
    std::vector<Witness> extra;
};

constexpr double kInvexityTol = 1e-12;

using RealFunction = std::function<double(double)>;

PropertyReport check_invex_set(const Domain& domain, const EtaMap& eta, const SamplingPlan& plan = {},
                               double tol = kInvexityTol);

/// g(u + t eta(v,u)) <= (1 - t) g(u) + t g(v) on the samples.
PropertyReport check_preinvex(const RealFunction& g, const EtaMap& eta, const Domain& domain,
                              const SamplingPlan& plan = {}, double tol = kInvexityTol);

/// g(u + t eta(v,u)) <= max(g(u), g(v)) on the samples.
PropertyReport check_prequasiinvex(const RealFunction& g, const EtaMap& eta, const Domain& domain,
                                   const SamplingPlan& plan = {}, double tol = kInvexityTol);

enum class HypothesisMode { Preinvex, Prequasiinvex };

/// Checks u -> |f'(u)|^q under the given mode. When q != 1 and the check
/// fails, the q = 1 property is also tested and recorded in `note`.
PropertyReport hypothesis_check(const FunctionModel& model, const EtaMap& eta, const Domain& domain, double q,
                                HypothesisMode mode, const SamplingPlan& plan = {}, double tol = kInvexityTol);

}  // namespace simpson
