#include "simpson/invexity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace simpson {

EtaMap EtaMap::difference() { return EtaMap(Kind::Difference, "difference", std::nullopt); }

EtaMap EtaMap::abs_example() { return EtaMap(Kind::AbsExample, "abs_example", std::nullopt); }

EtaMap EtaMap::expression(std::string_view source) {
    return EtaMap(Kind::Expression, std::string(source), Expr::parse(source, {"v", "u"}));
}

EtaMap EtaMap::from_spec(std::string_view kind, std::string_view value) {
    if (kind == "difference") return difference();
    if (kind == "abs_example") return abs_example();
    if (kind == "expression") {
        if (value.empty()) throw std::invalid_argument("eta kind 'expression' requires a value");
        return expression(value);
    }
    throw std::invalid_argument("unknown eta kind '" + std::string(kind) +
                                "' (expected difference, abs_example or expression)");
}

double EtaMap::operator()(double v, double u) const {
    switch (kind_) {
    case Kind::Difference:
        return v - u;
    case Kind::AbsExample: {
        const bool same_sign = (v <= 0.0 && u <= 0.0) || (v >= 0.0 && u >= 0.0);
        return same_sign ? v - u : u - v;
    }
    case Kind::Expression: {
        const std::array<double, 2> values{v, u};
        return expr_->eval(values);
    }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

EtaPath::EtaPath(double base, double step, const Domain& ambient, double tol) : base_(base), step_(step) {
    if (!(step > 0.0)) throw std::invalid_argument("eta path requires a positive step");
    // A segment in R lies in an interval iff both ends do.
    if (!ambient.contains(base, tol) || !ambient.contains(base + step, tol))
        throw std::out_of_range("eta path leaves the domain");
}

std::string_view to_string(Property p) {
    switch (p) {
    case Property::InvexSet: return "invex_set";
    case Property::Preinvex: return "preinvex";
    case Property::Prequasiinvex: return "prequasiinvex";
    }
    return "?";
}

std::string_view to_string(Verdict v) {
    return v == Verdict::VerifiedOnSamples ? "verified_on_samples" : "violated";
}

namespace {

double unit_uniform(std::mt19937_64& rng) {
    // 53 random mantissa bits; identical across standard libraries.
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double grid_point(double lo, double hi, std::size_t i, std::size_t n) {
    if (i + 1 == n) return hi;
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

void require_grid(const SamplingPlan& plan) {
    if (plan.grid_u < 2 || plan.grid_v < 2 || plan.grid_t < 2)
        throw std::invalid_argument("sampling grid needs at least 2 points per axis");
}

// Visits extra witnesses, the grid, then the random layer, tracking the
// largest excess with the lexicographically smallest triple on ties.
template <class Excess>
PropertyReport sweep(Property property, const Domain& domain, const SamplingPlan& plan, double tol,
                     Excess&& excess) {
    require_grid(plan);
    PropertyReport report;
    report.property = property;
    report.worst_violation = -std::numeric_limits<double>::infinity();
    Witness worst{};

    const auto visit = [&](double u, double v, double t) {
        const double e = excess(u, v, t);
        ++report.samples;
        const Witness w{u, v, t};
        if (e > report.worst_violation || (e == report.worst_violation && w < worst)) {
            report.worst_violation = e;
            worst = w;
        }
    };

    for (const Witness& w : plan.extra) visit(w.u, w.v, w.t);
    for (std::size_t i = 0; i < plan.grid_u; ++i) {
        const double u = grid_point(domain.lo, domain.hi, i, plan.grid_u);
        for (std::size_t j = 0; j < plan.grid_v; ++j) {
            const double v = grid_point(domain.lo, domain.hi, j, plan.grid_v);
            for (std::size_t k = 0; k < plan.grid_t; ++k) visit(u, v, grid_point(0.0, 1.0, k, plan.grid_t));
        }
    }
    std::mt19937_64 rng(plan.seed);
    for (std::size_t r = 0; r < plan.random_triples; ++r) {
        const double u = domain.lo + domain.width() * unit_uniform(rng);
        const double v = domain.lo + domain.width() * unit_uniform(rng);
        const double t = unit_uniform(rng);
        visit(u, v, t);
    }

    if (report.worst_violation > tol) {
        report.verdict = Verdict::Violated;
        report.witness = worst;
    }
    return report;
}

// Path point, pulled back onto the domain when it overshoots by rounding only.
double path_point(const Domain& domain, double u, double v, double t, const EtaMap& eta) {
    const double x = u + t * eta(v, u);
    if (domain.contains(x)) return x;
    if (domain.contains(x, kInvexityTol)) return std::clamp(x, domain.lo, domain.hi);
    return x;
}

// Excesses are measured relative to max(1, |values|): the path point at t = 1
// is only v up to rounding, which matters once g is large.
double magnitude(double a, double b, double c) { return std::max({1.0, std::fabs(a), std::fabs(b), std::fabs(c)}); }

}  // namespace

PropertyReport check_invex_set(const Domain& domain, const EtaMap& eta, const SamplingPlan& plan, double tol) {
    const double scale = std::max({1.0, std::fabs(domain.lo), std::fabs(domain.hi)});
    return sweep(Property::InvexSet, domain, plan, tol,
                 [&](double u, double v, double t) { return domain.excess(u + t * eta(v, u)) / scale; });
}

PropertyReport check_preinvex(const RealFunction& g, const EtaMap& eta, const Domain& domain,
                              const SamplingPlan& plan, double tol) {
    return sweep(Property::Preinvex, domain, plan, tol, [&](double u, double v, double t) {
        const double x = path_point(domain, u, v, t, eta);
        const double gu = g(u), gv = g(v), gx = g(x);
        return (gx - ((1.0 - t) * gu + t * gv)) / magnitude(gu, gv, gx);
    });
}

PropertyReport check_prequasiinvex(const RealFunction& g, const EtaMap& eta, const Domain& domain,
                                   const SamplingPlan& plan, double tol) {
    return sweep(Property::Prequasiinvex, domain, plan, tol, [&](double u, double v, double t) {
        const double x = path_point(domain, u, v, t, eta);
        const double gu = g(u), gv = g(v), gx = g(x);
        return (gx - std::max(gu, gv)) / magnitude(gu, gv, gx);
    });
}

namespace {

RealFunction derivative_power(const FunctionModel& model, double q) {
    if (q == 1.0) return [&model](double x) { return std::fabs(model.derivative(x)); };
    return [&model, q](double x) { return std::pow(std::fabs(model.derivative(x)), q); };
}

PropertyReport run_mode(const RealFunction& g, const EtaMap& eta, const Domain& domain, HypothesisMode mode,
                        const SamplingPlan& plan, double tol) {
    return mode == HypothesisMode::Preinvex ? check_preinvex(g, eta, domain, plan, tol)
                                            : check_prequasiinvex(g, eta, domain, plan, tol);
}

}  // namespace

PropertyReport hypothesis_check(const FunctionModel& model, const EtaMap& eta, const Domain& domain, double q,
                                HypothesisMode mode, const SamplingPlan& plan, double tol) {
    if (!(q >= 1.0) || !std::isfinite(q)) throw std::invalid_argument("hypothesis_check requires finite q >= 1");
    PropertyReport report = run_mode(derivative_power(model, q), eta, domain, mode, plan, tol);
    report.exponent_q = q;
    if (!report.verified() && q != 1.0) {
        const PropertyReport base = run_mode(derivative_power(model, 1.0), eta, domain, mode, plan, tol);
        if (base.verified()) {
            std::ostringstream note;
            note << "|f'| is " << to_string(report.property) << " on samples but |f'|^" << q << " is not";
            report.note = note.str();
        }
    }
    return report;
}

}  // namespace simpson
