#include <doctest.h>

#include <bit>
#include <cmath>
#include <numbers>

#include "simpson/quadrature.hpp"

using namespace simpson;

TEST_CASE("golden integrals") {
    struct Row {
        const char* name;
        Integrand g;
        double lo, hi, exact;
    };
    const Row rows[] = {
        {"sin", [](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 2.0},
        {"exp", [](double x) { return std::exp(x); }, 0.0, 1.0, std::numbers::e - 1.0},
        {"arctan'", [](double x) { return 1.0 / (1.0 + x * x); }, 0.0, 1.0, std::numbers::pi / 4.0},
        {"sqrt", [](double x) { return std::sqrt(x); }, 0.0, 1.0, 2.0 / 3.0},
        {"log", [](double x) { return std::log(x); }, 1.0, 2.0, 2.0 * std::log(2.0) - 1.0},
        {"x^4", [](double x) { return x * x * x * x; }, 0.0, 1.0, 0.2},
        {"gauss", [](double x) { return std::exp(-x * x); }, -3.0, 3.0, std::sqrt(std::numbers::pi) * std::erf(3.0)},
        {"oscillatory", [](double x) { return std::cos(40.0 * x); }, 0.0, 1.0, std::sin(40.0) / 40.0},
        {"peak", [](double x) { return 1.0 / (1e-4 + (x - 0.3) * (x - 0.3)); }, 0.0, 1.0,
         100.0 * (std::atan(0.7 / 1e-2) + std::atan(0.3 / 1e-2))},
    };
    for (const Row& r : rows) {
        CAPTURE(r.name);
        const QuadratureResult q = integrate(r.g, r.lo, r.hi, 1e-11);
        CHECK(std::fabs(q.value - r.exact) <= 1e-11 * std::max(1.0, std::fabs(r.exact)) * 10);
        CHECK(q.error_estimate <= 1e-11);
        CHECK(q.evaluations >= 15);
        CHECK(q.evaluations % 15 == 0);
    }
}

TEST_CASE("polynomials up to degree 22 are exact on one panel") {
    const QuadratureResult q = integrate([](double x) { return std::pow(x, 10); }, 0.0, 1.0, 1e-11);
    CHECK(q.value == doctest::Approx(1.0 / 11.0).epsilon(1e-15));
    CHECK(q.evaluations == 15);
}

TEST_CASE("kinks are handled by breakpoints") {
    const auto kink = [](double x) { return std::fabs(x - 1.0 / 3.0); };
    const double exact = (1.0 / 9.0 + 4.0 / 9.0) / 2.0;
    const double split[] = {1.0 / 3.0};
    const QuadratureResult with = integrate_with_breakpoints(kink, 0.0, 1.0, split, 1e-12);
    CHECK(with.value == doctest::Approx(exact).epsilon(1e-14));
    CHECK(with.evaluations == 30);
    const QuadratureResult without = integrate(kink, 0.0, 1.0, 1e-12);
    CHECK(without.value == doctest::Approx(exact).epsilon(1e-11));
    CHECK(without.evaluations > with.evaluations);
}

TEST_CASE("empty interval") {
    const QuadratureResult q = integrate([](double) { return 1.0; }, 2.0, 2.0, 1e-11);
    CHECK(q.value == 0.0);
    CHECK(q.error_estimate == 0.0);
}

TEST_CASE("reports are bitwise deterministic") {
    const auto g = [](double x) { return std::sin(1.0 / (x + 0.05)); };
    const QuadratureResult a = integrate(g, 0.0, 1.0, 1e-10);
    const QuadratureResult b = integrate(g, 0.0, 1.0, 1e-10);
    CHECK(std::bit_cast<std::uint64_t>(a.value) == std::bit_cast<std::uint64_t>(b.value));
    CHECK(a.evaluations == b.evaluations);
}

TEST_CASE("errors") {
    const auto g = [](double x) { return std::sin(1.0 / (x + 1e-3)); };
    try {
        integrate(g, 0.0, 1.0, QuadratureOptions{1e-12, 150});
        FAIL("expected budget exhaustion");
    } catch (const QuadratureError& e) {
        CHECK(e.kind() == QuadratureError::Kind::BudgetExhausted);
        CHECK(e.abscissa() >= 0.0);
        CHECK(e.abscissa() <= 1.0);
    }
    try {
        integrate([](double x) { return x > 0.5 ? std::nan("") : x; }, 0.0, 1.0, 1e-11);
        FAIL("expected a non-finite error");
    } catch (const QuadratureError& e) {
        CHECK(e.kind() == QuadratureError::Kind::NonFinite);
        CHECK(e.abscissa() > 0.5);
    }
    CHECK_THROWS_AS(integrate([](double x) { return x; }, 1.0, 0.0, 1e-11), std::invalid_argument);
    CHECK_THROWS_AS(integrate([](double x) { return x; }, 0.0, 1.0, 0.0), std::invalid_argument);
    const double bad[] = {0.5, 0.25};
    CHECK_THROWS_AS(integrate_with_breakpoints([](double x) { return x; }, 0.0, 1.0, bad), std::invalid_argument);
    const double outside[] = {1.5};
    CHECK_THROWS_AS(integrate_with_breakpoints([](double x) { return x; }, 0.0, 1.0, outside), std::invalid_argument);
}

TEST_CASE("unattainable tolerance is reported rather than looped on") {
    try {
        const QuadratureResult q = integrate([](double x) { return 1e6 * std::exp(x); }, 0.0, 1.0, 1e-15);
        CHECK(q.error_estimate <= 1e-15);
    } catch (const QuadratureError& e) {
        CHECK(e.kind() == QuadratureError::Kind::RoundoffLimited);
    }
}
