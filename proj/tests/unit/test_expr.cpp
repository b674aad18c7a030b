#include <doctest.h>

#include <bit>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "simpson/expr.hpp"

using simpson::DomainError;
using simpson::Expr;
using simpson::ParseError;

namespace {

double ev(const std::string& s, double x = 0.0) { return Expr::parse(s, {"x"})(x); }

std::size_t error_offset(const std::string& s, std::vector<std::string> vars = {"x"}) {
    try {
        Expr::parse(s, std::move(vars));
    } catch (const ParseError& e) {
        return e.position();
    }
    FAIL("expected a parse error for " << s);
    return 0;
}

}  // namespace

TEST_CASE("documented examples") {
    CHECK(ev("2+3*4^2", 7.0) == 50.0);
    CHECK(ev("exp(1)") == doctest::Approx(2.718281828459045).epsilon(1e-15));
    const Expr eta = Expr::parse("if(v<=0 and u<=0, v-u, u-v)", {"v", "u"});
    CHECK(eta.eval(std::vector<double>{-1.0, -2.0}) == 1.0);
    CHECK(error_offset("2*") == 2);
    CHECK(ev("abs(x)", -3.0) == 3.0);
    CHECK(ev("x^2", 0.5) == 0.25);
    CHECK_THROWS_AS(ev("log(x)", -1.0), DomainError);
}

TEST_CASE("precedence golden suite") {
    struct Row {
        const char* src;
        double x;
        double value;
    };
    const Row rows[] = {
        {"1+2*3", 0, 7},
        {"(1+2)*3", 0, 9},
        {"2^3^2", 0, 512},
        {"(2^3)^2", 0, 64},
        {"-2^2", 0, -4},
        {"(-2)^2", 0, 4},
        {"2^-1", 0, 0.5},
        {"-x^2", 3, -9},
        {"10-4-3", 0, 3},
        {"100/10/5", 0, 2},
        {"2*3/4", 0, 1.5},
        {"1-2*3+4", 0, -1},
        {"--3", 0, 3},
        {"2*-3", 0, -6},
        {"x*x-2*x+1", 4, 9},
        {"sqrt(16)+abs(-2)", 0, 6},
        {"if(x<1, 10, 20)", 0.5, 10},
        {"if(x<1, 10, 20)", 1, 20},
        {"if(x<=1, 10, 20)", 1, 10},
        {"if(x>1 or x<-1, 1, 0)", -2, 1},
        {"if(x>0 and x<1, 1, 0)", 2, 0},
        {"if(x==2, 1, 0)", 2, 1},
        {"if(x>=2, x^2, -x)", 3, 9},
        {"if(1 + 2 < 4 and 1 > 0, 1, 0)", 0, 1},
        {"3*(2+x)^2/9", 1, 3},
        {"1.5e2+.5", 0, 150.5},
        {"2*pi", 0, 2 * M_PI},
    };
    for (const Row& r : rows) {
        CAPTURE(r.src);
        CHECK(ev(r.src, r.x) == doctest::Approx(r.value).epsilon(1e-15));
    }
}

TEST_CASE("parse errors carry offsets") {
    CHECK(error_offset("") == 0);
    CHECK(error_offset("y + 1") == 0);
    CHECK(error_offset("x + foo(2)") == 4);
    CHECK(error_offset("sin(1, 2)") == 0);
    CHECK(error_offset("(x + 1") == 6);
    CHECK(error_offset("x $ 2") == 2);
    CHECK(error_offset("x = 2") == 2);
    CHECK(error_offset("1 < 2 < 3") > 0);
    CHECK(error_offset("if(x, 1, 2)") > 0);
    CHECK_THROWS_AS(ev("1 + 2 < 4 and 1 > 0"), ParseError);
    CHECK(error_offset("x < 1") == 0);
    CHECK(error_offset("sqrt(x < 1)") > 0);
    for (const char* s : {"", "2*", "((x)", "x +", "if(", "sin(", "1e", "x y"}) {
        CAPTURE(s);
        CHECK(error_offset(s) <= std::string(s).size());
    }
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS(ev("sqrt(x)", -1.0), DomainError);
    CHECK_THROWS_AS(ev("1/x", 0.0), DomainError);
    CHECK_THROWS_AS(ev("log(x)", 0.0), DomainError);
    CHECK_THROWS_AS(ev("exp(x)", 1000.0), DomainError);
    try {
        ev("1 + log(x - 2)", 1.0);
        FAIL("expected a domain error");
    } catch (const DomainError& e) {
        CHECK(e.argument() == -1.0);
        CHECK(e.subexpression().find("log") != std::string::npos);
        CHECK(e.bindings().find("x") != std::string::npos);
    }
}

TEST_CASE("if evaluates only the taken branch") {
    CHECK(ev("if(x > 0, log(x), 0)", -1.0) == 0.0);
    CHECK(ev("if(x > 0, log(x), 0)", 1.0) == 0.0);
    CHECK_THROWS_AS(ev("if(x < 0, log(x), 0)", -1.0), DomainError);
}

TEST_CASE("map bindings and variable order") {
    const Expr e = Expr::parse("v - 2*u", {"v", "u"});
    CHECK(e.eval(std::map<std::string, double>{{"u", 1.0}, {"v", 5.0}}) == 3.0);
    CHECK(e.eval(std::vector<double>{5.0, 1.0}) == 3.0);
    CHECK(e.variables() == std::vector<std::string>{"v", "u"});
    CHECK(e.source() == "v - 2*u");
    CHECK_THROWS(e.eval(std::map<std::string, double>{{"v", 5.0}}));
}

TEST_CASE("round trip through to_string is bitwise identical") {
    const char* sources[] = {
        "2+3*4^2",       "-x^2+sin(3*x)/7", "exp(-x)*cos(pi*x)", "if(x<0.3 or x>=0.7, x^3, -x)",
        "(x+1)^5/10",    "2^x^-1",           "abs(x-0.1)*sqrt(x^2+1)", "1/(1+x^2)",
        "x - -x",        "0.1+0.2*x"};
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> dist(-0.95, 0.95);
    for (const char* src : sources) {
        CAPTURE(src);
        const Expr e = Expr::parse(src, {"x"});
        const Expr again = Expr::parse(e.to_string(), {"x"});
        CHECK(again.to_string() == e.to_string());
        for (int i = 0; i < 100; ++i) {
            const double x = dist(rng);
            CHECK(std::bit_cast<std::uint64_t>(e(x)) == std::bit_cast<std::uint64_t>(again(x)));
        }
    }
}

TEST_CASE("copies share the tree and evaluate identically") {
    const Expr a = Expr::parse("sin(x)^2", {"x"});
    const Expr b = a;
    CHECK(std::bit_cast<std::uint64_t>(a(0.3)) == std::bit_cast<std::uint64_t>(b(0.3)));
}

TEST_CASE("derivative check") {
    const auto p = [](const char* s) { return Expr::parse(s, {"x"}); };
    CHECK(simpson::check_derivative(p("x^2"), p("2*x"), 0.0, 1.0, 11).passed);
    CHECK(simpson::check_derivative(p("exp(x)"), p("exp(x)"), 0.0, 1.0, 11).passed);
    CHECK(simpson::check_derivative(p("sin(2*pi*x)"), p("2*pi*cos(2*pi*x)"), 0.0, 1.0, 21).passed);
    CHECK(simpson::check_derivative(p("sqrt(x+1)"), p("0.5/sqrt(x+1)"), 0.0, 3.0, 21).passed);

    const auto bad = simpson::check_derivative(p("x^2"), p("x"), 0.0, 1.0, 11);
    CHECK_FALSE(bad.passed);
    REQUIRE(bad.witness_x);
    CHECK(*bad.witness_x > 0.0);
    CHECK(*bad.witness_x < 1.0);
    CHECK(bad.worst_mismatch > 1e-4);
    CHECK(bad.samples == 11);
    // |x - 2x| / max(|x|, |2x|, 1) peaks at the right end of the sample set.
    CHECK(bad.witness_fd == doctest::Approx(2.0 * *bad.witness_x).epsilon(1e-6));
}
