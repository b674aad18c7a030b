#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <sstream>

#include "simpson/runner.hpp"

using namespace simpson;
using nlohmann::json;

namespace {

const std::filesystem::path kCorpus = SIMPSON_CORPUS_DIR;
const std::filesystem::path kFixtures = SIMPSON_FIXTURE_DIR;

std::string x2_case(const std::string& extra = {}) {
    return R"({"name": "x2", "f": "x^2", "df": "2*x", "F": "x^3/3", "d4sup": 0,
               "eta": {"kind": "difference"}, "K": [0, 1], "a": 0, "b": 1, "q": [1, 2],
               "theorems": ["T3.1", "T3.2", "T3.3", "T3.4", "T4.1", "T4.2", "T4.3", "C4.1", "C4.2", "CLASSICAL"])" +
           extra + "}";
}

std::string field_of(const std::string& text) {
    try {
        parse_case(text);
    } catch (const CaseError& e) {
        return e.field();
    }
    return "<no error>";
}

const BoundEntry* find(const CaseReport& r, TheoremId id, std::optional<double> q = std::nullopt) {
    for (const BoundEntry& b : r.bounds)
        if (b.value.theorem == id && b.value.q == q) return &b;
    return nullptr;
}

FunctionModel model(const char* f, const char* df, Domain k, std::optional<double> d4 = std::nullopt) {
    return {f, Expr::parse(f, {"x"}), Expr::parse(df, {"x"}), std::nullopt, d4, k};
}

ScanRequest scan(FunctionModel m, std::pair<double, double> ar, std::pair<double, double> br,
                 std::vector<double> qs, std::vector<TheoremId> ids, std::size_t steps = 5) {
    SamplingPlan plan;
    plan.grid_u = plan.grid_v = 21;
    plan.grid_t = 11;
    plan.random_triples = 200;
    return {std::move(m), EtaMap::difference(), ar, br, std::move(qs), steps, std::move(ids), {}, plan};
}

}  // namespace

TEST_CASE("x2 case passes with zero defect") {
    const CaseReport r = run_case(parse_case(x2_case()));
    CHECK(r.verdict == CaseVerdict::Pass);
    REQUIRE(r.defect);
    CHECK(std::fabs(r.defect->defect) <= 1e-15);
    CHECK(*r.identity_residual <= 1e-12);
    // T3.2, T3.3, T4.2, T4.3 need q > 1: one entry each; the rest two or one.
    CHECK(r.bounds.size() == 1 + 1 + 1 + 2 + 2 + 1 + 1 + 1 + 1 + 1);
    for (const BoundEntry& b : r.bounds) {
        CAPTURE(to_string(b.value.theorem));
        if (b.value.theorem == TheoremId::C4_2) {
            CHECK(b.status == BoundStatus::PreconditionUnmet);
        } else if (b.value.theorem == TheoremId::Classical) {
            CHECK(b.status == BoundStatus::Checked);
            CHECK(b.value.slack >= 0.0);
        } else {
            CHECK(b.status == BoundStatus::Checked);
            CHECK(b.value.slack > 0.0);
        }
    }
    CHECK(find(r, TheoremId::T3_2, 2.0)->value.rhs == doctest::Approx(0.2276709006307398).epsilon(1e-14));
    CHECK(find(r, TheoremId::T3_2, 2.0)->value.p == 2.0);
    CHECK_FALSE(find(r, TheoremId::T3_2, 1.0));
    CHECK(find(r, TheoremId::T3_4, 1.0));
}

TEST_CASE("eta sign examples") {
    const CaseReport bad = run_case(load_case_file(kFixtures / "invalid_eta.json"));
    CHECK(bad.verdict == CaseVerdict::InputError);
    CHECK(bad.diagnostic.rfind("InvalidEta", 0) == 0);
    REQUIRE(bad.eta_value);
    CHECK(*bad.eta_value == -2.0);

    const CaseReport good = run_case(load_case_file(kCorpus / "neg_abs.json"));
    CHECK(good.verdict == CaseVerdict::Pass);
    CHECK(*good.eta_value == 0.5);
    CHECK(std::fabs(good.defect->defect) <= 1e-15);
}

TEST_CASE("input validation gates") {
    const CaseReport df = run_case(load_case_file(kFixtures / "wrong_df.json"));
    CHECK(df.verdict == CaseVerdict::InputError);
    CHECK(df.diagnostic.find("DerivativeMismatch") != std::string::npos);

    const CaseReport F = run_case(load_case_file(kFixtures / "wrong_antiderivative.json"));
    CHECK(F.verdict == CaseVerdict::InputError);
    CHECK(F.diagnostic.find("AntiderivativeMismatch") != std::string::npos);

    const CaseReport outside = run_case(parse_case(R"J({"name": "o", "f": "x", "df": "1", "eta": {"kind": "expression",
        "value": "2*(v-u)"}, "K": [0, 1], "a": 0, "b": 1, "q": [1], "theorems": ["T3.1"]})J"));
    CHECK(outside.verdict == CaseVerdict::InputError);
    CHECK(outside.diagnostic.rfind("DomainError", 0) == 0);

    const CaseReport log_domain = run_case(parse_case(R"J({"name": "l", "f": "log(x)", "df": "1/x",
        "eta": {"kind": "difference"}, "K": [-1, 1], "a": 0.5, "b": 1, "q": [1], "theorems": ["T3.1"]})J"));
    CHECK(log_domain.verdict == CaseVerdict::InputError);
}

TEST_CASE("case document diagnostics name the field") {
    CHECK(field_of(x2_case()) == "<no error>");
    CHECK(field_of(R"({"f": "x"})") == "name");
    CHECK(field_of(x2_case(R"(, "colour": 1)")) == "colour");
    CHECK(field_of(x2_case(R"(, "tolerances": {"oracle": -1})")) == "tolerances.oracle");
    CHECK(field_of(x2_case(R"(, "tolerances": {"orcale": 1})")) == "tolerances.orcale");
    CHECK(field_of(x2_case(R"(, "sampling": {"grid_u": 1})")) == "sampling");
    CHECK(field_of(x2_case(R"(, "expected": [{"theorem": "T3.1", "rhs": 1}])")) == "expected[0].tol");

    auto doc = json::parse(x2_case());
    const auto with = [&](const char* key, json value) {
        json d = doc;
        d[key] = std::move(value);
        return field_of(d.dump());
    };
    CHECK(with("f", "x^") == "f");
    CHECK(with("df", 3) == "df");
    CHECK(with("K", json::array({1, 0})) == "K");
    CHECK(with("K", json::array({0})) == "K");
    CHECK(with("q", json::array({1, 0.5})) == "q[1]");
    CHECK(with("q", json::array()) == "q");
    CHECK(with("theorems", json::array({"T3.1", "T9.9"})) == "theorems[1]");
    CHECK(with("eta", json{{"kind", "warp"}}) == "eta");
    CHECK(with("eta", json{{"kind", "expression"}, {"value", "v - w"}}) == "eta.value");
    CHECK(with("a", "zero") == "a");
    CHECK(with("d4sup", -1) == "d4sup");
    json no_d4 = doc;
    no_d4.erase("d4sup");
    CHECK(field_of(no_d4.dump()) == "d4sup");

    try {
        parse_case("{\n  \"name\": \"x\",\n  \"f\": 3\n", "case.json");
        FAIL("expected a syntax error");
    } catch (const CaseError& e) {
        CHECK(e.field().empty());
        CHECK(std::string(e.what()).find("case.json") != std::string::npos);
        CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
    CHECK_THROWS_AS(load_case_file(kFixtures / "does_not_exist.json"), CaseError);
}

TEST_CASE("zigzag fixture is a violation of T4.3 only") {
    const CaseReport r = run_case(load_case_file(kFixtures / "zigzag_t43.json"));
    CHECK(r.verdict == CaseVerdict::Violation);
    for (const BoundEntry& b : r.bounds) {
        CAPTURE(to_string(b.value.theorem));
        CHECK(b.status == BoundStatus::Checked);
        if (b.value.theorem == TheoremId::T4_3)
            CHECK(b.value.slack < -0.02);
        else
            CHECK(b.value.slack >= -1e-12);
    }
    RunReport run;
    run.cases.push_back(r);
    CHECK(exit_code(run, false) == 1);
}

TEST_CASE("bundled corpus") {
    const RunReport run = run_corpus(kCorpus);
    REQUIRE(run.cases.size() >= 12);
    CHECK(std::is_sorted(run.cases.begin(), run.cases.end(),
                         [](const CaseReport& a, const CaseReport& b) { return a.name < b.name; }));
    for (const CaseReport& c : run.cases) {
        CAPTURE(c.name);
        CAPTURE(c.diagnostic);
        if (c.name == "sin2_hypothesis_fail") {
            CHECK(c.verdict == CaseVerdict::HypothesisUnmet);
            for (const BoundEntry& b : c.bounds) CHECK(b.status == BoundStatus::SkippedHypothesis);
        } else {
            CHECK(c.verdict == CaseVerdict::Pass);
        }
    }
    CHECK(run.count(CaseVerdict::Violation) == 0);
    CHECK(exit_code(run, false) == 0);
    CHECK(exit_code(run, true) == 2);
}

TEST_CASE("corpus golden values") {
    std::size_t checked = 0;
    for (const auto& entry : std::filesystem::directory_iterator(kCorpus)) {
        const CorpusCase c = load_case_file(entry.path());
        if (c.expected.empty()) continue;
        const CaseReport r = run_case(c);
        for (const ExpectedBound& e : c.expected) {
            CAPTURE(c.name);
            CAPTURE(to_string(e.theorem));
            const BoundEntry* b = find(r, e.theorem, exponent_use(e.theorem) == ExponentUse::None ? std::nullopt : e.q);
            REQUIRE(b);
            CHECK(std::fabs(b->value.rhs - e.rhs) <= e.tol);
            ++checked;
        }
    }
    CHECK(checked >= 10);
}

TEST_CASE("filters") {
    const RunReport x4 = run_corpus(kCorpus, "x4");
    REQUIRE(x4.cases.size() == 1);
    CHECK(x4.cases[0].defect->defect == doctest::Approx(1.0 / 120.0).epsilon(1e-12));
    const RunReport none = run_corpus(kCorpus, "nomatch");
    CHECK(none.cases.empty());
    CHECK(exit_code(none, true) == 0);
    const json j = json::parse(to_json(none));
    CHECK(j["counts"]["total"] == 0);
    CHECK(j["cases"].empty());
}

TEST_CASE("tolerance overrides reach every case") {
    std::size_t seen = 0;
    run_corpus(kCorpus, "exp", [&](CorpusCase& c) {
        c.tolerances.oracle = 1e-12;
        ++seen;
    });
    CHECK(seen == 2);
}

TEST_CASE("reports are deterministic and well formed") {
    const RunReport a = run_corpus(kCorpus, "x");
    const RunReport b = run_corpus(kCorpus, "x");
    CHECK(to_json(a) == to_json(b));
    CHECK(to_csv(a) == to_csv(b));

    const json j = json::parse(to_json(a));
    CHECK(j["counts"]["total"] == a.cases.size());
    CHECK_FALSE(j["cases"][0].contains("wall_time_ms"));
    CHECK(json::parse(to_json(a, true))["cases"][0].contains("wall_time_ms"));
    for (const auto& c : j["cases"]) {
        for (const char* key : {"case", "verdict", "defect", "quadrature_error", "identity_residual", "bounds", "hypotheses"})
            CHECK(c.contains(key));
        for (const auto& h : c["hypotheses"]) {
            if (h["verdict"] == "violated")
                CHECK(h["witness"].is_object());
            else
                CHECK(h["witness"].is_null());
        }
    }

    std::size_t rows = 0;
    for (const CaseReport& c : a.cases) rows += c.bounds.size();
    const std::string csv = to_csv(a);
    CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == rows + 1);
    CHECK(csv.rfind("case,verdict,theorem,q,p,rhs,lhs,slack,status\n", 0) == 0);
}

TEST_CASE("exit code aggregation") {
    const auto with = [](std::initializer_list<CaseVerdict> vs) {
        RunReport r;
        for (const CaseVerdict v : vs) {
            CaseReport c;
            c.verdict = v;
            r.cases.push_back(c);
        }
        return r;
    };
    CHECK(exit_code(with({CaseVerdict::Pass}), true) == 0);
    CHECK(exit_code(with({CaseVerdict::HypothesisUnmet}), false) == 0);
    CHECK(exit_code(with({CaseVerdict::HypothesisUnmet}), true) == 2);
    CHECK(exit_code(with({CaseVerdict::HypothesisUnmet, CaseVerdict::InputError}), true) == 3);
    CHECK(exit_code(with({CaseVerdict::InputError, CaseVerdict::Violation}), true) == 1);
    CHECK(exit_code(with({CaseVerdict::Violation, CaseVerdict::Pass}), false) == 1);
}

TEST_CASE("tightness: x^4 equality case") {
    const auto r = tightness_scan(scan(model("x^4", "4*x^3", Domain(0, 1), 24.0), {0, 0}, {1, 1}, {1},
                                       {TheoremId::Classical}, 2));
    REQUIRE(r.size() == 1);
    CHECK(r[0].status == ScanStatus::Ok);
    CHECK(r[0].ratio == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r[0].a == 0.0);
    CHECK(r[0].b == 1.0);
}

TEST_CASE("tightness: cubic defect vanishes") {
    const auto r = tightness_scan(scan(model("x^3", "3*x^2", Domain(0, 1), 0.0), {0, 0.5}, {0.5, 1}, {1, 2},
                                       {TheoremId::T3_1, TheoremId::T3_4, TheoremId::T4_1, TheoremId::C4_1}));
    for (const auto& t : r) {
        CAPTURE(to_string(t.theorem));
        CHECK(t.status == ScanStatus::Ok);
        CHECK(t.ratio <= 1e-12);
    }
}

TEST_CASE("tightness: exp") {
    const auto r = tightness_scan(scan(model("exp(x)", "exp(x)", Domain(0, 1)), {0, 0}, {1, 1}, {1},
                                       {TheoremId::T3_1}, 2));
    REQUIRE(r.size() == 1);
    CHECK(r[0].ratio == doctest::Approx(2.2435785122e-3).epsilon(1e-8));

    std::vector<TheoremId> ids(kAllTheorems.begin(), kAllTheorems.end() - 1);
    const auto all = tightness_scan(scan(model("exp(x)", "exp(x)", Domain(0, 1)), {0, 0.5}, {0.5, 1}, {1, 2}, ids));
    CHECK(all.size() == ids.size());
    for (const auto& t : all) {
        CAPTURE(to_string(t.theorem));
        if (t.theorem == TheoremId::C4_2) {
            CHECK(t.status == ScanStatus::AllCellsSkipped);
            continue;
        }
        CHECK(t.status == ScanStatus::Ok);
        CHECK(t.ratio <= 1.0 + 1e-12);
        CHECK(t.ratio > 0.0);
        CHECK(t.cells_skipped >= 1);  // a = b = 0.5
    }
    const std::string csv = scan_to_csv(all);
    CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == all.size() + 1);
}

TEST_CASE("tightness: statuses and errors") {
    const auto r = tightness_scan(scan(model("sin(pi*x)^2", "pi*sin(2*pi*x)", Domain(0, 1)), {0, 0.5}, {0.5, 1}, {2},
                                       {TheoremId::T4_1}));
    REQUIRE(r.size() == 1);
    CHECK(r[0].status == ScanStatus::HypothesisUnmet);

    const auto m = model("x^2", "2*x", Domain(0, 1));
    CHECK_THROWS_AS(tightness_scan(scan(m, {0, 2}, {0, 1}, {1}, {TheoremId::T3_1})), std::invalid_argument);
    CHECK_THROWS_AS(tightness_scan(scan(m, {0.5, 0.1}, {0, 1}, {1}, {TheoremId::T3_1})), std::invalid_argument);
    CHECK_THROWS_AS(tightness_scan(scan(m, {0, 1}, {0, 1}, {1}, {TheoremId::T3_1}, 1)), std::invalid_argument);
    CHECK_THROWS_AS(tightness_scan(scan(m, {0, 1}, {0, 1}, {0.5}, {TheoremId::T3_1})), std::invalid_argument);
    CHECK_THROWS_AS(tightness_scan(scan(model("x^2", "x", Domain(0, 1)), {0, 1}, {0, 1}, {1}, {TheoremId::T3_1})),
                    CaseError);
}
