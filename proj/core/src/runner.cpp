#include "simpson/runner.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "simpson/kernel.hpp"

namespace simpson {

using nlohmann::json;

CaseError::CaseError(std::string field, const std::string& message)
    : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

std::string_view to_string(CaseVerdict v) {
    switch (v) {
    case CaseVerdict::Pass: return "pass";
    case CaseVerdict::HypothesisUnmet: return "hypothesis_unmet";
    case CaseVerdict::Violation: return "violation";
    case CaseVerdict::InputError: return "input_error";
    }
    return "?";
}

std::string_view to_string(BoundStatus s) {
    switch (s) {
    case BoundStatus::Checked: return "checked";
    case BoundStatus::SkippedHypothesis: return "skipped_hypothesis";
    case BoundStatus::PreconditionUnmet: return "precondition_unmet";
    }
    return "?";
}

std::string_view to_string(ScanStatus s) {
    switch (s) {
    case ScanStatus::Ok: return "ok";
    case ScanStatus::AllCellsSkipped: return "all_cells_skipped";
    case ScanStatus::HypothesisUnmet: return "hypothesis_unmet";
    }
    return "?";
}

std::size_t RunReport::count(CaseVerdict v) const {
    return static_cast<std::size_t>(
        std::count_if(cases.begin(), cases.end(), [v](const CaseReport& c) { return c.verdict == v; }));
}

// ---------------------------------------------------------------------------
// Case documents

namespace {

const json& member(const json& obj, const char* key, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw CaseError(path + key, "required field missing");
    return *it;
}

double number_at(const json& j, const std::string& field) {
    if (!j.is_number()) throw CaseError(field, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw CaseError(field, "expected a finite number");
    return v;
}

std::string string_at(const json& j, const std::string& field) {
    if (!j.is_string()) throw CaseError(field, "expected a string");
    std::string s = j.get<std::string>();
    if (s.empty()) throw CaseError(field, "must not be empty");
    return s;
}

std::size_t count_at(const json& j, const std::string& field) {
    if (!j.is_number_unsigned()) throw CaseError(field, "expected a non-negative integer");
    return j.get<std::size_t>();
}

Expr expression_at(const json& j, const std::string& field, std::vector<std::string> vars) {
    const std::string src = string_at(j, field);
    try {
        return Expr::parse(src, std::move(vars));
    } catch (const ParseError& e) {
        throw CaseError(field, e.what());
    }
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& path) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw CaseError(path + key, "unknown field");
    }
}

Tolerances parse_tolerances(const json& j) {
    if (!j.is_object()) throw CaseError("tolerances", "expected an object");
    reject_unknown(j, {"oracle", "slack", "invexity", "identity", "antiderivative"}, "tolerances.");
    Tolerances t;
    const auto read = [&](const char* key, double& out) {
        if (const auto it = j.find(key); it != j.end()) {
            out = number_at(*it, std::string("tolerances.") + key);
            if (!(out > 0.0)) throw CaseError(std::string("tolerances.") + key, "must be positive");
        }
    };
    read("oracle", t.oracle);
    read("slack", t.slack);
    read("invexity", t.invexity);
    read("identity", t.identity);
    read("antiderivative", t.antiderivative);
    return t;
}

SamplingPlan parse_sampling(const json& j) {
    if (!j.is_object()) throw CaseError("sampling", "expected an object");
    reject_unknown(j, {"grid_u", "grid_v", "grid_t", "random", "seed"}, "sampling.");
    SamplingPlan plan;
    if (j.contains("grid_u")) plan.grid_u = count_at(j["grid_u"], "sampling.grid_u");
    if (j.contains("grid_v")) plan.grid_v = count_at(j["grid_v"], "sampling.grid_v");
    if (j.contains("grid_t")) plan.grid_t = count_at(j["grid_t"], "sampling.grid_t");
    if (j.contains("random")) plan.random_triples = count_at(j["random"], "sampling.random");
    if (j.contains("seed")) plan.seed = count_at(j["seed"], "sampling.seed");
    if (plan.grid_u < 2 || plan.grid_v < 2 || plan.grid_t < 2)
        throw CaseError("sampling", "grid counts must be at least 2");
    return plan;
}

TheoremId theorem_at(const json& j, const std::string& field) {
    const std::string s = string_at(j, field);
    const auto id = parse_theorem(s);
    if (!id) throw CaseError(field, "unknown theorem '" + s + "'");
    return *id;
}

}  // namespace

CorpusCase parse_case(std::string_view json_text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw CaseError("", origin + ": " + e.what());
    }
    if (!doc.is_object()) throw CaseError("", origin + ": case document must be a JSON object");
    reject_unknown(doc,
                   {"name", "description", "f", "df", "F", "d4sup", "eta", "K", "a", "b", "q", "theorems",
                    "tolerances", "sampling", "expected"},
                   "");

    const std::string name = string_at(member(doc, "name", ""), "name");

    const json& k = member(doc, "K", "");
    if (!k.is_array() || k.size() != 2) throw CaseError("K", "expected [lo, hi]");
    const double lo = number_at(k[0], "K[0]");
    const double hi = number_at(k[1], "K[1]");
    if (!(lo < hi)) throw CaseError("K", "requires lo < hi");

    const json& eta_j = member(doc, "eta", "");
    if (!eta_j.is_object()) throw CaseError("eta", "expected {kind, value}");
    reject_unknown(eta_j, {"kind", "value"}, "eta.");
    const std::string kind = string_at(member(eta_j, "kind", "eta."), "eta.kind");
    std::string eta_value;
    if (const auto it = eta_j.find("value"); it != eta_j.end()) eta_value = string_at(*it, "eta.value");
    std::optional<EtaMap> eta;
    try {
        eta = EtaMap::from_spec(kind, eta_value);
    } catch (const ParseError& e) {
        throw CaseError("eta.value", e.what());
    } catch (const std::invalid_argument& e) {
        throw CaseError("eta", e.what());
    }

    std::optional<Expr> antiderivative;
    if (doc.contains("F")) antiderivative = expression_at(doc["F"], "F", {"x"});
    std::optional<double> d4sup;
    if (doc.contains("d4sup")) {
        d4sup = number_at(doc["d4sup"], "d4sup");
        if (*d4sup < 0.0) throw CaseError("d4sup", "must be non-negative");
    }

    FunctionModel model{name,
                        expression_at(member(doc, "f", ""), "f", {"x"}),
                        expression_at(member(doc, "df", ""), "df", {"x"}),
                        std::move(antiderivative),
                        d4sup,
                        Domain(lo, hi)};

    CorpusCase c{name, std::move(model), std::move(*eta), number_at(member(doc, "a", ""), "a"),
                 number_at(member(doc, "b", ""), "b"), {}, {}, {}, {}, {}};

    const json& qs = member(doc, "q", "");
    if (!qs.is_array() || qs.empty()) throw CaseError("q", "expected a non-empty array of exponents");
    for (std::size_t i = 0; i < qs.size(); ++i) {
        const std::string field = "q[" + std::to_string(i) + "]";
        const double q = number_at(qs[i], field);
        if (!(q >= 1.0)) throw CaseError(field, "exponent must be >= 1");
        c.q_list.push_back(q);
    }

    const json& ts = member(doc, "theorems", "");
    if (!ts.is_array() || ts.empty()) throw CaseError("theorems", "expected a non-empty array of theorem ids");
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const TheoremId id = theorem_at(ts[i], "theorems[" + std::to_string(i) + "]");
        if (std::find(c.theorems.begin(), c.theorems.end(), id) == c.theorems.end()) c.theorems.push_back(id);
        if (id == TheoremId::Classical && !c.model.d4sup)
            throw CaseError("d4sup", "CLASSICAL requested but d4sup is missing (MissingFourthDerivative)");
    }

    if (doc.contains("tolerances")) c.tolerances = parse_tolerances(doc["tolerances"]);
    if (doc.contains("sampling")) c.plan = parse_sampling(doc["sampling"]);

    if (doc.contains("expected")) {
        const json& ex = doc["expected"];
        if (!ex.is_array()) throw CaseError("expected", "expected an array");
        for (std::size_t i = 0; i < ex.size(); ++i) {
            const std::string path = "expected[" + std::to_string(i) + "].";
            if (!ex[i].is_object()) throw CaseError(path, "expected an object");
            reject_unknown(ex[i], {"theorem", "q", "rhs", "tol"}, path);
            ExpectedBound e{theorem_at(member(ex[i], "theorem", path), path + "theorem"), std::nullopt,
                            number_at(member(ex[i], "rhs", path), path + "rhs"),
                            number_at(member(ex[i], "tol", path), path + "tol")};
            if (ex[i].contains("q")) e.q = number_at(ex[i]["q"], path + "q");
            c.expected.push_back(e);
        }
    }
    return c;
}

CorpusCase load_case_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CaseError("", "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_case(buffer.str(), path.string());
}

// ---------------------------------------------------------------------------
// Running cases

void validate_model(const FunctionModel& model, double a, double end, const Tolerances& tol) {
    const DerivativeReport d = check_derivative(model.f, model.df, model.domain.lo, model.domain.hi, 21);
    if (!d.passed) {
        std::ostringstream msg;
        msg << "DerivativeMismatch: df disagrees with finite differences of f at x=" << *d.witness_x
            << " (df=" << d.witness_df << ", fd=" << d.witness_fd << ", relative mismatch " << d.worst_mismatch << ")";
        throw CaseError("df", msg.str());
    }
    if (model.antiderivative) {
        const Expr& F = *model.antiderivative;
        const QuadratureResult r =
            integrate([&model](double x) { return model.value(x); }, a, end, QuadratureOptions{tol.oracle});
        const double exact = F(end) - F(a);
        if (std::fabs(r.value - exact) > tol.antiderivative + r.error_estimate) {
            std::ostringstream msg;
            msg << "AntiderivativeMismatch: F(end)-F(a)=" << exact << " but quadrature gives " << r.value;
            throw CaseError("F", msg.str());
        }
    }
}

namespace {

struct Requirement {
    HypothesisMode mode;
    double q;
    auto operator<=>(const Requirement&) const = default;
};

std::optional<Requirement> requirement(TheoremId id, std::optional<double> q) {
    switch (id) {
    case TheoremId::T3_1: return Requirement{HypothesisMode::Preinvex, 1.0};
    case TheoremId::T3_2:
    case TheoremId::T3_3:
    case TheoremId::T3_4: return Requirement{HypothesisMode::Preinvex, *q};
    case TheoremId::T4_1:
    case TheoremId::T4_2:
    case TheoremId::T4_3: return Requirement{HypothesisMode::Prequasiinvex, *q};
    case TheoremId::C4_1:
    case TheoremId::C4_2: return Requirement{HypothesisMode::Prequasiinvex, 1.0};
    case TheoremId::Classical: return std::nullopt;
    }
    return std::nullopt;
}

// (theorem, q) pairs in theorem order, q in list order.
std::vector<std::pair<TheoremId, std::optional<double>>> evaluations(const std::vector<TheoremId>& requested,
                                                                     const std::vector<double>& q_list) {
    std::vector<std::pair<TheoremId, std::optional<double>>> out;
    for (const TheoremId id : kAllTheorems) {
        if (std::find(requested.begin(), requested.end(), id) == requested.end()) continue;
        switch (exponent_use(id)) {
        case ExponentUse::None:
            out.emplace_back(id, std::nullopt);
            break;
        case ExponentUse::AtLeastOne:
            for (const double q : q_list) out.emplace_back(id, q);
            break;
        case ExponentUse::GreaterThanOne:
            for (const double q : q_list)
                if (q > 1.0) out.emplace_back(id, q);
            break;
        }
    }
    return out;
}

// Cached hypothesis checks keyed by (mode, q).
class HypothesisCache {
public:
    HypothesisCache(const FunctionModel& model, const EtaMap& eta, const SamplingPlan& plan, double tol)
        : model_(model), eta_(eta), plan_(plan), tol_(tol) {}

    const PropertyReport& get(const Requirement& r) {
        auto it = cache_.find(r);
        if (it == cache_.end())
            it = cache_.emplace(r, hypothesis_check(model_, eta_, model_.domain, r.q, r.mode, plan_, tol_)).first;
        return it->second;
    }

    std::vector<PropertyReport> reports() const {
        std::vector<PropertyReport> out;
        for (const auto& [key, report] : cache_) out.push_back(report);
        return out;
    }

private:
    const FunctionModel& model_;
    const EtaMap& eta_;
    const SamplingPlan& plan_;
    double tol_;
    std::map<Requirement, PropertyReport> cache_;
};

std::string format_number(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

CaseReport run_case(const CorpusCase& c) {
    const auto start = std::chrono::steady_clock::now();
    CaseReport report;
    report.name = c.name;
    const auto fail = [&](const std::string& diagnostic) {
        report.verdict = CaseVerdict::InputError;
        report.diagnostic = diagnostic;
        report.wall_ms = elapsed_ms(start);
        return report;
    };

    try {
        const Domain& k = c.domain();
        if (!k.contains(c.a) || !k.contains(c.b))
            return fail("DomainError: a and b must lie in K");
        const double eta = c.eta(c.b, c.a);
        report.eta_value = eta;
        if (!(eta > 0.0))
            return fail("InvalidEta: eta(b,a) = " + format_number(eta) + " must be positive");
        const double end = c.a + eta;
        if (!k.contains(end, 1e-12 * std::max(1.0, std::fabs(k.hi))))
            return fail("DomainError: path end a + eta(b,a) = " + format_number(end) + " lies outside K");

        validate_model(c.model, c.a, end, c.tolerances);

        const PropertyReport invex = check_invex_set(k, c.eta, c.plan, c.tolerances.invexity);
        HypothesisCache hypotheses(c.model, c.eta, c.plan, c.tolerances.invexity);

        const QuadratureOptions oracle{c.tolerances.oracle};
        const SimpsonDefect defect = simpson_defect(c.model, c.a, eta, oracle);
        const QuadratureResult lemma = lemma_rhs(c.model, c.a, eta, oracle);
        report.defect = defect;
        report.lemma = lemma;
        report.identity_residual = std::fabs(defect.defect - lemma.value);
        if (*report.identity_residual > c.tolerances.identity + defect.quadrature_error + lemma.error_estimate) {
            report.hypotheses.push_back(invex);
            return fail("IdentityMismatch: Simpson defect and kernel integral differ by " +
                        format_number(*report.identity_residual));
        }

        for (const auto& [id, q] : evaluations(c.theorems, c.q_list)) {
            BoundEntry entry;
            bool hypothesis_ok = true;
            if (const auto req = requirement(id, q)) hypothesis_ok = invex.verified() && hypotheses.get(*req).verified();
            try {
                entry.value = evaluate_bound(id, c.model, c.a, c.b, eta, q);
            } catch (const BoundsError& e) {
                if (e.code() != BoundsError::Code::PreconditionUnmet) throw;
                entry.value.theorem = id;
                entry.value.rhs = rhs::c4_1(eta, std::fabs(c.model.derivative(c.a)), std::fabs(c.model.derivative(c.b)));
                entry.status = BoundStatus::PreconditionUnmet;
            }
            const double lhs = id == TheoremId::C4_2 ? midpoint_defect(c.model, c.a, eta, defect) : std::fabs(defect.defect);
            entry.value = with_slack(entry.value, lhs, defect.quadrature_error);
            if (entry.status == BoundStatus::Checked && !hypothesis_ok) entry.status = BoundStatus::SkippedHypothesis;
            report.bounds.push_back(entry);
        }

        report.hypotheses.push_back(invex);
        for (PropertyReport& r : hypotheses.reports()) report.hypotheses.push_back(std::move(r));

        const bool any_checked = std::any_of(report.bounds.begin(), report.bounds.end(),
                                             [](const BoundEntry& b) { return b.status == BoundStatus::Checked; });
        const bool any_violated = std::any_of(report.bounds.begin(), report.bounds.end(), [&](const BoundEntry& b) {
            return b.status == BoundStatus::Checked && b.value.slack < -c.tolerances.slack;
        });
        if (any_violated)
            report.verdict = CaseVerdict::Violation;
        else if (!any_checked)
            report.verdict = CaseVerdict::HypothesisUnmet;
        else
            report.verdict = CaseVerdict::Pass;
    } catch (const std::exception& e) {
        return fail(e.what());
    }
    report.wall_ms = elapsed_ms(start);
    return report;
}

RunReport run_cases(std::vector<CorpusCase> cases) {
    const auto start = std::chrono::steady_clock::now();
    std::sort(cases.begin(), cases.end(), [](const CorpusCase& x, const CorpusCase& y) { return x.name < y.name; });
    RunReport run;
    for (const CorpusCase& c : cases) run.cases.push_back(run_case(c));
    run.wall_ms = elapsed_ms(start);
    return run;
}

RunReport run_corpus(const std::filesystem::path& directory, std::string_view filter,
                     const std::function<void(CorpusCase&)>& prepare) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(directory))
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    std::vector<CorpusCase> loaded;
    std::vector<CaseReport> broken;
    for (const auto& path : files) {
        try {
            CorpusCase c = load_case_file(path);
            if (c.name.find(filter) == std::string::npos) continue;
            if (prepare) prepare(c);
            loaded.push_back(std::move(c));
        } catch (const CaseError& e) {
            const std::string stem = path.stem().string();
            if (stem.find(filter) == std::string::npos) continue;
            CaseReport r;
            r.name = stem;
            r.verdict = CaseVerdict::InputError;
            r.diagnostic = e.what();
            broken.push_back(std::move(r));
        }
    }
    RunReport run = run_cases(std::move(loaded));
    for (CaseReport& r : broken) run.cases.push_back(std::move(r));
    std::stable_sort(run.cases.begin(), run.cases.end(),
                     [](const CaseReport& x, const CaseReport& y) { return x.name < y.name; });
    run.wall_ms = elapsed_ms(start);
    return run;
}

int exit_code(const RunReport& report, bool strict) {
    if (report.count(CaseVerdict::Violation)) return 1;
    if (report.count(CaseVerdict::InputError)) return 3;
    if (strict && report.count(CaseVerdict::HypothesisUnmet)) return 2;
    return 0;
}

// ---------------------------------------------------------------------------
// Serialisation

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json to_json(const PropertyReport& r) {
    json j;
    j["property"] = std::string(to_string(r.property));
    j["exponent_q"] = r.exponent_q;
    j["verdict"] = std::string(to_string(r.verdict));
    j["worst_violation"] = r.worst_violation;
    j["witness"] = r.witness ? json{{"u", r.witness->u}, {"v", r.witness->v}, {"t", r.witness->t}} : json(nullptr);
    j["samples"] = r.samples;
    j["note"] = r.note;
    return j;
}

json to_json(const CaseReport& c, bool include_timing) {
    json j;
    j["case"] = c.name;
    j["verdict"] = std::string(to_string(c.verdict));
    j["diagnostic"] = c.diagnostic;
    j["eta"] = optional_number(c.eta_value);
    if (c.defect) {
        j["simpson_value"] = c.defect->simpson_value;
        j["mean_integral"] = c.defect->mean_integral;
        j["defect"] = c.defect->defect;
        j["quadrature_error"] = c.defect->quadrature_error;
    } else {
        j["simpson_value"] = nullptr;
        j["mean_integral"] = nullptr;
        j["defect"] = nullptr;
        j["quadrature_error"] = nullptr;
    }
    j["lemma_rhs"] = c.lemma ? json(c.lemma->value) : json(nullptr);
    j["lemma_error"] = c.lemma ? json(c.lemma->error_estimate) : json(nullptr);
    j["identity_residual"] = optional_number(c.identity_residual);
    json bounds = json::array();
    for (const BoundEntry& b : c.bounds) {
        bounds.push_back({{"theorem", std::string(to_string(b.value.theorem))},
                          {"q", optional_number(b.value.q)},
                          {"p", optional_number(b.value.p)},
                          {"rhs", b.value.rhs},
                          {"lhs", b.value.lhs},
                          {"slack", b.value.slack},
                          {"status", std::string(to_string(b.status))}});
    }
    j["bounds"] = std::move(bounds);
    json hyps = json::array();
    for (const PropertyReport& r : c.hypotheses) hyps.push_back(to_json(r));
    j["hypotheses"] = std::move(hyps);
    if (include_timing) j["wall_time_ms"] = c.wall_ms;
    return j;
}

std::string format_optional(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

}  // namespace

std::string to_json(const RunReport& report, bool include_timing) {
    json j;
    json cases = json::array();
    for (const CaseReport& c : report.cases) cases.push_back(to_json(c, include_timing));
    j["cases"] = std::move(cases);
    j["counts"] = {{"total", report.cases.size()},
                   {"pass", report.count(CaseVerdict::Pass)},
                   {"hypothesis_unmet", report.count(CaseVerdict::HypothesisUnmet)},
                   {"violation", report.count(CaseVerdict::Violation)},
                   {"input_error", report.count(CaseVerdict::InputError)}};
    if (include_timing) j["wall_time_ms"] = report.wall_ms;
    return j.dump(2) + "\n";
}

std::string to_csv(const RunReport& report) {
    std::ostringstream out;
    out << "case,verdict,theorem,q,p,rhs,lhs,slack,status\n";
    for (const CaseReport& c : report.cases) {
        for (const BoundEntry& b : c.bounds) {
            out << c.name << ',' << to_string(c.verdict) << ',' << to_string(b.value.theorem) << ','
                << format_optional(b.value.q) << ',' << format_optional(b.value.p) << ',' << format_number(b.value.rhs)
                << ',' << format_number(b.value.lhs) << ',' << format_number(b.value.slack) << ','
                << to_string(b.status) << '\n';
        }
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Tightness scan

namespace {

std::vector<double> linspace(std::pair<double, double> range, std::size_t steps) {
    std::vector<double> out;
    out.reserve(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        if (i + 1 == steps)
            out.push_back(range.second);
        else
            out.push_back(range.first + (range.second - range.first) * static_cast<double>(i) /
                                            static_cast<double>(steps - 1));
    }
    return out;
}

}  // namespace

std::vector<TightnessResult> tightness_scan(const ScanRequest& request) {
    const Domain& k = request.model.domain;
    if (request.steps < 2) throw std::invalid_argument("tightness_scan: steps must be at least 2");
    for (const auto& [name, range] : {std::pair{"a", request.a_range}, std::pair{"b", request.b_range}}) {
        if (!(range.first <= range.second) || !k.contains(range.first) || !k.contains(range.second))
            throw std::invalid_argument(std::string("tightness_scan: ") + name + "-range must be ordered and inside K");
    }
    for (const double q : request.q_list)
        if (!(q >= 1.0)) throw std::invalid_argument("tightness_scan: q values must be >= 1");
    if (request.theorems.empty()) throw std::invalid_argument("tightness_scan: no theorems requested");

    validate_model(request.model, k.lo, k.hi, request.tolerances);

    const PropertyReport invex = check_invex_set(k, request.eta, request.plan, request.tolerances.invexity);
    HypothesisCache hypotheses(request.model, request.eta, request.plan, request.tolerances.invexity);
    const auto pairs = evaluations(request.theorems, request.q_list);

    struct Best {
        TightnessResult result;
        bool seen = false;
        bool hypothesis_ok = true;
    };
    std::map<std::pair<TheoremId, std::optional<double>>, Best> best;
    for (const auto& [id, q] : pairs) {
        Best& b = best[{id, q}];
        b.result.theorem = id;
        b.result.q = q;
        if (const auto req = requirement(id, q)) b.hypothesis_ok = invex.verified() && hypotheses.get(*req).verified();
    }

    const QuadratureOptions oracle{request.tolerances.oracle};
    const double path_tol = 1e-12 * std::max(1.0, std::fabs(k.hi));
    for (const double a : linspace(request.a_range, request.steps)) {
        for (const double bv : linspace(request.b_range, request.steps)) {
            const double eta = request.eta(bv, a);
            const bool cell_ok = eta > 0.0 && k.contains(a + eta, path_tol);
            std::optional<SimpsonDefect> defect;
            if (cell_ok) defect = simpson_defect(request.model, a, eta, oracle);
            for (const auto& [id, q] : pairs) {
                Best& b = best[{id, q}];
                if (!b.hypothesis_ok) continue;
                if (!cell_ok) {
                    ++b.result.cells_skipped;
                    continue;
                }
                BoundValue bound;
                try {
                    bound = evaluate_bound(id, request.model, a, bv, eta, q);
                } catch (const BoundsError& e) {
                    if (e.code() != BoundsError::Code::PreconditionUnmet) throw;
                    ++b.result.cells_skipped;
                    continue;
                }
                if (!(bound.rhs > 0.0)) {
                    ++b.result.cells_skipped;
                    continue;
                }
                const double lhs =
                    id == TheoremId::C4_2 ? midpoint_defect(request.model, a, eta, *defect) : std::fabs(defect->defect);
                const double ratio = std::max(0.0, lhs - defect->quadrature_error) / bound.rhs;
                ++b.result.cells_evaluated;
                // Iteration is in ascending (a, b), so strict improvement keeps the smallest tie.
                if (!b.seen || ratio > b.result.ratio) {
                    b.seen = true;
                    b.result.ratio = ratio;
                    b.result.a = a;
                    b.result.b = bv;
                }
            }
        }
    }

    // Collapse over q per theorem: keep the best ratio, ties to the smaller q.
    std::vector<TightnessResult> out;
    for (const TheoremId id : kAllTheorems) {
        std::optional<TightnessResult> merged;
        bool any_hypothesis_ok = false;
        bool any_pair = false;
        std::size_t evaluated = 0, skipped = 0;
        for (const auto& [key, b] : best) {
            if (key.first != id) continue;
            any_pair = true;
            evaluated += b.result.cells_evaluated;
            skipped += b.result.cells_skipped;
            if (!b.hypothesis_ok) continue;
            any_hypothesis_ok = true;
            if (!b.seen) continue;
            const auto rank = [](const TightnessResult& r) { return std::make_tuple(r.a, r.b, r.q.value_or(0.0)); };
            if (!merged || b.result.ratio > merged->ratio ||
                (b.result.ratio == merged->ratio && rank(b.result) < rank(*merged)))
                merged = b.result;
        }
        if (std::find(request.theorems.begin(), request.theorems.end(), id) == request.theorems.end()) continue;
        if (!any_pair) skipped = request.steps * request.steps;  // needs q > 1 and none was given
        TightnessResult r;
        if (merged) {
            r = *merged;
        } else {
            r.theorem = id;
            r.status = any_hypothesis_ok || !any_pair ? ScanStatus::AllCellsSkipped : ScanStatus::HypothesisUnmet;
        }
        r.cells_evaluated = evaluated;
        r.cells_skipped = skipped;
        out.push_back(r);
    }
    return out;
}

std::string scan_to_csv(const std::vector<TightnessResult>& results) {
    std::ostringstream out;
    out << "theorem,status,ratio,a,b,q,cells_evaluated,cells_skipped\n";
    for (const TightnessResult& r : results) {
        out << to_string(r.theorem) << ',' << to_string(r.status) << ',';
        if (r.status == ScanStatus::Ok)
            out << format_number(r.ratio) << ',' << format_number(r.a) << ',' << format_number(r.b) << ','
                << format_optional(r.q);
        else
            out << ",,,";
        out << ',' << r.cells_evaluated << ',' << r.cells_skipped << '\n';
    }
    return out.str();
}

}  // namespace simpson
