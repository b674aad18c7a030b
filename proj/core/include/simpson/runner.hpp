#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "simpson/bounds.hpp"
#include "simpson/invexity.hpp"
#include "simpson/model.hpp"

namespace simpson {

struct Tolerances {
    double oracle = 1e-11;     ///< absolute quadrature tolerance
    double slack = 1e-12;      ///< a bound is violated when slack < -slack
    double invexity = 1e-12;   ///< sampled-definition violation threshold
    double identity = 1e-9;    ///< |defect - lemma rhs| allowance on top of quadrature errors
    double antiderivative = 1e-9;
};

/// Golden value attached to a case file.
struct ExpectedBound {
    TheoremId theorem;
    std::optional<double> q;
    double rhs;
    double tol;
};

struct CorpusCase {
    std::string name;
    FunctionModel model;  ///< model.domain is the case's K
    EtaMap eta;
    double a = 0.0;
    double b = 1.0;
    std::vector<double> q_list;
    std::vector<TheoremId> theorems;
    std::vector<ExpectedBound> expected;
    Tolerances tolerances;
    SamplingPlan plan;

    const Domain& domain() const noexcept { return model.domain; }
};

/// Malformed case document. `field` names the offending JSON field (or is
/// empty for syntax errors, which carry line/column in the message).
class CaseError : public std::runtime_error {
public:
    CaseError(std::string field, const std::string& message);
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Parses and validates one case document (structure, types, expression
/// syntax). Semantic checks (eta sign, derivative gate) happen in run_case.
CorpusCase parse_case(std::string_view json_text, const std::string& origin = "<input>");
CorpusCase load_case_file(const std::filesystem::path& path);

enum class CaseVerdict { Pass, HypothesisUnmet, Violation, InputError };
enum class BoundStatus { Checked, SkippedHypothesis, PreconditionUnmet };

std::string_view to_string(CaseVerdict v);
std::string_view to_string(BoundStatus s);

struct BoundEntry {
    BoundValue value;
    BoundStatus status = BoundStatus::Checked;
};

struct CaseReport {
    std::string name;
    CaseVerdict verdict = CaseVerdict::Pass;
    std::string diagnostic;
    std::optional<double> eta_value;
    std::optional<SimpsonDefect> defect;
    std::optional<QuadratureResult> lemma;
    std::optional<double> identity_residual;
    std::vector<PropertyReport> hypotheses;
    std::vector<BoundEntry> bounds;
    double wall_ms = 0.0;
};

struct RunReport {
    std::vector<CaseReport> cases;
    double wall_ms = 0.0;

    std::size_t count(CaseVerdict v) const;
};

/// Runs the derivative gate (and antiderivative gate when F is present)
/// against the model. Throws CaseError naming the failing field.
void validate_model(const FunctionModel& model, double a, double end, const Tolerances& tol);

/// validate -> invex set -> hypotheses -> defect + identity -> bounds -> verdict.
/// Never throws for bad inputs; those become CaseVerdict::InputError.
CaseReport run_case(const CorpusCase& c);

/// Loads every *.json under `directory` whose case name contains `filter`
/// (case files that fail to load are still reported, as input errors).
/// Cases are ordered by name. `prepare` may adjust each loaded case
/// (tolerance overrides) before it runs.
RunReport run_corpus(const std::filesystem::path& directory, std::string_view filter = {},
                     const std::function<void(CorpusCase&)>& prepare = {});

/// Case-name-ordered run over already-loaded cases.
RunReport run_cases(std::vector<CorpusCase> cases);

/// Report serialisation. Output is deterministic unless include_timing.
std::string to_json(const RunReport& report, bool include_timing = false);
std::string to_csv(const RunReport& report);

/// 0 pass, 1 violation, 2 hypothesis unmet (strict only), 3 input error;
/// worst wins with violation > input error > hypothesis unmet.
int exit_code(const RunReport& report, bool strict);

struct ScanRequest {
    FunctionModel model;  ///< model.domain is K
    EtaMap eta;
    std::pair<double, double> a_range;
    std::pair<double, double> b_range;
    std::vector<double> q_list;
    std::size_t steps = 11;
    std::vector<TheoremId> theorems;
    Tolerances tolerances;
    SamplingPlan plan;
};

enum class ScanStatus { Ok, AllCellsSkipped, HypothesisUnmet };
std::string_view to_string(ScanStatus s);

struct TightnessResult {
    TheoremId theorem = TheoremId::T3_1;
    ScanStatus status = ScanStatus::Ok;
    double ratio = 0.0;  ///< max over cells of (|lhs| - quadrature error) / rhs
    double a = 0.0;
    double b = 0.0;
    std::optional<double> q;
    std::size_t cells_evaluated = 0;
    std::size_t cells_skipped = 0;
};

/// Grid over (a, b, q). Cells with eta <= 0, a path outside K, an unmet
/// precondition, or rhs = 0 are skipped. Ties keep the lexicographically
/// smallest (a, b, q).
std::vector<TightnessResult> tightness_scan(const ScanRequest& request);

std::string scan_to_csv(const std::vector<TightnessResult>& results);

}  // namespace simpson
