#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "simpson/bounds.hpp"
#include "simpson/kernel.hpp"
#include "simpson/runner.hpp"

#ifndef SIMPSON_DEFAULT_CORPUS_DIR
#define SIMPSON_DEFAULT_CORPUS_DIR "corpus"
#endif

namespace simpson::cli {

namespace {

std::string fmt(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double parse_number(std::string s, const std::string& what) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        throw InputError(what + ": cannot parse '" + s + "' as a number");
    return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(parse_number(item, what));
    if (out.empty()) throw InputError(what + ": empty list");
    return out;
}

std::pair<double, double> parse_pair(const std::string& text, const std::string& what) {
    const auto v = parse_list(text, what);
    if (v.size() != 2) throw InputError(what + ": expected lo,hi");
    return {v[0], v[1]};
}

std::vector<TheoremId> parse_theorems(const std::string& text) {
    std::vector<TheoremId> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto id = parse_theorem(item);
        if (!id) throw InputError("--theorems: unknown theorem '" + item + "'");
        out.push_back(*id);
    }
    return out;
}

struct ToleranceFlags {
    std::optional<double> oracle, slack, invexity, identity;

    void add_to(CLI::App* app) {
        app->add_option("--oracle-tol", oracle, "Quadrature absolute tolerance (default 1e-11)");
        app->add_option("--slack-tol", slack, "Violation threshold on slack (default 1e-12)");
        app->add_option("--invexity-tol", invexity, "Sampled-definition tolerance (default 1e-12)");
        app->add_option("--identity-tol", identity, "Lemma identity allowance (default 1e-9)");
    }

    void apply(Tolerances& t) const {
        const auto set = [](const std::optional<double>& v, double& target, const char* flag) {
            if (!v) return;
            if (!(*v > 0.0) || !std::isfinite(*v)) throw InputError(std::string(flag) + " must be positive");
            target = *v;
        };
        set(oracle, t.oracle, "--oracle-tol");
        set(slack, t.slack, "--slack-tol");
        set(invexity, t.invexity, "--invexity-tol");
        set(identity, t.identity, "--identity-tol");
    }
};

void write_output(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw InputError("cannot write " + path);
    file << text;
}

void summarise(const RunReport& r, bool quiet, std::ostream& err) {
    if (!quiet) {
        err << r.cases.size() << " case(s): " << r.count(CaseVerdict::Pass) << " pass, "
            << r.count(CaseVerdict::HypothesisUnmet) << " hypothesis_unmet, " << r.count(CaseVerdict::Violation)
            << " violation, " << r.count(CaseVerdict::InputError) << " input_error\n";
    }
    for (const CaseReport& c : r.cases)
        if (!c.diagnostic.empty()) err << "  " << c.name << ": " << c.diagnostic << '\n';
}

int cmd_moments(const std::string& p_text, std::ostream& out) {
    std::vector<double> ps = parse_list(p_text, "--p");
    for (const double p : ps)
        if (!(p >= 1.0)) throw InputError("--p: p >= 1 required, got " + fmt(p));
    out << "p,closed_form,numeric,abs_diff\n";
    for (const double p : ps) {
        const double closed = moment_p(p);
        const double numeric = numeric_moment(p);
        out << fmt(p) << ',' << fmt(closed) << ',' << fmt(numeric) << ',' << fmt(std::fabs(closed - numeric)) << '\n';
    }
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Simpson defect bounds over invex domains"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");

    std::string p_text;
    auto* moments = app.add_subcommand("moments", "Kernel moments: closed form against quadrature (CSV)");
    moments->add_option("--p", p_text, "Comma-separated exponents p >= 1")->required();

    std::string config, out_path;
    bool strict = false, quiet = false, timing = false;
    ToleranceFlags check_tol;
    auto* check = app.add_subcommand("check", "Run one case file and print its JSON report");
    check->add_option("config", config, "Case file (JSON)")->required();
    check->add_flag("--strict", strict, "Exit 2 when a hypothesis is unmet");
    check->add_option("--out", out_path, "Write the report here instead of stdout");
    check->add_flag("--quiet", quiet, "No summary line on stderr");
    check->add_flag("--timing", timing, "Include wall times in the report");
    check_tol.add_to(check);

    std::string filter, format = "json", corpus_dir = SIMPSON_DEFAULT_CORPUS_DIR;
    ToleranceFlags corpus_tol;
    auto* corpus = app.add_subcommand("corpus", "Run the bundled corpus");
    corpus->add_option("--filter", filter, "Only cases whose name contains this text");
    corpus->add_option("--out", out_path, "Write the report here instead of stdout");
    corpus->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    corpus->add_option("--corpus-dir", corpus_dir, "Directory of case files")->capture_default_str();
    corpus->add_flag("--strict", strict, "Exit 2 when a hypothesis is unmet");
    corpus->add_flag("--quiet", quiet, "No summary line on stderr");
    corpus->add_flag("--timing", timing, "Include wall times in the JSON report");
    corpus_tol.add_to(corpus);

    std::string f_src, df_src, big_f_src, eta_src = "difference", k_text, a_text, b_text, q_text = "1",
                                          theorems_text;
    std::optional<double> d4sup;
    std::size_t steps = 11;
    ToleranceFlags scan_tol;
    auto* scan = app.add_subcommand("scan", "Tightness scan: max |defect|/rhs per theorem (CSV)");
    scan->add_option("--f", f_src, "f(x)")->required();
    scan->add_option("--df", df_src, "f'(x)")->required();
    scan->add_option("--F", big_f_src, "Antiderivative of f (optional)");
    scan->add_option("--d4sup", d4sup, "sup |f''''| on K (enables CLASSICAL)");
    scan->add_option("--eta", eta_src, "difference, abs_example, or an expression in v and u")->capture_default_str();
    scan->add_option("--K", k_text, "Domain lo,hi")->required();
    scan->add_option("--a-range", a_text, "lo,hi for a (default K)");
    scan->add_option("--b-range", b_text, "lo,hi for b (default K)");
    scan->add_option("--q", q_text, "Comma-separated exponents q >= 1")->capture_default_str();
    scan->add_option("--steps", steps, "Grid points per axis (>= 2)")->capture_default_str();
    scan->add_option("--theorems", theorems_text, "Comma-separated theorem ids (default all applicable)");
    scan_tol.add_to(scan);

    std::vector<std::string> rest(args.rbegin(), args.rend());
    if (!rest.empty()) rest.pop_back();  // program name
    try {
        app.parse(rest);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        if (const auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front())
            err << "run '" << sub->get_name() << " --help' for usage\n";
        else
            err << "run '--help' for usage\n";
        return kInputError;
    }

    try {
        if (moments->parsed()) return cmd_moments(p_text, out);

        if (check->parsed()) {
            CorpusCase c = load_case_file(config);
            check_tol.apply(c.tolerances);
            std::vector<CorpusCase> one;
            one.push_back(std::move(c));
            const RunReport report = run_cases(std::move(one));
            write_output(to_json(report, timing), out_path, out);
            summarise(report, quiet, err);
            return exit_code(report, strict);
        }

        if (corpus->parsed()) {
            if (!std::filesystem::is_directory(corpus_dir)) throw InputError("corpus directory not found: " + corpus_dir);
            const RunReport report =
                run_corpus(corpus_dir, filter, [&corpus_tol](CorpusCase& c) { corpus_tol.apply(c.tolerances); });
            write_output(format == "csv" ? to_csv(report) : to_json(report, timing), out_path, out);
            summarise(report, quiet, err);
            return exit_code(report, strict);
        }

        if (scan->parsed()) {
            const auto k = parse_pair(k_text, "--K");
            const Domain domain(k.first, k.second);
            std::optional<Expr> antiderivative;
            if (!big_f_src.empty()) antiderivative = Expr::parse(big_f_src, {"x"});
            ScanRequest request{FunctionModel{"scan", Expr::parse(f_src, {"x"}), Expr::parse(df_src, {"x"}),
                                              antiderivative, d4sup, domain},
                                eta_src == "difference"    ? EtaMap::difference()
                                : eta_src == "abs_example" ? EtaMap::abs_example()
                                                           : EtaMap::expression(eta_src),
                                a_text.empty() ? k : parse_pair(a_text, "--a-range"),
                                b_text.empty() ? k : parse_pair(b_text, "--b-range"),
                                parse_list(q_text, "--q"),
                                steps,
                                {},
                                {},
                                {}};
            if (theorems_text.empty()) {
                for (const TheoremId id : kAllTheorems)
                    if (id != TheoremId::Classical || d4sup) request.theorems.push_back(id);
            } else {
                request.theorems = parse_theorems(theorems_text);
            }
            scan_tol.apply(request.tolerances);
            const auto results = tightness_scan(request);
            out << scan_to_csv(results);
            bool exceeded = false;
            for (const TightnessResult& r : results)
                if (r.status == ScanStatus::Ok && r.ratio > 1.0 + request.tolerances.slack) exceeded = true;
            if (exceeded) {
                err << "a tightness ratio exceeds 1: bound violated on the scan grid\n";
                return kViolation;
            }
            return kOk;
        }
    } catch (const ParseError& e) {
        err << "error: expression: " << e.what() << '\n';
        return kInputError;
    } catch (const CaseError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
    return kInputError;
}

}  // namespace simpson::cli
