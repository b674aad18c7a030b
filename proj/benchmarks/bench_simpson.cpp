#include <benchmark/benchmark.h>

#include <cmath>

#include "simpson/bounds.hpp"
#include "simpson/invexity.hpp"
#include "simpson/kernel.hpp"
#include "simpson/quadrature.hpp"
#include "simpson/runner.hpp"

using namespace simpson;

namespace {

FunctionModel exp_model() {
    return {"exp", Expr::parse("exp(x)", {"x"}), Expr::parse("exp(x)", {"x"}), std::nullopt, std::nullopt,
            Domain(0.0, 1.0)};
}

void BM_ExprEval(benchmark::State& state) {
    const Expr e = Expr::parse("sin(pi*x)^2 + exp(-x)*x^3", {"x"});
    double x = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(e(x));
        x = x < 1.0 ? x + 1e-3 : 0.0;
    }
}
BENCHMARK(BM_ExprEval);

void BM_Integrate(benchmark::State& state) {
    const QuadratureOptions opt{std::pow(10.0, -static_cast<double>(state.range(0)))};
    for (auto _ : state)
        benchmark::DoNotOptimize(integrate([](double x) { return std::sqrt(x) * std::cos(3 * x); }, 0.0, 2.0, opt));
}
BENCHMARK(BM_Integrate)->Arg(6)->Arg(10)->Arg(13);

void BM_MomentClosedForm(benchmark::State& state) {
    double p = 1.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(moment_p(p));
        p = p < 20.0 ? p + 0.25 : 1.0;
    }
}
BENCHMARK(BM_MomentClosedForm);

void BM_MomentNumeric(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(numeric_moment(7.0));
}
BENCHMARK(BM_MomentNumeric);

void BM_DefectAndLemma(benchmark::State& state) {
    const FunctionModel m = exp_model();
    for (auto _ : state) {
        benchmark::DoNotOptimize(simpson_defect(m, 0.0, 1.0));
        benchmark::DoNotOptimize(lemma_rhs(m, 0.0, 1.0));
    }
}
BENCHMARK(BM_DefectAndLemma);

void BM_CheckPreinvex(benchmark::State& state) {
    SamplingPlan plan;
    plan.grid_u = plan.grid_v = static_cast<std::size_t>(state.range(0));
    plan.grid_t = 21;
    const Domain k(-1.0, 1.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(check_preinvex([](double u) { return -std::fabs(u); }, EtaMap::abs_example(), k, plan));
}
BENCHMARK(BM_CheckPreinvex)->Arg(11)->Arg(41)->Unit(benchmark::kMillisecond);

void BM_RunCase(benchmark::State& state) {
    const CorpusCase c = load_case_file(std::filesystem::path(SIMPSON_CORPUS_DIR) / "exp.json");
    for (auto _ : state) benchmark::DoNotOptimize(run_case(c));
}
BENCHMARK(BM_RunCase)->Unit(benchmark::kMillisecond);

void BM_TightnessScan(benchmark::State& state) {
    ScanRequest req{exp_model(), EtaMap::difference(), {0.0, 0.5}, {0.5, 1.0}, {1.0, 2.0},
                    static_cast<std::size_t>(state.range(0)), {kAllTheorems.begin(), kAllTheorems.end() - 1}, {}, {}};
    for (auto _ : state) benchmark::DoNotOptimize(tightness_scan(req));
}
BENCHMARK(BM_TightnessScan)->Arg(5)->Arg(11)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
