#include "simpson/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace simpson {

namespace {

// Kronrod abscissae (descending from the interval end) and weights; the
// odd-indexed nodes are the 7-point Gauss nodes.
constexpr std::array<double, 8> kXgk{
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
};

constexpr std::array<double, 8> kWgk{
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
};

constexpr std::array<double, 4> kWg{
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Panel {
    double lo;
    double hi;
    double value;
    double error;
    bool at_roundoff;
};

// Heap order: refinable panels before ones at the rounding floor, then
// largest error, then leftmost.
struct WorstFirst {
    bool operator()(const Panel& a, const Panel& b) const {
        if (a.at_roundoff != b.at_roundoff) return a.at_roundoff;
        if (a.error != b.error) return a.error < b.error;
        return a.lo > b.lo;
    }
};

double sample(const Integrand& g, double x) {
    const double y = g(x);
    if (!std::isfinite(y))
        throw QuadratureError(QuadratureError::Kind::NonFinite, x,
                              "non-finite integrand value at x=" + std::to_string(x));
    return y;
}

Panel gauss_kronrod(const Integrand& g, double lo, double hi) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double fc = sample(g, center);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    double abs_sum = std::fabs(fc) * kWgk[7];
    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double f1 = sample(g, center - dx);
        const double f2 = sample(g, center + dx);
        kronrod += kWgk[j] * (f1 + f2);
        abs_sum += kWgk[j] * (std::fabs(f1) + std::fabs(f2));
        if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
    }
    const double value = kronrod * half;
    const double error = std::fabs((kronrod - gauss) * half);
    const double floor = 50.0 * kEps * abs_sum * std::fabs(half);
    return {lo, hi, value, std::max(error, floor), error <= floor};
}

constexpr std::size_t kEvalsPerPanel = 15;

}  // namespace

QuadratureResult integrate(const Integrand& g, double lo, double hi, const QuadratureOptions& options) {
    if (!(lo <= hi)) throw std::invalid_argument("integrate: require lo <= hi");
    if (!(options.abs_tol > 0.0)) throw std::invalid_argument("integrate: require abs_tol > 0");
    if (lo == hi) return {};
    if (options.max_evaluations < kEvalsPerPanel)
        throw QuadratureError(QuadratureError::Kind::BudgetExhausted, lo, "evaluation budget below one panel");

    std::vector<Panel> heap{gauss_kronrod(g, lo, hi)};
    std::size_t evaluations = kEvalsPerPanel;
    double running_error = heap.front().error;

    const auto by_position = [](const Panel& a, const Panel& b) { return a.lo < b.lo; };
    const auto exact_error = [&heap, &by_position] {
        std::vector<Panel> sorted = heap;
        std::sort(sorted.begin(), sorted.end(), by_position);
        double sum = 0.0;
        for (const Panel& p : sorted) sum += p.error;
        return sum;
    };

    for (;;) {
        if (running_error <= options.abs_tol) {
            // The running sum accumulates cancellation; confirm before stopping.
            running_error = exact_error();
            if (running_error <= options.abs_tol) break;
        }
        const Panel worst = heap.front();
        if (worst.at_roundoff) {
            throw QuadratureError(QuadratureError::Kind::RoundoffLimited, worst.lo,
                                  "every panel is at the rounding floor; tolerance unattainable");
        }
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(mid > worst.lo && mid < worst.hi)) {
            throw QuadratureError(QuadratureError::Kind::RoundoffLimited, worst.lo,
                                  "panel cannot be subdivided further");
        }
        if (evaluations + 2 * kEvalsPerPanel > options.max_evaluations) {
            throw QuadratureError(QuadratureError::Kind::BudgetExhausted, worst.lo,
                                  "evaluation budget of " + std::to_string(options.max_evaluations) +
                                      " exhausted");
        }
        std::pop_heap(heap.begin(), heap.end(), WorstFirst{});
        heap.pop_back();
        const Panel left = gauss_kronrod(g, worst.lo, mid);
        const Panel right = gauss_kronrod(g, mid, worst.hi);
        evaluations += 2 * kEvalsPerPanel;
        running_error += (left.error + right.error) - worst.error;
        for (const Panel& p : {left, right}) {
            heap.push_back(p);
            std::push_heap(heap.begin(), heap.end(), WorstFirst{});
        }
    }

    std::sort(heap.begin(), heap.end(), by_position);
    QuadratureResult result;
    result.evaluations = evaluations;
    for (const Panel& p : heap) {
        result.value += p.value;
        result.error_estimate += p.error;
    }
    return result;
}

QuadratureResult integrate_with_breakpoints(const Integrand& g, double lo, double hi,
                                            std::span<const double> breakpoints,
                                            const QuadratureOptions& options) {
    if (!(lo <= hi)) throw std::invalid_argument("integrate_with_breakpoints: require lo <= hi");
    std::vector<double> edges{lo};
    for (const double b : breakpoints) {
        if (!(b > edges.back() && b < hi))
            throw std::invalid_argument("integrate_with_breakpoints: breakpoints must be sorted and inside (lo, hi)");
        edges.push_back(b);
    }
    edges.push_back(hi);
    if (lo == hi) return {};

    QuadratureResult total;
    const double width = hi - lo;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        QuadratureOptions panel = options;
        panel.abs_tol = options.abs_tol * (edges[i + 1] - edges[i]) / width;
        if (options.max_evaluations <= total.evaluations)
            throw QuadratureError(QuadratureError::Kind::BudgetExhausted, edges[i], "evaluation budget exhausted");
        panel.max_evaluations = options.max_evaluations - total.evaluations;
        const QuadratureResult r = integrate(g, edges[i], edges[i + 1], panel);
        total.value += r.value;
        total.error_estimate += r.error_estimate;
        total.evaluations += r.evaluations;
    }
    return total;
}

}  // namespace simpson
