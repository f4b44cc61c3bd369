#include "qflow/bench.hpp"

#include "qflow/errors.hpp"
#include "qflow/flow_solvers.hpp"
#include "qflow/quadratic_solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

namespace qflow {

const std::vector<std::string>& method_names() {
    static const std::vector<std::string> kNames = {"ssp", "dp1", "dp2", "dp1q", "dp2q", "lp"};
    return kNames;
}

bool is_method(const std::string& name) {
    const auto& names = method_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

MethodOutcome run_method(const CostedGraph& cg, const std::string& name) {
    MethodOutcome out;
    if (name == "ssp") out.flow = ssp_solve(cg);
    else if (name == "dp1") out.flow = dp_onepass(cg);
    else if (name == "dp2") out.flow = dp_twopass(cg);
    else if (name == "dp1q") out.flow = greedy_dp_quadratic(cg);
    else if (name == "dp2q") out.flow = twopass_dp_quadratic(cg);
    else if (name == "lp") {
        auto r = solve_quadratic(cg, QuadraticMethod::kLpRound);
        out.flow = std::move(r.flow);
        out.lower_bound = r.lower_bound;
    } else {
        throw InputError("unknown method '" + name + "'");
    }
    out.objective = flow_cost(cg, out.flow);
    out.flow.objective = out.objective;
    return out;
}

WeightVector default_weights(const WeightLayout& layout) {
    WeightVector w(layout);
    w.birth() = -1.0;
    w.death() = -1.0;
    w.appearance() << 1.0, 0.0;
    for (int gap = 1; gap <= layout.max_gap; ++gap) {
        w.transition()[2 * (gap - 1)] = -0.1 * (gap - 1);
        w.transition()[2 * (gap - 1) + 1] = -0.5;
    }
    for (int c = 0; c < layout.num_classes; ++c) {
        auto block = w.pairwise_block(c, c);
        if (layout.relation_dim > kStrictlyOverlap) {
            block[kOnTopOf] = -0.5;
            block[kStrictlyOverlap] = -1.5;
        }
    }
    return w;
}

double BenchRow::gap() const {
    if (std::isnan(lower_bound)) return std::numeric_limits<double>::quiet_NaN();
    return relative_gap(objective, lower_bound);
}

std::vector<BenchRow> BenchReport::rows_of(const std::string& method) const {
    std::vector<BenchRow> out;
    for (const auto& r : rows)
        if (r.method == method) out.push_back(r);
    return out;
}

double BenchReport::median_gap(const std::string& method) const {
    std::vector<double> gaps;
    for (const auto& r : rows_of(method))
        if (!std::isnan(r.gap())) gaps.push_back(r.gap());
    if (gaps.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(gaps.begin(), gaps.end());
    const size_t m = gaps.size() / 2;
    return gaps.size() % 2 ? gaps[m] : 0.5 * (gaps[m - 1] + gaps[m]);
}

double BenchReport::total_seconds(const std::string& method) const {
    double total = 0.0;
    for (const auto& r : rows_of(method)) total += r.seconds;
    return total;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

std::string BenchReport::csv() const {
    std::ostringstream out;
    out << "instance,method,objective,lower_bound,gap,seconds\n";
    for (const auto& r : rows)
        out << r.instance << ',' << r.method << ',' << fmt(r.objective) << ',' << fmt(r.lower_bound) << ',' << fmt(r.gap())
            << ',' << fmt(r.seconds) << '\n';
    return out.str();
}

std::string BenchReport::cumulative_csv() const {
    std::ostringstream out;
    out << "method,instances,cumulative_objective,cumulative_lower_bound,cumulative_seconds\n";
    for (const auto& m : methods) {
        double obj = 0.0, lb = 0.0, t = 0.0;
        int k = 0;
        for (const auto& r : rows_of(m)) {
            obj += r.objective;
            lb += r.lower_bound;
            t += r.seconds;
            out << m << ',' << ++k << ',' << fmt(obj) << ',' << fmt(lb) << ',' << fmt(t) << '\n';
        }
    }
    return out.str();
}

std::string BenchReport::svg() const {
    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    constexpr double kW = 360, kH = 260, kPad = 40;
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * kW << "\" height=\"" << kH + 30 << "\">\n";
    for (int panel = 0; panel < 2; ++panel) {
        // Panel 0: cumulative objective; panel 1: cumulative seconds.
        std::map<std::string, std::vector<double>> series;
        double lo = 0.0, hi = 0.0;
        size_t count = 1;
        for (const auto& m : methods) {
            double acc = 0.0;
            auto& s = series[m];
            s.push_back(0.0);
            for (const auto& r : rows_of(m)) {
                acc += panel == 0 ? r.objective : r.seconds;
                s.push_back(acc);
                lo = std::min(lo, acc);
                hi = std::max(hi, acc);
            }
            count = std::max(count, s.size() - 1);
        }
        if (hi - lo <= 0.0) hi = lo + 1.0;
        const double x0 = panel * kW + kPad, x1 = (panel + 1) * kW - 10, y0 = kH - kPad, y1 = 10;
        out << "<rect x=\"" << x0 << "\" y=\"" << y1 << "\" width=\"" << x1 - x0 << "\" height=\"" << y0 - y1
            << "\" fill=\"none\" stroke=\"#444\"/>\n";
        out << "<text x=\"" << x0 << "\" y=\"" << kH - 10 << "\" font-size=\"12\">"
            << (panel == 0 ? "cumulative objective" : "cumulative seconds") << " vs instances</text>\n";
        int color = 0;
        for (const auto& m : methods) {
            const auto& s = series[m];
            out << "<polyline fill=\"none\" stroke=\"" << kColors[color % 6] << "\" points=\"";
            for (size_t k = 0; k < s.size(); ++k) {
                const double x = x0 + (x1 - x0) * double(k) / count;
                const double y = y0 - (y0 - y1) * (s[k] - lo) / (hi - lo);
                out << fmt(x) << ',' << fmt(y) << ' ';
            }
            out << "\"/>\n";
            if (panel == 1)
                out << "<text x=\"" << x0 + 8 << "\" y=\"" << y1 + 14 + 14 * color << "\" font-size=\"11\" fill=\""
                    << kColors[color % 6] << "\">" << m << "</text>\n";
            ++color;
        }
    }
    out << "</svg>\n";
    return out.str();
}

std::string BenchReport::summary() const {
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-6s %12s %12s %12s\n", "method", "objective", "seconds", "median_gap");
    out << buf;
    for (const auto& m : methods) {
        double obj = 0.0;
        for (const auto& r : rows_of(m)) obj += r.objective;
        std::snprintf(buf, sizeof buf, "%-6s %12.6g %12.6g %12.6g\n", m.c_str(), obj, total_seconds(m), median_gap(m));
        out << buf;
    }
    return out.str();
}

BenchReport bench_run(const std::vector<std::pair<std::string, CostedGraph>>& instances,
                      const std::vector<std::string>& methods) {
    for (const auto& m : methods)
        if (!is_method(m)) throw InputError("unknown method '" + m + "'");
    BenchReport report;
    report.methods = methods;
    for (const auto& [name, cg] : instances) {
        const size_t first = report.rows.size();
        double bound = std::numeric_limits<double>::quiet_NaN();
        for (const auto& m : methods) {
            const auto start = std::chrono::steady_clock::now();
            const MethodOutcome out = run_method(cg, m);
            const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            if (out.lower_bound) bound = *out.lower_bound;
            report.rows.push_back({name, m, out.objective, 0.0, seconds});
        }
        for (size_t k = first; k < report.rows.size(); ++k) report.rows[k].lower_bound = bound;
    }
    return report;
}

}  // namespace qflow
