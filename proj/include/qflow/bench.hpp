#pragma once

#include "qflow/potentials.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qflow {

/// Method names: ssp, dp1, dp2 (linear objective) and dp1q, dp2q, lp (quadratic).
const std::vector<std::string>& method_names();
bool is_method(const std::string& name);

struct MethodOutcome {
    FlowSolution flow;
    /// Full quadratic objective of `flow`.
    double objective = 0.0;
    std::optional<double> lower_bound;
};

/// Throws InputError for unknown names.
MethodOutcome run_method(const CostedGraph& cg, const std::string& name);

/// Hand-set weights for unlearned runs: unit score weight, birth and death cost 1, a soft
/// penalty on weak-overlap transitions and a same-class penalty on stacked boxes.
WeightVector default_weights(const WeightLayout& layout);

struct BenchRow {
    std::string instance;
    std::string method;
    double objective = 0.0;
    /// Relaxed bound of the instance; NaN unless lp was among the methods.
    double lower_bound = 0.0;
    double seconds = 0.0;
    double gap() const;
};

struct BenchReport {
    std::vector<std::string> methods;
    std::vector<BenchRow> rows;

    std::vector<BenchRow> rows_of(const std::string& method) const;
    /// Median relative gap to the lower bound (NaN without bounds).
    double median_gap(const std::string& method) const;
    double total_seconds(const std::string& method) const;

    std::string csv() const;
    /// Running sums of objective, bound and time per method in instance order.
    std::string cumulative_csv() const;
    /// Cumulative objective and time curves as a two-panel plot.
    std::string svg() const;
    /// One line per method: total time, median gap.
    std::string summary() const;
};

BenchReport bench_run(const std::vector<std::pair<std::string, CostedGraph>>& instances,
                      const std::vector<std::string>& methods);

}  // namespace qflow
