#pragma once

#include <string>
#include <vector>

#include "sketchcv/bench.hpp"

namespace sketchcv {

/// "%.17g": round-trips every double exactly.
std::string format_double(double v);

/// Columns: scheme, method, k, r, theta, mse, mean, median, q1, q3,
/// outlier_fraction, mean_iterations, nonconverged_fraction, three_root_fraction.
std::string inner_product_csv(const std::vector<SummaryStats>& rows);
std::string inner_product_json(const std::vector<SummaryStats>& rows);

std::string trace_csv(const std::vector<TraceSummary>& rows);
std::string trace_json(const std::vector<TraceSummary>& rows);

std::string convergence_csv(const ConvergenceReport& report);
std::string convergence_samples_csv(const ConvergenceReport& report);
std::string convergence_json(const ConvergenceReport& report);

}  // namespace sketchcv
