#include "sketchcv/report.hpp"

#include <cstdio>

#include <json.hpp>

namespace sketchcv {
namespace {

using nlohmann::ordered_json;

std::string join(std::initializer_list<std::string> fields) {
  std::string line;
  for (const auto& f : fields) {
    if (!line.empty()) line += ',';
    line += f;
  }
  line += '\n';
  return line;
}

std::string fmt(double v) { return format_double(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string inner_product_csv(const std::vector<SummaryStats>& rows) {
  std::string out = join({"scheme", "method", "k", "r", "theta", "mse", "mean", "median", "q1", "q3",
                          "outlier_fraction", "mean_iterations", "nonconverged_fraction", "three_root_fraction"});
  for (const auto& s : rows) {
    out += join({to_string(s.scheme), to_string(s.method), fmt(s.k), fmt(s.r), fmt(s.theta), fmt(s.mse),
                 fmt(s.mean), fmt(s.median), fmt(s.q1), fmt(s.q3), fmt(s.outlier_fraction),
                 fmt(s.mean_iterations), fmt(s.nonconverged_fraction), fmt(s.three_root_fraction)});
  }
  return out;
}

std::string inner_product_json(const std::vector<SummaryStats>& rows) {
  ordered_json arr = ordered_json::array();
  for (const auto& s : rows) {
    arr.push_back({{"scheme", to_string(s.scheme)},
                   {"method", to_string(s.method)},
                   {"k", s.k},
                   {"r", s.r},
                   {"theta", s.theta},
                   {"mse", s.mse},
                   {"mean", s.mean},
                   {"median", s.median},
                   {"q1", s.q1},
                   {"q3", s.q3},
                   {"outlier_fraction", s.outlier_fraction},
                   {"mean_iterations", s.mean_iterations},
                   {"nonconverged_fraction", s.nonconverged_fraction},
                   {"three_root_fraction", s.three_root_fraction},
                   {"truth", s.truth},
                   {"variance", s.variance},
                   {"whisker_lo", s.whisker_lo},
                   {"whisker_hi", s.whisker_hi},
                   {"median_iterations", s.median_iterations}});
  }
  return arr.dump(2) + "\n";
}

std::string trace_csv(const std::vector<TraceSummary>& rows) {
  std::string out = join({"method", "kind", "k", "truth", "mean", "variance", "mse", "used",
                          "zero_denominator_fraction", "fallback_fraction"});
  for (const auto& s : rows) {
    out += join({to_string(s.method), to_string(s.kind), fmt(s.k), fmt(s.truth), fmt(s.mean), fmt(s.variance),
                 fmt(s.mse), fmt(s.used), fmt(s.zero_denominator_fraction), fmt(s.fallback_fraction)});
  }
  return out;
}

std::string trace_json(const std::vector<TraceSummary>& rows) {
  ordered_json arr = ordered_json::array();
  for (const auto& s : rows) {
    arr.push_back({{"method", to_string(s.method)},
                   {"kind", to_string(s.kind)},
                   {"k", s.k},
                   {"truth", s.truth},
                   {"mean", s.mean},
                   {"variance", s.variance},
                   {"mse", s.mse},
                   {"used", s.used},
                   {"zero_denominator_fraction", s.zero_denominator_fraction},
                   {"fallback_fraction", s.fallback_fraction}});
  }
  return arr.dump(2) + "\n";
}

std::string convergence_csv(const ConvergenceReport& report) {
  std::string out = join({"method", "fits", "alpha_median", "alpha_q1", "alpha_q3", "c_median", "c_q1", "c_q3"});
  for (const auto& s : report.summaries) {
    out += join({to_string(s.method), fmt(s.fits), fmt(s.alpha_median), fmt(s.alpha_q1), fmt(s.alpha_q3),
                 fmt(s.c_median), fmt(s.c_q1), fmt(s.c_q3)});
  }
  return out;
}

std::string convergence_samples_csv(const ConvergenceReport& report) {
  std::string out = join({"method", "trial", "alpha", "c", "points_used"});
  for (const auto& s : report.samples) {
    out += join({to_string(s.method), fmt(s.trial), fmt(s.alpha), fmt(s.c), std::to_string(s.points_used)});
  }
  return out;
}

std::string convergence_json(const ConvergenceReport& report) {
  ordered_json arr = ordered_json::array();
  for (const auto& s : report.summaries) {
    arr.push_back({{"method", to_string(s.method)},
                   {"fits", s.fits},
                   {"alpha_median", s.alpha_median},
                   {"alpha_q1", s.alpha_q1},
                   {"alpha_q3", s.alpha_q3},
                   {"c_median", s.c_median},
                   {"c_q1", s.c_q1},
                   {"c_q3", s.c_q3}});
  }
  return arr.dump(2) + "\n";
}

}  // namespace sketchcv
