#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sketchcv/inner_product.hpp"
#include "sketchcv/stats.hpp"
#include "sketchcv/trace.hpp"

namespace sketchcv {

/// Number of worker threads: requested if positive, otherwise the hardware
/// concurrency (at least 1).
unsigned resolve_threads(unsigned requested) noexcept;

/// Runs body(i) for i in [0, n) on up to `threads` workers. Work items must
/// write only to their own slot; the first exception thrown is rethrown.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

/// Scale-free solver settings; absolute tolerances are derived per vector pair
/// from sqrt(n1 n2).
struct SolverSettings {
  double eps_rel = 1e-9;
  int max_iter = 100;
  double secant_offset_rel = 0.05;
};

struct ExperimentConfig {
  Index d = 1000;
  std::vector<double> ratios{1.0};
  std::vector<double> angles{0.26179938779914941};  // pi / 12
  std::vector<std::size_t> k_values{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  std::size_t trials = 2000;
  std::uint64_t base_seed = 42;
  Scheme scheme = Scheme::FeatureHash;
  SolverSettings solver;
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  unsigned threads = 0;
  bool keep_samples = false;  ///< retain per-trial estimates, iteration counts and convergence flags

  void validate() const;
};

struct SummaryStats {
  Scheme scheme = Scheme::FeatureHash;
  Method method = Method::Baseline;
  std::size_t k = 0;
  double r = 0.0;
  double theta = 0.0;
  double truth = 0.0;
  double mse = 0.0;
  double mean = 0.0;
  double variance = 0.0;  ///< population variance of the estimates, so mse = variance + bias^2
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_lo = 0.0;
  double whisker_hi = 0.0;
  double outlier_fraction = 0.0;
  double mean_iterations = 0.0;
  double median_iterations = 0.0;
  double nonconverged_fraction = 0.0;
  double three_root_fraction = 0.0;
  std::vector<double> estimates;  ///< only with keep_samples
  std::vector<int> iterations;    ///< only with keep_samples
  std::vector<char> converged;    ///< only with keep_samples
};

/// One row per (r, theta, k, method), in that nesting order.
std::vector<SummaryStats> run_inner_product(const ExperimentConfig& config);

/// The vector pair used for the `angle_index`-th angle at norm ratio r;
/// exposed so tests can reproduce a cell's ground truth. Every r shares the
/// directions of its angle.
std::pair<Vector, Vector> cell_vector_pair(const ExperimentConfig& config, std::size_t angle_index, double r,
                                           double theta);

struct ConvergenceConfig {
  Index d = 1000;
  double r = 1.0;
  double theta = 0.26179938779914941;
  std::size_t k = 100;
  std::size_t trials = 2000;
  std::uint64_t base_seed = 42;
  Scheme scheme = Scheme::FeatureHash;
  /// Tight tolerance so that traces run deep enough to expose the order.
  double eps_rel = 1e-13;
  int max_iter = 100;
  double secant_offset_rel = 0.05;
  unsigned threads = 0;

  void validate() const;
};

struct ConvergenceSample {
  Method method = Method::MleNR;
  std::size_t trial = 0;
  double alpha = 0.0;
  double c = 0.0;
  int points_used = 0;
};

struct ConvergenceSummary {
  Method method = Method::MleNR;
  std::size_t fits = 0;  ///< valid per-trace fits
  double alpha_median = 0.0;
  double alpha_q1 = 0.0;
  double alpha_q3 = 0.0;
  double c_median = 0.0;
  double c_q1 = 0.0;
  double c_q3 = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergenceSample> samples;     ///< valid fits, trial order within method
  std::vector<ConvergenceSummary> summaries;  ///< MleNR, MleSecant, CvEm
};

/// Per-trace fits of log e_{n+1} against log e_n. Iterates are divided by
/// sqrt(n1 n2) before fitting, so C is comparable across pairs; the reference
/// root is the real cubic root nearest each run's final iterate.
ConvergenceReport run_convergence(const ConvergenceConfig& config);

struct TraceConfig {
  Matrix m;
  Vector b_diag;  ///< empty means B = I
  ProbeKind kind = ProbeKind::Gaussian;
  std::vector<std::size_t> k_values{100};
  std::size_t trials = 1000;
  std::uint64_t base_seed = 42;
  std::vector<TraceMethod> methods{TraceMethod::Hutchinson, TraceMethod::AdamsCv, TraceMethod::AdamsCvEmp,
                                   TraceMethod::DiagCv, TraceMethod::Bekas};
  unsigned threads = 0;
  bool keep_samples = false;

  void validate() const;
};

struct TraceSummary {
  TraceMethod method = TraceMethod::Hutchinson;
  ProbeKind kind = ProbeKind::Gaussian;
  std::size_t k = 0;
  double truth = 0.0;
  double mean = 0.0;
  double variance = 0.0;  ///< sample variance (n - 1)
  double mse = 0.0;
  std::size_t used = 0;
  double zero_denominator_fraction = 0.0;
  double fallback_fraction = 0.0;
  std::vector<double> values;  ///< only with keep_samples; NaN marks excluded runs
};

/// Every method sees the same probe batch in a given trial.
std::vector<TraceSummary> run_trace(const TraceConfig& config);

struct TimingRatio {
  std::size_t k = 0;
  double cvem_over_nr_mean = 0.0;
  double cvem_over_nr_2sd = 0.0;
  double cvem_over_secant_mean = 0.0;
  double cvem_over_secant_2sd = 0.0;
};

/// Wall-clock ratios per trial for the first (r, theta) cell. Informational.
std::vector<TimingRatio> timing_ratios(const ExperimentConfig& config, int repeats = 20);

}  // namespace sketchcv
