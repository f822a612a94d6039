#pragma once

#include <span>
#include <vector>

namespace sketchcv {

/// Linear-interpolation quantile of sorted data (h = (n - 1) q).
double quantile_sorted(std::span<const double> sorted, double q);

struct BoxplotStats {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_lo = 0.0;  ///< smallest sample >= q1 - 1.5 IQR
  double whisker_hi = 0.0;  ///< largest sample <= q3 + 1.5 IQR
  double outlier_fraction = 0.0;
};

/// Tukey boxplot summary. Throws TooFewSamples below 4 samples.
BoxplotStats boxplot_stats(std::span<const double> samples);

struct ConvergenceFit {
  double alpha = 0.0;
  double log_c = 0.0;
  double r_squared = 0.0;
  int points_used = 0;
  bool valid = false;  ///< points_used >= 3
};

/// Least-squares fit of log|x_{n+1} - truth| against log|x_n - truth| pooled over
/// traces, using only pairs with both errors above 10 eps. Throws
/// InsufficientPoints unless some trace has at least 4 iterates.
ConvergenceFit convergence_fit(const std::vector<std::vector<double>>& traces, double truth, double eps);

/// Same, with a separate truth per trace.
ConvergenceFit convergence_fit(const std::vector<std::vector<double>>& traces,
                               const std::vector<double>& truths, double eps);

}  // namespace sketchcv
