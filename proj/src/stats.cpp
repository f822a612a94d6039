#include "sketchcv/stats.hpp"

#include <algorithm>
#include <cmath>

#include "sketchcv/error.hpp"

namespace sketchcv {

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::TooFewSamples, "quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BoxplotStats boxplot_stats(std::span<const double> samples) {
  if (samples.size() < 4) throw Error(ErrorCode::TooFewSamples, "boxplot needs at least 4 samples");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  BoxplotStats out;
  out.median = quantile_sorted(s, 0.5);
  out.q1 = quantile_sorted(s, 0.25);
  out.q3 = quantile_sorted(s, 0.75);
  const double iqr = out.q3 - out.q1;
  const double lo_fence = out.q1 - 1.5 * iqr;
  const double hi_fence = out.q3 + 1.5 * iqr;
  std::size_t outliers = 0;
  out.whisker_lo = out.q1;
  out.whisker_hi = out.q3;
  for (double v : s) {
    if (v < lo_fence || v > hi_fence) {
      ++outliers;
    } else {
      out.whisker_lo = std::min(out.whisker_lo, v);
      out.whisker_hi = std::max(out.whisker_hi, v);
    }
  }
  out.outlier_fraction = static_cast<double>(outliers) / static_cast<double>(s.size());
  return out;
}

ConvergenceFit convergence_fit(const std::vector<std::vector<double>>& traces, double truth, double eps) {
  return convergence_fit(traces, std::vector<double>(traces.size(), truth), eps);
}

ConvergenceFit convergence_fit(const std::vector<std::vector<double>>& traces,
                               const std::vector<double>& truths, double eps) {
  if (truths.size() != traces.size()) throw Error(ErrorCode::DimensionMismatch, "one truth per trace");
  const bool long_enough = std::any_of(traces.begin(), traces.end(), [](const auto& t) { return t.size() >= 4; });
  if (!long_enough) throw Error(ErrorCode::InsufficientPoints, "need a trace with at least 4 iterates");

  const double floor = 10.0 * eps;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int n = 0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto& t = traces[i];
    for (std::size_t j = 0; j + 1 < t.size(); ++j) {
      const double e0 = std::abs(t[j] - truths[i]);
      const double e1 = std::abs(t[j + 1] - truths[i]);
      if (!(e0 > floor) || !(e1 > floor)) continue;
      const double x = std::log(e0);
      const double y = std::log(e1);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      syy += y * y;
      ++n;
    }
  }
  ConvergenceFit fit;
  fit.points_used = n;
  if (n < 2) return fit;
  const double nd = n;
  const double vxx = sxx - sx * sx / nd;
  const double vxy = sxy - sx * sy / nd;
  const double vyy = syy - sy * sy / nd;
  if (!(vxx > 0.0)) return fit;
  fit.alpha = vxy / vxx;
  fit.log_c = (sy - fit.alpha * sx) / nd;
  fit.r_squared = vyy > 0.0 ? (vxy * vxy) / (vxx * vyy) : 1.0;
  fit.valid = n >= 3;
  return fit;
}

}  // namespace sketchcv
