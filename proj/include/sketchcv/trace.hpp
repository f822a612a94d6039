#pragma once

#include <string>
#include <variant>
#include <vector>

#include "sketchcv/efamily.hpp"
#include "sketchcv/rng.hpp"

namespace sketchcv {

enum class ProbeKind { Gaussian, Rademacher };

const char* to_string(ProbeKind kind) noexcept;

/// Symmetric M (1e-12 relative, element-wise) with a diagonal control
/// matrix B, stored as its diagonal; every b_ss must be nonzero.
class TraceProblem {
 public:
  TraceProblem(Matrix m, Vector b_diag);

  const Matrix& m() const noexcept { return m_; }
  const Vector& b_diag() const noexcept { return b_; }
  Index d() const noexcept { return m_.rows(); }

 private:
  Matrix m_;
  Vector b_;
};

/// k probes of length d, stored as the columns of r.
struct ProbeBatch {
  Matrix r;
  ProbeKind kind = ProbeKind::Gaussian;

  Index k() const noexcept { return r.cols(); }
  Index d() const noexcept { return r.rows(); }

  /// Probe i is filled from rng.derive(i), so a batch can be generated in any
  /// order with the same result.
  static ProbeBatch draw(const SeededRng& rng, Index d, Index k, ProbeKind kind);
};

enum class TraceMethod { Hutchinson, AdamsCv, AdamsCvEmp, DiagCv, Bekas };

const char* to_string(TraceMethod method) noexcept;
/// Accepts hutchinson, adams, adams-emp, diag-cv, bekas (and the to_string names).
TraceMethod parse_trace_method(const std::string& name);

struct TraceEstimate {
  double value = 0.0;
  /// Per-probe values for Hutchinson, Adams and DiagCv (value is their mean);
  /// per-slot diagonal estimates for Bekas (value is their sum).
  std::vector<double> per_probe;
  TraceMethod method = TraceMethod::Hutchinson;
  double c = 0.0;          ///< control weight used by the Adams estimators
  bool fell_back = false;  ///< empirical Adams weight undefined; Hutchinson returned
};

struct AdamsTheoretical {
  double tr_mb = 0.0;
};
struct AdamsEmpirical {};
using AdamsMode = std::variant<AdamsTheoretical, AdamsEmpirical>;

TraceEstimate hutchinson(const TraceProblem& problem, const ProbeBatch& probes);

/// Z = mean(r^T M r) + c (mean(r^T B r) - tr B). Theoretical: c = -tr(MB)/tr(B^2).
/// Empirical: c = -cov(r^T M r, r^T B r) / var(r^T B r) from the batch (k >= 2).
TraceEstimate adams_cv(const TraceProblem& problem, const ProbeBatch& probes, const AdamsMode& mode);

/// One control variate per slot, r_s (B r)_s, with c_s = -m_ss / b_ss.
TraceEstimate diag_cv(const TraceProblem& problem, const ProbeBatch& probes, const Vector& m_diag_known);

/// m_ss estimated by b_ss sum_i r_is (M r_i)_s / sum_i r_is (B r_i)_s.
/// Throws ZeroDenominatorError when a slot's denominator is below 1e-300 in magnitude.
Vector bekas_diag(const TraceProblem& problem, const ProbeBatch& probes);

/// Sum of bekas_diag in slot order.
TraceEstimate bekas(const TraceProblem& problem, const ProbeBatch& probes);

/// Closed-form variances for k probes of the given kind. With x_s = r_s (B r)_s
/// and y_s = r_s (M r)_s, the slot covariances are
///   Gaussian:    cov(x_s, x_t) = delta_st |b_s|^2 + b_st b_ts
///                cov(y_s, x_t) = delta_st sum_u m_su b_su + m_st b_ts
///   Rademacher:  the same minus 2 delta_st b_ss^2 and 2 delta_st m_ss b_ss.
struct TraceVarianceOracles {
  double hutchinson = 0.0;
  double adams_reduction = 0.0;
  double adams = 0.0;
  double diag_cv_reduction_verbatim = 0.0;  ///< 2 sum m_ss^2, without 1/k
  double diag_cv_reduction = 0.0;           ///< per-k reduction, matches measurement
  double diag_cv = 0.0;
  double bekas = 0.0;                       ///< first-order (delta method) variance
  Matrix cov_xx;                            ///< single-probe cov(x_s, x_t)
  Matrix cov_yx;                            ///< single-probe cov(y_s, x_t)
};

TraceVarianceOracles trace_variance_oracles(const Matrix& m, const Vector& b_diag, ProbeKind kind, Index k);

}  // namespace sketchcv
