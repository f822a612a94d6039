#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sketchcv/sketch.hpp"

namespace sketchcv {

/// Monic cubic x^3 + c2 x^2 + c1 x + c0.
struct CubicPoly {
  double c2 = 0.0;
  double c1 = 0.0;
  double c0 = 0.0;

  double operator()(double x) const noexcept { return ((x + c2) * x + c1) * x + c0; }
  double derivative(double x) const noexcept { return (3.0 * x + 2.0 * c2) * x + c1; }
  double discriminant() const noexcept;
};

struct RootClassification {
  int count = 1;             ///< 1 or 3 real roots
  double discriminant = 0.0;
  bool repeated = false;     ///< |discriminant| within 1e-12 of the coefficient scale
};

RootClassification classify_roots(const CubicPoly& cubic) noexcept;

/// Real roots in ascending order. Eigenvalues of the companion matrix,
/// polished by a few Newton steps in extended precision.
std::vector<double> real_roots(const CubicPoly& cubic);

/// Score equation of the bivariate-normal MLE:
/// x^3 - w3 x^2 + (n1 w2 + n2 w1 - n1 n2) x - n1 n2 w3.
CubicPoly mle_cubic(const SuffStats& stats, double n1, double n2);

struct SolverConfig {
  double eps = 1e-9;
  int max_iter = 100;
  double secant_lo = -0.05;  ///< offsets added to the baseline estimate
  double secant_hi = 0.05;

  /// eps = eps_rel sqrt(n1 n2), secant offsets -/+ offset_rel sqrt(n1 n2).
  static SolverConfig scaled(double n1, double n2, double eps_rel = 1e-9, int max_iter = 100,
                             double offset_rel = 0.05);
  void validate() const;
};

enum class Method { Baseline, MleNR, MleSecant, CvInit, CvEmp, CvEm };

inline constexpr Method kAllMethods[] = {Method::Baseline, Method::MleNR,  Method::MleSecant,
                                         Method::CvInit,   Method::CvEmp,  Method::CvEm};

const char* to_string(Method method) noexcept;
/// Accepts the names produced by to_string as well as the short CLI spellings
/// (baseline, nr, secant, cv-init, cv-emp, cv-em). Throws InvalidArgument.
Method parse_method(const std::string& name);

enum class SolverStatus { Converged, NotConverged, DerivativeVanished, SecantStall };

const char* to_string(SolverStatus status) noexcept;

struct EstimatorResult {
  double estimate = 0.0;
  int iterations = 0;          ///< number of updates performed
  bool converged = true;
  std::vector<double> trace;   ///< starting point(s) followed by every update
  Method method = Method::Baseline;
  SolverStatus status = SolverStatus::Converged;
  bool fell_back = false;      ///< CV-Emp returned the baseline (singular empirical covariance)
};

EstimatorResult baseline(const SuffStats& stats);

/// One control-variate update with weights evaluated at f.
double cv_update(const SuffStats& stats, double n1, double n2, double f) noexcept;

/// Fixed-point iteration f <- cv_update(f) from f = w3.
EstimatorResult cv_em(const SuffStats& stats, double n1, double n2, const SolverConfig& cfg);

EstimatorResult mle_newton(const CubicPoly& cubic, double x0, const SolverConfig& cfg);

EstimatorResult mle_secant(const CubicPoly& cubic, double x0, double x1, const SolverConfig& cfg);

/// Single update with the weights evaluated at the baseline; equals the first
/// CV-EM iterate.
EstimatorResult cv_init(const SuffStats& stats, double n1, double n2);

/// Weights from the per-slot sample covariances of the sketch. Requires k >= 3
/// (KTooSmall). Falls back to the baseline when the 2 x 2 sample covariance is
/// singular.
EstimatorResult cv_emp(const SketchPair& pair);

}  // namespace sketchcv
