#pragma once

#include <Eigen/Dense>
#include <vector>

namespace sketchcv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Covariance of the sufficient statistics of an exponential family for a
/// single observation, partitioned so that the first t statistics belong to
/// the estimated parameters and the remaining p - t to the known ones:
///
///     v = [ A   B ]      A: t x t,  B: t x (p - t),  D: (p - t) x (p - t)
///         [ B^T D ]
///
/// n is the number of observations; variances of the estimators scale as 1/n.
/// Construction validates symmetry (1e-12 relative, element-wise), positive
/// definiteness (Cholesky succeeds) and 1 <= t < p.
class CovarianceModel {
 public:
  CovarianceModel(Matrix v, Index t, Index n);

  const Matrix& v() const noexcept { return v_; }
  Index p() const noexcept { return v_.rows(); }
  Index t() const noexcept { return t_; }
  Index n() const noexcept { return n_; }

 private:
  Matrix v_;
  Index t_;
  Index n_;
};

struct Partition {
  Matrix a;
  Matrix b;
  Matrix d;
};

/// Optimal control-variate corrections for the target combination alpha^T y_E.
struct CvWeights {
  Vector c;  ///< solves D c = -d
  Vector d;  ///< cross-covariance B^T alpha of the target with the known statistics
};

struct BivariateNormalParams {
  double sigma11 = 1.0;
  double sigma22 = 1.0;
  double sigma12 = 0.0;

  /// Throws InvalidParams unless the 2x2 covariance is positive definite.
  void validate() const;
};

Partition partition(const CovarianceModel& model);

CvWeights cv_weights(const CovarianceModel& model, const Vector& alpha);

/// (1/n) alpha^T (A - B D^{-1} B^T) alpha.
double cve_variance(const CovarianceModel& model, const Vector& alpha);

/// (1/n) alpha^T W^{-1} alpha with W the leading t x t block of v^{-1}.
double mle_variance(const CovarianceModel& model, const Vector& alpha);

/// Transformed statistics y' = a^{-1} y: covariance a^{-1} v a^{-T}, same t and n.
/// Throws SingularMatrix if a is numerically singular (condition number >= 1e12).
CovarianceModel reparametrize(const CovarianceModel& model, const Matrix& a);

/// Same covariance with statistics reordered: new statistic i is old statistic
/// order[i]. The new partition index is t.
CovarianceModel reorder(const CovarianceModel& model, const std::vector<Index>& order, Index t);

/// 3x3 covariance of (mean x1^2, mean x2^2, mean x1 x2) for a zero-mean
/// bivariate normal, in that order, with n = k observations. The partition
/// index defaults to 2, i.e. (y1, y2 | y3).
CovarianceModel bivariate_normal_cov(const BivariateNormalParams& params, Index k, Index t = 2);

/// Model for estimating sigma12 with sigma11, sigma22 known: statistics ordered
/// (y3, y1, y2) with t = 1.
CovarianceModel bivariate_sigma12_model(const BivariateNormalParams& params, Index k);

/// Closed form of the sigma12 estimator's variance,
/// (s11 s22 - s12^2)^2 / (n (s11 s22 + s12^2)).
double bivariate_sigma12_variance(const BivariateNormalParams& params, Index n);

}  // namespace sketchcv
