#include "sketchcv/efamily.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "sketchcv/error.hpp"

namespace sketchcv {
namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kMaxCondition = 1e12;

void check_symmetric(const Matrix& v) {
  for (Index i = 0; i < v.rows(); ++i) {
    for (Index j = i + 1; j < v.cols(); ++j) {
      const double scale = std::max(std::abs(v(i, j)), std::abs(v(j, i)));
      if (std::abs(v(i, j) - v(j, i)) > kSymmetryTol * scale) {
        std::ostringstream os;
        os << "covariance not symmetric at (" << i << ", " << j << ")";
        throw Error(ErrorCode::InvalidArgument, os.str());
      }
    }
  }
}

Eigen::LLT<Matrix> factor_d(const Matrix& d) {
  Eigen::LLT<Matrix> llt(d);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularSystem, "known-parameter block is not positive definite");
  }
  return llt;
}

void check_alpha(const CovarianceModel& model, const Vector& alpha) {
  if (alpha.size() != model.t()) {
    throw Error(ErrorCode::DimensionMismatch, "alpha must have length t");
  }
  if (!alpha.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "alpha must be finite");
  }
}

}  // namespace

CovarianceModel::CovarianceModel(Matrix v, Index t, Index n) : v_(std::move(v)), t_(t), n_(n) {
  if (v_.rows() != v_.cols() || v_.rows() < 2) {
    throw Error(ErrorCode::DimensionMismatch, "covariance must be square with p >= 2");
  }
  if (t_ < 1 || t_ >= v_.rows()) {
    throw Error(ErrorCode::InvalidArgument, "partition index must satisfy 1 <= t < p");
  }
  if (n_ < 1) {
    throw Error(ErrorCode::InvalidArgument, "observation count must be positive");
  }
  if (!v_.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "covariance must be finite");
  }
  check_symmetric(v_);
  if (Eigen::LLT<Matrix>(v_).info() != Eigen::Success) {
    throw Error(ErrorCode::InvalidArgument, "covariance is not positive definite");
  }
}

void BivariateNormalParams::validate() const {
  if (!(sigma11 > 0.0) || !(sigma22 > 0.0) || !(sigma11 * sigma22 - sigma12 * sigma12 > 0.0)) {
    throw Error(ErrorCode::InvalidParams, "bivariate normal covariance must be positive definite");
  }
}

Partition partition(const CovarianceModel& model) {
  const Index t = model.t();
  const Index q = model.p() - t;
  const Matrix& v = model.v();
  return {v.topLeftCorner(t, t), v.topRightCorner(t, q), v.bottomRightCorner(q, q)};
}

CvWeights cv_weights(const CovarianceModel& model, const Vector& alpha) {
  check_alpha(model, alpha);
  const Partition part = partition(model);
  CvWeights w;
  w.d = part.b.transpose() * alpha;
  w.c = -factor_d(part.d).solve(w.d);
  return w;
}

double cve_variance(const CovarianceModel& model, const Vector& alpha) {
  check_alpha(model, alpha);
  const Partition part = partition(model);
  const Vector d = part.b.transpose() * alpha;
  const Vector dinv_d = factor_d(part.d).solve(d);
  const double base = alpha.dot(part.a * alpha);
  return (base - d.dot(dinv_d)) / static_cast<double>(model.n());
}

double mle_variance(const CovarianceModel& model, const Vector& alpha) {
  check_alpha(model, alpha);
  const Index t = model.t();
  const Index p = model.p();
  Eigen::LLT<Matrix> llt(model.v());
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularSystem, "covariance factorization failed");
  }
  // Leading t columns of v^{-1}, then its leading block.
  const Matrix w = llt.solve(Matrix::Identity(p, t)).topRows(t);
  Eigen::LLT<Matrix> w_llt(w);
  if (w_llt.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularSystem, "information block is not positive definite");
  }
  return alpha.dot(w_llt.solve(alpha)) / static_cast<double>(model.n());
}

CovarianceModel reparametrize(const CovarianceModel& model, const Matrix& a) {
  const Index p = model.p();
  if (a.rows() != p || a.cols() != p) {
    throw Error(ErrorCode::DimensionMismatch, "transformation must be p x p");
  }
  if (!a.allFinite()) {
    throw Error(ErrorCode::SingularMatrix, "transformation is not finite");
  }
  const Eigen::JacobiSVD<Matrix> svd(a);
  const auto& sv = svd.singularValues();
  if (!(sv(p - 1) > 0.0) || sv(0) / sv(p - 1) >= kMaxCondition) {
    throw Error(ErrorCode::SingularMatrix, "transformation is numerically singular");
  }
  const Eigen::PartialPivLU<Matrix> lu(a);
  const Matrix left = lu.solve(model.v());                   // a^{-1} v
  Matrix out = lu.solve(left.transpose()).transpose();      // a^{-1} v a^{-T}
  out = 0.5 * (out + out.transpose()).eval();
  return CovarianceModel(std::move(out), model.t(), model.n());
}

CovarianceModel reorder(const CovarianceModel& model, const std::vector<Index>& order, Index t) {
  const Index p = model.p();
  if (static_cast<Index>(order.size()) != p) {
    throw Error(ErrorCode::DimensionMismatch, "order must list every statistic");
  }
  std::vector<bool> seen(static_cast<std::size_t>(p), false);
  for (Index o : order) {
    if (o < 0 || o >= p || seen[static_cast<std::size_t>(o)]) {
      throw Error(ErrorCode::InvalidArgument, "order must be a permutation");
    }
    seen[static_cast<std::size_t>(o)] = true;
  }
  Matrix out(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) out(i, j) = model.v()(order[i], order[j]);
  }
  return CovarianceModel(std::move(out), t, model.n());
}

CovarianceModel bivariate_normal_cov(const BivariateNormalParams& params, Index k, Index t) {
  params.validate();
  const double s11 = params.sigma11;
  const double s22 = params.sigma22;
  const double s12 = params.sigma12;
  Matrix v(3, 3);
  v << 2 * s11 * s11, 2 * s12 * s12, 2 * s11 * s12,
       2 * s12 * s12, 2 * s22 * s22, 2 * s22 * s12,
       2 * s11 * s12, 2 * s22 * s12, s11 * s22 + s12 * s12;
  return CovarianceModel(std::move(v), t, k);
}

CovarianceModel bivariate_sigma12_model(const BivariateNormalParams& params, Index k) {
  return reorder(bivariate_normal_cov(params, k), {2, 0, 1}, 1);
}

double bivariate_sigma12_variance(const BivariateNormalParams& params, Index n) {
  params.validate();
  const double prod = params.sigma11 * params.sigma22;
  const double s12sq = params.sigma12 * params.sigma12;
  return (prod - s12sq) * (prod - s12sq) / (static_cast<double>(n) * (prod + s12sq));
}

}  // namespace sketchcv
