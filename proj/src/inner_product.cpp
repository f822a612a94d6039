#include "sketchcv/inner_product.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>

#include "sketchcv/error.hpp"

namespace sketchcv {
namespace {

constexpr double kDerivativeFloor = 1e-300;

void check_norms(double n1, double n2) {
  if (!(n1 > 0.0) || !(n2 > 0.0) || !std::isfinite(n1) || !std::isfinite(n2)) {
    throw Error(ErrorCode::InvalidArgument, "squared norms must be finite and positive");
  }
}

long double eval_ld(const CubicPoly& c, long double x) {
  return ((x + c.c2) * x + c.c1) * x + c.c0;
}

long double deriv_ld(const CubicPoly& c, long double x) {
  return (3.0L * x + 2.0L * c.c2) * x + c.c1;
}

double polish(const CubicPoly& c, double x) {
  long double r = x;
  for (int i = 0; i < 8; ++i) {
    const long double dp = deriv_ld(c, r);
    if (dp == 0.0L) break;
    const long double next = r - eval_ld(c, r) / dp;
    if (!std::isfinite(static_cast<double>(next))) break;
    // Keep the step only if it does not make the residual worse.
    if (std::abs(eval_ld(c, next)) > std::abs(eval_ld(c, r))) break;
    r = next;
  }
  return static_cast<double>(r);
}

EstimatorResult finish(EstimatorResult r, SolverStatus status) {
  r.status = status;
  r.converged = status == SolverStatus::Converged;
  r.estimate = r.trace.back();
  r.iterations = static_cast<int>(r.trace.size()) - (r.method == Method::MleSecant ? 2 : 1);
  return r;
}

}  // namespace

double CubicPoly::discriminant() const noexcept {
  return 18.0 * c2 * c1 * c0 - 4.0 * c2 * c2 * c2 * c0 + c2 * c2 * c1 * c1 - 4.0 * c1 * c1 * c1 -
         27.0 * c0 * c0;
}

RootClassification classify_roots(const CubicPoly& cubic) noexcept {
  RootClassification out;
  out.discriminant = cubic.discriminant();
  const double s = std::max({std::abs(cubic.c2), std::sqrt(std::abs(cubic.c1)), std::cbrt(std::abs(cubic.c0))});
  const double s6 = s * s * s * s * s * s;
  if (std::abs(out.discriminant) <= 1e-12 * s6) {
    out.count = 3;
    out.repeated = true;
  } else {
    out.count = out.discriminant > 0.0 ? 3 : 1;
  }
  return out;
}

std::vector<double> real_roots(const CubicPoly& cubic) {
  Eigen::Matrix3d companion;
  companion << 0.0, 0.0, -cubic.c0,
               1.0, 0.0, -cubic.c1,
               0.0, 1.0, -cubic.c2;
  const Eigen::EigenSolver<Eigen::Matrix3d> es(companion, false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularSystem, "companion eigenvalue computation failed");
  }
  const auto ev = es.eigenvalues();
  std::vector<double> roots;
  if (classify_roots(cubic).count == 3) {
    for (Index i = 0; i < 3; ++i) roots.push_back(polish(cubic, ev(i).real()));
  } else {
    Index best = 0;
    for (Index i = 1; i < 3; ++i) {
      if (std::abs(ev(i).imag()) < std::abs(ev(best).imag())) best = i;
    }
    roots.push_back(polish(cubic, ev(best).real()));
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

CubicPoly mle_cubic(const SuffStats& stats, double n1, double n2) {
  check_norms(n1, n2);
  return {-stats.w3, n1 * stats.w2 + n2 * stats.w1 - n1 * n2, -n1 * n2 * stats.w3};
}

SolverConfig SolverConfig::scaled(double n1, double n2, double eps_rel, int max_iter, double offset_rel) {
  check_norms(n1, n2);
  const double scale = std::sqrt(n1 * n2);
  SolverConfig cfg;
  cfg.eps = eps_rel * scale;
  cfg.max_iter = max_iter;
  cfg.secant_lo = -offset_rel * scale;
  cfg.secant_hi = offset_rel * scale;
  cfg.validate();
  return cfg;
}

void SolverConfig::validate() const {
  if (!(eps > 0.0) || max_iter < 1 || !(secant_lo != secant_hi)) {
    throw Error(ErrorCode::InvalidArgument, "solver config needs eps > 0, max_iter >= 1, distinct secant offsets");
  }
}

const char* to_string(Method method) noexcept {
  switch (method) {
    case Method::Baseline: return "Baseline";
    case Method::MleNR: return "MleNR";
    case Method::MleSecant: return "MleSecant";
    case Method::CvInit: return "CvInit";
    case Method::CvEmp: return "CvEmp";
    case Method::CvEm: return "CvEm";
  }
  return "Unknown";
}

Method parse_method(const std::string& name) {
  std::string s;
  for (char ch : name) {
    if (ch != '-' && ch != '_') s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  if (s == "baseline") return Method::Baseline;
  if (s == "nr" || s == "mlenr" || s == "newton") return Method::MleNR;
  if (s == "secant" || s == "mlesecant") return Method::MleSecant;
  if (s == "cvinit") return Method::CvInit;
  if (s == "cvemp") return Method::CvEmp;
  if (s == "cvem") return Method::CvEm;
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + name + "'");
}

const char* to_string(SolverStatus status) noexcept {
  switch (status) {
    case SolverStatus::Converged: return "Converged";
    case SolverStatus::NotConverged: return "NotConverged";
    case SolverStatus::DerivativeVanished: return "DerivativeVanished";
    case SolverStatus::SecantStall: return "SecantStall";
  }
  return "Unknown";
}

EstimatorResult baseline(const SuffStats& stats) {
  EstimatorResult r;
  r.method = Method::Baseline;
  r.estimate = stats.w3;
  r.trace = {stats.w3};
  return r;
}

double cv_update(const SuffStats& stats, double n1, double n2, double f) noexcept {
  const double denom = f * f + n1 * n2;
  const double c1 = -f * n2 / denom;
  const double c2 = -f * n1 / denom;
  return stats.w3 + c1 * (stats.w1 - n1) + c2 * (stats.w2 - n2);
}

EstimatorResult cv_em(const SuffStats& stats, double n1, double n2, const SolverConfig& cfg) {
  check_norms(n1, n2);
  cfg.validate();
  EstimatorResult r;
  r.method = Method::CvEm;
  r.trace.reserve(8);
  double f = stats.w3;
  r.trace.push_back(f);
  for (int it = 0; it < cfg.max_iter; ++it) {
    const double next = cv_update(stats, n1, n2, f);
    r.trace.push_back(next);
    if (std::abs(next - f) <= cfg.eps) return finish(std::move(r), SolverStatus::Converged);
    f = next;
  }
  return finish(std::move(r), SolverStatus::NotConverged);
}

EstimatorResult mle_newton(const CubicPoly& cubic, double x0, const SolverConfig& cfg) {
  cfg.validate();
  EstimatorResult r;
  r.method = Method::MleNR;
  r.trace.reserve(8);
  double x = x0;
  r.trace.push_back(x);
  for (int it = 0; it < cfg.max_iter; ++it) {
    const double dp = cubic.derivative(x);
    if (std::abs(dp) < kDerivativeFloor) return finish(std::move(r), SolverStatus::DerivativeVanished);
    const double next = x - cubic(x) / dp;
    r.trace.push_back(next);
    if (std::abs(next - x) <= cfg.eps) return finish(std::move(r), SolverStatus::Converged);
    x = next;
  }
  return finish(std::move(r), SolverStatus::NotConverged);
}

EstimatorResult mle_secant(const CubicPoly& cubic, double x0, double x1, const SolverConfig& cfg) {
  cfg.validate();
  if (!(x0 != x1)) throw Error(ErrorCode::InvalidArgument, "secant needs two distinct starting points");
  EstimatorResult r;
  r.method = Method::MleSecant;
  r.trace.reserve(10);
  r.trace.push_back(x0);
  r.trace.push_back(x1);
  double f0 = cubic(x0);
  double f1 = cubic(x1);
  for (int it = 0; it < cfg.max_iter; ++it) {
    if (f1 == f0) return finish(std::move(r), SolverStatus::SecantStall);
    const double next = x1 - f1 * (x1 - x0) / (f1 - f0);
    r.trace.push_back(next);
    if (std::abs(next - x1) <= cfg.eps) return finish(std::move(r), SolverStatus::Converged);
    x0 = x1;
    f0 = f1;
    x1 = next;
    f1 = cubic(x1);
  }
  return finish(std::move(r), SolverStatus::NotConverged);
}

EstimatorResult cv_init(const SuffStats& stats, double n1, double n2) {
  check_norms(n1, n2);
  EstimatorResult r;
  r.method = Method::CvInit;
  r.estimate = cv_update(stats, n1, n2, stats.w3);
  r.iterations = 1;
  r.trace = {stats.w3, r.estimate};
  return r;
}

EstimatorResult cv_emp(const SketchPair& pair) {
  pair.validate();
  const Index k = pair.vi.size();
  if (k < 3) throw Error(ErrorCode::KTooSmall, "empirical weights need k >= 3");
  const SuffStats stats = suff_stats(pair);
  const double n1 = pair.norm_i_sq;
  const double n2 = pair.norm_j_sq;

  const Vector a = pair.vi.array().square();
  const Vector b = pair.vj.array().square();
  const Vector g = pair.vi.cwiseProduct(pair.vj);
  const double kd = static_cast<double>(k);
  const Vector ac = a.array() - a.mean();
  const Vector bc = b.array() - b.mean();
  const Vector gc = g.array() - g.mean();
  const double waa = ac.squaredNorm() / (kd - 1.0);
  const double wbb = bc.squaredNorm() / (kd - 1.0);
  const double wab = ac.dot(bc) / (kd - 1.0);
  const double dga = gc.dot(ac) / (kd - 1.0);
  const double dgb = gc.dot(bc) / (kd - 1.0);

  EstimatorResult r;
  r.method = Method::CvEmp;
  r.iterations = 1;
  const double det = waa * wbb - wab * wab;
  if (!(waa > 0.0) || !(wbb > 0.0) || det <= 1e-12 * waa * wbb) {
    r.estimate = stats.w3;
    r.fell_back = true;
  } else {
    const double c1 = -(wbb * dga - wab * dgb) / det;
    const double c2 = -(waa * dgb - wab * dga) / det;
    r.estimate = stats.w3 + c1 * (stats.w1 - n1) + c2 * (stats.w2 - n2);
  }
  r.trace = {stats.w3, r.estimate};
  return r;
}

}  // namespace sketchcv
