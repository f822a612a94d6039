#include "sketchcv/trace.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include "sketchcv/error.hpp"

namespace sketchcv {
namespace {

constexpr double kZeroDenominator = 1e-300;

void check_probes(const TraceProblem& problem, const ProbeBatch& probes) {
  if (probes.d() != problem.d()) {
    throw Error(ErrorCode::DimensionMismatch, "probe length does not match the matrix dimension");
  }
  if (probes.k() < 1) throw Error(ErrorCode::InvalidArgument, "at least one probe is required");
}

// Quadratic forms r_i^T M r_i and r_i^T B r_i for every probe.
void quadratic_forms(const TraceProblem& problem, const ProbeBatch& probes, Vector& y, Vector& x) {
  const Matrix mr = problem.m() * probes.r;
  y = (probes.r.array() * mr.array()).colwise().sum().transpose();
  x = (probes.r.array().square().colwise() * problem.b_diag().array()).colwise().sum().transpose();
}

TraceEstimate from_per_probe(const Vector& z, TraceMethod method) {
  TraceEstimate est;
  est.method = method;
  est.per_probe.assign(z.data(), z.data() + z.size());
  double sum = 0.0;
  for (double v : est.per_probe) sum += v;
  est.value = sum / static_cast<double>(z.size());
  return est;
}

}  // namespace

const char* to_string(ProbeKind kind) noexcept {
  switch (kind) {
    case ProbeKind::Gaussian: return "gaussian";
    case ProbeKind::Rademacher: return "rademacher";
  }
  return "unknown";
}

const char* to_string(TraceMethod method) noexcept {
  switch (method) {
    case TraceMethod::Hutchinson: return "Hutchinson";
    case TraceMethod::AdamsCv: return "AdamsCv";
    case TraceMethod::AdamsCvEmp: return "AdamsCvEmp";
    case TraceMethod::DiagCv: return "DiagCv";
    case TraceMethod::Bekas: return "Bekas";
  }
  return "Unknown";
}

TraceMethod parse_trace_method(const std::string& name) {
  std::string s;
  for (char ch : name) {
    if (ch != '-' && ch != '_') s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  if (s == "hutchinson") return TraceMethod::Hutchinson;
  if (s == "adams" || s == "adamscv") return TraceMethod::AdamsCv;
  if (s == "adamsemp" || s == "adamscvemp") return TraceMethod::AdamsCvEmp;
  if (s == "diagcv") return TraceMethod::DiagCv;
  if (s == "bekas") return TraceMethod::Bekas;
  throw Error(ErrorCode::InvalidArgument, "unknown trace method '" + name + "'");
}

TraceProblem::TraceProblem(Matrix m, Vector b_diag) : m_(std::move(m)), b_(std::move(b_diag)) {
  if (m_.rows() != m_.cols() || m_.rows() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "M must be square and non-empty");
  }
  if (b_.size() != m_.rows()) throw Error(ErrorCode::DimensionMismatch, "B must match the dimension of M");
  for (Index i = 0; i < m_.rows(); ++i) {
    for (Index j = i + 1; j < m_.cols(); ++j) {
      const double scale = std::max(std::abs(m_(i, j)), std::abs(m_(j, i)));
      if (std::abs(m_(i, j) - m_(j, i)) > 1e-12 * scale) {
        std::ostringstream os;
        os << "M is not symmetric at (" << i << ", " << j << ")";
        throw Error(ErrorCode::InvalidArgument, os.str());
      }
    }
  }
  for (Index s = 0; s < b_.size(); ++s) {
    if (!(std::abs(b_(s)) > 0.0) || !std::isfinite(b_(s))) {
      throw Error(ErrorCode::InvalidArgument, "diagonal of B must be finite and nonzero");
    }
  }
}

ProbeBatch ProbeBatch::draw(const SeededRng& rng, Index d, Index k, ProbeKind kind) {
  if (d < 1 || k < 1) throw Error(ErrorCode::InvalidArgument, "probe batch must be at least 1 x 1");
  ProbeBatch batch;
  batch.kind = kind;
  batch.r.resize(d, k);
  for (Index i = 0; i < k; ++i) {
    SeededRng prng = rng.derive(static_cast<std::uint64_t>(i));
    for (Index s = 0; s < d; ++s) {
      batch.r(s, i) = kind == ProbeKind::Gaussian ? prng.normal() : prng.rademacher();
    }
  }
  return batch;
}

TraceEstimate hutchinson(const TraceProblem& problem, const ProbeBatch& probes) {
  check_probes(problem, probes);
  Vector y, x;
  quadratic_forms(problem, probes, y, x);
  return from_per_probe(y, TraceMethod::Hutchinson);
}

TraceEstimate adams_cv(const TraceProblem& problem, const ProbeBatch& probes, const AdamsMode& mode) {
  check_probes(problem, probes);
  Vector y, x;
  quadratic_forms(problem, probes, y, x);
  const double tr_b = problem.b_diag().sum();
  double c = 0.0;
  bool fell_back = false;
  TraceMethod method = TraceMethod::AdamsCv;
  if (const auto* th = std::get_if<AdamsTheoretical>(&mode)) {
    c = -th->tr_mb / problem.b_diag().squaredNorm();
  } else {
    method = TraceMethod::AdamsCvEmp;
    const Index k = probes.k();
    if (k < 2) throw Error(ErrorCode::KTooSmall, "empirical weight needs at least 2 probes");
    const Vector yc = y.array() - y.mean();
    const Vector xc = x.array() - x.mean();
    const double var_x = xc.squaredNorm() / static_cast<double>(k - 1);
    if (var_x < 1e-300) {
      fell_back = true;
    } else {
      c = -(yc.dot(xc) / static_cast<double>(k - 1)) / var_x;
    }
  }
  const Vector z = y.array() + c * (x.array() - tr_b);
  TraceEstimate est = from_per_probe(z, method);
  est.c = c;
  est.fell_back = fell_back;
  return est;
}

TraceEstimate diag_cv(const TraceProblem& problem, const ProbeBatch& probes, const Vector& m_diag_known) {
  check_probes(problem, probes);
  if (m_diag_known.size() != problem.d()) {
    throw Error(ErrorCode::DimensionMismatch, "known diagonal must have length d");
  }
  Vector y, x;
  quadratic_forms(problem, probes, y, x);
  const Vector& b = problem.b_diag();
  const Vector c = -m_diag_known.cwiseQuotient(b);
  // Per probe: y_i + sum_s c_s (r_is^2 b_ss - b_ss).
  const Matrix slot = (probes.r.array().square() - 1.0).colwise() * b.array();
  const Vector z = y + slot.transpose() * c;
  return from_per_probe(z, TraceMethod::DiagCv);
}

Vector bekas_diag(const TraceProblem& problem, const ProbeBatch& probes) {
  check_probes(problem, probes);
  const Matrix mr = problem.m() * probes.r;
  const Vector num = (probes.r.array() * mr.array()).rowwise().sum();
  const Vector sq = probes.r.array().square().rowwise().sum();
  const Vector& b = problem.b_diag();
  Vector out(problem.d());
  for (Index s = 0; s < problem.d(); ++s) {
    const double den = b(s) * sq(s);
    if (!(std::abs(den) > kZeroDenominator)) {
      std::ostringstream os;
      os << "zero denominator at slot " << s;
      throw ZeroDenominatorError(static_cast<std::size_t>(s), os.str());
    }
    out(s) = b(s) * num(s) / den;
  }
  return out;
}

TraceEstimate bekas(const TraceProblem& problem, const ProbeBatch& probes) {
  const Vector diag = bekas_diag(problem, probes);
  TraceEstimate est;
  est.method = TraceMethod::Bekas;
  est.per_probe.assign(diag.data(), diag.data() + diag.size());
  double sum = 0.0;
  for (double v : est.per_probe) sum += v;
  est.value = sum;
  return est;
}

TraceVarianceOracles trace_variance_oracles(const Matrix& m, const Vector& b_diag, ProbeKind kind, Index k) {
  if (m.rows() != m.cols() || b_diag.size() != m.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "M must be square and B must match its dimension");
  }
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be positive");
  const double kd = static_cast<double>(k);
  const Index d = m.rows();
  const double fro2 = m.squaredNorm();
  const double diag2 = m.diagonal().squaredNorm();
  const double tr_mb = m.diagonal().dot(b_diag);
  const double tr_b2 = b_diag.squaredNorm();
  const bool gauss = kind == ProbeKind::Gaussian;

  TraceVarianceOracles o;
  o.hutchinson = (gauss ? 2.0 * fro2 : 2.0 * (fro2 - diag2)) / kd;
  // r^T B r has variance 2 tr(B^2) under Gaussian probes and is constant under
  // Rademacher probes when B is diagonal.
  o.adams_reduction = gauss && tr_b2 > 0.0 ? 2.0 * tr_mb * tr_mb / (kd * tr_b2) : 0.0;
  o.adams = o.hutchinson - o.adams_reduction;
  o.diag_cv_reduction_verbatim = 2.0 * diag2;
  o.diag_cv_reduction = gauss ? 2.0 * diag2 / kd : 0.0;
  o.diag_cv = o.hutchinson - o.diag_cv_reduction;
  o.bekas = 2.0 * (fro2 - diag2) / kd;

  const Matrix b = b_diag.asDiagonal();
  o.cov_xx = b.cwiseProduct(b.transpose());
  o.cov_yx = m.cwiseProduct(b.transpose());
  for (Index s = 0; s < d; ++s) {
    o.cov_xx(s, s) += b.row(s).squaredNorm();
    o.cov_yx(s, s) += m.row(s).dot(b.row(s));
    if (!gauss) {
      o.cov_xx(s, s) -= 2.0 * b(s, s) * b(s, s);
      o.cov_yx(s, s) -= 2.0 * m(s, s) * b(s, s);
    }
  }
  return o;
}

}  // namespace sketchcv
