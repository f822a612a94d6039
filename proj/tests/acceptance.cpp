// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: acceptance <path to the sketchcv executable>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "sketchcv/bench.hpp"
#include "sketchcv/efamily.hpp"
#include "sketchcv/inner_product.hpp"
#include "sketchcv/stats.hpp"
#include "sketchcv/trace.hpp"

using namespace sketchcv;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < budget_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::printf("%s %2d %s: %s [%.2fs, budget %.0fs%s]\n", pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs,
              budget_s, in_time ? "" : ", over budget");
  std::fflush(stdout);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double rel_dev(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

Matrix random_spd(SeededRng& rng, Index p) {
  Matrix g(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j) g(i, j) = rng.normal();
  Matrix v = g * g.transpose() / static_cast<double>(p);
  v.diagonal().array() += 0.1;
  return 0.5 * (v + v.transpose());
}

Matrix m22() {
  Matrix m(2, 2);
  m << 2, 1, 1, 3;
  return m;
}

const SummaryStats& row_for(const std::vector<SummaryStats>& rows, std::size_t k, Method m) {
  for (const auto& r : rows)
    if (r.k == k && r.method == m) return r;
  throw std::runtime_error("missing row");
}

const TraceSummary& trace_row(const std::vector<TraceSummary>& rows, TraceMethod m) {
  for (const auto& r : rows)
    if (r.method == m) return r;
  throw std::runtime_error("missing row");
}

Outcome equivalence() {
  SeededRng rng(1001, 0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Index p = 2 + static_cast<Index>(rng.below(7));
    const Index t = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(p - 1)));
    const CovarianceModel m(random_spd(rng, p), t, 1 + static_cast<Index>(rng.below(50)));
    Vector alpha(t);
    for (Index j = 0; j < t; ++j) alpha(j) = rng.normal();
    worst = std::max(worst, rel_dev(mle_variance(m, alpha), cve_variance(m, alpha)));
  }
  return {worst <= 1e-9, "max relative deviation " + num(worst) + " (limit 1e-9)"};
}

Outcome closed_forms() {
  const BivariateNormalParams pr{1, 1, 0.5};
  const CovarianceModel model = bivariate_sigma12_model(pr, 1);
  const Vector one = Vector::Ones(1);
  const CvWeights w = cv_weights(model, one);
  // Closed forms: c1 = -s12 s22 / (s12^2 + s11 s22), c2 = -s12 s11 / (s12^2 + s11 s22).
  const double den = pr.sigma12 * pr.sigma12 + pr.sigma11 * pr.sigma22;
  const double c1 = -pr.sigma12 * pr.sigma22 / den, c2 = -pr.sigma12 * pr.sigma11 / den;
  const double cve = cve_variance(model, one), mle = mle_variance(model, one);
  const double err = std::max({std::abs(w.c(0) - c1), std::abs(w.c(1) - c2), std::abs(w.c(0) + 0.4),
                               std::abs(w.c(1) + 0.4), std::abs(cve - 0.45), std::abs(mle - 0.45)});
  return {err <= 1e-12, "c = (" + num(w.c(0)) + ", " + num(w.c(1)) + "), CVE " + num(cve) + ", MLE " + num(mle) +
                            ", max error " + num(err)};
}

Outcome cvem_mle() {
  SeededRng rng(1003, 0);
  int instances = 0, converged = 0, bad_residual = 0, bad_root = 0;
  while (instances < 10'000) {
    const double n1 = 0.1 + 10 * rng.uniform(), n2 = 0.1 + 10 * rng.uniform();
    const double w1 = n1 * (0.5 + rng.uniform()), w2 = n2 * (0.5 + rng.uniform());
    const double w3 = std::sqrt(w1 * w2) * (2 * rng.uniform() - 1);
    const SuffStats s{w1, w2, w3, 0};
    const CubicPoly cubic = mle_cubic(s, n1, n2);
    if (classify_roots(cubic).count != 1) continue;
    ++instances;
    const SolverConfig cfg = SolverConfig::scaled(n1, n2);
    const EstimatorResult r = cv_em(s, n1, n2, cfg);
    if (!r.converged) continue;
    ++converged;
    const double f = r.estimate;
    if (!(std::abs(cubic(f)) <= 10 * cfg.eps * (f * f + n1 * n2))) ++bad_residual;
    if (!(std::abs(f - real_roots(cubic).front()) <= 100 * cfg.eps)) ++bad_root;
  }
  return {converged > 0 && bad_residual == 0 && bad_root == 0,
          std::to_string(converged) + "/" + std::to_string(instances) + " converged; residual violations " +
              std::to_string(bad_residual) + ", root disagreements " + std::to_string(bad_root)};
}

ExperimentConfig desk_config() {
  ExperimentConfig c;  // d = 1000, trials = 2000, r = 1, theta = pi/12, feature hashing, seed 42
  return c;
}

Outcome mse_ordering() {
  ExperimentConfig c = desk_config();
  c.k_values = {20};
  const auto rows = run_inner_product(c);
  const double em = row_for(rows, 20, Method::CvEm).mse;
  const double init = row_for(rows, 20, Method::CvInit).mse;
  const double base = row_for(rows, 20, Method::Baseline).mse;
  const double sec = row_for(rows, 20, Method::MleSecant).mse;
  const bool ok = em <= init && em <= base / 2 && std::abs(em - sec) <= 0.05 * sec;
  return {ok, "k=20 MSE: CV-EM " + num(em) + ", CV-Init " + num(init) + ", baseline " + num(base) + ", Secant " +
                  num(sec)};
}

Outcome root_statistics() {
  ExperimentConfig c = desk_config();
  c.k_values = {10, 20};
  c.trials = 10'000;
  c.methods = {Method::Baseline};
  const auto rows = run_inner_product(c);
  const double f10 = row_for(rows, 10, Method::Baseline).three_root_fraction;
  const double f20 = row_for(rows, 20, Method::Baseline).three_root_fraction;
  return {f10 >= 0.0005 && f10 <= 0.01 && f20 == 0.0,
          "three-root fraction k=10 " + num(f10) + " (band [0.0005, 0.01]), k=20 " + num(f20) + " (must be 0)"};
}

Outcome update_steps() {
  ExperimentConfig c = desk_config();
  c.k_values = {20, 40, 60, 80, 100};
  c.methods = {Method::MleNR, Method::MleSecant, Method::CvEm};
  const auto rows = run_inner_product(c);
  bool ok = true;
  std::string detail;
  for (std::size_t k : c.k_values) {
    const double em = row_for(rows, k, Method::CvEm).median_iterations;
    const double nr = row_for(rows, k, Method::MleNR).median_iterations;
    const double sec = row_for(rows, k, Method::MleSecant).median_iterations;
    const bool here = em <= nr && em <= sec;
    ok = ok && here;
    detail += (detail.empty() ? "" : "; ") + std::string("k=") + std::to_string(k) + " EM/NR/Sec " + num(em) + "/" +
              num(nr) + "/" + num(sec) + (here ? "" : " (violated)");
  }
  return {ok, "median updates " + detail};
}

Outcome convergence_fits() {
  std::vector<double> quad{0.9}, lin{0.9};
  for (int i = 0; i < 7; ++i) quad.push_back(0.5 * quad.back() * quad.back());
  for (int i = 0; i < 12; ++i) lin.push_back(0.3 * lin.back());
  const double aq = convergence_fit({quad}, 0.0, 1e-300).alpha;
  const double al = convergence_fit({lin}, 0.0, 1e-300).alpha;
  const bool synthetic = std::abs(aq - 2.0) <= 1e-8 && std::abs(al - 1.0) <= 1e-8;

  ConvergenceConfig c;  // k = 100, desk-scale pair
  const ConvergenceReport rep = run_convergence(c);
  const ConvergenceSummary* nr = nullptr;
  const ConvergenceSummary* sec = nullptr;
  const ConvergenceSummary* em = nullptr;
  for (const auto& s : rep.summaries) {
    if (s.method == Method::MleNR) nr = &s;
    if (s.method == Method::MleSecant) sec = &s;
    if (s.method == Method::CvEm) em = &s;
  }
  const bool ok = synthetic && nr->fits > 0 && sec->fits > 0 && em->fits > 0 && nr->alpha_median >= 1.7 &&
                  nr->alpha_median <= 2.2 && sec->alpha_median <= 1.7 && em->alpha_median >= 0.9 &&
                  em->alpha_median <= 1.7 && em->c_median < nr->c_median;
  return {ok, "synthetic alpha " + num(aq) + "/" + num(al) + "; median alpha NR " + num(nr->alpha_median) +
                  ", Secant " + num(sec->alpha_median) + ", CV-EM " + num(em->alpha_median) + "; median C CV-EM " +
                  num(em->c_median) + " vs NR " + num(nr->c_median)};
}

Outcome trace_estimators() {
  // (a) Bekas exactness on diagonal M with B = I.
  SeededRng rng(1008, 0);
  double worst_exact = 0.0;
  for (std::uint64_t t = 0; t < 1000; ++t) {
    Vector diag(5);
    for (Index s = 0; s < 5; ++s) diag(s) = rng.normal();
    const TraceProblem p(Matrix(diag.asDiagonal()), Vector::Ones(5));
    const ProbeBatch probes = ProbeBatch::draw(rng.derive(t), 5, 1 + static_cast<Index>(t % 7),
                                               t % 2 ? ProbeKind::Rademacher : ProbeKind::Gaussian);
    worst_exact = std::max(worst_exact, std::abs(bekas(p, probes).value - diag.sum()));
  }
  const bool a = worst_exact <= 1e-12;

  // (b) unbiasedness at 1e5 repetitions on the 2x2 example and a random 6x6 matrix.
  bool b = true;
  std::string bdetail;
  Matrix m6(6, 6);
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j <= i; ++j) m6(i, j) = m6(j, i) = rng.normal();
  for (const Matrix& m : {m22(), m6}) {
    TraceConfig c;
    c.m = m;
    c.k_values = {4};
    c.trials = 100'000;
    c.methods = {TraceMethod::Hutchinson, TraceMethod::AdamsCv, TraceMethod::AdamsCvEmp, TraceMethod::DiagCv};
    for (const auto& row : run_trace(c)) {
      const double z = std::abs(row.mean - row.truth) / std::sqrt(row.variance / static_cast<double>(row.used));
      b = b && z <= 3.0;
      bdetail += std::string(bdetail.empty() ? "" : ",") + num(z);
    }
  }

  // (c) Adams reduction, (d) Bekas variance.
  TraceConfig c;
  c.m = m22();
  c.k_values = {4};
  c.trials = 100'000;
  c.methods = {TraceMethod::Hutchinson, TraceMethod::AdamsCv};
  const auto rows = run_trace(c);
  const double reduction = trace_row(rows, TraceMethod::Hutchinson).variance - trace_row(rows, TraceMethod::AdamsCv).variance;
  const double want_red = 2.0 * 25.0 / (4.0 * 2.0);
  const bool cc = std::abs(reduction - want_red) <= 0.1 * want_red;

  TraceConfig bk;
  bk.m = m22();
  bk.k_values = {100};
  bk.trials = 100'000;
  bk.methods = {TraceMethod::Bekas};
  const auto brow = run_trace(bk);
  const double want_bekas = 2.0 * (15.0 - 13.0) / 100.0;
  const bool d = std::abs(brow[0].variance - want_bekas) <= 0.1 * want_bekas;

  return {a && b && cc && d, std::string("(a) max error ") + num(worst_exact) + "; (b) |z| " + bdetail +
                                 "; (c) reduction " + num(reduction) + " vs " + num(want_red) + "; (d) Bekas var " +
                                 num(brow[0].variance) + " vs " + num(want_bekas)};
}

Outcome slot_identities() {
  SeededRng rng(1009, 0);
  const Index d = 4;
  Matrix m(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j <= i; ++j) m(i, j) = m(j, i) = rng.normal();
  Vector b(d);
  for (Index s = 0; s < d; ++s) b(s) = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.5 + rng.uniform());
  const Index n = 1'000'000;
  const ProbeBatch probes = ProbeBatch::draw(rng, d, n, ProbeKind::Gaussian);
  const Matrix y = probes.r.cwiseProduct(m * probes.r);
  const Matrix x = probes.r.array().square().colwise() * b.array();

  // The four closed forms from the proof, evaluated with B as a full matrix.
  const Matrix bm = b.asDiagonal();
  const auto var_x = [&](Index s) { return bm.row(s).squaredNorm() + bm(s, s) * bm(s, s); };
  const auto cov_xx = [&](Index s, Index t) { return bm(s, t) * bm(t, s); };
  const auto cov_yx_same = [&](Index s) { return m.row(s).dot(bm.row(s)) + m(s, s) * bm(s, s); };
  const auto cov_yx = [&](Index s, Index t) { return m(s, t) * bm(t, s); };

  double worst_z = 0.0;
  int checks = 0, misses = 0;
  const auto test = [&](const Vector& u, const Vector& v, double want) {
    const Vector prod = (u.array() - u.mean()) * (v.array() - v.mean());
    const double cov = prod.sum() / static_cast<double>(n - 1);
    const double sd = std::sqrt((prod.array() - prod.mean()).square().sum() / static_cast<double>(n - 1));
    const double z = std::abs(cov - want) / (sd / std::sqrt(static_cast<double>(n)));
    worst_z = std::max(worst_z, z);
    ++checks;
    if (!(z <= 3.0)) ++misses;
  };
  for (Index s = 0; s < d; ++s) {
    for (Index t = 0; t < d; ++t) {
      const Vector xs = x.row(s).transpose(), xt = x.row(t).transpose(), ys = y.row(s).transpose();
      if (s == t) {
        test(xs, xs, var_x(s));
        test(ys, xs, cov_yx_same(s));
      } else {
        test(xs, xt, cov_xx(s, t));
        test(ys, xt, cov_yx(s, t));
      }
    }
  }
  return {misses == 0, std::to_string(checks) + " covariances, max |z| " + num(worst_z) + ", outside 3 SE: " +
                           std::to_string(misses)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome cli_determinism(const std::string& exe) {
  const fs::path root = fs::temp_directory_path() / "sketchcv_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  {
    std::ofstream m(root / "m.txt");
    m << "3\n2 1 0\n1 3 0.5\n0 0.5 1\n";
  }
  struct Cmd {
    std::string name, args;
    std::vector<std::string> files;
  };
  const std::vector<Cmd> cmds{
      {"inner-product", "inner-product --k 10,20 --ratios 1,2 --angles 0.2618 --trials 200 --d 300",
       {"inner_product.csv"}},
      {"trace", "trace --matrix " + (root / "m.txt").string() + " --k 4,50 --trials 500", {"trace.csv"}},
      {"equivalence", "equivalence --trials 200", {"equivalence.csv"}},
      {"convergence", "convergence --k 50 --trials 200 --d 300", {"convergence.csv", "convergence_samples.csv"}},
  };
  bool ok = true;
  std::string detail;
  for (const auto& c : cmds) {
    std::string out[2];
    int idx = 0;
    for (const char* threads : {"1", "8"}) {
      const fs::path dir = root / (c.name + "_" + threads);
      const std::string line = "\"" + exe + "\" --seed 42 --threads " + threads + " --format csv --out-dir \"" +
                               dir.string() + "\" " + c.args + " >/dev/null 2>&1";
      const int rc = std::system(line.c_str());
      if (rc != 0) {
        ok = false;
        detail += c.name + " exit " + std::to_string(rc) + "; ";
      }
      for (const auto& f : c.files) out[idx] += slurp(dir / f);
      ++idx;
    }
    const bool same = !out[0].empty() && out[0] == out[1];
    ok = ok && same;
    detail += c.name + (same ? " identical" : " DIFFERS") + "; ";
  }
  fs::remove_all(root);
  if (detail.size() >= 2) detail.resize(detail.size() - 2);
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <sketchcv executable>\n");
    return 2;
  }
  const std::string exe = argv[1];
  criterion(1, "variance equivalence over random SPD models", 5, equivalence);
  criterion(2, "bivariate normal closed forms", 1, closed_forms);
  criterion(3, "CV-EM fixed point is the MLE root", 10, cvem_mle);
  criterion(4, "MSE ordering at k=20", 120, mse_ordering);
  criterion(5, "three-real-root statistics", 120, root_statistics);
  criterion(6, "update-step dominance", 180, update_steps);
  criterion(7, "convergence-order fits", 180, convergence_fits);
  criterion(8, "trace estimators", 120, trace_estimators);
  criterion(9, "slot covariance identities", 60, slot_identities);
  criterion(10, "CLI determinism across thread counts", 60, [&] { return cli_determinism(exe); });
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
