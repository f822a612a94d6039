#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "sketchcv/bench.hpp"
#include "sketchcv/error.hpp"

using namespace sketchcv;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.d = 200;
  c.k_values = {10, 30};
  c.trials = 300;
  c.ratios = {1.0, 2.0};
  c.angles = {0.3, 1.2};
  return c;
}

bool same(const SummaryStats& a, const SummaryStats& b) {
  return a.method == b.method && a.k == b.k && a.r == b.r && a.theta == b.theta && a.mse == b.mse &&
         a.mean == b.mean && a.median == b.median && a.q1 == b.q1 && a.q3 == b.q3 &&
         a.outlier_fraction == b.outlier_fraction && a.mean_iterations == b.mean_iterations &&
         a.nonconverged_fraction == b.nonconverged_fraction && a.three_root_fraction == b.three_root_fraction;
}

Matrix m22() {
  Matrix m(2, 2);
  m << 2, 1, 1, 3;
  return m;
}

const TraceSummary& find(const std::vector<TraceSummary>& rows, TraceMethod m) {
  for (const auto& r : rows)
    if (r.method == m) return r;
  throw std::runtime_error("method missing");
}

}  // namespace

TEST_CASE("parallel_for covers every index once") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 5) throw Error(ErrorCode::InvalidArgument, "boom");
                  }),
                  Error);
  CHECK(resolve_threads(3) == 3);
  CHECK(resolve_threads(0) >= 1);
}

TEST_CASE("config validation") {
  ExperimentConfig c = small_config();
  c.trials = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_config();
  c.angles = {4.0};
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_config();
  c.ratios = {0.0};
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_config();
  c.k_values = {2};
  try {
    c.validate();
    FAIL("expected KTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::KTooSmall);
  }
  c.methods = {Method::Baseline, Method::CvEm};
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("row layout and determinism across thread counts") {
  ExperimentConfig c = small_config();
  c.threads = 1;
  const auto one = run_inner_product(c);
  c.threads = 4;
  const auto four = run_inner_product(c);
  REQUIRE(one.size() == 2 * 2 * 2 * 6);
  REQUIRE(four.size() == one.size());
  for (std::size_t i = 0; i < one.size(); ++i) CHECK(same(one[i], four[i]));
  CHECK(one[0].r == 1.0);
  CHECK(one[0].theta == 0.3);
  CHECK(one[0].k == 10);
  CHECK(one[0].method == Method::Baseline);
  CHECK(one[5].method == Method::CvEm);
  CHECK(one[6].k == 30);
  CHECK(one[12].theta == 1.2);
  CHECK(one[24].r == 2.0);
}

TEST_CASE("summary statistics are consistent with the samples") {
  ExperimentConfig c = small_config();
  c.keep_samples = true;
  const auto rows = run_inner_product(c);
  for (const auto& row : rows) {
    REQUIRE(row.estimates.size() == c.trials);
    double sum = 0.0, se = 0.0;
    for (double e : row.estimates) {
      sum += e;
      se += (e - row.truth) * (e - row.truth);
    }
    const double n = static_cast<double>(c.trials);
    const double mean = sum / n;
    CHECK(std::abs(mean - row.mean) <= 1e-12 * (std::abs(mean) + row.truth));
    CHECK(std::abs(se / n - row.mse) <= 1e-12 * row.mse);
    const double bias = row.mean - row.truth;
    CHECK(std::abs(row.variance + bias * bias - row.mse) <= 1e-12 * row.mse);
    CHECK(row.q1 <= row.median);
    CHECK(row.median <= row.q3);
    CHECK(row.mse >= 0.0);
    if (row.method == Method::Baseline || row.method == Method::CvInit || row.method == Method::CvEmp) {
      CHECK(row.nonconverged_fraction == 0.0);
    }
    const auto [x1, x2] = cell_vector_pair(c, (static_cast<std::size_t>(&row - &rows[0]) / 12) % 2, row.r, row.theta);
    CHECK(row.truth == x1.dot(x2));
  }
}

TEST_CASE("monotone MSE in k") {
  ExperimentConfig c;
  c.d = 500;
  c.k_values = {10, 100};
  c.trials = 1000;
  const auto rows = run_inner_product(c);
  REQUIRE(rows.size() == 12);
  for (std::size_t m = 0; m < 6; ++m) {
    INFO(std::string(to_string(rows[m].method)));
    CHECK(rows[m + 6].mse < rows[m].mse);
  }
}

TEST_CASE("relative MSE does not depend on the norm ratio") {
  ExperimentConfig c;
  c.d = 500;
  c.k_values = {50};
  c.trials = 10'000;
  c.ratios = {0.1, 1.0, 10.0};
  c.keep_samples = true;
  const auto rows = run_inner_product(c);
  REQUIRE(rows.size() == 18);
  for (std::size_t m = 0; m < 6; ++m) {
    const std::string name(to_string(rows[m].method));
    // Trials that converge at every r. A run that hits max_iter keeps an
    // arbitrary last iterate, and which r it happens at is down to rounding.
    std::vector<char> keep(c.trials, 1);
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t t = 0; t < c.trials; ++t) keep[t] &= rows[r * 6 + m].converged[t];
    const auto kept = static_cast<std::size_t>(std::count(keep.begin(), keep.end(), 1));
    INFO(name << " kept=" << kept);
    CHECK(kept >= c.trials - c.trials / 1000);

    std::vector<double> raw, common;
    for (std::size_t r = 0; r < 3; ++r) {
      const SummaryStats& row = rows[r * 6 + m];
      const double scale = row.r * c.d * static_cast<double>(c.d);  // (|x1| |x2|)^2
      raw.push_back(row.mse / scale);
      double se = 0.0;
      for (std::size_t t = 0; t < c.trials; ++t)
        if (keep[t]) se += (row.estimates[t] - row.truth) * (row.estimates[t] - row.truth);
      common.push_back(se / static_cast<double>(kept) / scale);
    }
    const auto [lo, hi] = std::minmax_element(common.begin(), common.end());
    INFO(name << " lo=" << *lo << " hi=" << *hi);
    CHECK(*hi <= 1.5 * *lo);
    if (kept == c.trials) CHECK(common == raw);
  }
}

TEST_CASE("run_trace examples") {
  TraceConfig c;
  Vector diag(3);
  diag << 1.0, -2.0, 0.5;
  c.m = diag.asDiagonal();
  c.k_values = {5};
  c.trials = 200;
  c.methods = {TraceMethod::Bekas, TraceMethod::Hutchinson};
  const auto rows = run_trace(c);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].method == TraceMethod::Bekas);
  CHECK(rows[0].mse <= 1e-20);
  CHECK(rows[0].used == 200);
  CHECK(rows[0].truth == -0.5);

  TraceConfig g;
  g.m = m22();
  g.k_values = {4};
  g.trials = 100'000;
  g.methods = {TraceMethod::Hutchinson, TraceMethod::AdamsCv};
  const auto grows = run_trace(g);
  const TraceVarianceOracles o = trace_variance_oracles(m22(), Vector::Ones(2), ProbeKind::Gaussian, 4);
  const double expect = o.hutchinson - 2.0 * 25.0 / (4.0 * 2.0);
  CHECK(std::abs(find(grows, TraceMethod::AdamsCv).variance - expect) <= 0.1 * expect);
  CHECK(std::abs(find(grows, TraceMethod::Hutchinson).variance - o.hutchinson) <= 0.1 * o.hutchinson);

  TraceConfig r = g;
  r.kind = ProbeKind::Rademacher;
  r.methods = {TraceMethod::Hutchinson};
  const auto rrows = run_trace(r);
  CHECK(std::abs(rrows[0].variance - 1.0) <= 0.1);
}

TEST_CASE("run_trace with no zero denominators uses every run") {
  TraceConfig c;
  c.m = m22();
  c.kind = ProbeKind::Rademacher;
  c.k_values = {1};
  c.trials = 50;
  c.methods = {TraceMethod::Bekas};
  // Rademacher probes never give a zero denominator with B = I, so every run is used.
  const auto rows = run_trace(c);
  CHECK(rows[0].zero_denominator_fraction == 0.0);
  CHECK(rows[0].used == 50);
}

TEST_CASE("run_trace determinism across thread counts") {
  TraceConfig c;
  c.m = m22();
  c.k_values = {3, 10};
  c.trials = 500;
  c.threads = 1;
  c.keep_samples = true;
  const auto a = run_trace(c);
  c.threads = 3;
  const auto b = run_trace(c);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].mean == b[i].mean);
    CHECK(a[i].variance == b[i].variance);
    CHECK(a[i].values == b[i].values);
  }
}

TEST_CASE("timing ratios are finite and positive") {
  ExperimentConfig c;
  c.d = 200;
  c.k_values = {20};
  c.trials = 100;
  const auto rows = timing_ratios(c, 3);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].k == 20);
  CHECK(std::isfinite(rows[0].cvem_over_nr_mean));
  CHECK(rows[0].cvem_over_nr_mean > 0.0);
  CHECK(rows[0].cvem_over_secant_mean > 0.0);
  CHECK(rows[0].cvem_over_nr_2sd >= 0.0);
}
