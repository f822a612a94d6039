#include "sketchcv/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include "sketchcv/error.hpp"

namespace sketchcv {
namespace {

// Stream tag reserved for the vector pair of an angle; trial indices never reach it.
constexpr std::uint64_t kPairTag = std::numeric_limits<std::uint64_t>::max();

struct Sketcher {
  Scheme scheme;
  Matrix projection;  // random projection only: d x kmax, prefix columns per k

  SketchPair sketch(const Vector& x1, const Vector& x2, double n1, double n2, std::size_t k,
                    const SeededRng& trial_rng) const {
    SketchPair pair;
    pair.norm_i_sq = n1;
    pair.norm_j_sq = n2;
    pair.scheme = scheme;
    const std::span<const double> s1(x1.data(), static_cast<std::size_t>(x1.size()));
    const std::span<const double> s2(x2.data(), static_cast<std::size_t>(x2.size()));
    if (scheme == Scheme::FeatureHash) {
      SeededRng hrng = trial_rng.derive(k);
      const HashPair h = HashPair::draw(hrng, k);
      pair.vi = feature_hash(s1, k, h);
      pair.vj = feature_hash(s2, k, h);
    } else {
      const auto cols = projection.leftCols(static_cast<Index>(k));
      pair.vi = cols.transpose() * x1;
      pair.vj = cols.transpose() * x2;
    }
    return pair;
  }
};

Sketcher make_sketcher(Scheme scheme, Index d, std::size_t kmax, const SeededRng& trial_rng) {
  Sketcher s{scheme, {}};
  if (scheme == Scheme::RandomProjection) {
    SeededRng prng = trial_rng.derive(kPairTag);
    s.projection = draw_projection(prng, d, static_cast<Index>(kmax));
  }
  return s;
}

EstimatorResult run_method(Method method, const SketchPair& pair, const SuffStats& stats, const CubicPoly& cubic,
                           const SolverConfig& cfg) {
  const double n1 = pair.norm_i_sq;
  const double n2 = pair.norm_j_sq;
  switch (method) {
    case Method::Baseline: return baseline(stats);
    case Method::MleNR: return mle_newton(cubic, stats.w3, cfg);
    case Method::MleSecant: return mle_secant(cubic, stats.w3 + cfg.secant_lo, stats.w3 + cfg.secant_hi, cfg);
    case Method::CvInit: return cv_init(stats, n1, n2);
    case Method::CvEmp: return cv_emp(pair);
    case Method::CvEm: return cv_em(stats, n1, n2, cfg);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown method");
}

// Quartiles and Tukey whiskers; below four samples the whiskers are the range.
BoxplotStats summarize(const std::vector<double>& values) {
  if (values.size() >= 4) return boxplot_stats(values);
  std::vector<double> s(values);
  std::sort(s.begin(), s.end());
  BoxplotStats b;
  b.median = quantile_sorted(s, 0.5);
  b.q1 = quantile_sorted(s, 0.25);
  b.q3 = quantile_sorted(s, 0.75);
  b.whisker_lo = s.front();
  b.whisker_hi = s.back();
  return b;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return quantile_sorted(v, 0.5);
}

}  // namespace

unsigned resolve_threads(unsigned requested) noexcept {
  if (requested > 0) return requested;
  return std::max(1U, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(resolve_threads(threads), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n, std::memory_order_relaxed);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be ≥ 1");
  if (d < 2) throw Error(ErrorCode::InvalidArgument, "d must be at least 2");
  if (ratios.empty() || angles.empty() || k_values.empty() || methods.empty()) {
    throw Error(ErrorCode::InvalidArgument, "ratios, angles, k values and methods must be non-empty");
  }
  for (double r : ratios) {
    if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorCode::InvalidArgument, "ratios must be positive");
  }
  for (double a : angles) {
    if (!(a >= 0.0 && a <= std::numbers::pi)) throw Error(ErrorCode::InvalidAngle, "angles must lie in [0, pi]");
  }
  const bool needs_three = std::find(methods.begin(), methods.end(), Method::CvEmp) != methods.end();
  for (std::size_t k : k_values) {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "k values must be ≥ 1");
    if (needs_three && k < 3) throw Error(ErrorCode::KTooSmall, "CvEmp needs k ≥ 3");
  }
  if (!(solver.eps_rel > 0.0) || solver.max_iter < 1 || !(solver.secant_offset_rel > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "solver settings need eps_rel > 0, max_iter ≥ 1, offset > 0");
  }
}

std::pair<Vector, Vector> cell_vector_pair(const ExperimentConfig& config, std::size_t angle_index, double r,
                                           double theta) {
  SeededRng rng(config.base_seed, hash64(angle_index, kPairTag));
  return generate_vector_pair(config.d, r, theta, rng);
}

std::vector<SummaryStats> run_inner_product(const ExperimentConfig& config) {
  config.validate();
  const std::size_t nk = config.k_values.size();
  const std::size_t nm = config.methods.size();
  const std::size_t kmax = *std::max_element(config.k_values.begin(), config.k_values.end());
  std::vector<SummaryStats> rows;

  // Streams are keyed by the angle index only, so every norm ratio reuses the
  // same directions and sketches (common random numbers across r).
  for (double r : config.ratios) {
    for (std::size_t ai = 0; ai < config.angles.size(); ++ai) {
      const double theta = config.angles[ai];
      const auto [x1, x2] = cell_vector_pair(config, ai, r, theta);
      const double n1 = x1.squaredNorm();
      const double n2 = x2.squaredNorm();
      const double truth = x1.dot(x2);
      const SolverConfig cfg = SolverConfig::scaled(n1, n2, config.solver.eps_rel, config.solver.max_iter,
                                                    config.solver.secant_offset_rel);

      const std::size_t slots = config.trials * nk * nm;
      std::vector<double> est(slots);
      std::vector<int> iters(slots);
      std::vector<char> conv(slots);
      std::vector<char> three(config.trials * nk);

      parallel_for(config.trials, config.threads, [&](std::size_t trial) {
        const SeededRng trng(config.base_seed, hash64(ai, trial));
        const Sketcher sk = make_sketcher(config.scheme, config.d, kmax, trng);
        for (std::size_t ki = 0; ki < nk; ++ki) {
          const SketchPair pair = sk.sketch(x1, x2, n1, n2, config.k_values[ki], trng);
          const SuffStats stats = suff_stats(pair);
          const CubicPoly cubic = mle_cubic(stats, n1, n2);
          three[trial * nk + ki] = classify_roots(cubic).count == 3;
          for (std::size_t mi = 0; mi < nm; ++mi) {
            const EstimatorResult res = run_method(config.methods[mi], pair, stats, cubic, cfg);
            const std::size_t slot = (trial * nk + ki) * nm + mi;
            est[slot] = res.estimate;
            iters[slot] = res.iterations;
            conv[slot] = res.converged;
          }
        }
      });

      const double nt = static_cast<double>(config.trials);
      for (std::size_t ki = 0; ki < nk; ++ki) {
        std::size_t three_count = 0;
        for (std::size_t t = 0; t < config.trials; ++t) three_count += three[t * nk + ki] ? 1 : 0;
        for (std::size_t mi = 0; mi < nm; ++mi) {
          SummaryStats s;
          s.scheme = config.scheme;
          s.method = config.methods[mi];
          s.k = config.k_values[ki];
          s.r = r;
          s.theta = theta;
          s.truth = truth;
          std::vector<double> values(config.trials);
          std::vector<double> it_values(config.trials);
          std::vector<int> it_int(config.trials);
          std::vector<char> conv_flags(config.trials);
          double sum = 0.0, sum_it = 0.0, sq_err = 0.0;
          std::size_t nonconv = 0;
          for (std::size_t t = 0; t < config.trials; ++t) {
            const std::size_t slot = (t * nk + ki) * nm + mi;
            values[t] = est[slot];
            it_int[t] = iters[slot];
            conv_flags[t] = conv[slot];
            it_values[t] = iters[slot];
            sum += est[slot];
            sum_it += iters[slot];
            sq_err += (est[slot] - truth) * (est[slot] - truth);
            nonconv += conv[slot] ? 0 : 1;
          }
          s.mean = sum / nt;
          s.mse = sq_err / nt;
          double var = 0.0;
          for (double v : values) var += (v - s.mean) * (v - s.mean);
          s.variance = var / nt;
          const BoxplotStats box = summarize(values);
          s.median = box.median;
          s.q1 = box.q1;
          s.q3 = box.q3;
          s.whisker_lo = box.whisker_lo;
          s.whisker_hi = box.whisker_hi;
          s.outlier_fraction = box.outlier_fraction;
          s.mean_iterations = sum_it / nt;
          s.median_iterations = median_of(it_values);
          s.nonconverged_fraction = static_cast<double>(nonconv) / nt;
          s.three_root_fraction = static_cast<double>(three_count) / nt;
          if (config.keep_samples) {
            s.estimates = std::move(values);
            s.iterations = std::move(it_int);
            s.converged = std::move(conv_flags);
          }
          rows.push_back(std::move(s));
        }
      }
    }
  }
  return rows;
}

void ConvergenceConfig::validate() const {
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be ≥ 1");
  if (d < 2) throw Error(ErrorCode::InvalidArgument, "d must be at least 2");
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be ≥ 1");
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "ratio must be positive");
  if (!(theta >= 0.0 && theta <= std::numbers::pi)) throw Error(ErrorCode::InvalidAngle, "angle must lie in [0, pi]");
  if (!(eps_rel > 0.0) || max_iter < 1 || !(secant_offset_rel > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "solver settings need eps_rel > 0, max_iter ≥ 1, offset > 0");
  }
}

ConvergenceReport run_convergence(const ConvergenceConfig& config) {
  config.validate();
  static constexpr Method kMethods[] = {Method::MleNR, Method::MleSecant, Method::CvEm};
  constexpr std::size_t nm = std::size(kMethods);

  ExperimentConfig base;
  base.d = config.d;
  base.base_seed = config.base_seed;
  const auto [x1, x2] = cell_vector_pair(base, 0, config.r, config.theta);
  const double n1 = x1.squaredNorm();
  const double n2 = x2.squaredNorm();
  const double scale = std::sqrt(n1 * n2);
  const SolverConfig cfg =
      SolverConfig::scaled(n1, n2, config.eps_rel, config.max_iter, config.secant_offset_rel);

  std::vector<ConvergenceFit> fits(config.trials * nm);
  parallel_for(config.trials, config.threads, [&](std::size_t trial) {
    const SeededRng trng(config.base_seed, hash64(0, trial));
    const Sketcher sk = make_sketcher(config.scheme, config.d, config.k, trng);
    const SketchPair pair = sk.sketch(x1, x2, n1, n2, config.k, trng);
    const SuffStats stats = suff_stats(pair);
    const CubicPoly cubic = mle_cubic(stats, n1, n2);
    const std::vector<double> roots = real_roots(cubic);
    for (std::size_t mi = 0; mi < nm; ++mi) {
      const EstimatorResult res = run_method(kMethods[mi], pair, stats, cubic, cfg);
      if (res.trace.size() < 4) continue;
      const double last = res.trace.back();
      double truth = roots.front();
      for (double root : roots) {
        if (std::abs(root - last) < std::abs(truth - last)) truth = root;
      }
      std::vector<double> normalized(res.trace.size());
      for (std::size_t i = 0; i < res.trace.size(); ++i) normalized[i] = res.trace[i] / scale;
      fits[trial * nm + mi] = convergence_fit({normalized}, truth / scale, config.eps_rel);
    }
  });

  ConvergenceReport report;
  for (std::size_t mi = 0; mi < nm; ++mi) {
    std::vector<double> alphas, cs;
    for (std::size_t t = 0; t < config.trials; ++t) {
      const ConvergenceFit& f = fits[t * nm + mi];
      if (!f.valid) continue;
      report.samples.push_back({kMethods[mi], t, f.alpha, std::exp(f.log_c), f.points_used});
      alphas.push_back(f.alpha);
      cs.push_back(std::exp(f.log_c));
    }
    ConvergenceSummary s;
    s.method = kMethods[mi];
    s.fits = alphas.size();
    if (!alphas.empty()) {
      std::sort(alphas.begin(), alphas.end());
      std::sort(cs.begin(), cs.end());
      s.alpha_median = quantile_sorted(alphas, 0.5);
      s.alpha_q1 = quantile_sorted(alphas, 0.25);
      s.alpha_q3 = quantile_sorted(alphas, 0.75);
      s.c_median = quantile_sorted(cs, 0.5);
      s.c_q1 = quantile_sorted(cs, 0.25);
      s.c_q3 = quantile_sorted(cs, 0.75);
    }
    report.summaries.push_back(s);
  }
  return report;
}

void TraceConfig::validate() const {
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be ≥ 1");
  if (k_values.empty() || methods.empty()) throw Error(ErrorCode::InvalidArgument, "k values and methods must be non-empty");
  const bool emp = std::find(methods.begin(), methods.end(), TraceMethod::AdamsCvEmp) != methods.end();
  for (std::size_t k : k_values) {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "k values must be ≥ 1");
    if (emp && k < 2) throw Error(ErrorCode::KTooSmall, "empirical Adams weight needs k ≥ 2");
  }
}

std::vector<TraceSummary> run_trace(const TraceConfig& config) {
  config.validate();
  const Vector b = config.b_diag.size() == 0 ? Vector::Ones(config.m.rows()) : config.b_diag;
  const TraceProblem problem(config.m, b);
  const double truth = problem.m().trace();
  const double tr_mb = problem.m().diagonal().dot(b);
  const Vector m_diag = problem.m().diagonal();
  const std::size_t nm = config.methods.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<TraceSummary> rows;
  for (std::size_t ki = 0; ki < config.k_values.size(); ++ki) {
    const std::size_t k = config.k_values[ki];
    std::vector<double> values(config.trials * nm, nan);
    std::vector<char> fell_back(config.trials * nm, 0);
    parallel_for(config.trials, config.threads, [&](std::size_t trial) {
      const SeededRng trng(config.base_seed, hash64(ki, trial));
      const ProbeBatch probes = ProbeBatch::draw(trng, problem.d(), static_cast<Index>(k), config.kind);
      for (std::size_t mi = 0; mi < nm; ++mi) {
        TraceEstimate e;
        switch (config.methods[mi]) {
          case TraceMethod::Hutchinson: e = hutchinson(problem, probes); break;
          case TraceMethod::AdamsCv: e = adams_cv(problem, probes, AdamsTheoretical{tr_mb}); break;
          case TraceMethod::AdamsCvEmp: e = adams_cv(problem, probes, AdamsEmpirical{}); break;
          case TraceMethod::DiagCv: e = diag_cv(problem, probes, m_diag); break;
          case TraceMethod::Bekas:
            try {
              e = bekas(problem, probes);
            } catch (const ZeroDenominatorError&) {
              continue;
            }
            break;
        }
        values[trial * nm + mi] = e.value;
        fell_back[trial * nm + mi] = e.fell_back;
      }
    });

    for (std::size_t mi = 0; mi < nm; ++mi) {
      TraceSummary s;
      s.method = config.methods[mi];
      s.kind = config.kind;
      s.k = k;
      s.truth = truth;
      double sum = 0.0, sq_err = 0.0;
      std::size_t fb = 0;
      for (std::size_t t = 0; t < config.trials; ++t) {
        const double v = values[t * nm + mi];
        if (std::isnan(v)) continue;
        ++s.used;
        sum += v;
        sq_err += (v - truth) * (v - truth);
        fb += fell_back[t * nm + mi] ? 1 : 0;
      }
      const double nt = static_cast<double>(config.trials);
      s.zero_denominator_fraction = static_cast<double>(config.trials - s.used) / nt;
      s.fallback_fraction = static_cast<double>(fb) / nt;
      if (s.used > 0) {
        s.mean = sum / static_cast<double>(s.used);
        s.mse = sq_err / static_cast<double>(s.used);
        double var = 0.0;
        for (std::size_t t = 0; t < config.trials; ++t) {
          const double v = values[t * nm + mi];
          if (!std::isnan(v)) var += (v - s.mean) * (v - s.mean);
        }
        s.variance = s.used > 1 ? var / static_cast<double>(s.used - 1) : 0.0;
      }
      if (config.keep_samples) {
        s.values.resize(config.trials);
        for (std::size_t t = 0; t < config.trials; ++t) s.values[t] = values[t * nm + mi];
      }
      rows.push_back(std::move(s));
    }
  }
  return rows;
}

std::vector<TimingRatio> timing_ratios(const ExperimentConfig& config, int repeats) {
  config.validate();
  if (repeats < 1) throw Error(ErrorCode::InvalidArgument, "repeats must be ≥ 1");
  using Clock = std::chrono::steady_clock;
  const auto [x1, x2] = cell_vector_pair(config, 0, config.ratios.front(), config.angles.front());
  const double n1 = x1.squaredNorm();
  const double n2 = x2.squaredNorm();
  const SolverConfig cfg = SolverConfig::scaled(n1, n2, config.solver.eps_rel, config.solver.max_iter,
                                                config.solver.secant_offset_rel);
  const std::size_t kmax = *std::max_element(config.k_values.begin(), config.k_values.end());

  auto time_it = [&](auto&& fn) {
    volatile double sink = 0.0;
    const auto t0 = Clock::now();
    for (int i = 0; i < repeats; ++i) sink = sink + fn();
    return std::chrono::duration<double>(Clock::now() - t0).count();
  };

  std::vector<TimingRatio> out;
  for (std::size_t k : config.k_values) {
    std::vector<double> r_nr, r_sec;
    for (std::size_t trial = 0; trial < config.trials; ++trial) {
      const SeededRng trng(config.base_seed, hash64(0, trial));
      const Sketcher sk = make_sketcher(config.scheme, config.d, kmax, trng);
      const SuffStats stats = suff_stats(sk.sketch(x1, x2, n1, n2, k, trng));
      const double t_em = time_it([&] { return cv_em(stats, n1, n2, cfg).estimate; });
      const double t_nr = time_it([&] { return mle_newton(mle_cubic(stats, n1, n2), stats.w3, cfg).estimate; });
      const double t_sec = time_it([&] {
        return mle_secant(mle_cubic(stats, n1, n2), stats.w3 + cfg.secant_lo, stats.w3 + cfg.secant_hi, cfg).estimate;
      });
      if (t_nr > 0.0) r_nr.push_back(t_em / t_nr);
      if (t_sec > 0.0) r_sec.push_back(t_em / t_sec);
    }
    auto mean_sd = [](const std::vector<double>& v, double& mean, double& two_sd) {
      mean = two_sd = 0.0;
      if (v.empty()) return;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      two_sd = v.size() > 1 ? 2.0 * std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
    };
    TimingRatio tr;
    tr.k = k;
    mean_sd(r_nr, tr.cvem_over_nr_mean, tr.cvem_over_nr_2sd);
    mean_sd(r_sec, tr.cvem_over_secant_mean, tr.cvem_over_secant_2sd);
    out.push_back(tr);
  }
  return out;
}

}  // namespace sketchcv
