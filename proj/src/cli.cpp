#include "sketchcv/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>

#include "sketchcv/bench.hpp"
#include "sketchcv/efamily.hpp"
#include "sketchcv/error.hpp"
#include "sketchcv/matrix_io.hpp"
#include "sketchcv/report.hpp"
#include "sketchcv/stats.hpp"

namespace sketchcv {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitIdentity = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct GlobalOptions {
  std::string config_path;
  std::uint64_t seed = 42;
  std::string out_dir = ".";
  std::string format = "both";
  unsigned threads = 0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw UsageError("config must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw UsageError(std::string("config parse error: ") + e.what());
  }
}

void reject_unknown_keys(const json& cfg, const std::set<std::string>& known) {
  for (const auto& [key, _] : cfg.items()) {
    if (!known.count(key)) throw UsageError("unknown config key '" + key + "'");
  }
}

template <typename T>
void from_config(const json& cfg, const char* key, T& out) {
  if (!cfg.contains(key)) return;
  try {
    out = cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError(std::string("config key '") + key + "' has the wrong type");
  }
}

unsigned resolve_cli_threads(const GlobalOptions& g, const json& cfg) {
  if (g.threads_opt->count() > 0) return g.threads;
  if (const char* env = std::getenv("SKETCHCV_THREADS")) {
    try {
      return static_cast<unsigned>(std::stoul(env));
    } catch (const std::exception&) {
      throw UsageError("SKETCHCV_THREADS must be a non-negative integer");
    }
  }
  unsigned t = 0;
  from_config(cfg, "threads", t);
  return t;
}

std::uint64_t resolve_seed(const GlobalOptions& g, const json& cfg) {
  std::uint64_t seed = g.seed;
  if (g.seed_opt->count() == 0) from_config(cfg, "base_seed", seed);
  return seed;
}

Scheme parse_scheme(const std::string& s) {
  if (s == "fh" || s == "feature-hash" || s == "FeatureHash") return Scheme::FeatureHash;
  if (s == "rp" || s == "random-projection" || s == "RandomProjection") return Scheme::RandomProjection;
  throw UsageError("scheme must be fh or rp");
}

ProbeKind parse_probe(const std::string& s) {
  if (s == "gaussian") return ProbeKind::Gaussian;
  if (s == "rademacher") return ProbeKind::Rademacher;
  throw UsageError("probe must be gaussian or rademacher");
}

bool want_csv(const GlobalOptions& g) { return g.format == "csv" || g.format == "both"; }
bool want_json(const GlobalOptions& g) { return g.format == "json" || g.format == "both"; }

void write_file(const GlobalOptions& g, const std::string& name, const std::string& content) {
  std::error_code ec;
  fs::create_directories(g.out_dir, ec);
  const fs::path path = fs::path(g.out_dir) / name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  out.close();
  if (!out) throw IoError("cannot write " + path.string());
  std::cerr << "wrote " << path.string() << "\n";
}

// ---- inner-product ---------------------------------------------------------

struct InnerProductFlags {
  std::string scheme;
  std::vector<std::size_t> k;
  std::vector<double> ratios;
  std::vector<double> angles;
  std::size_t trials = 0;
  long long d = 0;
  std::vector<std::string> methods;
  double eps_rel = 0.0;
  int max_iter = 0;
  double secant_offset = 0.0;
  CLI::App* app = nullptr;
};

bool given(const CLI::App* app, const char* name) { return app->get_option(name)->count() > 0; }

int cmd_inner_product(const GlobalOptions& g, const InnerProductFlags& f) {
  const json cfg = load_config(g.config_path);
  reject_unknown_keys(cfg, {"d", "ratios", "angles", "k_values", "trials", "base_seed", "scheme", "solver",
                            "methods", "threads"});
  ExperimentConfig c;
  long long d = c.d;
  from_config(cfg, "d", d);
  from_config(cfg, "ratios", c.ratios);
  from_config(cfg, "angles", c.angles);
  from_config(cfg, "k_values", c.k_values);
  long long trials = static_cast<long long>(c.trials);
  from_config(cfg, "trials", trials);
  if (cfg.contains("scheme")) c.scheme = parse_scheme(cfg["scheme"].get<std::string>());
  if (cfg.contains("solver")) {
    const json& s = cfg["solver"];
    reject_unknown_keys(s, {"eps_rel", "max_iter", "secant_offset_rel"});
    from_config(s, "eps_rel", c.solver.eps_rel);
    from_config(s, "max_iter", c.solver.max_iter);
    from_config(s, "secant_offset_rel", c.solver.secant_offset_rel);
  }
  if (cfg.contains("methods")) {
    c.methods.clear();
    for (const auto& m : cfg["methods"]) c.methods.push_back(parse_method(m.get<std::string>()));
  }

  const CLI::App* app = f.app;
  if (given(app, "--scheme")) c.scheme = parse_scheme(f.scheme);
  if (given(app, "--k")) c.k_values = f.k;
  if (given(app, "--ratios")) c.ratios = f.ratios;
  if (given(app, "--angles")) c.angles = f.angles;
  if (given(app, "--trials")) trials = static_cast<long long>(f.trials);
  if (given(app, "--d")) d = f.d;
  if (given(app, "--eps-rel")) c.solver.eps_rel = f.eps_rel;
  if (given(app, "--max-iter")) c.solver.max_iter = f.max_iter;
  if (given(app, "--secant-offset")) c.solver.secant_offset_rel = f.secant_offset;
  if (given(app, "--methods")) {
    c.methods.clear();
    for (const auto& m : f.methods) c.methods.push_back(parse_method(m));
  }
  if (trials < 1) throw UsageError("trials must be ≥ 1");
  c.trials = static_cast<std::size_t>(trials);
  c.d = static_cast<Index>(d);
  c.base_seed = resolve_seed(g, cfg);
  c.threads = resolve_cli_threads(g, cfg);
  c.validate();

  const auto rows = run_inner_product(c);
  if (want_csv(g)) write_file(g, "inner_product.csv", inner_product_csv(rows));
  if (want_json(g)) write_file(g, "inner_product.json", inner_product_json(rows));
  return kExitOk;
}

// ---- trace -----------------------------------------------------------------

struct TraceFlags {
  std::string matrix;
  std::vector<double> b_diag;
  std::string probe;
  std::vector<std::string> methods;
  std::vector<std::size_t> k;
  std::size_t trials = 0;
  CLI::App* app = nullptr;
};

int cmd_trace(const GlobalOptions& g, const TraceFlags& f) {
  const json cfg = load_config(g.config_path);
  reject_unknown_keys(cfg, {"matrix", "b_diag", "probe", "methods", "k_values", "trials", "base_seed", "threads"});
  TraceConfig c;
  std::string matrix_path;
  from_config(cfg, "matrix", matrix_path);
  std::vector<double> b_diag;
  from_config(cfg, "b_diag", b_diag);
  if (cfg.contains("probe")) c.kind = parse_probe(cfg["probe"].get<std::string>());
  if (cfg.contains("methods")) {
    c.methods.clear();
    for (const auto& m : cfg["methods"]) c.methods.push_back(parse_trace_method(m.get<std::string>()));
  }
  from_config(cfg, "k_values", c.k_values);
  long long trials = static_cast<long long>(c.trials);
  from_config(cfg, "trials", trials);

  const CLI::App* app = f.app;
  if (given(app, "--matrix")) matrix_path = f.matrix;
  if (given(app, "--b-diag")) b_diag = f.b_diag;
  if (given(app, "--probe")) c.kind = parse_probe(f.probe);
  if (given(app, "--k")) c.k_values = f.k;
  if (given(app, "--trials")) trials = static_cast<long long>(f.trials);
  if (given(app, "--methods")) {
    c.methods.clear();
    for (const auto& m : f.methods) c.methods.push_back(parse_trace_method(m));
  }
  if (matrix_path.empty()) throw UsageError("a matrix file is required (--matrix)");
  if (trials < 1) throw UsageError("trials must be ≥ 1");
  c.trials = static_cast<std::size_t>(trials);
  c.m = read_symmetric_matrix_file(matrix_path);
  if (!b_diag.empty()) c.b_diag = Eigen::Map<const Vector>(b_diag.data(), static_cast<Index>(b_diag.size()));
  c.base_seed = resolve_seed(g, cfg);
  c.threads = resolve_cli_threads(g, cfg);

  const auto rows = run_trace(c);
  if (want_csv(g)) write_file(g, "trace.csv", trace_csv(rows));
  if (want_json(g)) write_file(g, "trace.json", trace_json(rows));
  return kExitOk;
}

// ---- equivalence -----------------------------------------------------------

struct EquivalenceFlags {
  std::string p;
  std::string t;
  std::size_t trials = 1000;
  std::vector<double> sigma;
  long long n = 1;
  std::string dump = "equivalence_failure.txt";
  CLI::App* app = nullptr;
};

std::pair<long long, long long> parse_range(const std::string& s, const char* what) {
  try {
    const auto dash = s.find('-');
    if (dash == std::string::npos) {
      const long long v = std::stoll(s);
      return {v, v};
    }
    return {std::stoll(s.substr(0, dash)), std::stoll(s.substr(dash + 1))};
  } catch (const std::exception&) {
    throw UsageError(std::string(what) + " must be an integer or a range a-b");
  }
}

double rel_dev(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale > 0.0 ? std::abs(a - b) / scale : 0.0;
}

Matrix random_spd(SeededRng& rng, Index p) {
  Matrix g(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) g(i, j) = rng.normal();
  }
  Matrix v = g * g.transpose() / static_cast<double>(p);
  v.diagonal().array() += 0.1;
  return 0.5 * (v + v.transpose());
}

void dump_matrix(const GlobalOptions& g, const std::string& name, const Matrix& v, Index t, double dev) {
  std::ostringstream os;
  os.precision(17);
  os << "# t = " << t << ", relative deviation = " << dev << "\n" << v.rows() << "\n";
  for (Index i = 0; i < v.rows(); ++i) {
    for (Index j = 0; j < v.cols(); ++j) os << (j ? " " : "") << v(i, j);
    os << "\n";
  }
  write_file(g, name, os.str());
}

int cmd_equivalence(const GlobalOptions& g, const EquivalenceFlags& f) {
  const json cfg = load_config(g.config_path);
  reject_unknown_keys(cfg, {"p", "t", "trials", "sigma", "n", "base_seed", "threads"});
  std::string p_spec = "2-8";
  std::string t_spec;
  long long trials = static_cast<long long>(f.trials);
  std::vector<double> sigma;
  long long n = f.n;
  from_config(cfg, "p", p_spec);
  from_config(cfg, "t", t_spec);
  const bool p_given = cfg.contains("p") || given(f.app, "--p");
  from_config(cfg, "trials", trials);
  from_config(cfg, "sigma", sigma);
  from_config(cfg, "n", n);
  const CLI::App* app = f.app;
  if (given(app, "--p")) p_spec = f.p;
  if (given(app, "--t")) t_spec = f.t;
  if (given(app, "--trials")) trials = static_cast<long long>(f.trials);
  if (given(app, "--sigma")) sigma = f.sigma;
  if (given(app, "--n")) n = f.n;
  if (!sigma.empty() && !p_given) p_spec = "3";
  if (trials < 1) throw UsageError("trials must be ≥ 1");
  if (n < 1) throw UsageError("n must be ≥ 1");

  const auto [p_lo, p_hi] = parse_range(p_spec, "--p");
  if (p_lo < 2 || p_hi < p_lo) throw UsageError("p must satisfy 2 ≤ p_min ≤ p_max");
  long long t_lo = 1, t_hi = p_hi - 1;
  if (!t_spec.empty()) std::tie(t_lo, t_hi) = parse_range(t_spec, "--t");
  if (t_lo < 1 || t_hi < t_lo) throw UsageError("t must satisfy 1 ≤ t_min ≤ t_max");
  if (t_lo >= p_hi) throw UsageError("t must be < p");

  std::string csv = "case,p,t,mle_variance,cve_variance,relative_deviation\n";
  json rows = json::array();
  double max_dev = 0.0;

  if (!sigma.empty()) {
    if (sigma.size() != 3) throw UsageError("--sigma takes s11,s22,s12");
    // Ordering (y1, y2 | y3): the two variances are known, the covariance is estimated.
    if (p_lo != 3 || p_hi != 3 || (!t_spec.empty() && (t_lo != 2 || t_hi != 2))) {
      throw UsageError("--sigma needs --p 3 --t 2");
    }
    const BivariateNormalParams params{sigma[0], sigma[1], sigma[2]};
    try {
      params.validate();
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    const CovarianceModel model = bivariate_sigma12_model(params, static_cast<Index>(n));
    const Vector alpha = Vector::Ones(1);
    const double cve = cve_variance(model, alpha);
    const double mle = mle_variance(model, alpha);
    const double closed = bivariate_sigma12_variance(params, static_cast<Index>(n));
    const CvWeights w = cv_weights(model, alpha);
    max_dev = std::max(rel_dev(mle, cve), rel_dev(cve, closed));
    std::cout << "CVE variance " << format_double(cve) << "\n"
              << "MLE variance " << format_double(mle) << "\n"
              << "closed form  " << format_double(closed) << "\n"
              << "weights      " << format_double(w.c(0)) << " " << format_double(w.c(1)) << "\n";
    csv += "bivariate,3,2," + format_double(mle) + "," + format_double(cve) + "," + format_double(max_dev) + "\n";
    rows.push_back({{"case", "bivariate"}, {"p", 3}, {"t", 2}, {"mle_variance", mle}, {"cve_variance", cve},
                    {"relative_deviation", max_dev}});
    if (max_dev > 1e-9) {
      dump_matrix(g, f.dump, model.v(), model.t(), max_dev);
    }
  } else {
    const std::uint64_t seed = resolve_seed(g, cfg);
    std::optional<std::pair<Matrix, Index>> worst;
    double worst_dev = -1.0;
    for (long long i = 0; i < trials; ++i) {
      SeededRng rng(seed, hash64(0xE0, static_cast<std::uint64_t>(i)));
      const Index p = p_lo + static_cast<Index>(rng.below(static_cast<std::uint64_t>(p_hi - p_lo + 1)));
      const Index t_max = std::min<Index>(static_cast<Index>(t_hi), p - 1);
      const Index t_min = std::min<Index>(static_cast<Index>(t_lo), t_max);
      const Index t = t_min + static_cast<Index>(rng.below(static_cast<std::uint64_t>(t_max - t_min + 1)));
      const CovarianceModel model(random_spd(rng, p), t, static_cast<Index>(n));
      Vector alpha(t);
      for (Index j = 0; j < t; ++j) alpha(j) = rng.normal();
      const double mle = mle_variance(model, alpha);
      const double cve = cve_variance(model, alpha);
      double dev = rel_dev(mle, cve);
      // Element-wise Schur identity on the full blocks.
      const Partition part = partition(model);
      const Matrix schur = part.a - part.b * part.d.llt().solve(part.b.transpose());
      const Matrix inv_block = model.v().llt().solve(Matrix::Identity(p, p)).topLeftCorner(t, t);
      const Matrix via_inverse = inv_block.llt().solve(Matrix::Identity(t, t));
      const double scale = schur.cwiseAbs().maxCoeff();
      dev = std::max(dev, (schur - via_inverse).cwiseAbs().maxCoeff() / scale);
      max_dev = std::max(max_dev, dev);
      if (dev > worst_dev) {
        worst_dev = dev;
        worst = std::make_pair(model.v(), t);
      }
      csv += std::to_string(i) + "," + std::to_string(p) + "," + std::to_string(t) + "," + format_double(mle) +
             "," + format_double(cve) + "," + format_double(dev) + "\n";
      rows.push_back({{"case", i}, {"p", p}, {"t", t}, {"mle_variance", mle}, {"cve_variance", cve},
                      {"relative_deviation", dev}});
    }
    for (const BivariateNormalParams params : {BivariateNormalParams{1, 1, 0.5}, BivariateNormalParams{2, 3, 1},
                                                BivariateNormalParams{1, 1, 0}}) {
      const CovarianceModel model = bivariate_sigma12_model(params, static_cast<Index>(n));
      const Vector alpha = Vector::Ones(1);
      const double cve = cve_variance(model, alpha);
      const double mle = mle_variance(model, alpha);
      const double dev = std::max(rel_dev(mle, cve), rel_dev(cve, bivariate_sigma12_variance(params, model.n())));
      max_dev = std::max(max_dev, dev);
      csv += "bivariate,3,2," + format_double(mle) + "," + format_double(cve) + "," + format_double(dev) + "\n";
      rows.push_back({{"case", "bivariate"}, {"p", 3}, {"t", 2}, {"mle_variance", mle}, {"cve_variance", cve},
                      {"relative_deviation", dev}});
    }
    if (max_dev > 1e-9 && worst) dump_matrix(g, f.dump, worst->first, worst->second, worst_dev);
  }

  std::cout << "max relative deviation " << format_double(max_dev) << "\n";
  if (want_csv(g)) write_file(g, "equivalence.csv", csv);
  if (want_json(g)) write_file(g, "equivalence.json", rows.dump(2) + "\n");
  return max_dev <= 1e-9 ? kExitOk : kExitIdentity;
}

// ---- convergence -----------------------------------------------------------

struct ConvergenceFlags {
  std::size_t k = 100;
  std::size_t trials = 0;
  long long d = 0;
  double r = 1.0;
  double theta = 0.0;
  std::string scheme;
  double eps_rel = 0.0;
  bool self_test = false;
  CLI::App* app = nullptr;
};

int convergence_self_test(const GlobalOptions& g) {
  // e_{n+1} = 0.5 e_n^2 and e_{n+1} = 0.3 e_n around the root 0, so the
  // iterates are the errors themselves and carry no cancellation.
  std::vector<double> quad{0.9}, lin{0.9};
  for (int i = 0; i < 7; ++i) quad.push_back(0.5 * quad.back() * quad.back());
  for (int i = 0; i < 12; ++i) lin.push_back(0.3 * lin.back());
  const ConvergenceFit fq = convergence_fit({quad}, 0.0, 1e-300);
  const ConvergenceFit fl = convergence_fit({lin}, 0.0, 1e-300);
  std::string csv = "method,alpha,c,points_used\n";
  csv += "SyntheticQuadratic," + format_double(fq.alpha) + "," + format_double(std::exp(fq.log_c)) + "," +
         std::to_string(fq.points_used) + "\n";
  csv += "SyntheticLinear," + format_double(fl.alpha) + "," + format_double(std::exp(fl.log_c)) + "," +
         std::to_string(fl.points_used) + "\n";
  std::cout << csv;
  if (want_csv(g)) write_file(g, "convergence.csv", csv);
  const bool ok = std::abs(fq.alpha - 2.0) <= 1e-8 && std::abs(fl.alpha - 1.0) <= 1e-8;
  return ok ? kExitOk : kExitIdentity;
}

int cmd_convergence(const GlobalOptions& g, const ConvergenceFlags& f) {
  if (f.self_test) return convergence_self_test(g);
  const json cfg = load_config(g.config_path);
  reject_unknown_keys(cfg, {"d", "r", "theta", "k", "trials", "base_seed", "scheme", "eps_rel", "threads"});
  ConvergenceConfig c;
  long long d = c.d;
  long long trials = static_cast<long long>(c.trials);
  from_config(cfg, "d", d);
  from_config(cfg, "r", c.r);
  from_config(cfg, "theta", c.theta);
  from_config(cfg, "k", c.k);
  from_config(cfg, "trials", trials);
  from_config(cfg, "eps_rel", c.eps_rel);
  if (cfg.contains("scheme")) c.scheme = parse_scheme(cfg["scheme"].get<std::string>());
  const CLI::App* app = f.app;
  if (given(app, "--k")) c.k = f.k;
  if (given(app, "--trials")) trials = static_cast<long long>(f.trials);
  if (given(app, "--d")) d = f.d;
  if (given(app, "--r")) c.r = f.r;
  if (given(app, "--theta")) c.theta = f.theta;
  if (given(app, "--scheme")) c.scheme = parse_scheme(f.scheme);
  if (given(app, "--eps-rel")) c.eps_rel = f.eps_rel;
  if (trials < 1) throw UsageError("trials must be ≥ 1");
  c.trials = static_cast<std::size_t>(trials);
  c.d = static_cast<Index>(d);
  c.base_seed = resolve_seed(g, cfg);
  c.threads = resolve_cli_threads(g, cfg);
  c.validate();

  const ConvergenceReport report = run_convergence(c);
  if (want_csv(g)) {
    write_file(g, "convergence.csv", convergence_csv(report));
    write_file(g, "convergence_samples.csv", convergence_samples_csv(report));
  }
  if (want_json(g)) write_file(g, "convergence.json", convergence_json(report));
  return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Control-variate and maximum-likelihood estimators for sketches and traces"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_path, "JSON config file; flags override its values");
  g.seed_opt = app.add_option("--seed", g.seed, "Base seed (default 42)");
  app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();
  app.add_option("--format", g.format, "Output format")
      ->check(CLI::IsMember({"csv", "json", "both"}))
      ->capture_default_str();
  g.threads_opt = app.add_option("--threads", g.threads, "Worker threads, 0 = auto (env SKETCHCV_THREADS)");

  InnerProductFlags ip;
  ip.app = app.add_subcommand("inner-product", "Sketched inner-product benchmark");
  ip.app->add_option("--scheme", ip.scheme, "fh or rp");
  ip.app->add_option("--k", ip.k, "Sketch sizes")->delimiter(',');
  ip.app->add_option("--ratios", ip.ratios, "Squared-norm ratios r")->delimiter(',');
  ip.app->add_option("--angles", ip.angles, "Angles in radians")->delimiter(',');
  ip.app->add_option("--trials", ip.trials, "Trials per cell");
  ip.app->add_option("--d", ip.d, "Vector dimension");
  ip.app->add_option("--methods", ip.methods, "baseline,nr,secant,cv-init,cv-emp,cv-em")->delimiter(',');
  ip.app->add_option("--eps-rel", ip.eps_rel, "Tolerance relative to sqrt(n1 n2)");
  ip.app->add_option("--max-iter", ip.max_iter, "Iteration cap");
  ip.app->add_option("--secant-offset", ip.secant_offset, "Secant start offset relative to sqrt(n1 n2)");

  TraceFlags tr;
  tr.app = app.add_subcommand("trace", "Stochastic trace estimators");
  tr.app->add_option("--matrix", tr.matrix, "Matrix file");
  tr.app->add_option("--b-diag", tr.b_diag, "Diagonal of B (default identity)")->delimiter(',');
  tr.app->add_option("--probe", tr.probe, "gaussian or rademacher");
  tr.app->add_option("--methods", tr.methods, "hutchinson,adams,adams-emp,diag-cv,bekas")->delimiter(',');
  tr.app->add_option("--k", tr.k, "Probe counts")->delimiter(',');
  tr.app->add_option("--trials", tr.trials, "Repetitions per k");

  EquivalenceFlags eq;
  eq.app = app.add_subcommand("equivalence", "MLE and control-variate variance identity checks");
  eq.app->add_option("--p", eq.p, "Dimension or range, e.g. 2-8");
  eq.app->add_option("--t", eq.t, "Partition index or range");
  eq.app->add_option("--trials", eq.trials, "Random covariance models");
  eq.app->add_option("--sigma", eq.sigma, "Bivariate normal s11,s22,s12")->delimiter(',');
  eq.app->add_option("--n", eq.n, "Observation count");
  eq.app->add_option("--dump", eq.dump, "File name for the offending matrix");

  ConvergenceFlags cv;
  cv.app = app.add_subcommand("convergence", "Empirical convergence order of the solvers");
  cv.app->add_option("--k", cv.k, "Sketch size");
  cv.app->add_option("--trials", cv.trials, "Trials");
  cv.app->add_option("--d", cv.d, "Vector dimension");
  cv.app->add_option("--r", cv.r, "Squared-norm ratio");
  cv.app->add_option("--theta", cv.theta, "Angle in radians");
  cv.app->add_option("--scheme", cv.scheme, "fh or rp");
  cv.app->add_option("--eps-rel", cv.eps_rel, "Tolerance relative to sqrt(n1 n2)");
  cv.app->add_flag("--self-test", cv.self_test, "Fit constructed quadratic and linear sequences");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (ip.app->parsed()) return cmd_inner_product(g, ip);
    if (tr.app->parsed()) return cmd_trace(g, tr);
    if (eq.app->parsed()) return cmd_equivalence(g, eq);
    if (cv.app->parsed()) return cmd_convergence(g, cv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::Io ? kExitIo : kExitUsage;
  } catch (const json::exception& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}

}  // namespace sketchcv
