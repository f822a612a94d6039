#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "sketchcv/bench.hpp"
#include "sketchcv/efamily.hpp"
#include "sketchcv/error.hpp"
#include "sketchcv/inner_product.hpp"
#include "sketchcv/sketch.hpp"
#include "sketchcv/stats.hpp"
#include "sketchcv/trace.hpp"

namespace py = pybind11;
using namespace sketchcv;

namespace {

py::dict summary_to_dict(const SummaryStats& s) {
  py::dict d;
  d["scheme"] = to_string(s.scheme);
  d["method"] = to_string(s.method);
  d["k"] = s.k;
  d["r"] = s.r;
  d["theta"] = s.theta;
  d["truth"] = s.truth;
  d["mse"] = s.mse;
  d["mean"] = s.mean;
  d["variance"] = s.variance;
  d["median"] = s.median;
  d["q1"] = s.q1;
  d["q3"] = s.q3;
  d["outlier_fraction"] = s.outlier_fraction;
  d["mean_iterations"] = s.mean_iterations;
  d["median_iterations"] = s.median_iterations;
  d["nonconverged_fraction"] = s.nonconverged_fraction;
  d["three_root_fraction"] = s.three_root_fraction;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Control-variate and maximum-likelihood estimators for sketched inner products and traces";

  static py::exception<Error> sketchcv_error(m, "SketchcvError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(sketchcv_error, (std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  // efamily
  py::class_<CovarianceModel>(m, "CovarianceModel")
      .def(py::init<Matrix, Index, Index>(), py::arg("v"), py::arg("t"), py::arg("n") = 1)
      .def_property_readonly("v", &CovarianceModel::v)
      .def_property_readonly("p", &CovarianceModel::p)
      .def_property_readonly("t", &CovarianceModel::t)
      .def_property_readonly("n", &CovarianceModel::n);

  m.def("partition", [](const CovarianceModel& model) {
    const Partition part = partition(model);
    return py::make_tuple(part.a, part.b, part.d);
  });
  m.def("cv_weights", [](const CovarianceModel& model, const Vector& alpha) { return cv_weights(model, alpha).c; },
        py::arg("model"), py::arg("alpha"));
  m.def("cve_variance", &cve_variance, py::arg("model"), py::arg("alpha"));
  m.def("mle_variance", &mle_variance, py::arg("model"), py::arg("alpha"));
  m.def("reparametrize", &reparametrize, py::arg("model"), py::arg("a"));
  m.def(
      "bivariate_normal_cov",
      [](double s11, double s22, double s12, Index k, Index t) {
        return bivariate_normal_cov({s11, s22, s12}, k, t);
      },
      py::arg("sigma11"), py::arg("sigma22"), py::arg("sigma12"), py::arg("k") = 1, py::arg("t") = 2);
  m.def(
      "bivariate_sigma12_model",
      [](double s11, double s22, double s12, Index k) { return bivariate_sigma12_model({s11, s22, s12}, k); },
      py::arg("sigma11"), py::arg("sigma22"), py::arg("sigma12"), py::arg("k") = 1);

  // sketch
  py::enum_<Scheme>(m, "Scheme")
      .value("FeatureHash", Scheme::FeatureHash)
      .value("RandomProjection", Scheme::RandomProjection);

  py::class_<SuffStats>(m, "SuffStats")
      .def(py::init([](double w1, double w2, double w3, std::size_t k) { return SuffStats{w1, w2, w3, k}; }),
           py::arg("w1"), py::arg("w2"), py::arg("w3"), py::arg("k") = 0)
      .def_readwrite("w1", &SuffStats::w1)
      .def_readwrite("w2", &SuffStats::w2)
      .def_readwrite("w3", &SuffStats::w3)
      .def_readwrite("k", &SuffStats::k);

  py::class_<SketchPair>(m, "SketchPair")
      .def(py::init([](Vector vi, Vector vj, double n1, double n2, Scheme scheme) {
             SketchPair p{std::move(vi), std::move(vj), n1, n2, scheme};
             p.validate();
             return p;
           }),
           py::arg("vi"), py::arg("vj"), py::arg("norm_i_sq"), py::arg("norm_j_sq"),
           py::arg("scheme") = Scheme::FeatureHash)
      .def_readonly("vi", &SketchPair::vi)
      .def_readonly("vj", &SketchPair::vj)
      .def_readonly("norm_i_sq", &SketchPair::norm_i_sq)
      .def_readonly("norm_j_sq", &SketchPair::norm_j_sq);

  m.def("suff_stats", &suff_stats, py::arg("pair"));
  m.def(
      "feature_hash",
      [](const Vector& x, std::size_t k, std::vector<std::size_t> buckets, std::vector<int> signs) {
        const HashPair h = HashPair::from_tables(k, std::move(buckets), std::move(signs));
        return feature_hash({x.data(), static_cast<std::size_t>(x.size())}, k, h);
      },
      py::arg("x"), py::arg("k"), py::arg("buckets"), py::arg("signs"));
  m.def(
      "random_projection",
      [](const Vector& x, const Matrix& r) { return random_projection({x.data(), static_cast<std::size_t>(x.size())}, r); },
      py::arg("x"), py::arg("r"));
  m.def(
      "generate_vector_pair",
      [](Index d, double r, double theta, std::uint64_t seed, std::uint64_t stream) {
        SeededRng rng(seed, stream);
        return generate_vector_pair(d, r, theta, rng);
      },
      py::arg("d"), py::arg("r"), py::arg("theta"), py::arg("seed") = 42, py::arg("stream") = 0);

  // inner_product
  py::class_<CubicPoly>(m, "CubicPoly")
      .def(py::init([](double c2, double c1, double c0) { return CubicPoly{c2, c1, c0}; }), py::arg("c2"),
           py::arg("c1"), py::arg("c0"))
      .def_readonly("c2", &CubicPoly::c2)
      .def_readonly("c1", &CubicPoly::c1)
      .def_readonly("c0", &CubicPoly::c0)
      .def("__call__", &CubicPoly::operator())
      .def("discriminant", &CubicPoly::discriminant);

  m.def("mle_cubic", &mle_cubic, py::arg("stats"), py::arg("n1"), py::arg("n2"));
  m.def("count_real_roots", [](const CubicPoly& c) { return classify_roots(c).count; });
  m.def("real_roots", &real_roots);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_static("scaled", &SolverConfig::scaled, py::arg("n1"), py::arg("n2"), py::arg("eps_rel") = 1e-9,
                  py::arg("max_iter") = 100, py::arg("offset_rel") = 0.05)
      .def_readwrite("eps", &SolverConfig::eps)
      .def_readwrite("max_iter", &SolverConfig::max_iter)
      .def_readwrite("secant_lo", &SolverConfig::secant_lo)
      .def_readwrite("secant_hi", &SolverConfig::secant_hi);

  py::class_<EstimatorResult>(m, "EstimatorResult")
      .def_readonly("estimate", &EstimatorResult::estimate)
      .def_readonly("iterations", &EstimatorResult::iterations)
      .def_readonly("converged", &EstimatorResult::converged)
      .def_readonly("trace", &EstimatorResult::trace)
      .def_readonly("fell_back", &EstimatorResult::fell_back)
      .def_property_readonly("method", [](const EstimatorResult& r) { return to_string(r.method); })
      .def_property_readonly("status", [](const EstimatorResult& r) { return to_string(r.status); });

  m.def("baseline", &baseline, py::arg("stats"));
  m.def("cv_init", &cv_init, py::arg("stats"), py::arg("n1"), py::arg("n2"));
  m.def("cv_em", &cv_em, py::arg("stats"), py::arg("n1"), py::arg("n2"), py::arg("cfg"));
  m.def("cv_emp", &cv_emp, py::arg("pair"));
  m.def("mle_newton", &mle_newton, py::arg("cubic"), py::arg("x0"), py::arg("cfg"));
  m.def("mle_secant", &mle_secant, py::arg("cubic"), py::arg("x0"), py::arg("x1"), py::arg("cfg"));

  // trace
  py::enum_<ProbeKind>(m, "ProbeKind")
      .value("Gaussian", ProbeKind::Gaussian)
      .value("Rademacher", ProbeKind::Rademacher);

  m.def(
      "draw_probes",
      [](Index d, Index k, ProbeKind kind, std::uint64_t seed, std::uint64_t stream) {
        return ProbeBatch::draw(SeededRng(seed, stream), d, k, kind).r;
      },
      py::arg("d"), py::arg("k"), py::arg("kind") = ProbeKind::Gaussian, py::arg("seed") = 42,
      py::arg("stream") = 0);

  auto batch = [](const Matrix& r, ProbeKind kind) { return ProbeBatch{r, kind}; };
  m.def(
      "hutchinson",
      [batch](const Matrix& mm, const Vector& b, const Matrix& r, ProbeKind kind) {
        return hutchinson(TraceProblem(mm, b), batch(r, kind)).value;
      },
      py::arg("m"), py::arg("b_diag"), py::arg("probes"), py::arg("kind") = ProbeKind::Gaussian);
  m.def(
      "adams_cv",
      [batch](const Matrix& mm, const Vector& b, const Matrix& r, std::optional<double> tr_mb, ProbeKind kind) {
        const AdamsMode mode = tr_mb ? AdamsMode{AdamsTheoretical{*tr_mb}} : AdamsMode{AdamsEmpirical{}};
        return adams_cv(TraceProblem(mm, b), batch(r, kind), mode).value;
      },
      py::arg("m"), py::arg("b_diag"), py::arg("probes"), py::arg("tr_mb") = py::none(),
      py::arg("kind") = ProbeKind::Gaussian);
  m.def(
      "diag_cv",
      [batch](const Matrix& mm, const Vector& b, const Matrix& r, const Vector& m_diag, ProbeKind kind) {
        return diag_cv(TraceProblem(mm, b), batch(r, kind), m_diag).value;
      },
      py::arg("m"), py::arg("b_diag"), py::arg("probes"), py::arg("m_diag"), py::arg("kind") = ProbeKind::Gaussian);
  m.def(
      "bekas_diag",
      [batch](const Matrix& mm, const Vector& b, const Matrix& r) {
        return bekas_diag(TraceProblem(mm, b), batch(r, ProbeKind::Gaussian));
      },
      py::arg("m"), py::arg("b_diag"), py::arg("probes"));
  m.def(
      "bekas",
      [batch](const Matrix& mm, const Vector& b, const Matrix& r) {
        return bekas(TraceProblem(mm, b), batch(r, ProbeKind::Gaussian)).value;
      },
      py::arg("m"), py::arg("b_diag"), py::arg("probes"));

  // bench
  m.def(
      "run_inner_product",
      [](Index d, std::vector<double> ratios, std::vector<double> angles, std::vector<std::size_t> k_values,
         std::size_t trials, std::uint64_t seed, Scheme scheme, unsigned threads) {
        ExperimentConfig c;
        c.d = d;
        c.ratios = std::move(ratios);
        c.angles = std::move(angles);
        c.k_values = std::move(k_values);
        c.trials = trials;
        c.base_seed = seed;
        c.scheme = scheme;
        c.threads = threads;
        std::vector<SummaryStats> rows;
        {
          py::gil_scoped_release release;
          rows = run_inner_product(c);
        }
        py::list out;
        for (const auto& s : rows) out.append(summary_to_dict(s));
        return out;
      },
      py::arg("d") = 1000, py::arg("ratios") = std::vector<double>{1.0},
      py::arg("angles") = std::vector<double>{0.26179938779914941},
      py::arg("k_values") = std::vector<std::size_t>{10, 20}, py::arg("trials") = 200, py::arg("seed") = 42,
      py::arg("scheme") = Scheme::FeatureHash, py::arg("threads") = 0);

  m.def(
      "boxplot_stats",
      [](const std::vector<double>& samples) {
        const BoxplotStats b = boxplot_stats(samples);
        py::dict d;
        d["median"] = b.median;
        d["q1"] = b.q1;
        d["q3"] = b.q3;
        d["whisker_lo"] = b.whisker_lo;
        d["whisker_hi"] = b.whisker_hi;
        d["outlier_fraction"] = b.outlier_fraction;
        return d;
      },
      py::arg("samples"));
}
