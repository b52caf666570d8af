// Python bindings for the main operations: mappings, bases, simulation,
// fitting, confidence regions, tests, and tuning.
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tvsieve/basis.hpp"
#include "tvsieve/estimator.hpp"
#include "tvsieve/inference.hpp"
#include "tvsieve/process.hpp"
#include "tvsieve/study.hpp"
#include "tvsieve/tuning.hpp"

namespace py = pybind11;
using namespace tvsieve;

namespace {

Mapping make_mapping(const std::string& kind, const std::string& domain, double scale) {
  Mapping mapping;
  if (kind == "algebraic")
    mapping.kind = MapKind::algebraic;
  else if (kind == "logarithmic")
    mapping.kind = MapKind::logarithmic;
  else
    throw ConfigError("unknown mapping kind '" + kind + "'");
  if (domain == "whole" || domain == "whole-line")
    mapping.domain = MapDomain::whole_line;
  else if (domain == "half" || domain == "half-line")
    mapping.domain = MapDomain::half_line;
  else
    throw ConfigError("unknown mapping domain '" + domain + "'");
  mapping.scale = scale;
  return mapping;
}

BasisFamily make_family(const std::string& name, double alpha, double beta, int order,
                        int resolution) {
  if (name == "fourier") return BasisFamily::fourier();
  if (name == "legendre") return BasisFamily::legendre();
  if (name == "chebyshev") return BasisFamily::chebyshev();
  if (name == "jacobi") return BasisFamily::jacobi(alpha, beta);
  if (name == "daubechies") return BasisFamily::daubechies(order, resolution);
  throw ConfigError("unknown basis family '" + name + "'");
}

InnovationModel make_innovation(const std::string& name) {
  if (name == "tv-ar2") return {InnovationKind::tv_ar2};
  if (name == "setar") return {InnovationKind::setar};
  if (name == "bilinear") return {InnovationKind::bilinear};
  throw ConfigError("unknown innovation model '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(tvsieve, m) {
  m.doc() = "Sieve estimation and multiplier-bootstrap inference for time-varying "
            "nonlinear time series regression";

  py::register_exception<DomainError>(m, "DomainError");
  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<SingularDesignError>(m, "SingularDesignError");

  py::class_<Mapping>(m, "Mapping")
      .def(py::init([](const std::string& kind, const std::string& domain, double scale) {
             return make_mapping(kind, domain, scale);
           }),
           py::arg("kind") = "algebraic", py::arg("domain") = "whole", py::arg("scale") = 1.0)
      .def("forward", [](const Mapping& self, double y) { return map_forward(y, self); })
      .def("inverse", [](const Mapping& self, double x) { return map_inverse(x, self); })
      .def_readonly("scale", &Mapping::scale);

  py::class_<BasisSet>(m, "BasisSet")
      .def(py::init([](const std::string& family, int count, double alpha, double beta,
                       int order, int resolution) {
             return BasisSet(make_family(family, alpha, beta, order, resolution), count);
           }),
           py::arg("family"), py::arg("count"), py::arg("alpha") = 0.0, py::arg("beta") = 0.0,
           py::arg("order") = 4, py::arg("resolution") = 3)
      .def(py::init([](const std::string& family, int count, const Mapping& mapping,
                       bool jacobian_weight, double alpha, double beta, int order,
                       int resolution) {
             return BasisSet(make_family(family, alpha, beta, order, resolution), count, mapping,
                             jacobian_weight);
           }),
           py::arg("family"), py::arg("count"), py::arg("mapping"),
           py::arg("jacobian_weight") = true, py::arg("alpha") = 0.0, py::arg("beta") = 0.0,
           py::arg("order") = 4, py::arg("resolution") = 3)
      .def_property_readonly("count", &BasisSet::count)
      .def("eval_time", &BasisSet::eval_time, py::arg("k"), py::arg("t"))
      .def("eval_mapped", &BasisSet::eval_mapped, py::arg("k"), py::arg("x"))
      .def("eval_all", &BasisSet::eval_all, py::arg("v"))
      .def("gram", [](const BasisSet& self, int grid) { return gram_matrix(self, grid); },
           py::arg("grid_size") = 4096);

  py::class_<Scenario>(m, "Scenario")
      .def(py::init([](int setup, double delta, const std::string& innovation, int lags) {
             return Scenario{setup, delta, make_innovation(innovation), lags};
           }),
           py::arg("setup"), py::arg("delta") = 0.0, py::arg("innovation") = "tv-ar2",
           py::arg("lags") = 1)
      .def_readonly("setup", &Scenario::setup)
      .def_readonly("delta", &Scenario::delta)
      .def("true_m",
           [](const Scenario& self, double t, double x) { return eval_true_m(self, t, x); })
      .def("true_sigma",
           [](const Scenario& self, double t, double x) { return eval_true_sigma(self, t, x); });

  m.def(
      "simulate",
      [](const Scenario& scenario, long n, std::uint64_t seed) {
        SimulatedSeries series = simulate_scenario(scenario, n, seed);
        return py::make_tuple(series.values, series.times);
      },
      py::arg("scenario"), py::arg("n"), py::arg("seed") = 1,
      "Simulate a scenario path; returns (values, times).");

  py::class_<RegressionData>(m, "RegressionData")
      .def(py::init([](Eigen::VectorXd y, Eigen::MatrixXd x, Eigen::VectorXd times) {
             RegressionData data;
             data.y = std::move(y);
             data.x = std::move(x);
             data.times = std::move(times);
             return data;
           }),
           py::arg("y"), py::arg("x"), py::arg("times"))
      .def_static("from_series", &RegressionData::from_series, py::arg("series"),
                  py::arg("lags") = 1)
      .def_readonly("y", &RegressionData::y)
      .def_readonly("x", &RegressionData::x)
      .def_readonly("times", &RegressionData::times);

  py::class_<SieveConfig>(m, "SieveConfig");
  m.def(
      "uniform_config",
      [](int r, int c0, int c, int d, const std::string& time_family,
         const std::string& state_family, const Mapping& mapping, bool jacobian_weight) {
        return SieveConfig::uniform(r, c0, c, d, make_family(time_family, 0, 0, 4, 3),
                                    make_family(state_family, 0, 0, 4, 3), mapping,
                                    jacobian_weight);
      },
      py::arg("r"), py::arg("c0"), py::arg("c"), py::arg("d"),
      py::arg("time_family") = "fourier", py::arg("state_family") = "fourier",
      py::arg("mapping") = make_mapping("algebraic", "whole", 1.0),
      py::arg("jacobian_weight") = true);

  py::class_<SieveFit, std::shared_ptr<SieveFit>>(m, "SieveFit")
      .def_property_readonly("beta", &SieveFit::beta)
      .def_property_readonly("residuals", &SieveFit::residuals)
      .def_property_readonly("condition_number", &SieveFit::condition_number)
      .def("eval_pilot", &SieveFit::eval_pilot, py::arg("j"), py::arg("t"), py::arg("x") = 0.0)
      .def("eval_chi", &SieveFit::eval_chi, py::arg("j"), py::arg("t"))
      .def("eval_corrected", &SieveFit::eval_corrected, py::arg("j"), py::arg("t"),
           py::arg("x") = 0.0);

  m.def("fit", &fit_model, py::arg("data"), py::arg("config"),
        "Pilot sieve least squares plus the identifiability correction.");

  py::class_<BootstrapConfig>(m, "BootstrapConfig")
      .def(py::init([](int m_block, int b_draws, int c_draws, int t_grid, int y_grid,
                       double alpha, std::uint64_t seed, double x_lo, double x_hi) {
             BootstrapConfig config;
             config.block_length = m_block;
             config.h_draws = b_draws;
             config.c_draws = c_draws;
             config.t_grid = t_grid;
             config.y_grid = y_grid;
             config.alpha = alpha;
             config.seed = seed;
             config.x_lo = x_lo;
             config.x_hi = x_hi;
             return config;
           }),
           py::arg("block_length") = 8, py::arg("b_draws") = 1000, py::arg("c_draws") = 1000,
           py::arg("t_grid") = 100, py::arg("y_grid") = 100, py::arg("alpha") = 0.05,
           py::arg("seed") = 1, py::arg("x_lo") = -10.0, py::arg("x_hi") = 10.0);

  py::class_<ScrGrid>(m, "ScrGrid")
      .def_readonly("t", &ScrGrid::t)
      .def_readonly("x", &ScrGrid::x)
      .def_readonly("m_hat", &ScrGrid::m_hat)
      .def_readonly("h_hat", &ScrGrid::h_hat)
      .def_readonly("lower", &ScrGrid::lower)
      .def_readonly("upper", &ScrGrid::upper)
      .def_readonly("c_alpha", &ScrGrid::c_alpha)
      .def_readonly("alpha", &ScrGrid::alpha)
      .def_readonly("degenerate_points", &ScrGrid::degenerate_points)
      .def("contains", &ScrGrid::contains, py::arg("surface"));

  m.def("build_scr", &build_scr, py::arg("fit"), py::arg("config"), py::arg("j") = 1,
        "Simultaneous confidence region for component j (Algorithm: multiplier bootstrap).");

  py::class_<TestReport>(m, "TestReport")
      .def_property_readonly("kind", &TestReport::kind_name)
      .def_readonly("t_obs", &TestReport::t_obs)
      .def_readonly("p_value", &TestReport::p_value)
      .def_readonly("reject", &TestReport::reject)
      .def_readonly("c_alpha", &TestReport::c_alpha)
      .def_readonly("band_exits", &TestReport::band_exits)
      .def_readonly("restricted", &TestReport::restricted);

  m.def("test_exact_form", &test_exact_form, py::arg("scr"), py::arg("m0"));
  m.def("test_homogeneity", &test_homogeneity, py::arg("scr"));
  m.def("test_separability", &test_separability, py::arg("scr"));

  m.def(
      "select_cd",
      [](const std::vector<double>& series, int lags, int c0,
         const std::vector<std::pair<int, int>>& candidates, int validation_length) {
        SieveTemplate tpl;
        tpl.c0 = c0;
        tpl.r = lags;
        tpl.mapping = make_mapping("algebraic", "whole", 1.0);
        std::vector<CdCandidate> cands;
        for (auto [c, d] : candidates) cands.push_back({c, d});
        int l = validation_length > 0 ? validation_length
                                      : default_validation_length(
                                            static_cast<long>(series.size()));
        CdSelection sel = select_cd(series, lags, tpl, cands, l);
        return py::make_tuple(py::make_tuple(sel.best.c, sel.best.d), sel.scores);
      },
      py::arg("series"), py::arg("lags"), py::arg("c0"), py::arg("candidates"),
      py::arg("validation_length") = 0,
      "Forecast cross-validation over (c,d); returns ((c,d), scores).");

  m.def(
      "select_m",
      [](const std::shared_ptr<SieveFit>& fit, std::vector<int> candidates, int h0) {
        if (candidates.empty()) candidates = default_m_ladder(fit->n());
        MSelection sel = select_m(*fit, candidates, h0);
        return py::make_tuple(sel.best, sel.interior, sel.se);
      },
      py::arg("fit"), py::arg("candidates") = std::vector<int>{}, py::arg("h0") = 3,
      "Minimum-volatility block length; returns (m, ladder, se).");

  m.def("centered_truth", &centered_truth, py::arg("scenario"), py::arg("t_grid"),
        py::arg("x_grid"), py::arg("samples") = 1000000,
        "Identifiability-centered true surface on a grid.");
}
