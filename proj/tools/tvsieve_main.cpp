// Command-line front end: simulate / fit / scr / test / tune / study.
#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "tvsieve/csv.hpp"
#include "tvsieve/errors.hpp"
#include "tvsieve/estimator.hpp"
#include "tvsieve/inference.hpp"
#include "tvsieve/process.hpp"
#include "tvsieve/study.hpp"
#include "tvsieve/tuning.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tvsieve;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  int workers = 1;
};

struct ScenarioOptions {
  int setup = 1;
  double delta = 0.0;
  std::string innovation = "tv-ar2";
  int lags = 1;
  long n = 500;
};

struct SieveOptions {
  std::string time_family = "fourier";
  std::string state_family = "fourier";
  int c0 = 4;
  int c = 4;
  int d = 7;
  int mean_shift_c = 0;
  std::string mapping = "algebraic";
  bool half_line = false;
  double scale = 1.0;
  bool no_weight = false;
  int wavelet_order = 9;
  int wavelet_resolution = 3;
};

struct BootOptions {
  double alpha = 0.05;
  int b_draws = 1000;
  int m_draws = 1000;
  int block_length = 0;  // 0: n^(1/3) rule; negative: minimum-volatility tuning
  bool tune_m = false;
  int t_grid = 100;
  int y_grid = 100;
  double x_lo = -10.0;
  double x_hi = 10.0;
  int component = 1;
};

InnovationModel parse_innovation(const std::string& name) {
  if (name == "tv-ar2") return {InnovationKind::tv_ar2};
  if (name == "setar") return {InnovationKind::setar};
  if (name == "bilinear") return {InnovationKind::bilinear};
  throw ConfigError("unknown innovation model '" + name + "'");
}

BasisFamily parse_family(const std::string& name, const SieveOptions& sieve) {
  if (name == "fourier") return BasisFamily::fourier();
  if (name == "legendre") return BasisFamily::legendre();
  if (name == "chebyshev") return BasisFamily::chebyshev();
  if (name == "daubechies")
    return BasisFamily::daubechies(sieve.wavelet_order, sieve.wavelet_resolution);
  if (name.rfind("jacobi:", 0) == 0) {
    auto comma = name.find(',', 7);
    if (comma == std::string::npos) throw ConfigError("jacobi family needs 'jacobi:a,b'");
    return BasisFamily::jacobi(std::stod(name.substr(7, comma - 7)),
                               std::stod(name.substr(comma + 1)));
  }
  throw ConfigError("unknown basis family '" + name + "'");
}

Mapping parse_mapping(const SieveOptions& sieve) {
  Mapping mapping;
  mapping.kind = sieve.mapping == "logarithmic" ? MapKind::logarithmic : MapKind::algebraic;
  if (sieve.mapping != "algebraic" && sieve.mapping != "logarithmic")
    throw ConfigError("unknown mapping kind '" + sieve.mapping + "'");
  mapping.domain = sieve.half_line ? MapDomain::half_line : MapDomain::whole_line;
  mapping.scale = sieve.scale;
  return mapping;
}

SieveTemplate make_template(const SieveOptions& sieve, int r) {
  SieveTemplate tpl;
  tpl.c0 = sieve.c0;
  tpl.r = r;
  tpl.time_family = parse_family(sieve.time_family, sieve);
  tpl.state_family = parse_family(sieve.state_family, sieve);
  tpl.mapping = parse_mapping(sieve);
  tpl.jacobian_weight = !sieve.no_weight;
  return tpl;
}

SieveConfig make_config(const SieveOptions& sieve, int r) {
  SieveConfig config = make_template(sieve, r).instantiate(sieve.c, sieve.d);
  if (sieve.mean_shift_c > 0)
    for (auto& cov : config.covariates) cov.mean_shift_count = sieve.mean_shift_c;
  return config;
}

json scenario_json(const ScenarioOptions& sc) {
  return json{{"setup", sc.setup},
              {"delta", sc.delta},
              {"innovation", sc.innovation},
              {"lags", sc.lags},
              {"n", sc.n}};
}

json sieve_json(const SieveOptions& sv) {
  return json{{"time_family", sv.time_family}, {"state_family", sv.state_family},
              {"c0", sv.c0},                   {"c", sv.c},
              {"d", sv.d},                     {"mean_shift_c", sv.mean_shift_c},
              {"mapping", sv.mapping},         {"half_line", sv.half_line},
              {"scale", sv.scale},             {"jacobian_weight", !sv.no_weight}};
}

json boot_json(const BootOptions& bt, int block_length) {
  return json{{"alpha", bt.alpha},   {"b_draws", bt.b_draws}, {"m_draws", bt.m_draws},
              {"block_length", block_length}, {"t_grid", bt.t_grid},  {"y_grid", bt.y_grid},
              {"x_lo", bt.x_lo},     {"x_hi", bt.x_hi},       {"component", bt.component}};
}

std::uint64_t config_digest(const json& j) {
  std::string dump = j.dump();
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char ch : dump) {
    hash ^= ch;
    hash *= 1099511628211ull;
  }
  return hash;
}

void write_manifest(const fs::path& path, json j) {
  if (!j.contains("digest")) j["digest"] = config_digest(j);
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw IngestError("cannot write manifest '" + path.string() + "'");
}

// Data ingestion for fit/scr/test/tune: either Y,X1..Xr columns or a single
// series column with --ar-lags.
RegressionData load_data(const std::string& input, int ar_lags, std::vector<double>* raw_series) {
  Table table = read_csv(input);
  if (ar_lags > 0) {
    const std::vector<double>* series = nullptr;
    for (const char* name : {"X", "Y", "value"}) {
      int idx = table.find(name);
      if (idx >= 0) {
        series = &table.columns[idx];
        break;
      }
    }
    if (!series) throw IngestError("'" + input + "': AR mode expects an 'X' column");
    if (raw_series) *raw_series = *series;
    return RegressionData::from_series(*series, ar_lags);
  }
  RegressionData data;
  const std::vector<double>& y = table.column("Y");
  const long n = static_cast<long>(y.size());
  int r = 0;
  while (table.find("X" + std::to_string(r + 1)) >= 0) ++r;
  if (r == 0) throw IngestError("'" + input + "': expected columns X1..Xr");
  data.y = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  data.x.resize(n, r);
  for (int j = 1; j <= r; ++j) {
    const std::vector<double>& col = table.column("X" + std::to_string(j));
    data.x.col(j - 1) = Eigen::Map<const Eigen::VectorXd>(col.data(), n);
  }
  if (int idx = table.find("t"); idx >= 0) {
    data.times = Eigen::Map<const Eigen::VectorXd>(table.columns[idx].data(), n);
  } else {
    data.times.resize(n);
    for (long i = 0; i < n; ++i) data.times(i) = static_cast<double>(i + 1) / n;
  }
  return data;
}

int resolve_block_length(const BootOptions& boot, const SieveFit& fit) {
  if (boot.tune_m) return select_m(fit, default_m_ladder(fit.n())).best;
  if (boot.block_length > 0) return boot.block_length;
  return std::max(1, static_cast<int>(std::lround(std::cbrt(static_cast<double>(fit.n())))));
}

BootstrapConfig make_bootstrap(const BootOptions& boot, const CommonOptions& common,
                               int block_length) {
  BootstrapConfig config;
  config.block_length = block_length;
  config.h_draws = boot.b_draws;
  config.c_draws = boot.m_draws;
  config.t_grid = boot.t_grid;
  config.y_grid = boot.y_grid;
  config.alpha = boot.alpha;
  config.seed = common.seed;
  config.x_lo = boot.x_lo;
  config.x_hi = boot.x_hi;
  return config;
}

void write_scr_csv(const fs::path& path, const ScrGrid& scr) {
  Table out;
  out.header = {"t", "x", "m_hat", "h_hat", "lower", "upper"};
  out.columns.resize(6);
  for (long i = 0; i < scr.t.size(); ++i)
    for (long l = 0; l < scr.x.size(); ++l) {
      out.columns[0].push_back(scr.t(i));
      out.columns[1].push_back(scr.x(l));
      out.columns[2].push_back(scr.m_hat(i, l));
      out.columns[3].push_back(scr.h_hat(i, l));
      out.columns[4].push_back(scr.lower(i, l));
      out.columns[5].push_back(scr.upper(i, l));
    }
  write_csv(path.string(), out);
}

json diagnostics_json(const SieveFit& fit) {
  std::vector<double> t_grid, x_grid;
  for (int i = 0; i <= 128; ++i) t_grid.push_back(i / 128.0);
  for (int i = 0; i <= 128; ++i) x_grid.push_back(-10.0 + 20.0 * i / 128.0);
  std::vector<BasisSet> time_sets{fit.config().intercept_basis};
  std::vector<TensorBasis> tensors;
  for (const auto& cov : fit.config().covariates) {
    time_sets.push_back(cov.time_basis);
    tensors.push_back(cov.tensor());
  }
  BasisDiagnostics diag = compute_basis_norms(time_sets, tensors, t_grid, x_grid);
  return json{{"xi", diag.xi},
              {"varsigma", diag.varsigma},
              {"iota", diag.iota},
              {"gamma", diag.gamma},
              {"zeta", diag.zeta},
              {"condition", fit.condition_number()},
              {"params", fit.total_params()},
              {"n", fit.n()}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-varying nonlinear regression by mapped sieves with multiplier-bootstrap "
               "simultaneous confidence regions"};
  app.require_subcommand(1);

  CommonOptions common;
  ScenarioOptions scenario;
  SieveOptions sieve;
  BootOptions boot;
  std::string input;
  int ar_lags = 0;

  // --config JSON files supply defaults; explicit flags win
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") common.config_path = argv[i + 1];
  if (!common.config_path.empty()) {
    std::ifstream in(common.config_path);
    if (!in) {
      std::cerr << "cannot open config '" << common.config_path << "'\n";
      return 2;
    }
    json cfg = json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (cfg.is_discarded()) {
      std::cerr << "config '" << common.config_path << "' is not valid JSON\n";
      return 2;
    }
    auto load = [&](const char* key, auto& field) {
      if (cfg.contains(key)) field = cfg[key].get<std::decay_t<decltype(field)>>();
    };
    load("seed", common.seed);
    load("out_dir", common.out_dir);
    load("workers", common.workers);
    load("setup", scenario.setup);
    load("delta", scenario.delta);
    load("innovation", scenario.innovation);
    load("lags", scenario.lags);
    load("n", scenario.n);
    load("time_family", sieve.time_family);
    load("state_family", sieve.state_family);
    load("c0", sieve.c0);
    load("c", sieve.c);
    load("d", sieve.d);
    load("mean_shift_c", sieve.mean_shift_c);
    load("mapping", sieve.mapping);
    load("half_line", sieve.half_line);
    load("scale", sieve.scale);
    load("alpha", boot.alpha);
    load("b_draws", boot.b_draws);
    load("m_draws", boot.m_draws);
    load("block_length", boot.block_length);
    load("t_grid", boot.t_grid);
    load("y_grid", boot.y_grid);
    load("x_lo", boot.x_lo);
    load("x_hi", boot.x_hi);
    load("component", boot.component);
    if (cfg.contains("jacobian_weight")) sieve.no_weight = !cfg["jacobian_weight"].get<bool>();
  }

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", common.config_path, "JSON config file with defaults");
    cmd->add_option("--out-dir", common.out_dir, "output directory");
    cmd->add_option("--seed", common.seed, "master seed");
    cmd->add_option("--workers", common.workers, "worker threads (study)");
  };
  auto add_scenario = [&](CLI::App* cmd) {
    cmd->add_option("--setup", scenario.setup, "scenario setup 1|2|3")
        ->check(CLI::Range(1, 3));
    cmd->add_option("--delta", scenario.delta, "deviation parameter");
    cmd->add_option("--innovation", scenario.innovation, "tv-ar2|setar|bilinear");
    cmd->add_option("--lags", scenario.lags, "autoregression order 1|2")->check(CLI::Range(1, 2));
    cmd->add_option("--n", scenario.n, "sample size");
  };
  auto add_sieve = [&](CLI::App* cmd) {
    cmd->add_option("--time-family", sieve.time_family,
                    "fourier|legendre|chebyshev|daubechies|jacobi:a,b");
    cmd->add_option("--state-family", sieve.state_family, "mapped family");
    cmd->add_option("--c0", sieve.c0, "intercept basis size");
    cmd->add_option("--c", sieve.c, "time basis size per covariate");
    cmd->add_option("--d", sieve.d, "state basis size per covariate");
    cmd->add_option("--mean-shift-c", sieve.mean_shift_c, "mean-shift basis size (0 = c)");
    cmd->add_option("--mapping", sieve.mapping, "algebraic|logarithmic");
    cmd->add_flag("--half-line", sieve.half_line, "map onto (0, inf) instead of the whole line");
    cmd->add_option("--scale", sieve.scale, "mapping scale s");
    cmd->add_flag("--no-jacobian-weight", sieve.no_weight, "drop the sqrt(yhat') factor");
    cmd->add_option("--wavelet-order", sieve.wavelet_order, "Daubechies class N");
    cmd->add_option("--wavelet-resolution", sieve.wavelet_resolution, "dyadic resolution J_n");
    cmd->add_option("--input", input, "input CSV (Y,X1..Xr or single series)");
    cmd->add_option("--ar-lags", ar_lags, "treat the input as one series with this lag order");
  };
  auto add_boot = [&](CLI::App* cmd) {
    cmd->add_option("--alpha", boot.alpha, "1 - coverage level");
    cmd->add_option("--b-draws", boot.b_draws, "draws for the scale estimate");
    cmd->add_option("--m-draws", boot.m_draws, "draws for the critical value");
    cmd->add_option("--block-length", boot.block_length, "bootstrap block length m");
    cmd->add_flag("--tune-m", boot.tune_m, "select m by minimum volatility");
    cmd->add_option("--t-grid", boot.t_grid, "grid points in t");
    cmd->add_option("--y-grid", boot.y_grid, "grid points in the mapped coordinate");
    cmd->add_option("--x-lo", boot.x_lo, "left edge of the x window");
    cmd->add_option("--x-hi", boot.x_hi, "right edge of the x window");
    cmd->add_option("--component", boot.component, "function index j");
  };

  CLI::App* cmd_simulate = app.add_subcommand("simulate", "simulate a scenario to CSV");
  add_common(cmd_simulate);
  add_scenario(cmd_simulate);
  int emit_lags = 0;
  cmd_simulate->add_option("--emit-lags", emit_lags, "append X_lag1..X_lagK columns");

  CLI::App* cmd_fit = app.add_subcommand("fit", "fit the sieve model and export surfaces");
  add_common(cmd_fit);
  add_sieve(cmd_fit);
  int surface_grid = 41;
  double fit_x_lo = -10.0, fit_x_hi = 10.0;
  cmd_fit->add_option("--surface-grid", surface_grid, "points per axis of the exported grid");
  cmd_fit->add_option("--x-lo", fit_x_lo, "surface window left edge");
  cmd_fit->add_option("--x-hi", fit_x_hi, "surface window right edge");

  CLI::App* cmd_scr = app.add_subcommand("scr", "simultaneous confidence region");
  add_common(cmd_scr);
  add_sieve(cmd_scr);
  add_boot(cmd_scr);

  CLI::App* cmd_test = app.add_subcommand("test", "structural hypothesis test");
  add_common(cmd_test);
  add_sieve(cmd_test);
  add_boot(cmd_test);
  std::string test_kind = "homogeneity";
  std::string m0_spec = "zero";
  cmd_test->add_option("--kind", test_kind, "exact|homogeneity|separability");
  cmd_test->add_option("--m0-spec", m0_spec,
                       "exact-form target: zero | fitted | scenario:setup=S,delta=D[,centered]");

  CLI::App* cmd_tune = app.add_subcommand("tune", "data-driven (c,d) and block-length selection");
  add_common(cmd_tune);
  add_sieve(cmd_tune);
  std::string tune_what = "both";
  int validation_l = 0;
  cmd_tune->add_option("--what", tune_what, "cd|m|both");
  cmd_tune->add_option("--validation-l", validation_l, "held-out length (0 = floor(3 log2 n))");

  CLI::App* cmd_study = app.add_subcommand("study", "seeded Monte Carlo study");
  add_common(cmd_study);
  add_scenario(cmd_study);
  add_sieve(cmd_study);
  add_boot(cmd_study);
  std::string study_mode = "coverage";
  int replicates = 100;
  long centering_samples = 1000000;
  cmd_study->add_option("--mode", study_mode, "coverage|test");
  cmd_study->add_option("--test-kind", test_kind, "exact|homogeneity|separability");
  cmd_study->add_option("--replicates", replicates, "replicate count");
  cmd_study->add_option("--centering-samples", centering_samples,
                        "Monte Carlo size of the truth-centering oracle");

  CLI11_PARSE(app, argc, argv);

  try {
    fs::create_directories(common.out_dir);
    const fs::path out_dir(common.out_dir);

    if (cmd_simulate->parsed()) {
      Scenario sc{scenario.setup, scenario.delta, parse_innovation(scenario.innovation),
                  scenario.lags};
      SimulatedSeries series = simulate_scenario(sc, scenario.n, common.seed);
      Table table;
      table.header = {"index", "t", "X"};
      for (int k = 1; k <= emit_lags; ++k) table.header.push_back("X_lag" + std::to_string(k));
      table.columns.resize(table.header.size());
      for (long i = 0; i < static_cast<long>(series.values.size()); ++i) {
        table.columns[0].push_back(static_cast<double>(i + 1));
        table.columns[1].push_back(series.times[i]);
        table.columns[2].push_back(series.values[i]);
        for (int k = 1; k <= emit_lags; ++k)
          table.columns[2 + k].push_back(i - k >= 0 ? series.values[i - k] : 0.0);
      }
      write_csv((out_dir / "data.csv").string(), table);
      write_manifest(out_dir / "manifest.json",
                     json{{"command", "simulate"},
                          {"seed", common.seed},
                          {"scenario", scenario_json(scenario)}});
      std::cout << "wrote " << (out_dir / "data.csv").string() << " (" << series.values.size()
                << " rows)\n";
      return 0;
    }

    if (cmd_study->parsed()) {
      StudyConfig config;
      config.scenario = {scenario.setup, scenario.delta, parse_innovation(scenario.innovation),
                         scenario.lags};
      config.n = scenario.n;
      config.replicates = replicates;
      config.workers = common.workers;
      config.seed = common.seed;
      config.mode = study_mode == "coverage" ? StudyMode::coverage : StudyMode::test;
      config.test_kind = test_kind == "exact"
                             ? TestKind::exact_form
                             : (test_kind == "separability" ? TestKind::separability
                                                            : TestKind::homogeneity);
      config.component = boot.component;
      config.sieve = make_template(sieve, scenario.lags);
      config.c = sieve.c;
      config.d = sieve.d;
      int study_m = boot.block_length > 0
                        ? boot.block_length
                        : std::max(1, static_cast<int>(std::lround(
                                          std::cbrt(static_cast<double>(scenario.n)))));
      config.bootstrap = make_bootstrap(boot, common, study_m);
      config.centering_samples = centering_samples;

      json manifest{{"command", "study"},
                    {"mode", study_mode},
                    {"test_kind", test_kind},
                    {"replicates", replicates},
                    {"scenario", scenario_json(scenario)},
                    {"sieve", sieve_json(sieve)},
                    {"bootstrap", boot_json(boot, study_m)},
                    {"seed", common.seed}};
      std::uint64_t digest = config_digest(manifest);
      manifest["digest"] = digest;
      const fs::path manifest_path = out_dir / "study.json";
      if (fs::exists(manifest_path)) {
        std::ifstream in(manifest_path);
        json existing = json::parse(in, nullptr, false);
        if (!existing.is_discarded() && existing.contains("digest") &&
            existing["digest"].get<std::uint64_t>() != digest)
          throw ConfigError(
              "out-dir holds a study with a different config digest; refusing to mix");
      }

      StudyResult result = run_study(config);
      Table table;
      table.header = {"replicate", "ok", "hit", "statistic", "p_value"};
      table.columns.resize(5);
      for (const auto& outcome : result.outcomes) {
        table.columns[0].push_back(outcome.id);
        table.columns[1].push_back(outcome.ok ? 1.0 : 0.0);
        table.columns[2].push_back(outcome.hit);
        table.columns[3].push_back(outcome.statistic);
        table.columns[4].push_back(outcome.p_value);
      }
      // summary row: id -1 carries (successes, rate, standard error, failures)
      table.columns[0].push_back(-1.0);
      table.columns[1].push_back(result.successes);
      table.columns[2].push_back(result.rate);
      table.columns[3].push_back(result.standard_error);
      table.columns[4].push_back(result.failures);
      write_csv((out_dir / "study.csv").string(), table);
      manifest["rate"] = result.rate;
      manifest["standard_error"] = result.standard_error;
      manifest["failures"] = result.failures;
      write_manifest(manifest_path, manifest);
      std::cout << (config.mode == StudyMode::coverage ? "coverage" : "rejection rate") << " = "
                << result.rate << " +- " << result.standard_error << " (" << result.successes
                << " replicates)\n";
      return 0;
    }

    if (input.empty()) throw ConfigError("--input is required");
    std::vector<double> raw_series;
    RegressionData data = load_data(input, ar_lags, &raw_series);
    const int r = data.r();

    if (cmd_tune->parsed()) {
      SieveTemplate tpl = make_template(sieve, r);
      json manifest{{"command", "tune"}, {"sieve", sieve_json(sieve)}};
      if (tune_what == "cd" || tune_what == "both") {
        int l = validation_l > 0 ? validation_l : default_validation_length(data.n());
        std::vector<CdCandidate> candidates = default_cd_candidates(data.n());
        CdSelection sel = ar_lags > 0 ? select_cd(raw_series, ar_lags, tpl, candidates, l)
                                      : select_cd(data, tpl, candidates, l);
        Table table;
        table.header = {"c", "d", "score"};
        table.columns.resize(3);
        for (size_t i = 0; i < sel.candidates.size(); ++i) {
          table.columns[0].push_back(sel.candidates[i].c);
          table.columns[1].push_back(sel.candidates[i].d);
          table.columns[2].push_back(sel.scores[i]);
        }
        write_csv((out_dir / "tune_cd.csv").string(), table);
        manifest["cd"] = json{{"c", sel.best.c}, {"d", sel.best.d}, {"validation_l", l}};
        std::cout << "selected (c,d) = (" << sel.best.c << "," << sel.best.d << ")\n";
      }
      if (tune_what == "m" || tune_what == "both") {
        auto fit = fit_model(data, make_config(sieve, r));
        MSelection sel = select_m(*fit, default_m_ladder(data.n()));
        Table table;
        table.header = {"m", "se"};
        table.columns.resize(2);
        for (size_t i = 0; i < sel.interior.size(); ++i) {
          table.columns[0].push_back(sel.interior[i]);
          table.columns[1].push_back(sel.se[i]);
        }
        write_csv((out_dir / "tune_m.csv").string(), table);
        manifest["m"] = sel.best;
        std::cout << "selected m = " << sel.best << "\n";
      }
      write_manifest(out_dir / "tune.json", manifest);
      return 0;
    }

    // validate the bootstrap controls before fitting
    if (cmd_scr->parsed() || cmd_test->parsed()) {
      BootstrapConfig probe = make_bootstrap(boot, common, 1);
      probe.validate(data.n(), r);
    }

    auto fit = fit_model(data, make_config(sieve, r));

    if (cmd_fit->parsed()) {
      Table table;
      table.header = {"j", "t", "x", "m_hat"};
      table.columns.resize(4);
      const Mapping mapping = parse_mapping(sieve);
      for (int j = 0; j <= r; ++j)
        for (int a = 0; a < surface_grid; ++a)
          for (int b = 0; b < (j == 0 ? 1 : surface_grid); ++b) {
            double t = static_cast<double>(a) / (surface_grid - 1);
            double y_lo = mapping.unit_from_x(fit_x_lo), y_hi = mapping.unit_from_x(fit_x_hi);
            double x = mapping.x_from_unit(y_lo + (y_hi - y_lo) * b / (surface_grid - 1.0));
            table.columns[0].push_back(j);
            table.columns[1].push_back(t);
            table.columns[2].push_back(j == 0 ? 0.0 : x);
            table.columns[3].push_back(j == 0 ? fit->eval_corrected(0, t)
                                              : fit->eval_corrected(j, t, x));
          }
      write_csv((out_dir / "surfaces.csv").string(), table);
      json manifest{{"command", "fit"},
                    {"sieve", sieve_json(sieve)},
                    {"beta", std::vector<double>(fit->beta().data(),
                                                 fit->beta().data() + fit->beta().size())},
                    {"diagnostics", diagnostics_json(*fit)}};
      write_manifest(out_dir / "fit_manifest.json", manifest);
      std::cout << "fitted " << fit->total_params() << " coefficients on n = " << fit->n()
                << "\n";
      return 0;
    }

    const int block_length = resolve_block_length(boot, *fit);
    BootstrapConfig boot_config = make_bootstrap(boot, common, block_length);
    ScrGrid scr = build_scr(fit, boot_config, boot.component);

    if (cmd_scr->parsed()) {
      write_scr_csv(out_dir / "scr.csv", scr);
      write_manifest(out_dir / "scr_summary.json",
                     json{{"command", "scr"},
                          {"c_alpha", scr.c_alpha},
                          {"seed", common.seed},
                          {"degenerate_points", scr.degenerate_points},
                          {"sieve", sieve_json(sieve)},
                          {"bootstrap", boot_json(boot, block_length)}});
      std::cout << "c_alpha = " << scr.c_alpha << " at alpha = " << boot.alpha << "\n";
      return 0;
    }

    if (cmd_test->parsed()) {
      TestReport report;
      if (test_kind == "exact") {
        std::function<double(double, double)> m0;
        if (m0_spec == "zero") {
          m0 = [](double, double) { return 0.0; };
        } else if (m0_spec == "fitted") {
          m0 = [&](double t, double x) { return fit->eval_corrected(boot.component, t, x); };
        } else if (m0_spec.rfind("scenario:", 0) == 0) {
          int setup = scenario.setup;
          double delta = 0.0;
          bool centered = m0_spec.find("centered") != std::string::npos;
          if (auto pos = m0_spec.find("setup="); pos != std::string::npos)
            setup = std::stoi(m0_spec.substr(pos + 6));
          if (auto pos = m0_spec.find("delta="); pos != std::string::npos)
            delta = std::stod(m0_spec.substr(pos + 6));
          Scenario target{setup, delta, parse_innovation(scenario.innovation), 1};
          if (centered) {
            Eigen::VectorXd chi = centering_curve(target, scr.t, 200000);
            Eigen::VectorXd t_copy = scr.t;
            m0 = [target, chi, t_copy](double t, double x) {
              long i = std::llround(t * (t_copy.size() - 1));
              i = std::clamp<long>(i, 0, t_copy.size() - 1);
              return eval_true_m(target, t, x) - chi(i);
            };
          } else {
            m0 = [target](double t, double x) { return eval_true_m(target, t, x); };
          }
        } else {
          throw ConfigError("unknown --m0-spec '" + m0_spec + "'");
        }
        report = test_exact_form(scr, m0);
      } else if (test_kind == "homogeneity") {
        report = test_homogeneity(scr);
      } else if (test_kind == "separability") {
        report = test_separability(scr);
      } else {
        throw ConfigError("unknown test kind '" + test_kind + "'");
      }
      write_manifest(out_dir / "test_report.json",
                     json{{"command", "test"},
                          {"kind", report.kind_name()},
                          {"t_obs", report.t_obs},
                          {"p_value", report.p_value},
                          {"reject", report.reject},
                          {"alpha", report.alpha},
                          {"c_alpha", report.c_alpha},
                          {"band_exits", report.band_exits},
                          {"sieve", sieve_json(sieve)},
                          {"bootstrap", boot_json(boot, block_length)}});
      std::cout << report.kind_name() << ": T_obs = " << report.t_obs
                << ", p = " << report.p_value << (report.reject ? " -> reject" : " -> accept")
                << "\n";
      return 0;
    }
  } catch (const std::exception& err) {
    json record{{"error", err.what()}};
    std::cerr << record.dump() << "\n";
    return 1;
  }

  return 0;
}
