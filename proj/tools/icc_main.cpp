#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "icc/baselines.hpp"
#include "icc/errors.hpp"
#include "icc/forecast.hpp"
#include "icc/icc.hpp"
#include "icc/metrics.hpp"
#include "icc/panel.hpp"
#include "icc/report.hpp"
#include "icc/resample.hpp"
#include "icc/rng.hpp"
#include "icc/synthetic.hpp"

namespace {

struct RunConfig {
  std::string subcommand;
  std::string config_path;  // flat key=value file; not part of the manifest
  std::string input;
  bool prices = false;  // input CSV holds prices, convert to log-returns
  std::string out = ".";
  bool synthetic = false;
  int n = 20;
  int T = 2000;
  double persistence = 100.0;
  double shift = 0.05;
  double sigma = 0.1;
  double rho_bull = 0.3;
  double rho_bear = 0.7;
  int K = 2;
  double gamma = 16.0;
  std::string gamma_grid;  // comma-separated candidates; empty = fixed gamma
  double target_len = 25.0;
  std::string model = "icc-sparse";
  int max_iters = 100;
  int delta = 24;
  int horizon = 1;
  double split = 0.65;
  int folds = 5;
  std::string baseline = "llr";
  int resamples = 100;
  int basket = 0;
  int jobs = 1;
  bool forecast_experiment = false;
  std::uint64_t seed = 0;
};

nlohmann::json to_manifest(const RunConfig& c) {
  nlohmann::json m;
  m["schema_version"] = 1;
  m["subcommand"] = c.subcommand;
  m["input"] = c.input;
  m["prices"] = c.prices;
  m["out"] = c.out;
  m["synthetic"] = c.synthetic;
  m["n"] = c.n;
  m["T"] = c.T;
  m["persistence"] = c.persistence;
  m["shift"] = c.shift;
  m["sigma"] = c.sigma;
  m["rho_bull"] = c.rho_bull;
  m["rho_bear"] = c.rho_bear;
  m["K"] = c.K;
  m["gamma"] = c.gamma;
  m["gamma_grid"] = c.gamma_grid;
  m["target_len"] = c.target_len;
  m["model"] = c.model;
  m["max_iters"] = c.max_iters;
  m["delta"] = c.delta;
  m["horizon"] = c.horizon;
  m["split"] = c.split;
  m["folds"] = c.folds;
  m["baseline"] = c.baseline;
  m["resamples"] = c.resamples;
  m["basket"] = c.basket;
  m["jobs"] = c.jobs;
  m["forecast_experiment"] = c.forecast_experiment;
  m["seed"] = c.seed;
  return m;
}

RunConfig from_manifest(const nlohmann::json& m) {
  RunConfig d;
  RunConfig c;
  c.subcommand = m.value("subcommand", d.subcommand);
  c.input = m.value("input", d.input);
  c.prices = m.value("prices", d.prices);
  c.out = m.value("out", d.out);
  c.synthetic = m.value("synthetic", d.synthetic);
  c.n = m.value("n", d.n);
  c.T = m.value("T", d.T);
  c.persistence = m.value("persistence", d.persistence);
  c.shift = m.value("shift", d.shift);
  c.sigma = m.value("sigma", d.sigma);
  c.rho_bull = m.value("rho_bull", d.rho_bull);
  c.rho_bear = m.value("rho_bear", d.rho_bear);
  c.K = m.value("K", d.K);
  c.gamma = m.value("gamma", d.gamma);
  c.gamma_grid = m.value("gamma_grid", d.gamma_grid);
  c.target_len = m.value("target_len", d.target_len);
  c.model = m.value("model", d.model);
  c.max_iters = m.value("max_iters", d.max_iters);
  c.delta = m.value("delta", d.delta);
  c.horizon = m.value("horizon", d.horizon);
  c.split = m.value("split", d.split);
  c.folds = m.value("folds", d.folds);
  c.baseline = m.value("baseline", d.baseline);
  c.resamples = m.value("resamples", d.resamples);
  c.basket = m.value("basket", d.basket);
  c.jobs = m.value("jobs", d.jobs);
  c.forecast_experiment = m.value("forecast_experiment", d.forecast_experiment);
  c.seed = m.value("seed", d.seed);
  return c;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    const double v = std::stod(item, &pos);
    if (pos != item.size()) throw std::invalid_argument("bad gamma grid entry '" + item + "'");
    grid.push_back(v);
  }
  if (grid.empty()) throw std::invalid_argument("gamma grid is empty");
  return grid;
}

std::string out_path(const RunConfig& c, const std::string& name) {
  return (std::filesystem::path(c.out) / name).string();
}

icc::ReturnsPanel load_panel(const RunConfig& c, std::vector<int>* truth) {
  if (c.synthetic) {
    const icc::SyntheticSpec spec = icc::two_regime_spec(
        c.n, c.T, c.persistence, c.shift, c.sigma, c.rho_bull, c.rho_bear, c.seed);
    icc::SyntheticPanel sp = icc::generate_synthetic(spec);
    if (truth) {
      truth->clear();
      for (int v : sp.true_labels) truth->push_back(v + 1);
    }
    return std::move(sp.panel);
  }
  if (c.input.empty()) {
    throw std::invalid_argument("either --input or --synthetic is required");
  }
  std::vector<std::string> dropped;
  icc::ReturnsPanel panel;
  if (c.prices) {
    icc::PriceCsvResult r = icc::read_price_csv(c.input);
    dropped = std::move(r.dropped_tickers);
    panel = icc::log_returns(r.panel);
  } else {
    icc::ReturnsCsvResult r = icc::read_returns_csv(c.input);
    dropped = std::move(r.dropped_tickers);
    panel = std::move(r.panel);
  }
  if (!dropped.empty()) {
    std::cerr << "note: dropped " << dropped.size() << " ticker(s) with gaps\n";
  }
  return panel;
}

icc::IccConfig base_icc_config(const RunConfig& c) {
  icc::IccConfig ic;
  ic.K = c.K;
  ic.gamma = c.gamma;
  ic.max_iters = c.max_iters;
  ic.seed = c.seed;
  return ic;
}

void write_states_json(const std::vector<icc::MarketState>& states,
                       const std::string& path) {
  nlohmann::json doc;
  doc["schema_version"] = 1;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : states) {
    nlohmann::json js;
    js["label"] = s.label;
    js["mu"] = std::vector<double>(s.mu.data(), s.mu.data() + s.mu.size());
    js["logdet"] = s.precision.logdet;
    nlohmann::json entries = nlohmann::json::array();
    for (int i = 0; i < s.precision.mat.rows(); ++i) {
      for (int j = 0; j < s.precision.mat.cols(); ++j) {
        if (s.precision.mat(i, j) != 0.0) {
          entries.push_back({{"i", i}, {"j", j}, {"value", s.precision.mat(i, j)}});
        }
      }
    }
    js["precision"] = std::move(entries);
    arr.push_back(std::move(js));
  }
  doc["states"] = std::move(arr);
  icc::write_json(doc, path);
}

int run_synth(RunConfig c) {
  c.synthetic = true;
  std::vector<int> truth;
  const icc::ReturnsPanel panel = load_panel(c, &truth);
  icc::write_returns_csv(panel, out_path(c, "returns.csv"));
  {
    std::ofstream out(out_path(c, "truth_labels.csv"));
    if (!out) throw icc::DataError("cannot write truth_labels.csv");
    out << "date,state_label\n";
    for (int t = 0; t < panel.T(); ++t) out << panel.dates[t] << ',' << truth[t] << '\n';
  }
  icc::write_json(to_manifest(c), out_path(c, "manifest.json"));
  return 0;
}

int run_cluster(const RunConfig& c) {
  std::vector<int> truth;
  const icc::ReturnsPanel panel = load_panel(c, c.synthetic ? &truth : nullptr);

  icc::IccConfig ic = base_icc_config(c);
  const bool gmm = icc::apply_model_variant(c.model, ic);

  nlohmann::json report;
  report["schema_version"] = 1;
  report["command"] = "cluster";
  report["model"] = c.model;
  report["seed"] = c.seed;
  report["T"] = panel.T();
  report["n"] = panel.n();

  std::vector<int> labels;
  if (gmm) {
    const icc::GmmModel g = icc::fit_gmm(panel, ic.K, c.seed);
    labels = g.hard_labels();
    report["iterations"] = g.iterations;
    report["converged"] = g.converged;
    report["reseeds"] = g.reseeds;
  } else {
    if (!c.gamma_grid.empty()) {
      ic.gamma = icc::grid_search_gamma(panel, ic, parse_grid(c.gamma_grid), c.target_len);
    }
    const icc::IccFit fit = icc::fit_icc(panel, ic);
    labels = fit.seg.labels;
    report["gamma"] = ic.gamma;
    report["iterations"] = fit.iterations;
    report["converged"] = fit.converged;
    report["reseeds"] = fit.reseeds;
    report["warnings"] = fit.warnings;
    report["total_cost"] = fit.seg.total_cost;
    write_states_json(fit.states, out_path(c, "states.json"));
  }

  const icc::ClusterReport crep = icc::build_cluster_report(panel, labels, ic.K);
  report.update(icc::cluster_report_json(crep));
  if (c.synthetic) {
    report["accuracy_vs_truth"] = icc::label_accuracy(labels, truth, ic.K);
  }

  icc::write_segmentation_csv(panel, labels, out_path(c, "segmentation.csv"));
  icc::write_cumulative_csv(panel, labels, out_path(c, "cumulative_returns.csv"));
  icc::write_sharpe_csv(panel, crep, out_path(c, "sharpe_by_stock.csv"));
  icc::write_json(report, out_path(c, "report.json"));
  icc::write_json(to_manifest(c), out_path(c, "manifest.json"));
  return 0;
}

bool parse_baseline(const std::string& baseline) {
  if (baseline == "llr") return false;
  if (baseline == "fraction-positive") return true;
  throw std::invalid_argument("unknown baseline '" + baseline +
                              "'; expected llr or fraction-positive");
}

int run_forecast(const RunConfig& c) {
  const icc::ReturnsPanel panel = load_panel(c, nullptr);

  icc::IccConfig ic = base_icc_config(c);
  if (icc::apply_model_variant(c.model, ic)) {
    throw std::invalid_argument("the forecast experiment needs a state-based variant");
  }

  icc::ForecastExperimentConfig fc;
  fc.icc = ic;
  fc.train_frac = c.split;
  fc.delta = c.delta;
  fc.horizon = c.horizon;
  fc.folds = c.folds;
  fc.fraction_positive_feature = parse_baseline(c.baseline);
  const icc::ForecastExperiment ex = icc::run_forecast_experiment(panel, fc);

  nlohmann::json report;
  report["schema_version"] = 1;
  report["command"] = "forecast";
  report["model"] = c.model;
  report["feature"] = c.baseline;
  report["seed"] = c.seed;
  report["T"] = panel.T();
  report["n"] = panel.n();
  report["train_rows"] = ex.train_rows;
  report["test_pairs"] = ex.predicted.size();
  report["beta0"] = ex.model.beta0;
  report["beta1"] = ex.model.beta1;
  report["threshold"] = ex.model.threshold;
  report["delta"] = ex.model.delta;
  report["horizon"] = ex.model.horizon;
  report["regularized"] = ex.fit.regularized;
  report["metrics"] = icc::forecast_report_json(ex.report);

  icc::write_predictions_csv(ex, out_path(c, "predictions.csv"));
  if (c.baseline == "llr") {
    icc::write_llr_csv(ex.llr, out_path(c, "llr_series.csv"));
  }
  icc::write_json(report, out_path(c, "report.json"));
  icc::write_json(to_manifest(c), out_path(c, "manifest.json"));
  return 0;
}

int run_resample(const RunConfig& c) {
  const icc::ReturnsPanel panel = load_panel(c, nullptr);

  icc::ResampleConfig rc;
  rc.resamples = c.resamples;
  rc.basket = c.basket;
  rc.jobs = c.jobs;
  rc.seed = c.seed;
  rc.model = c.model;
  rc.icc = base_icc_config(c);
  rc.forecast = c.forecast_experiment;
  rc.fc.train_frac = c.split;
  rc.fc.delta = c.delta;
  rc.fc.horizon = c.horizon;
  rc.fc.folds = c.folds;
  rc.fc.fraction_positive_feature = parse_baseline(c.baseline);
  const icc::ResampleResult res = icc::run_resample(panel, rc);

  nlohmann::json report = res.aggregate;
  report["command"] = "resample";
  report["model"] = c.model;
  report["seed"] = c.seed;
  icc::write_json(report, out_path(c, "aggregate_report.json"));
  icc::write_json(to_manifest(c), out_path(c, "manifest.json"));
  return 0;
}

int dispatch(const RunConfig& c) {
  std::filesystem::create_directories(c.out);
  if (c.subcommand == "synth") return run_synth(c);
  if (c.subcommand == "cluster") return run_cluster(c);
  if (c.subcommand == "forecast") return run_forecast(c);
  if (c.subcommand == "resample") return run_resample(c);
  throw std::invalid_argument("unknown subcommand '" + c.subcommand + "'");
}

// Applies a flat key=value file to the subcommand's options. A key fills its
// option only when neither a flag nor an environment variable already did, so
// the precedence stays flags > env > config file > defaults.
void apply_config_file(CLI::App* sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw icc::DataError("cannot read config '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto trim = [](const std::string& s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  " is not key=value");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  " has an empty key");
    }
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
    if (opt->count() > 0) continue;  // a flag or env var takes precedence
    opt->add_result(value);
    try {
      opt->run_callback();
    } catch (const CLI::ParseError& e) {
      throw std::invalid_argument("config key '" + key + "': " + e.what());
    }
  }
}

void add_common(CLI::App* sub, RunConfig& c) {
  sub->add_option("--config", c.config_path,
                  "flat key=value configuration file applied below flags and env vars");
  sub->add_option("--input", c.input, "input CSV path")->envname("ICC_INPUT");
  sub->add_flag("--prices", c.prices, "input CSV holds prices; convert to log-returns")
      ->envname("ICC_PRICES");
  sub->add_option("--out", c.out, "output directory")->envname("ICC_OUT");
  sub->add_flag("--synthetic", c.synthetic, "generate the two-regime synthetic panel")
      ->envname("ICC_SYNTHETIC");
  sub->add_option("--n", c.n, "synthetic: number of stocks")->envname("ICC_N");
  sub->add_option("--T", c.T, "synthetic: number of days")->envname("ICC_T");
  sub->add_option("--persistence", c.persistence, "synthetic: expected segment length")
      ->envname("ICC_PERSISTENCE");
  sub->add_option("--shift", c.shift, "synthetic: per-stock mean shift")
      ->envname("ICC_SHIFT");
  sub->add_option("--sigma", c.sigma, "synthetic: per-stock volatility")
      ->envname("ICC_SIGMA");
  sub->add_option("--rho-bull", c.rho_bull, "synthetic: bull equicorrelation")
      ->envname("ICC_RHO_BULL");
  sub->add_option("--rho-bear", c.rho_bear, "synthetic: bear neighbor correlation")
      ->envname("ICC_RHO_BEAR");
  sub->add_option("--seed", c.seed, "RNG seed; all streams derive from it")
      ->envname("ICC_SEED");
}

void add_model(CLI::App* sub, RunConfig& c) {
  sub->add_option("--K", c.K, "number of states")->envname("ICC_K");
  sub->add_option("--gamma", c.gamma, "switching penalty")->envname("ICC_GAMMA");
  sub->add_option("--model", c.model,
                  "variant: icc-sparse, icc-full, icc-sparse-g0, icc-full-g0, gmm")
      ->envname("ICC_MODEL");
  sub->add_option("--max-iters", c.max_iters, "fit iteration cap")
      ->envname("ICC_MAX_ITERS");
}

void add_forecast(CLI::App* sub, RunConfig& c) {
  sub->add_option("--delta", c.delta, "log-likelihood-ratio window length")
      ->envname("ICC_DELTA");
  sub->add_option("--horizon", c.horizon, "prediction horizon in days")
      ->envname("ICC_HORIZON");
  sub->add_option("--split", c.split, "train fraction")->envname("ICC_SPLIT");
  sub->add_option("--folds", c.folds, "calibration fold count")->envname("ICC_FOLDS");
  sub->add_option("--baseline", c.baseline,
                  "regressor: llr (default) or fraction-positive (share of positive stocks)")
      ->envname("ICC_BASELINE");
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  std::string manifest_path;

  CLI::App app{"Market-state segmentation and forecasting over daily return panels"};
  app.require_subcommand(0, 1);
  app.add_option("--from-manifest", manifest_path,
                 "re-run the configuration captured in a manifest.json");
  app.add_option("--out-override", cfg.out, "output directory override for manifest re-runs");

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic returns panel");
  add_common(synth, cfg);

  CLI::App* cluster = app.add_subcommand("cluster", "segment a panel into market states");
  add_common(cluster, cfg);
  add_model(cluster, cfg);
  cluster->add_option("--gamma-grid", cfg.gamma_grid,
                      "comma-separated gamma candidates for the segment-length search")
      ->envname("ICC_GAMMA_GRID");
  cluster->add_option("--target-len", cfg.target_len,
                      "target mean segment length for the gamma search")
      ->envname("ICC_TARGET_LEN");

  CLI::App* forecast = app.add_subcommand("forecast", "train/test state prediction");
  add_common(forecast, cfg);
  add_model(forecast, cfg);
  add_forecast(forecast, cfg);

  CLI::App* resample = app.add_subcommand("resample", "repeat an experiment over stock baskets");
  add_common(resample, cfg);
  add_model(resample, cfg);
  add_forecast(resample, cfg);
  resample->add_option("--resamples", cfg.resamples, "number of resampled runs")
      ->envname("ICC_RESAMPLES");
  resample->add_option("--basket", cfg.basket, "stocks per draw (0 = all)")
      ->envname("ICC_BASKET");
  resample->add_option("--jobs", cfg.jobs, "worker threads")->envname("ICC_JOBS");
  resample->add_flag("--forecast-experiment", cfg.forecast_experiment,
                     "aggregate the forecast metrics instead of cluster statistics")
      ->envname("ICC_FORECAST_EXPERIMENT");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (!manifest_path.empty()) {
      std::ifstream in(manifest_path);
      if (!in) throw icc::DataError("cannot read manifest '" + manifest_path + "'");
      nlohmann::json m;
      try {
        in >> m;
      } catch (const nlohmann::json::exception& e) {
        throw icc::DataError("manifest parse failure: " + std::string(e.what()));
      }
      RunConfig mc = from_manifest(m);
      if (app.count("--out-override") > 0) mc.out = cfg.out;
      return dispatch(mc);
    }
    if (app.get_subcommands().empty()) {
      std::cerr << "error: a subcommand or --from-manifest is required\n";
      return 1;
    }
    CLI::App* sub = app.get_subcommands().front();
    cfg.subcommand = sub->get_name();
    if (!cfg.config_path.empty()) apply_config_file(sub, cfg.config_path);
    return dispatch(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const icc::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const icc::NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
