// mgcp: simulate fleets, fit the multi-output Cox model, predict a unit,
// and run the benchmark and leave-one-out studies.
#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "mgcp/config.hpp"
#include "mgcp/csv.hpp"
#include "mgcp/errors.hpp"
#include "mgcp/harness.hpp"
#include "mgcp/prediction.hpp"
#include "mgcp/serialization.hpp"
#include "mgcp/simulation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mgcp;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kData = 3, kNumerical = 4 };

struct Globals {
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string config;
  std::string out = ".";
};

ObservationWindow parse_window(const std::string &text) {
  const auto colon = text.find(':');
  double a = 0.0, b = 0.0;
  if (colon == std::string::npos || !parse_double(std::string_view(text).substr(0, colon), a) ||
      !parse_double(std::string_view(text).substr(colon + 1), b))
    throw CLI::ValidationError("--window", "expected start:end, got '" + text + "'");
  ObservationWindow w{a, b};
  if (!(b > a)) throw CLI::ValidationError("--window", "end must exceed start");
  return w;
}

std::vector<Method> parse_methods(const std::vector<std::string> &names) {
  std::vector<Method> out;
  for (const auto &n : names) {
    try {
      out.push_back(parse_method(n));
    } catch (const ValidationError &e) {
      throw CLI::ValidationError("--methods", e.what());
    }
  }
  return out;
}

ForecastStat parse_stat(const std::string &name) {
  if (name == "expected") return ForecastStat::expected;
  if (name == "sampled-median") return ForecastStat::sampled_median;
  throw CLI::ValidationError("--forecast-stat", "expected 'expected' or 'sampled-median'");
}

fs::path output_dir(const Globals &g) {
  fs::path dir(g.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error("cannot create output directory " + dir.string());
  return dir;
}

std::ofstream open_out(const fs::path &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  return os;
}

json window_json(const ObservationWindow &w) { return {{"start", w.start}, {"end", w.end}}; }

json method_names(const std::vector<Method> &methods) {
  json out = json::array();
  for (Method m : methods) out.push_back(to_string(m));
  return out;
}

void write_meta(const fs::path &dir, const std::string &command, const Globals &g, json settings) {
  json meta{{"tool", "mgcp"},
            {"version", MGCP_VERSION},
            {"command", command},
            {"seed", g.seed},
            {"jobs", g.jobs},
            {"config_file", g.config},
            {"settings", std::move(settings)}};
  save_json(meta, dir / "meta.json");
}

// Fit settings: defaults, then the config file, then explicit flags.
struct FitFlags {
  int quad_order = 0;
  int max_iters = 0;
  double tol = 0.0;
  Eigen::Index num_inducing = 10;
  bool optimize_inducing = false;
  std::string optimizer;

  void add(CLI::App *app, bool with_inducing_count = true) {
    app->add_option("--quad-order", quad_order, "Gauss-Legendre panels per unit")
        ->check(CLI::PositiveNumber);
    app->add_option("--max-iters", max_iters, "optimizer iteration cap")->check(CLI::PositiveNumber);
    app->add_option("--tol", tol, "relative ELBO change tolerance")->check(CLI::PositiveNumber);
    if (with_inducing_count)
      app->add_option("--num-inducing", num_inducing, "inducing points M")
          ->check(CLI::PositiveNumber);
    app->add_flag("--optimize-inducing", optimize_inducing,
                  "also optimize the inducing inputs (experimental)");
    app->add_option("--optimizer", optimizer, "lbfgs or adam")
        ->check(CLI::IsMember({"lbfgs", "adam"}));
  }

  FitConfig resolve(const CLI::App *app, const Globals &g) const {
    FitConfig c;
    c.seed = g.seed;
    if (!g.config.empty()) c = apply_fit_config(load_key_values(g.config), c);
    if (app->count("--quad-order")) c.quad_order = quad_order;
    if (app->count("--max-iters")) c.max_iters = max_iters;
    if (app->count("--tol")) c.tol = tol;
    if (app->count("--num-inducing")) c.num_inducing = num_inducing;
    if (app->count("--optimize-inducing")) c.optimize_inducing = optimize_inducing;
    if (app->count("--optimizer"))
      c.optimizer = optimizer == "adam" ? OptimizerKind::adam : OptimizerKind::lbfgs;
    validate(c);
    return c;
  }
};

void run_simulate(const Globals &g, const std::string &kind_name, Eigen::Index n,
                  const std::string &window_text, FleetOptions options, int truth_grid) {
  const GeneratorKind kind = parse_generator_kind(kind_name);
  const ObservationWindow window = parse_window(window_text);
  const Fleet fleet = generate_fleet(kind, n, window, g.seed, options);
  const fs::path dir = output_dir(g);
  save_events((dir / "events.csv").string(), fleet.data);
  {
    auto os = open_out(dir / "truth.csv");
    os << "unit_id,time,lambda\n";
    const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(truth_grid, window.start, window.end);
    const Eigen::MatrixXd values = truth_on_grid(fleet, grid);
    for (std::size_t i = 0; i < fleet.data.size(); ++i)
      for (Eigen::Index k = 0; k < grid.size(); ++k)
        os << fleet.data.unit(i).unit_id << ',' << format_double(grid[k]) << ','
           << format_double(values(static_cast<Eigen::Index>(i), k)) << '\n';
  }
  write_meta(dir, "simulate", g,
             {{"kind", to_string(kind)},
              {"n", n},
              {"window", window_json(window)},
              {"truth_grid", truth_grid},
              {"lambda_star", kind == GeneratorKind::surrogate ? options.surrogate_lambda_star
                                                               : options.lambda_star},
              {"path_grid_points", options.grid_points},
              {"thinning_bound", "1.05 x max intensity on a 10001-point grid"}});
  std::cout << "simulated " << fleet.data.size() << " units, " << fleet.data.total_events()
            << " events (" << to_string(kind) << ")\n";
  for (std::size_t i = 0; i < fleet.data.size(); ++i)
    std::cout << "  " << fleet.data.unit(i).unit_id << ": "
              << fleet.data.unit(i).event_times.size() << '\n';
}

void run_fit(const Globals &g, const CLI::App *app, const FitFlags &flags,
             const std::string &data, const std::string &window_text, bool align_zero,
             const std::string &model_out) {
  const FitConfig config = flags.resolve(app, g);
  const EventDataset ds = load_events(data, parse_window(window_text), align_zero);
  const FittedModel model = fit(ds, config);
  const fs::path dir = output_dir(g);
  const fs::path path = model_out.empty() ? dir / "model.json" : fs::path(model_out);
  save_model(model, path);
  write_meta(dir, "fit", g,
             {{"data", data},
              {"window", window_json(ds.window())},
              {"align_zero", align_zero},
              {"fit", config_to_json(config)}});
  std::cout << "elbo " << format_double(model.elbo) << " after " << model.iterations
            << " iterations" << (model.converged ? "" : " (not converged)") << '\n'
            << "model written to " << path.string() << '\n';
}

void run_predict(const Globals &g, const std::string &model_path, const std::string &unit_id,
                 std::optional<double> t_star_opt, double horizon, int grid_points,
                 const std::string &stat_name, int samples) {
  const ForecastStat stat = parse_stat(stat_name);
  const FittedModel model = load_model(model_path);
  const Eigen::Index unit = model.unit_index(unit_id);
  const double t_star =
      t_star_opt ? *t_star_opt : model.observation_end[static_cast<std::size_t>(unit)];
  const fs::path dir = output_dir(g);
  const Eigen::VectorXd grid =
      Eigen::VectorXd::LinSpaced(grid_points, model.window.start, model.window.end);
  const std::vector<double> grid_v(grid.data(), grid.data() + grid.size());
  {
    auto os = open_out(dir / "intensity.csv");
    write_intensity_csv(os, intensity_curve(model, unit, grid_v));
  }
  CountForecast forecast = forecast_counts(model, unit, t_star, horizon, model.config.quad_order);
  json settings{{"model", model_path},
                {"unit", unit_id},
                {"t_star", t_star},
                {"horizon", horizon},
                {"grid_points", grid_points},
                {"forecast_stat", stat_name}};
  if (stat == ForecastStat::sampled_median) {
    const SampledForecast s = sample_count_forecast(model, unit, t_star, horizon,
                                                    model.config.quad_order, samples, g.seed);
    forecast.pmf = s.pmf;
    settings["samples"] = samples;
    settings["sampled_median"] = s.median;
  }
  {
    auto os = open_out(dir / "forecast.csv");
    write_forecast_csv(os, forecast);
  }
  write_meta(dir, "predict", g, settings);
  std::cout << "unit " << unit_id << ": expected count over [" << format_double(t_star) << ", "
            << format_double(t_star + horizon) << "] = " << format_double(forecast.expected)
            << '\n';
}

void print_summary(std::span<const BenchmarkSummary> summary) {
  for (const auto &s : summary)
    std::cout << "  pct " << format_double(s.percentile) << "  " << to_string(s.method)
              << "  n=" << s.n << " failed=" << s.failed << "  ll " << format_double(s.mean_ll)
              << " (se " << format_double(s.se_ll) << ")  rms " << format_double(s.mean_rms)
              << " (se " << format_double(s.se_rms) << ")\n";
}

void run_benchmark_cmd(const Globals &g, const CLI::App *app, const FitFlags &flags,
                       BenchmarkSpec spec, const std::string &kind_name,
                       const std::string &window_text, const std::vector<std::string> &methods) {
  spec.kind = parse_generator_kind(kind_name);
  spec.window = parse_window(window_text);
  spec.methods = parse_methods(methods);
  spec.seed = g.seed;
  spec.fit = flags.resolve(app, g);
  validate(spec);
  const auto rows = run_benchmark(spec, g.jobs);
  const fs::path dir = output_dir(g);
  {
    auto os = open_out(dir / "benchmark.csv");
    write_benchmark_csv(os, rows);
  }
  const auto summary = summarize(rows);
  {
    auto os = open_out(dir / "benchmark_summary.csv");
    write_benchmark_summary(os, summary);
  }
  write_meta(dir, "benchmark", g,
             {{"kind", to_string(spec.kind)},
              {"replications", spec.replications},
              {"percentiles", spec.percentiles},
              {"n", spec.num_units},
              {"window", window_json(spec.window)},
              {"methods", method_names(spec.methods)},
              {"rms_grid", spec.rms_grid},
              {"rms_region", "whole window"},
              {"lambda_star", spec.fleet.lambda_star},
              {"path_grid_points", spec.fleet.grid_points},
              {"fit", config_to_json(spec.fit)}});
  for (const auto &r : rows)
    if (!r.ok())
      std::cerr << "replicate " << r.replicate << " pct " << format_double(r.percentile) << ' '
                << to_string(r.method) << " failed: " << r.error << '\n';
  std::cout << "benchmark " << to_string(spec.kind) << ", " << spec.replications
            << " replicates\n";
  print_summary(summary);
}

void run_case_study_cmd(const Globals &g, const CLI::App *app, const FitFlags &flags,
                        CaseStudySpec spec, const std::string &data,
                        const std::string &window_text, const std::vector<std::string> &methods,
                        const std::string &stat_name, bool align_zero) {
  spec.methods = parse_methods(methods);
  spec.stat = parse_stat(stat_name);
  spec.seed = g.seed;
  spec.fit = flags.resolve(app, g);
  const ObservationWindow window = parse_window(window_text);
  const fs::path dir = output_dir(g);
  EventDataset ds = [&] {
    if (!data.empty()) return load_events(data, window, align_zero);
    Fleet fleet = generate_fleet(GeneratorKind::surrogate, 20, window, derive_seed(g.seed, {7}));
    save_events((dir / "surrogate_events.csv").string(), fleet.data);
    return fleet.data;
  }();
  const auto rows = run_case_study(ds, spec, g.jobs);
  {
    auto os = open_out(dir / "case_study.csv");
    write_case_study_csv(os, rows);
  }
  const auto table = summarize_case_study(rows);
  {
    auto os = open_out(dir / "mae.csv");
    write_mae_table(os, table);
  }
  json settings{{"data", data.empty() ? "surrogate (20 units)" : data},
                {"window", window_json(window)},
                {"percentile", spec.percentile},
                {"horizons", spec.horizons},
                {"methods", method_names(spec.methods)},
                {"forecast_stat", stat_name},
                {"fit", config_to_json(spec.fit)}};
  if (spec.stat == ForecastStat::sampled_median) settings["samples"] = spec.samples;
  write_meta(dir, "case-study", g, settings);
  std::cout << "case study: " << ds.size() << " folds\n";
  for (const auto &s : table)
    std::cout << "  L " << format_double(s.horizon) << "  " << to_string(s.method) << "  MAE "
              << format_double(s.mae) << " (se " << format_double(s.se) << ")\n";
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Multi-output Gaussian convolution process Cox model for fleet event data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", MGCP_VERSION);
  Globals g;
  app.add_option("--seed", g.seed, "root random seed")->capture_default_str();
  app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--config", g.config, "key = value fit configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.fallthrough();

  // simulate
  auto *sim = app.add_subcommand("simulate", "simulate a fleet of event streams");
  std::string sim_kind = "mgcp-sigmoid", sim_window = "0:100";
  Eigen::Index sim_n = 10;
  FleetOptions fleet_options;
  int truth_grid = 200;
  sim->add_option("--kind", sim_kind, "mgcp-sigmoid, form1, form2 or surrogate")
      ->check(CLI::IsMember({"mgcp-sigmoid", "form1", "form2", "surrogate"}));
  sim->add_option("--n", sim_n, "number of units")->check(CLI::Range(Eigen::Index{2}, Eigen::Index{100000}));
  sim->add_option("--window", sim_window, "observation window start:end");
  sim->add_option("--lambda-star", fleet_options.lambda_star, "sigmoid link ceiling")
      ->check(CLI::PositiveNumber);
  sim->add_option("--grid-points", fleet_options.grid_points, "latent path grid")
      ->check(CLI::Range(2, 100000));
  sim->add_option("--truth-grid", truth_grid, "points per unit in truth.csv")
      ->check(CLI::Range(2, 1000000));

  // fit
  auto *fit_cmd = app.add_subcommand("fit", "fit the model to an event CSV");
  std::string fit_data, fit_window = "0:100", model_out;
  bool fit_align = false;
  FitFlags fit_flags;
  fit_cmd->add_option("--data", fit_data, "events CSV (unit_id,event_time)")->required();
  fit_cmd->add_option("--window", fit_window, "observation window start:end");
  fit_cmd->add_flag("--align-zero", fit_align, "shift each unit so its first event is at 0");
  fit_cmd->add_option("--model-out", model_out, "model path (default <out>/model.json)");
  fit_flags.add(fit_cmd);

  // predict
  auto *pred = app.add_subcommand("predict", "intensity curve and count forecast for a unit");
  std::string pred_model, pred_unit, pred_stat = "expected";
  double pred_t_star = 0.0, pred_horizon = 0.0;
  int pred_grid = 200, pred_samples = 2000;
  pred->add_option("--model", pred_model, "model JSON")->required();
  pred->add_option("--unit", pred_unit, "unit id")->required();
  auto *t_star_opt = pred->add_option("--t-star", pred_t_star,
                                      "forecast origin (default: unit's observation end)");
  pred->add_option("--horizon", pred_horizon, "forecast length L")
      ->required()
      ->check(CLI::PositiveNumber);
  pred->add_option("--grid", pred_grid, "intensity grid points")->check(CLI::Range(2, 1000000));
  pred->add_option("--forecast-stat", pred_stat, "expected or sampled-median")
      ->check(CLI::IsMember({"expected", "sampled-median"}));
  pred->add_option("--samples", pred_samples, "posterior draws for sampled-median")
      ->check(CLI::PositiveNumber);

  // benchmark
  auto *bench = app.add_subcommand("benchmark", "simulation benchmark against the baseline");
  BenchmarkSpec bench_spec;
  std::string bench_kind = "mgcp-sigmoid", bench_window = "0:100";
  std::vector<std::string> bench_methods{"mgcp-pp", "independent-baseline"};
  FitFlags bench_flags;
  bench->add_option("--kind", bench_kind, "mgcp-sigmoid, form1 or form2")
      ->check(CLI::IsMember({"mgcp-sigmoid", "form1", "form2"}));
  bench->add_option("--replications,-Q", bench_spec.replications, "replicates Q")
      ->check(CLI::PositiveNumber);
  bench->add_option("--percentiles", bench_spec.percentiles, "observation percentiles")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 1.0));
  bench->add_option("--n", bench_spec.num_units, "units per fleet")
      ->check(CLI::Range(Eigen::Index{2}, Eigen::Index{100000}));
  bench->add_option("--window", bench_window, "observation window start:end");
  bench->add_option("--methods", bench_methods, "mgcp-pp, independent-baseline")->delimiter(',');
  bench->add_option("--rms-grid", bench_spec.rms_grid, "RMS grid points")
      ->check(CLI::Range(2, 1000000));
  bench->add_option("--lambda-star", bench_spec.fleet.lambda_star, "sigmoid link ceiling")
      ->check(CLI::PositiveNumber);
  bench_flags.add(bench);

  // case-study
  auto *cs = app.add_subcommand("case-study", "leave-one-out count forecasting study");
  CaseStudySpec cs_spec;
  std::string cs_data, cs_window = "0:100", cs_stat = "expected";
  std::vector<std::string> cs_methods{"mgcp-pp", "independent-baseline"};
  bool cs_align = false;
  FitFlags cs_flags;
  cs->add_option("--data", cs_data, "events CSV (default: simulated 20-unit surrogate)");
  cs->add_option("--window", cs_window, "observation window start:end");
  cs->add_flag("--align-zero", cs_align, "shift each unit so its first event is at 0");
  cs->add_option("--percentile", cs_spec.percentile, "prediction percentile")
      ->check(CLI::Range(0.0, 1.0));
  cs->add_option("--horizons", cs_spec.horizons, "forecast lengths L")->delimiter(',');
  cs->add_option("--methods", cs_methods, "mgcp-pp, independent-baseline")->delimiter(',');
  cs->add_option("--forecast-stat", cs_stat, "expected or sampled-median")
      ->check(CLI::IsMember({"expected", "sampled-median"}));
  cs->add_option("--samples", cs_spec.samples, "posterior draws for sampled-median")
      ->check(CLI::PositiveNumber);
  cs_flags.add(cs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*sim) run_simulate(g, sim_kind, sim_n, sim_window, fleet_options, truth_grid);
    else if (*fit_cmd) run_fit(g, fit_cmd, fit_flags, fit_data, fit_window, fit_align, model_out);
    else if (*pred)
      run_predict(g, pred_model, pred_unit,
                  t_star_opt->count() ? std::optional<double>(pred_t_star) : std::nullopt,
                  pred_horizon, pred_grid, pred_stat, pred_samples);
    else if (*bench)
      run_benchmark_cmd(g, bench, bench_flags, bench_spec, bench_kind, bench_window,
                        bench_methods);
    else if (*cs)
      run_case_study_cmd(g, cs, cs_flags, cs_spec, cs_data, cs_window, cs_methods, cs_stat,
                         cs_align);
  } catch (const CLI::Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError &e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kOk;
}
