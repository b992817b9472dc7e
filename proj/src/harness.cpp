#include "mgcp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>
#include <tuple>

#include "mgcp/csv.hpp"
#include "mgcp/errors.hpp"
#include "mgcp/prediction.hpp"

namespace mgcp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::pair<double, double> mean_and_se(const std::vector<double> &v) {
  if (v.empty()) return {kNaN, kNaN};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double n = static_cast<double>(v.size());
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace

std::string to_string(Method method) {
  return method == Method::mgcp_pp ? "mgcp-pp" : "independent-baseline";
}

Method parse_method(const std::string &name) {
  if (name == "mgcp-pp") return Method::mgcp_pp;
  if (name == "independent-baseline") return Method::independent_baseline;
  throw ValidationError("unknown method '" + name +
                        "' (expected mgcp-pp or independent-baseline)");
}

FittedModel fit_method(const EventDataset &ds, const std::string &test_unit, Method method,
                       const FitConfig &config) {
  if (method == Method::mgcp_pp) return fit(ds, config);
  return fit(holdout_split(ds, test_unit).second, config);
}

void parallel_for(int count, int jobs, const std::function<void(int)> &task) {
  jobs = std::max(1, std::min(jobs, count));
  if (jobs == 1) {
    for (int k = 0; k < count; ++k) task(k);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex mutex;
  auto worker = [&] {
    while (true) {
      const int k = next.fetch_add(1);
      if (k >= count) return;
      {
        std::lock_guard lock(mutex);
        if (error) return;
      }
      try {
        task(k);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto &t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

void validate(const BenchmarkSpec &spec) {
  validate(spec.window);
  validate(spec.fit);
  if (spec.replications < 1) throw ValidationError("replications must be >= 1");
  if (spec.num_units < 2) throw ValidationError("a fleet needs at least 2 units");
  if (spec.percentiles.empty()) throw ValidationError("at least one percentile is required");
  for (double p : spec.percentiles)
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("percentiles must lie in (0, 1)");
  if (spec.methods.empty()) throw ValidationError("at least one method is required");
  if (spec.rms_grid < 2) throw ValidationError("rms grid needs >= 2 points");
}

std::vector<BenchmarkRow> run_replicate(const BenchmarkSpec &spec, int replicate) {
  const auto rep = static_cast<std::uint64_t>(replicate);
  std::vector<BenchmarkRow> rows;
  auto fail_all = [&](const std::string &what) {
    for (double p : spec.percentiles)
      for (Method m : spec.methods) rows.push_back({replicate, p, m, kNaN, kNaN, what});
  };
  Fleet fleet = [&]() -> Fleet {
    try {
      return generate_fleet(spec.kind, spec.num_units, spec.window,
                            derive_seed(spec.seed, {rep}), spec.fleet);
    } catch (const Error &e) {
      fail_all(e.what());
      return Fleet{EventDataset({UnitRecord{"u1", {}, std::nullopt}}, spec.window), {}, {}, {}};
    }
  }();
  if (!rows.empty()) return rows;

  const std::size_t test = fleet.data.size() - 1;
  const std::string test_id = fleet.data.unit(test).unit_id;
  const Eigen::VectorXd grid =
      Eigen::VectorXd::LinSpaced(spec.rms_grid, spec.window.start, spec.window.end);
  Eigen::VectorXd truth(grid.size());
  for (Eigen::Index k = 0; k < grid.size(); ++k) truth[k] = fleet.truth[test](grid[k]);
  const std::vector<double> grid_v(grid.data(), grid.data() + grid.size());

  for (std::size_t pi = 0; pi < spec.percentiles.size(); ++pi) {
    const double p = spec.percentiles[pi];
    const EventDataset truncated = truncate_at_percentile(fleet.data, test_id, p);
    const double t_star = truncated.observation_end(test);
    const auto heldout = events_in(fleet.data.unit(test), t_star, spec.window.end);
    for (Method method : spec.methods) {
      FitConfig config = spec.fit;
      config.seed = derive_seed(spec.seed, {rep, pi, static_cast<std::uint64_t>(method)});
      try {
        const FittedModel model = fit_method(truncated, test_id, method, config);
        const Eigen::Index unit = model.unit_index(test_id);
        const double ll = predictive_loglik(model, unit, heldout,
                                            Interval{t_star, spec.window.end}, config.quad_order);
        const double rms = rms_intensity(intensity_curve(model, unit, grid_v), truth);
        if (!std::isfinite(ll) || !std::isfinite(rms))
          throw NumericalError("non-finite score");
        rows.push_back({replicate, p, method, ll, rms, {}});
      } catch (const Error &e) {
        rows.push_back({replicate, p, method, kNaN, kNaN, e.what()});
      }
    }
  }
  return rows;
}

namespace {

template <class Row>
auto row_key(const Row &r) {
  if constexpr (std::is_same_v<Row, BenchmarkRow>)
    return std::make_tuple(r.replicate, r.percentile, static_cast<int>(r.method));
  else
    return std::make_tuple(r.fold, r.horizon, static_cast<int>(r.method));
}

}  // namespace

std::vector<BenchmarkRow> run_benchmark(const BenchmarkSpec &spec, int jobs) {
  validate(spec);
  std::vector<std::vector<BenchmarkRow>> parts(static_cast<std::size_t>(spec.replications));
  parallel_for(spec.replications, jobs, [&](int r) {
    parts[static_cast<std::size_t>(r)] = run_replicate(spec, r);
  });
  std::vector<BenchmarkRow> rows;
  for (auto &p : parts) rows.insert(rows.end(), p.begin(), p.end());
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto &a, const auto &b) { return row_key(a) < row_key(b); });
  return rows;
}

std::vector<BenchmarkSummary> summarize(std::span<const BenchmarkRow> rows) {
  std::map<std::pair<double, int>, std::pair<std::vector<double>, std::vector<double>>> groups;
  std::map<std::pair<double, int>, int> failed;
  for (const auto &r : rows) {
    const auto key = std::make_pair(r.percentile, static_cast<int>(r.method));
    auto &g = groups[key];
    if (!r.ok()) {
      ++failed[key];
      continue;
    }
    g.first.push_back(r.ll);
    g.second.push_back(r.rms);
  }
  std::vector<BenchmarkSummary> out;
  for (const auto &[key, g] : groups) {
    BenchmarkSummary s;
    s.percentile = key.first;
    s.method = static_cast<Method>(key.second);
    s.n = static_cast<int>(g.first.size());
    s.failed = failed.count(key) ? failed.at(key) : 0;
    std::tie(s.mean_ll, s.se_ll) = mean_and_se(g.first);
    std::tie(s.mean_rms, s.se_rms) = mean_and_se(g.second);
    out.push_back(s);
  }
  return out;
}

void write_benchmark_csv(std::ostream &os, std::span<const BenchmarkRow> rows) {
  os << "replicate,percentile,method,ll,rms\n";
  for (const auto &r : rows)
    os << r.replicate << ',' << format_double(r.percentile) << ',' << to_string(r.method) << ','
       << format_double(r.ll) << ',' << format_double(r.rms) << '\n';
}

std::vector<BenchmarkRow> read_benchmark_csv(std::istream &is) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != "replicate,percentile,method,ll,rms")
    throw ParseError("expected header replicate,percentile,method,ll,rms", 1);
  std::vector<BenchmarkRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split_fields(trim(line));
    if (f.size() != 5) throw ParseError("expected 5 fields", lineno);
    BenchmarkRow r;
    double rep = 0.0;
    if (!parse_double(f[0], rep) || !parse_double(f[1], r.percentile))
      throw ParseError("bad replicate or percentile", lineno);
    r.replicate = static_cast<int>(rep);
    r.method = parse_method(std::string(f[2]));
    const bool ll_ok = parse_double(f[3], r.ll), rms_ok = parse_double(f[4], r.rms);
    if (!ll_ok || !rms_ok) {
      if (trim(f[3]) != "nan" || trim(f[4]) != "nan") throw ParseError("bad ll or rms", lineno);
      r.ll = r.rms = kNaN;
      r.error = "failed";
    }
    rows.push_back(r);
  }
  return rows;
}

void write_benchmark_summary(std::ostream &os, std::span<const BenchmarkSummary> summary) {
  os << "percentile,method,n,failed,mean_ll,se_ll,mean_rms,se_rms\n";
  for (const auto &s : summary)
    os << format_double(s.percentile) << ',' << to_string(s.method) << ',' << s.n << ','
       << s.failed << ',' << format_double(s.mean_ll) << ',' << format_double(s.se_ll) << ','
       << format_double(s.mean_rms) << ',' << format_double(s.se_rms) << '\n';
}

void validate(const CaseStudySpec &spec, const EventDataset &ds) {
  validate(spec.fit);
  if (ds.size() < 3) throw ValidationError("the case study needs at least 3 units");
  if (!(spec.percentile > 0.0 && spec.percentile < 1.0))
    throw ValidationError("percentile must lie in (0, 1)");
  if (spec.horizons.empty()) throw ValidationError("at least one horizon is required");
  const double t_star = percentile_time(ds.window(), spec.percentile);
  for (std::size_t k = 0; k < spec.horizons.size(); ++k) {
    if (!(spec.horizons[k] > 0.0)) throw ValidationError("horizons must be positive");
    if (k > 0 && !(spec.horizons[k] > spec.horizons[k - 1]))
      throw ValidationError("horizons must be increasing");
  }
  if (t_star + spec.horizons.back() > ds.window().end + 1e-12)
    throw ValidationError("t* + largest horizon exceeds the observation window");
  if (spec.methods.empty()) throw ValidationError("at least one method is required");
  if (spec.stat == ForecastStat::sampled_median && spec.samples < 1)
    throw ValidationError("samples must be >= 1");
}

std::vector<CaseStudyRow> run_case_study(const EventDataset &ds, const CaseStudySpec &spec,
                                         int jobs) {
  validate(spec, ds);
  const int folds = static_cast<int>(ds.size());
  std::vector<std::vector<CaseStudyRow>> parts(static_cast<std::size_t>(folds));
  parallel_for(folds, jobs, [&](int fold) {
    const auto f = static_cast<std::size_t>(fold);
    const std::string &id = ds.unit(f).unit_id;
    const EventDataset truncated = truncate_at_percentile(ds, id, spec.percentile);
    const double t_star = truncated.observation_end(f);
    for (Method method : spec.methods) {
      FitConfig config = spec.fit;
      config.seed = derive_seed(spec.seed, {f, static_cast<std::uint64_t>(method)});
      const FittedModel model = fit_method(truncated, id, method, config);
      const Eigen::Index unit = model.unit_index(id);
      for (std::size_t h = 0; h < spec.horizons.size(); ++h) {
        const double horizon = spec.horizons[h];
        double lambda_hat = 0.0;
        if (spec.stat == ForecastStat::expected) {
          lambda_hat = expected_count(model, unit, t_star, horizon, config.quad_order);
        } else {
          lambda_hat = sample_count_forecast(model, unit, t_star, horizon, config.quad_order,
                                             spec.samples, derive_seed(config.seed, {h}))
                           .median;
        }
        const int actual =
            static_cast<int>(events_in(ds.unit(f), t_star, t_star + horizon).size());
        parts[f].push_back(
            {fold, horizon, method, lambda_hat, actual, std::abs(lambda_hat - actual)});
      }
    }
  });
  std::vector<CaseStudyRow> rows;
  for (auto &p : parts) rows.insert(rows.end(), p.begin(), p.end());
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto &a, const auto &b) { return row_key(a) < row_key(b); });
  return rows;
}

std::vector<MaeSummary> summarize_case_study(std::span<const CaseStudyRow> rows) {
  std::map<std::pair<double, int>, std::vector<double>> groups;
  for (const auto &r : rows)
    groups[{r.horizon, static_cast<int>(r.method)}].push_back(r.abs_err);
  std::vector<MaeSummary> out;
  for (const auto &[key, errs] : groups) {
    MaeSummary s;
    s.horizon = key.first;
    s.method = static_cast<Method>(key.second);
    s.n = static_cast<int>(errs.size());
    std::tie(s.mae, s.se) = mean_and_se(errs);
    out.push_back(s);
  }
  return out;
}

void write_case_study_csv(std::ostream &os, std::span<const CaseStudyRow> rows) {
  os << "fold,L,method,lambda_hat,actual,abs_err\n";
  for (const auto &r : rows)
    os << r.fold << ',' << format_double(r.horizon) << ',' << to_string(r.method) << ','
       << format_double(r.lambda_hat) << ',' << r.actual << ',' << format_double(r.abs_err)
       << '\n';
}

void write_mae_table(std::ostream &os, std::span<const MaeSummary> table) {
  os << "L,method,n,mae,se\n";
  for (const auto &s : table)
    os << format_double(s.horizon) << ',' << to_string(s.method) << ',' << s.n << ','
       << format_double(s.mae) << ',' << format_double(s.se) << '\n';
}

SignTest paired_sign_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("paired samples differ in length");
  SignTest t;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::isnan(a[k]) || std::isnan(b[k])) continue;
    if (a[k] < b[k]) ++t.wins;
    else if (a[k] > b[k]) ++t.losses;
    else ++t.ties;
  }
  const int n = t.wins + t.losses;
  double p = 0.0;
  for (int k = t.wins; k <= n; ++k)
    p += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) -
                  n * std::log(2.0));
  t.p_value = std::min(1.0, p);
  return t;
}

}  // namespace mgcp
