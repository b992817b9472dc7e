#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mgcp/event_data.hpp"
#include "mgcp/inference.hpp"
#include "mgcp/simulation.hpp"

namespace mgcp {

enum class Method { mgcp_pp, independent_baseline };

std::string to_string(Method method);
Method parse_method(const std::string &name);

// mgcp_pp fits every unit jointly; independent_baseline fits the same model
// on a view holding only the test unit.
FittedModel fit_method(const EventDataset &ds, const std::string &test_unit, Method method,
                       const FitConfig &config);

struct BenchmarkSpec {
  GeneratorKind kind = GeneratorKind::mgcp_sigmoid;
  int replications = 1;
  std::vector<double> percentiles{0.3, 0.6};
  Eigen::Index num_units = 10;
  ObservationWindow window;
  std::uint64_t seed = 0;
  std::vector<Method> methods{Method::mgcp_pp, Method::independent_baseline};
  int rms_grid = 200;
  FitConfig fit;  // num_inducing is M
  FleetOptions fleet;
};

void validate(const BenchmarkSpec &spec);

struct BenchmarkRow {
  int replicate = 0;
  double percentile = 0.0;
  Method method = Method::mgcp_pp;
  double ll = 0.0;
  double rms = 0.0;
  std::string error;  // empty unless the replicate failed; ll and rms are NaN then

  bool ok() const { return error.empty(); }
};

// Sorted by (replicate, percentile, method).
std::vector<BenchmarkRow> run_benchmark(const BenchmarkSpec &spec, int jobs = 1);

// One replicate: fleet generation, truncation of the last unit, fits, scores.
std::vector<BenchmarkRow> run_replicate(const BenchmarkSpec &spec, int replicate);

struct BenchmarkSummary {
  double percentile = 0.0;
  Method method = Method::mgcp_pp;
  int n = 0;
  int failed = 0;
  double mean_ll = 0.0, se_ll = 0.0;
  double mean_rms = 0.0, se_rms = 0.0;
};

std::vector<BenchmarkSummary> summarize(std::span<const BenchmarkRow> rows);

void write_benchmark_csv(std::ostream &os, std::span<const BenchmarkRow> rows);
std::vector<BenchmarkRow> read_benchmark_csv(std::istream &is);
void write_benchmark_summary(std::ostream &os, std::span<const BenchmarkSummary> summary);

enum class ForecastStat { expected, sampled_median };

struct CaseStudySpec {
  double percentile = 0.5;
  std::vector<double> horizons{5, 10, 15, 20, 25};
  std::vector<Method> methods{Method::mgcp_pp, Method::independent_baseline};
  FitConfig fit;
  std::uint64_t seed = 0;
  ForecastStat stat = ForecastStat::expected;
  int samples = 2000;  // sampled_median only
};

void validate(const CaseStudySpec &spec, const EventDataset &ds);

struct CaseStudyRow {
  int fold = 0;
  double horizon = 0.0;
  Method method = Method::mgcp_pp;
  double lambda_hat = 0.0;
  int actual = 0;
  double abs_err = 0.0;
};

// Leave-one-out: each unit in turn is truncated at the percentile and
// forecast over every horizon. Sorted by (fold, horizon, method).
std::vector<CaseStudyRow> run_case_study(const EventDataset &ds, const CaseStudySpec &spec,
                                         int jobs = 1);

struct MaeSummary {
  double horizon = 0.0;
  Method method = Method::mgcp_pp;
  int n = 0;
  double mae = 0.0;
  double se = 0.0;  // standard error of the mean absolute error over folds
};

std::vector<MaeSummary> summarize_case_study(std::span<const CaseStudyRow> rows);

void write_case_study_csv(std::ostream &os, std::span<const CaseStudyRow> rows);
void write_mae_table(std::ostream &os, std::span<const MaeSummary> table);

struct SignTest {
  int wins = 0;  // pairs with a < b
  int losses = 0;
  int ties = 0;
  double p_value = 1.0;  // P(Binomial(wins + losses, 1/2) >= wins)
};

// One-sided paired sign test of a < b. Pairs with a NaN are dropped.
SignTest paired_sign_test(std::span<const double> a, std::span<const double> b);

// Runs task(0..count-1) on `jobs` threads; the first exception is rethrown
// after every worker has stopped.
void parallel_for(int count, int jobs, const std::function<void(int)> &task);

}  // namespace mgcp
