#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "mgcp/inference.hpp"

namespace mgcp {

// Posterior log-intensity on a grid with log-normal intensity statistics.
struct IntensityCurve {
  Eigen::VectorXd grid;
  Eigen::VectorXd mu;
  Eigen::VectorXd var;
  Eigen::VectorXd mean_intensity;    // exp(mu + var / 2)
  Eigen::VectorXd median_intensity;  // exp(mu)
  Eigen::VectorXd lower;             // exp(mu - 1.96 sd)
  Eigen::VectorXd upper;             // exp(mu + 1.96 sd)
};

// q*(f_unit(t)) at each time. Same computation as posterior_moments with the
// fitted parameters.
Moments predict_latent(const FittedModel &model, Eigen::Index unit,
                       std::span<const double> times);

IntensityCurve intensity_curve(const FittedModel &model, Eigen::Index unit,
                               std::span<const double> grid);
IntensityCurve intensity_curve_from_moments(Eigen::VectorXd grid, const Moments &m);

// Integral of the posterior mean intensity over [t_star, t_star + horizon].
double expected_count(const FittedModel &model, Eigen::Index unit, double t_star,
                      double horizon, int quad_order);

inline constexpr double kPoissonTail = 1e-12;
inline constexpr int kMaxCount = 100000;

// Smallest y with P(Y > y) < kPoissonTail under a Chernoff bound, capped at
// kMaxCount.
int poisson_truncation(double lambda);

// Poisson(lambda) probabilities for y = 0..y_max, computed in log space.
std::vector<double> count_pmf(double lambda, int y_max);
std::vector<double> count_pmf(double lambda);

struct CountForecast {
  double t_star = 0.0;
  double horizon = 0.0;
  double expected = 0.0;  // integrated intensity
  std::vector<double> pmf;
};

CountForecast forecast_counts(const FittedModel &model, Eigen::Index unit,
                              double t_star, double horizon, int quad_order);

// Mixed-Poisson predictive: draws joint f-paths over the horizon's quadrature
// nodes, integrates each, and averages the Poisson pmfs.
struct SampledForecast {
  std::vector<double> totals;  // sampled integrated intensities
  std::vector<double> pmf;
  int median = 0;
};

SampledForecast sample_count_forecast(const FittedModel &model, Eigen::Index unit,
                                      double t_star, double horizon, int quad_order,
                                      int samples, std::uint64_t seed);

// E_q*[log p(events | f)] over `region`: minus the expected integral plus the
// sum of posterior means at the held-out events.
double predictive_loglik(const FittedModel &model, Eigen::Index unit,
                         std::span<const double> heldout, const Interval &region,
                         int quad_order);

double rms_error(const Eigen::VectorXd &predicted, const Eigen::VectorXd &truth);
double rms_intensity(const IntensityCurve &pred, const Eigen::VectorXd &truth);

double mae_counts(std::span<const double> forecasts, std::span<const double> actual);

}  // namespace mgcp
