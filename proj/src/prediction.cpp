#include "mgcp/prediction.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

#include "mgcp/errors.hpp"
#include "mgcp/quadrature.hpp"
#include "mgcp/rng.hpp"

namespace mgcp {

namespace {

void check_unit(const FittedModel &model, Eigen::Index unit) {
  if (unit < 0 || unit >= model.theta.num_units())
    throw ValidationError("unit index " + std::to_string(unit) + " out of range");
}

}  // namespace

Moments predict_latent(const FittedModel &model, Eigen::Index unit,
                       std::span<const double> times) {
  check_unit(model, unit);
  std::vector<LatentPoint> pts;
  pts.reserve(times.size());
  for (double t : times) {
    if (std::isnan(t)) throw ValidationError("NaN prediction time");
    pts.push_back({unit, t});
  }
  return posterior_moments(pts, model.theta, model.state);
}

IntensityCurve intensity_curve_from_moments(Eigen::VectorXd grid, const Moments &m) {
  IntensityCurve c;
  c.grid = std::move(grid);
  c.mu = m.mean;
  c.var = m.var;
  const Eigen::ArrayXd sd = m.var.array().sqrt();
  c.mean_intensity = (m.mean.array() + 0.5 * m.var.array()).exp();
  c.median_intensity = m.mean.array().exp();
  c.lower = (m.mean.array() - 1.96 * sd).exp();
  c.upper = (m.mean.array() + 1.96 * sd).exp();
  return c;
}

IntensityCurve intensity_curve(const FittedModel &model, Eigen::Index unit,
                               std::span<const double> grid) {
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw ValidationError("intensity grid must be sorted");
  Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(
      grid.data(), static_cast<Eigen::Index>(grid.size()));
  return intensity_curve_from_moments(std::move(g), predict_latent(model, unit, grid));
}

double expected_count(const FittedModel &model, Eigen::Index unit, double t_star,
                      double horizon, int quad_order) {
  check_unit(model, unit);
  if (!(horizon > 0.0)) throw ValidationError("horizon must be positive");
  return expected_intensity_integral(model.theta, model.state, unit,
                                     Interval{t_star, t_star + horizon}, quad_order);
}

int poisson_truncation(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ValidationError("Poisson mean must be finite and nonnegative");
  if (lambda == 0.0) return 0;
  const double log_tail = std::log(kPoissonTail);
  // P(Y >= k) <= exp(-lambda) (e lambda / k)^k for k > lambda.
  int y = static_cast<int>(std::floor(lambda));
  for (; y < kMaxCount; ++y) {
    const double k = y + 1.0;
    if (k <= lambda) continue;
    const double log_bound = -lambda + k * (1.0 + std::log(lambda) - std::log(k));
    if (log_bound < log_tail) return y;
  }
  return kMaxCount;
}

std::vector<double> count_pmf(double lambda, int y_max) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ValidationError("Poisson mean must be finite and nonnegative");
  if (y_max < 0) throw ValidationError("y_max must be nonnegative");
  std::vector<double> p(static_cast<std::size_t>(y_max) + 1, 0.0);
  if (lambda == 0.0) {
    p[0] = 1.0;
    return p;
  }
  const double log_lambda = std::log(lambda);
  for (int y = 0; y <= y_max; ++y)
    p[static_cast<std::size_t>(y)] =
        std::exp(-lambda + y * log_lambda - std::lgamma(y + 1.0));
  return p;
}

std::vector<double> count_pmf(double lambda) {
  return count_pmf(lambda, poisson_truncation(lambda));
}

CountForecast forecast_counts(const FittedModel &model, Eigen::Index unit,
                              double t_star, double horizon, int quad_order) {
  CountForecast f;
  f.t_star = t_star;
  f.horizon = horizon;
  f.expected = expected_count(model, unit, t_star, horizon, quad_order);
  f.pmf = count_pmf(f.expected);
  return f;
}

SampledForecast sample_count_forecast(const FittedModel &model, Eigen::Index unit,
                                      double t_star, double horizon, int quad_order,
                                      int samples, std::uint64_t seed) {
  check_unit(model, unit);
  if (!(horizon > 0.0)) throw ValidationError("horizon must be positive");
  if (samples < 1) throw ValidationError("need at least one sample");
  const auto rule = composite_gauss_legendre(t_star, t_star + horizon, quad_order, 10);
  const Eigen::Index n = rule.nodes.size();
  std::vector<LatentPoint> pts;
  for (Eigen::Index k = 0; k < n; ++k) pts.push_back({unit, rule.nodes[k]});

  // Joint q*(f) over the nodes.
  const GramBundle gram = build_gram(pts, model.state.inducing, model.theta);
  const Eigen::MatrixXd a = gram.kxx_llt.solve(gram.kfx.transpose()).transpose();
  const Eigen::VectorXd mean = a * model.state.mean;
  Eigen::MatrixXd cov = output_covariance(pts, model.theta) - a * gram.kfx.transpose() +
                        a * model.state.covariance() * a.transpose();
  cov = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::MatrixXd root =
      es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal;
  SampledForecast out;
  out.totals.reserve(static_cast<std::size_t>(samples));
  Eigen::VectorXd eps(n);
  for (int s = 0; s < samples; ++s) {
    for (Eigen::Index k = 0; k < n; ++k) eps[k] = normal(rng);
    const Eigen::VectorXd f = mean + root * eps;
    if ((f.array() > kMaxExponent).any())
      throw OverflowError("sampled log-intensity overflows");
    out.totals.push_back(rule.weights.dot(f.array().exp().matrix()));
  }
  const double max_total = *std::max_element(out.totals.begin(), out.totals.end());
  const int y_max = poisson_truncation(max_total);
  out.pmf.assign(static_cast<std::size_t>(y_max) + 1, 0.0);
  for (double lam : out.totals) {
    const auto p = count_pmf(lam, y_max);
    for (std::size_t y = 0; y < p.size(); ++y) out.pmf[y] += p[y] / samples;
  }
  double cdf = 0.0;
  out.median = y_max;
  for (std::size_t y = 0; y < out.pmf.size(); ++y) {
    cdf += out.pmf[y];
    if (cdf >= 0.5) {
      out.median = static_cast<int>(y);
      break;
    }
  }
  return out;
}

double predictive_loglik(const FittedModel &model, Eigen::Index unit,
                         std::span<const double> heldout, const Interval &region,
                         int quad_order) {
  check_unit(model, unit);
  for (double t : heldout)
    if (t < region.start || t > region.end)
      throw ValidationError("held-out event outside the evaluation region");
  const double integral =
      expected_intensity_integral(model.theta, model.state, unit, region, quad_order);
  double data = 0.0;
  if (!heldout.empty()) data = predict_latent(model, unit, heldout).mean.sum();
  return data - integral;
}

double rms_error(const Eigen::VectorXd &predicted, const Eigen::VectorXd &truth) {
  if (predicted.size() != truth.size() || predicted.size() == 0)
    throw ValidationError("RMS needs two nonempty vectors of equal length");
  double sum = 0.0;
  for (Eigen::Index k = 0; k < predicted.size(); ++k) {
    const double d = predicted[k] - truth[k];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(predicted.size()));
}

double rms_intensity(const IntensityCurve &pred, const Eigen::VectorXd &truth) {
  return rms_error(pred.mean_intensity, truth);
}

double mae_counts(std::span<const double> forecasts, std::span<const double> actual) {
  if (forecasts.size() != actual.size() || forecasts.empty())
    throw ValidationError("MAE needs two nonempty sequences of equal length");
  double sum = 0.0;
  for (std::size_t k = 0; k < forecasts.size(); ++k)
    sum += std::abs(forecasts[k] - actual[k]);
  return sum / static_cast<double>(forecasts.size());
}

}  // namespace mgcp
