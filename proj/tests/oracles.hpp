// Reference computations for the tests. No quadrature rule, moment code or
// KL formula from the library is used here; the kernel closed forms appear
// only where they are themselves checked against the convolution quadratures
// below.
#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "mgcp/event_data.hpp"
#include "mgcp/inference.hpp"
#include "mgcp/kernel.hpp"

namespace oracle {

inline double std_normal_pdf(double s) {
  return std::exp(-0.5 * s * s) / std::sqrt(2.0 * std::numbers::pi);
}

// Covariance of two smoothed outputs by brute-force 2-D trapezoid quadrature
// of the double convolution. With v = t - xi_i s the smoothing kernel
// a N(.; 0, xi^2) becomes a standard normal density in s.
inline double convolution_covariance(double t, double u, double ell, double xi_i,
                                     double xi_j, double a_i, double a_j, int n = 801,
                                     double half_width = 9.0) {
  const double h = 2.0 * half_width / (n - 1);
  std::vector<double> s(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    s[k] = -half_width + h * k;
    w[k] = std_normal_pdf(s[k]) * h * ((k == 0 || k == n - 1) ? 0.5 : 1.0);
  }
  double total = 0.0;
  for (int p = 0; p < n; ++p) {
    const double v = t - xi_i * s[p];
    double inner = 0.0;
    for (int q = 0; q < n; ++q) {
      const double d = v - (u - xi_j * s[q]);
      inner += w[q] * std::exp(-d * d / (2.0 * ell * ell));
    }
    total += w[p] * inner;
  }
  return a_i * a_j * total;
}

// Output i at t against the latent process at z, by 1-D quadrature.
inline double convolution_latent_covariance(double t, double z, double ell, double xi,
                                            double a, int n = 4001, double half_width = 9.0) {
  const double h = 2.0 * half_width / (n - 1);
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    const double s = -half_width + h * k;
    const double d = t - xi * s - z;
    total += std_normal_pdf(s) * std::exp(-d * d / (2.0 * ell * ell)) * h *
             ((k == 0 || k == n - 1) ? 0.5 : 1.0);
  }
  return a * total;
}

inline double gaussian_logpdf(const Eigen::VectorXd &x, const Eigen::VectorXd &mean,
                              const Eigen::MatrixXd &cov) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(cov);
  const Eigen::VectorXd r = x - mean;
  const double quad = r.dot(lu.solve(r));
  const double logdet = std::log(std::abs(lu.determinant()));
  return -0.5 * (quad + logdet + static_cast<double>(x.size()) * std::log(2.0 * std::numbers::pi));
}

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

// E_q[log q(X) - log p(X)] with q = N(m, L L^T), p = N(0, K).
inline Estimate kl_monte_carlo(const Eigen::VectorXd &m, const Eigen::MatrixXd &l,
                               const Eigen::MatrixXd &k, long samples, std::mt19937_64 &rng) {
  const Eigen::Index dim = m.size();
  const Eigen::MatrixXd s = l * l.transpose();
  Eigen::FullPivLU<Eigen::MatrixXd> lu_s(s), lu_k(k);
  const Eigen::MatrixXd s_inv = lu_s.inverse(), k_inv = lu_k.inverse();
  const double c = 0.5 * (std::log(std::abs(lu_k.determinant())) -
                          std::log(std::abs(lu_s.determinant())));
  std::normal_distribution<double> normal;
  double sum = 0.0, sum2 = 0.0;
  Eigen::VectorXd eps(dim);
  for (long n = 0; n < samples; ++n) {
    for (Eigen::Index a = 0; a < dim; ++a) eps[a] = normal(rng);
    const Eigen::VectorXd x = m + l * eps;
    const Eigen::VectorXd r = x - m;
    const double v = c - 0.5 * r.dot(s_inv * r) + 0.5 * x.dot(k_inv * x);
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / samples;
  const double var = (sum2 / samples - mean * mean) * samples / (samples - 1.0);
  return {mean, std::sqrt(var / samples)};
}

// q(f) marginal at (unit, t) from explicit dense algebra, no jitter.
inline std::pair<double, double> moments(Eigen::Index unit, double t,
                                         const mgcp::Hyperparameters &theta,
                                         const mgcp::VariationalState &state) {
  const Eigen::Index m = state.size();
  Eigen::MatrixXd k(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b) {
      const double d = state.inducing[a] - state.inducing[b];
      k(a, b) = std::exp(-d * d / (2.0 * theta.length_scale * theta.length_scale));
    }
  Eigen::VectorXd kx(m);
  for (Eigen::Index a = 0; a < m; ++a)
    kx[a] = convolution_latent_covariance(t, state.inducing[a], theta.length_scale,
                                          theta.width[unit], theta.scale[unit]);
  const double kff = convolution_covariance(t, t, theta.length_scale, theta.width[unit],
                                            theta.width[unit], theta.scale[unit],
                                            theta.scale[unit], 401);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(k);
  const Eigen::VectorXd a = lu.solve(kx);
  const Eigen::MatrixXd s = state.chol * state.chol.transpose();
  return {a.dot(state.mean), kff - kx.dot(a) + a.dot(s * a)};
}

// Fast variant for dense grids: precomputes K^-1 once. Kernel values use the
// closed forms, which are checked separately against the quadratures above.
class DenseMoments {
 public:
  DenseMoments(const mgcp::Hyperparameters &theta, const mgcp::VariationalState &state)
      : theta_(theta), state_(state) {
    const Eigen::Index m = state.size();
    Eigen::MatrixXd k(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b < m; ++b) {
        const double d = state.inducing[a] - state.inducing[b];
        k(a, b) = std::exp(-d * d / (2.0 * theta.length_scale * theta.length_scale));
      }
    kinv_ = Eigen::FullPivLU<Eigen::MatrixXd>(k).inverse();
    const Eigen::MatrixXd s = state.chol * state.chol.transpose();
    b_ = kinv_ * (s - k) * kinv_;
    c_ = kinv_ * state.mean;
  }

  std::pair<double, double> operator()(Eigen::Index unit, double t) const {
    const Eigen::Index m = state_.size();
    const double ell = theta_.length_scale, xi = theta_.width[unit], al = theta_.scale[unit];
    const double eta2 = xi * xi + ell * ell;
    Eigen::VectorXd kx(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      const double d = t - state_.inducing[a];
      kx[a] = al * std::sqrt(ell * ell / eta2) * std::exp(-d * d / (2.0 * eta2));
    }
    const double kff = al * al * ell / std::sqrt(2.0 * xi * xi + ell * ell);
    return {kx.dot(c_), kff + kx.dot(b_ * kx)};
  }

 private:
  mgcp::Hyperparameters theta_;
  mgcp::VariationalState state_;
  Eigen::MatrixXd kinv_, b_;
  Eigen::VectorXd c_;
};

// Midpoint rule with n cells.
inline double riemann(const std::function<double(double)> &f, double a, double b, long n) {
  const double h = (b - a) / static_cast<double>(n);
  double total = 0.0;
  for (long k = 0; k < n; ++k) total += f(a + (static_cast<double>(k) + 0.5) * h);
  return total * h;
}

inline double poisson_pmf(double lambda, int y) {
  if (lambda == 0.0) return y == 0 ? 1.0 : 0.0;
  return std::exp(y * std::log(lambda) - lambda - std::lgamma(y + 1.0));
}

// log p(D) by importance sampling. Proposal: X ~ q, then f | X from the exact
// prior conditional on a dense grid plus the event locations; the integral of
// exp(f) uses the trapezoid rule on the grid. Weights are
// p(D | f) p(X) / q(X).
inline Estimate log_evidence_importance(const mgcp::EventDataset &ds,
                                        const mgcp::Hyperparameters &theta,
                                        const mgcp::VariationalState &state, int grid,
                                        long samples, std::mt19937_64 &rng) {
  const auto n_units = static_cast<Eigen::Index>(ds.size());
  const auto &w = ds.window();
  std::vector<mgcp::LatentPoint> pts;
  for (Eigen::Index i = 0; i < n_units; ++i)
    for (int k = 0; k < grid; ++k)
      pts.push_back({i, w.start + w.length() * k / (grid - 1)});
  const auto num_grid = static_cast<Eigen::Index>(pts.size());
  for (Eigen::Index i = 0; i < n_units; ++i)
    for (double t : ds.unit(static_cast<std::size_t>(i)).event_times) pts.push_back({i, t});
  const auto p = static_cast<Eigen::Index>(pts.size());
  const Eigen::Index m = state.size();

  Eigen::MatrixXd kff(p, p), kfx(p, m), kxx(m, m);
  const double ell = theta.length_scale;
  for (Eigen::Index a = 0; a < p; ++a) {
    for (Eigen::Index b = 0; b < p; ++b)
      kff(a, b) = mgcp::output_cross_kernel(pts[a].time, pts[b].time, ell, theta.width[pts[a].unit],
                                            theta.width[pts[b].unit], theta.scale[pts[a].unit],
                                            theta.scale[pts[b].unit]);
    for (Eigen::Index c = 0; c < m; ++c)
      kfx(a, c) = mgcp::output_latent_cross_kernel(pts[a].time, state.inducing[c], ell,
                                                   theta.width[pts[a].unit],
                                                   theta.scale[pts[a].unit]);
  }
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b) {
      const double d = state.inducing[a] - state.inducing[b];
      kxx(a, b) = std::exp(-d * d / (2.0 * ell * ell));
    }
  const Eigen::MatrixXd kxx_inv = Eigen::FullPivLU<Eigen::MatrixXd>(kxx).inverse();
  const Eigen::MatrixXd proj = kfx * kxx_inv;
  Eigen::MatrixXd cond = kff - proj * kfx.transpose();
  cond = 0.5 * (cond + cond.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cond);
  const double top = es.eigenvalues().maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < p; ++k)
    if (es.eigenvalues()[k] > 1e-12 * top) keep.push_back(k);
  Eigen::MatrixXd root(p, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    root.col(static_cast<Eigen::Index>(c)) =
        es.eigenvectors().col(keep[c]) * std::sqrt(es.eigenvalues()[keep[c]]);

  const Eigen::MatrixXd s = state.chol * state.chol.transpose();
  std::normal_distribution<double> normal;
  std::vector<double> logw(static_cast<std::size_t>(samples));
  const double h = w.length() / (grid - 1);
  Eigen::VectorXd ex(m), ef(root.cols());
  for (long n = 0; n < samples; ++n) {
    for (Eigen::Index a = 0; a < m; ++a) ex[a] = normal(rng);
    for (Eigen::Index a = 0; a < ef.size(); ++a) ef[a] = normal(rng);
    const Eigen::VectorXd x = state.mean + state.chol * ex;
    const Eigen::VectorXd f = proj * x + root * ef;
    double lw = gaussian_logpdf(x, Eigen::VectorXd::Zero(m), kxx) -
                gaussian_logpdf(x, state.mean, s);
    for (Eigen::Index i = 0; i < n_units; ++i) {
      double integral = 0.0;
      for (int k = 0; k < grid; ++k)
        integral += std::exp(f[i * grid + k]) * h * ((k == 0 || k == grid - 1) ? 0.5 : 1.0);
      lw -= integral;
    }
    for (Eigen::Index a = num_grid; a < p; ++a) lw += f[a];
    logw[static_cast<std::size_t>(n)] = lw;
  }
  double top_w = -INFINITY;
  for (double v : logw) top_w = std::max(top_w, v);
  double sum = 0.0, sum2 = 0.0;
  for (double v : logw) {
    const double e = std::exp(v - top_w);
    sum += e;
    sum2 += e * e;
  }
  const double mean = sum / samples;
  const double var = (sum2 / samples - mean * mean) * samples / (samples - 1.0);
  return {top_w + std::log(mean), std::sqrt(var / samples) / mean};
}

}  // namespace oracle
