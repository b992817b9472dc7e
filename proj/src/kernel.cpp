#include "mgcp/kernel.hpp"

#include <Eigen/Eigenvalues>
#include <string>

#include "mgcp/csv.hpp"
#include "mgcp/errors.hpp"

namespace mgcp {

void validate(const Hyperparameters &theta) {
  if (!(theta.length_scale > 0.0) || !std::isfinite(theta.length_scale))
    throw ValidationError("latent length-scale must be positive, got " +
                          format_double(theta.length_scale));
  if (theta.width.size() != theta.scale.size())
    throw ValidationError("width/scale size mismatch");
  if (theta.width.size() == 0) throw ValidationError("no units in hyperparameters");
  for (Eigen::Index i = 0; i < theta.width.size(); ++i) {
    if (!(theta.width[i] > 0.0) || !std::isfinite(theta.width[i]))
      throw ValidationError("kernel width of unit " + std::to_string(i) +
                            " must be positive");
    if (!std::isfinite(theta.scale[i]))
      throw ValidationError("kernel scale of unit " + std::to_string(i) +
                            " is not finite");
  }
}

namespace {

void check_unit(Eigen::Index i, const Hyperparameters &theta) {
  if (i < 0 || i >= theta.num_units())
    throw ValidationError("unit index " + std::to_string(i) +
                          " out of range [0, " +
                          std::to_string(theta.num_units()) + ")");
}

}  // namespace

double latent_kernel_checked(double t, double u, double ell) {
  if (!(ell > 0.0)) throw ValidationError("length-scale must be positive");
  return latent_kernel(t, u, ell);
}

double output_cross_kernel(Eigen::Index i, Eigen::Index j, double t, double u,
                           const Hyperparameters &theta) {
  check_unit(i, theta);
  check_unit(j, theta);
  return output_cross_kernel(t, u, theta.length_scale, theta.width[i],
                             theta.width[j], theta.scale[i], theta.scale[j]);
}

double output_latent_cross_kernel(Eigen::Index i, double t, double z,
                                  const Hyperparameters &theta) {
  check_unit(i, theta);
  return output_latent_cross_kernel(t, z, theta.length_scale, theta.width[i],
                                    theta.scale[i]);
}

double output_prior_variance(Eigen::Index i, const Hyperparameters &theta) {
  check_unit(i, theta);
  const double xi = theta.width[i];
  const double ell = theta.length_scale;
  const double a = theta.scale[i];
  return a * a * ell / std::sqrt(2.0 * xi * xi + ell * ell);
}

Eigen::MatrixXd latent_gram(const Eigen::VectorXd &z, double ell) {
  const Eigen::Index m = z.size();
  Eigen::MatrixXd k(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    k(a, a) = 1.0;
    for (Eigen::Index b = 0; b < a; ++b) {
      k(a, b) = latent_kernel(z[a], z[b], ell);
      k(b, a) = k(a, b);
    }
  }
  return k;
}

Eigen::LLT<Eigen::MatrixXd> factor_with_jitter(const Eigen::MatrixXd &k,
                                               double &jitter_used,
                                               const JitterPolicy &policy) {
  const double mean_diag = k.diagonal().mean();
  const Eigen::Index n = k.rows();
  for (double rel = policy.initial; rel <= policy.maximum * (1.0 + 1e-12);
       rel *= policy.factor) {
    const double jitter = rel * mean_diag;
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(kj);
    if (llt.info() == Eigen::Success) {
      jitter_used = jitter;
      return llt;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
  const auto &ev = es.eigenvalues();
  const double cond = n > 0 && ev[0] > 0 ? ev[n - 1] / ev[0]
                                         : std::numeric_limits<double>::infinity();
  throw IllConditionedError(
      "Cholesky failed after maximum jitter; eigenvalue range [" +
          format_double(n > 0 ? ev[0] : 0.0) + ", " +
          format_double(n > 0 ? ev[n - 1] : 0.0) + "], condition estimate " +
          format_double(cond),
      cond);
}

Eigen::MatrixXd cross_gram(std::span<const LatentPoint> points,
                           const Eigen::VectorXd &z, const Hyperparameters &theta) {
  const Eigen::Index m = z.size();
  Eigen::MatrixXd kfx(static_cast<Eigen::Index>(points.size()), m);
  for (std::size_t p = 0; p < points.size(); ++p) {
    const auto i = points[p].unit;
    check_unit(i, theta);
    for (Eigen::Index a = 0; a < m; ++a)
      kfx(static_cast<Eigen::Index>(p), a) = output_latent_cross_kernel(
          points[p].time, z[a], theta.length_scale, theta.width[i],
          theta.scale[i]);
  }
  return kfx;
}

GramBundle build_gram(std::span<const LatentPoint> points,
                      const Eigen::VectorXd &z, const Hyperparameters &theta,
                      const JitterPolicy &policy) {
  validate(theta);
  if (z.size() == 0) throw ValidationError("no inducing points");
  GramBundle g;
  g.kxx = latent_gram(z, theta.length_scale);
  g.kxx_llt = factor_with_jitter(g.kxx, g.jitter, policy);
  g.kfx = cross_gram(points, z, theta);
  g.kff_diag.resize(static_cast<Eigen::Index>(points.size()));
  for (std::size_t p = 0; p < points.size(); ++p)
    g.kff_diag[static_cast<Eigen::Index>(p)] =
        output_prior_variance(points[p].unit, theta);
  return g;
}

Eigen::MatrixXd output_covariance(std::span<const LatentPoint> points,
                                  const Hyperparameters &theta) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index q = 0; q <= p; ++q) {
      const auto &a = points[static_cast<std::size_t>(p)];
      const auto &b = points[static_cast<std::size_t>(q)];
      k(p, q) = output_cross_kernel(a.unit, b.unit, a.time, b.time, theta);
      k(q, p) = k(p, q);
    }
  return k;
}

Eigen::MatrixXd joint_covariance(std::span<const LatentPoint> points,
                                 const Eigen::VectorXd &z,
                                 const Hyperparameters &theta) {
  const Eigen::Index m = z.size();
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd k(m + n, m + n);
  k.topLeftCorner(m, m) = latent_gram(z, theta.length_scale);
  Eigen::MatrixXd kfx = cross_gram(points, z, theta);
  k.bottomLeftCorner(n, m) = kfx;
  k.topRightCorner(m, n) = kfx.transpose();
  k.bottomRightCorner(n, n) = output_covariance(points, theta);
  return k;
}

Eigen::VectorXd equally_spaced(double start, double end, Eigen::Index m) {
  if (m < 1) throw ValidationError("need at least one inducing point");
  if (m == 1) return Eigen::VectorXd::Constant(1, 0.5 * (start + end));
  return Eigen::VectorXd::LinSpaced(m, start, end);
}

}  // namespace mgcp
