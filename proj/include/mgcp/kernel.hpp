#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <span>
#include <vector>

namespace mgcp {

// Shared latent length-scale plus one (width, scale) pair per unit. Each unit's
// latent log-intensity is the shared process smoothed by a Gaussian kernel of
// standard deviation `width[i]` and amplitude `scale[i]`.
template <typename Scalar>
struct HyperparametersT {
  Scalar length_scale{1};
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> width;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> scale;

  Eigen::Index num_units() const { return width.size(); }
};

using Hyperparameters = HyperparametersT<double>;

// Throws ValidationError on nonpositive length-scale or widths, mismatched
// sizes, or non-finite entries.
void validate(const Hyperparameters &theta);

// exp(-(t-u)^2 / (2 ell^2)).
template <typename Scalar>
Scalar latent_kernel(const Scalar &t, const Scalar &u, const Scalar &ell) {
  using std::exp;
  const Scalar d = t - u;
  return exp(-d * d / (Scalar(2) * ell * ell));
}

// Covariance between unit i at t and unit j at u:
//   a_i a_j sqrt(ell^2 / eta^2) exp(-(t-u)^2 / (2 eta^2)),
//   eta^2 = xi_i^2 + xi_j^2 + ell^2.
template <typename Scalar>
Scalar output_cross_kernel(const Scalar &t, const Scalar &u, const Scalar &ell,
                           const Scalar &xi_i, const Scalar &xi_j,
                           const Scalar &a_i, const Scalar &a_j) {
  using std::exp;
  using std::sqrt;
  const Scalar eta2 = xi_i * xi_i + xi_j * xi_j + ell * ell;
  const Scalar d = t - u;
  return a_i * a_j * sqrt(ell * ell / eta2) * exp(-d * d / (Scalar(2) * eta2));
}

// Covariance between unit i at t and the latent process at z
// (eta^2 = xi_i^2 + ell^2).
template <typename Scalar>
Scalar output_latent_cross_kernel(const Scalar &t, const Scalar &z,
                                  const Scalar &ell, const Scalar &xi_i,
                                  const Scalar &a_i) {
  using std::exp;
  using std::sqrt;
  const Scalar eta2 = xi_i * xi_i + ell * ell;
  const Scalar d = t - z;
  return a_i * sqrt(ell * ell / eta2) * exp(-d * d / (Scalar(2) * eta2));
}

// Indexed forms over a hyperparameter set; these check the unit indices.
double latent_kernel_checked(double t, double u, double ell);
double output_cross_kernel(Eigen::Index i, Eigen::Index j, double t, double u,
                           const Hyperparameters &theta);
double output_latent_cross_kernel(Eigen::Index i, double t, double z,
                                  const Hyperparameters &theta);

// Prior variance of unit i, constant in time.
double output_prior_variance(Eigen::Index i, const Hyperparameters &theta);

struct LatentPoint {
  Eigen::Index unit = 0;
  double time = 0.0;
};

struct JitterPolicy {
  double initial = 1e-10;  // relative to mean(diag)
  double maximum = 1e-4;
  double factor = 10.0;
};

// Gram matrices of one (points, inducing points, hyperparameters) triple.
// `kxx_llt` factors kxx + jitter * I; `jitter` is the absolute amount added.
struct GramBundle {
  Eigen::MatrixXd kxx;
  Eigen::LLT<Eigen::MatrixXd> kxx_llt;
  double jitter = 0.0;
  Eigen::MatrixXd kfx;
  Eigen::VectorXd kff_diag;
};

Eigen::MatrixXd latent_gram(const Eigen::VectorXd &z, double ell);

// Cholesky with the jitter ladder. Throws IllConditionedError once the
// maximum jitter has been tried.
Eigen::LLT<Eigen::MatrixXd> factor_with_jitter(const Eigen::MatrixXd &k,
                                               double &jitter_used,
                                               const JitterPolicy &policy = {});

Eigen::MatrixXd cross_gram(std::span<const LatentPoint> points,
                           const Eigen::VectorXd &z, const Hyperparameters &theta);

GramBundle build_gram(std::span<const LatentPoint> points,
                      const Eigen::VectorXd &z, const Hyperparameters &theta,
                      const JitterPolicy &policy = {});

// Full joint prior covariance of (latent at z, outputs at points), ordered
// latent first. Used by the samplers and by PSD checks.
Eigen::MatrixXd joint_covariance(std::span<const LatentPoint> points,
                                 const Eigen::VectorXd &z,
                                 const Hyperparameters &theta);

// Covariance among outputs only.
Eigen::MatrixXd output_covariance(std::span<const LatentPoint> points,
                                  const Hyperparameters &theta);

// M equally spaced locations covering [start, end]; a single point sits at the
// midpoint.
Eigen::VectorXd equally_spaced(double start, double end, Eigen::Index m);

}  // namespace mgcp
