#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mgcp/event_data.hpp"
#include "mgcp/kernel.hpp"

namespace mgcp {

// q(X) = N(mean, chol chol^T) over the latent values at `inducing`.
struct VariationalState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd chol;  // lower triangular
  Eigen::VectorXd inducing;

  Eigen::Index size() const { return mean.size(); }
  Eigen::MatrixXd covariance() const { return chol * chol.transpose(); }
};

void validate(const VariationalState &state);

// Flips columns of `chol` so its diagonal is positive; S is unchanged.
void normalize_signs(VariationalState &state);

enum class OptimizerKind { lbfgs, adam };

struct FitConfig {
  // Panels of a 10-point Gauss-Legendre rule over each unit's observed region.
  int quad_order = 20;
  int max_iters = 1000;
  double tol = 1e-9;       // relative ELBO change
  double grad_tol = 1e-5;  // gradient max-norm
  OptimizerKind optimizer = OptimizerKind::lbfgs;
  std::uint64_t seed = 0;
  Eigen::Index num_inducing = 10;
  bool optimize_inducing = false;  // experimental

  // Initial state: length-scale as a fraction of the window, width as a
  // fraction of the length-scale, unit scales, chol = init_chol_scale *
  // chol(K_XX), mean = init_mean_noise * N(0, 1) draws from `seed`.
  double init_length_scale_fraction = 0.1;
  double init_width_ratio = 0.5;
  double init_scale = 1.0;
  double init_chol_scale = 0.5;
  double init_mean_noise = 0.0;
};

void validate(const FitConfig &config);

struct Moments {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
};

inline constexpr double kVarianceFloor = 1e-12;
inline constexpr double kMaxExponent = 700.0;

// Marginals of q(f) at the given points: mean K_fX K_XX^-1 m and the diagonal
// of K_ff - K_fX K_XX^-1 (I - S K_XX^-1) K_Xf, floored at kVarianceFloor.
Moments posterior_moments(std::span<const LatentPoint> points,
                          const Hyperparameters &theta,
                          const VariationalState &state);
Moments posterior_moments(const GramBundle &gram, const VariationalState &state);

// KL(q(X) || p(X)) with p(X) = N(0, K_XX).
double kl_term(const VariationalState &state, const Eigen::MatrixXd &kxx);
double kl_term(const VariationalState &state,
               const Eigen::LLT<Eigen::MatrixXd> &kxx_llt);

struct Interval {
  double start = 0.0;
  double end = 0.0;
};

struct IntegralTerm {
  Eigen::VectorXd per_unit;
  double total = 0.0;
};

// sum_i of the integral of exp(mu_i(u) + var_i(u) / 2) over regions[i], by
// composite Gauss-Legendre with `quad_order` panels. Throws OverflowError when
// an exponent exceeds kMaxExponent.
IntegralTerm expected_integral_term(const Hyperparameters &theta,
                                    const VariationalState &state,
                                    std::span<const Interval> regions,
                                    int quad_order);
// One unit over one interval, same rule as above.
double expected_intensity_integral(const Hyperparameters &theta,
                                   const VariationalState &state, Eigen::Index unit,
                                   const Interval &region, int quad_order);
// Every unit over the whole window.
IntegralTerm expected_integral_term(const Hyperparameters &theta,
                                    const VariationalState &state,
                                    const ObservationWindow &window, int quad_order);

// Observed region of each unit: [window.start, observation_end(i)].
std::vector<Interval> observed_regions(const EventDataset &ds);

// sum over units and events of mu_i(t).
double data_term(const EventDataset &ds, const Hyperparameters &theta,
                 const VariationalState &state);

struct ElboTerms {
  double integral = 0.0;
  double data = 0.0;
  double kl = 0.0;
  double value = 0.0;  // data - integral - kl
  Eigen::VectorXd integral_per_unit;
};

double elbo(const EventDataset &ds, const Hyperparameters &theta,
            const VariationalState &state, const FitConfig &config);

// Layout of the augmented parameter vector:
//   [log ell, log xi (N), alpha (N), m (M), vech(L) (M(M+1)/2), z (M, when
//   the inducing points are optimized)]
// vech stacks the lower triangle column by column.
struct ParameterLayout {
  Eigen::Index num_units = 0;
  Eigen::Index num_inducing = 0;
  bool with_inducing = false;

  Eigen::Index size() const;
  Eigen::Index log_width_offset() const { return 1; }
  Eigen::Index scale_offset() const { return 1 + num_units; }
  Eigen::Index mean_offset() const { return 1 + 2 * num_units; }
  Eigen::Index chol_offset() const { return mean_offset() + num_inducing; }
  Eigen::Index inducing_offset() const {
    return chol_offset() + num_inducing * (num_inducing + 1) / 2;
  }
};

Eigen::VectorXd pack(const Hyperparameters &theta, const VariationalState &state,
                     const ParameterLayout &layout);
// Leaves state.inducing untouched when the layout does not carry it.
void unpack(const Eigen::VectorXd &x, const ParameterLayout &layout,
            Hyperparameters &theta, VariationalState &state);

/// ELBO of one dataset as a function of the augmented parameter vector.
///
/// Quadrature nodes and event locations are laid out once at construction;
/// each evaluation assembles the Gram matrices, the q(f) marginals, and, on
/// request, the full analytic gradient.
class ElboObjective {
 public:
  ElboObjective(const EventDataset &ds, const FitConfig &config);

  const ParameterLayout &layout() const { return layout_; }

  // Inducing points used when they are not part of the parameter vector;
  // equally spaced over the window by default.
  const Eigen::VectorXd &inducing() const { return inducing_; }
  void set_inducing(Eigen::VectorXd z);

  ElboTerms evaluate(const Hyperparameters &theta, const VariationalState &state) const;

  // ELBO value; fills `grad` (layout-sized) with its gradient.
  double value_and_gradient(const Eigen::VectorXd &x, Eigen::VectorXd &grad) const;
  double value(const Eigen::VectorXd &x) const;

 private:
  double run(const Hyperparameters &theta, const VariationalState &state,
             ElboTerms *terms, Eigen::VectorXd *grad) const;

  ParameterLayout layout_;
  std::vector<LatentPoint> points_;  // quadrature nodes, then events
  Eigen::VectorXd node_weights_;     // one per node
  Eigen::Index num_nodes_ = 0;
  Eigen::VectorXd inducing_;
};

Eigen::VectorXd elbo_gradient(const EventDataset &ds, const Hyperparameters &theta,
                              const VariationalState &state, const FitConfig &config);

struct FittedModel {
  Hyperparameters theta;
  VariationalState state;
  ObservationWindow window;
  std::vector<std::string> unit_ids;
  std::vector<double> observation_end;
  double elbo = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> trace;  // best-so-far ELBO after each iteration
  FitConfig config;

  // Cached factor of K_XX (with jitter); rebuilt by refresh_cache().
  Eigen::LLT<Eigen::MatrixXd> kxx_llt;
  double jitter = 0.0;

  void refresh_cache();
  Eigen::Index unit_index(const std::string &unit_id) const;
};

std::pair<Hyperparameters, VariationalState> initial_state(const EventDataset &ds,
                                                           const FitConfig &config);

FittedModel fit(const EventDataset &ds, const FitConfig &config);

}  // namespace mgcp
