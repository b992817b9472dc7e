#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mgcp/event_data.hpp"
#include "mgcp/kernel.hpp"
#include "mgcp/rng.hpp"

namespace mgcp {

enum class FormFamily { form1, form2 };

// Unit-to-unit parameter distribution of a parametric intensity family.
struct ParametricForm {
  FormFamily family = FormFamily::form1;
  Eigen::Vector3d mean;
  Eigen::Matrix3d cov;
};

// Symmetrizes and clips negative eigenvalues to zero.
Eigen::Matrix3d repair_covariance(const Eigen::Matrix3d &cov);

// Reference parameter distributions, covariances already repaired.
ParametricForm standard_form1();
ParametricForm standard_form2();

// a exp(-x/b) + exp(-((x-c)/15)^2)
double intensity_form1(double x, double a, double b, double c);
// max(0, a sin(b x^2) exp(-x/c) + 1)
double intensity_form2(double x, double a, double b, double c);
double evaluate_form(FormFamily family, double x, const Eigen::Vector3d &params);

// Multivariate normal draw; the positive parameter (b for form1, c for form2)
// is redrawn until positive, at most 100 times.
Eigen::Vector3d draw_unit_params(const ParametricForm &form, Rng &rng);
Eigen::Vector3d draw_unit_params(const ParametricForm &form, std::uint64_t seed);

// Piecewise-linear intensity on a sorted grid; constant beyond the ends.
class GridIntensity {
 public:
  GridIntensity() = default;
  GridIntensity(Eigen::VectorXd grid, Eigen::VectorXd values);

  double operator()(double t) const;
  double max() const { return values_.maxCoeff(); }
  const Eigen::VectorXd &grid() const { return grid_; }
  const Eigen::VectorXd &values() const { return values_; }

 private:
  Eigen::VectorXd grid_;
  Eigen::VectorXd values_;
};

using IntensityFn = std::function<double(double)>;

struct SigmoidLinkSpec {
  Hyperparameters generator;  // one (width, scale) per unit
  double lambda_star = 4.0;
  int grid_points = 1000;
};

// Generator hyperparameters for n units: length-scale 10, widths uniform on
// [1, 5], scales uniform on [1, 2], all drawn from `seed`.
SigmoidLinkSpec default_sigmoid_spec(Eigen::Index n, std::uint64_t seed,
                                     double lambda_star = 4.0);

// Joint draw of the n latent paths on spec.grid_points uniform points (n x grid).
Eigen::MatrixXd sample_mgcp_paths(const SigmoidLinkSpec &spec,
                                  const ObservationWindow &window, Rng &rng);

// lambda_i(t) = lambda_star * sigmoid(f_i(t)) for jointly drawn f.
std::vector<GridIntensity> sample_mgcp_sigmoid(const SigmoidLinkSpec &spec,
                                               const ObservationWindow &window,
                                               std::uint64_t seed);

// Low-rank factor F (n x r) with F F^T matching the covariance to
// `tol` * max diagonal, by diagonal-pivoted Cholesky. `entry(i, j)` returns
// the covariance of items i and j.
Eigen::MatrixXd pivoted_cholesky(Eigen::Index n,
                                 const std::function<double(Eigen::Index, Eigen::Index)> &entry,
                                 double tol = 1e-12);

// Lewis thinning: exact draw of an inhomogeneous Poisson process with rate
// `rate` <= lambda_max on the window. The bound is checked on a 1001-point grid.
std::vector<double> thinning_sample(const IntensityFn &rate, double lambda_max,
                                    const ObservationWindow &window, std::uint64_t seed);

enum class GeneratorKind { mgcp_sigmoid, form1, form2, surrogate };

std::string to_string(GeneratorKind kind);
GeneratorKind parse_generator_kind(const std::string &name);

struct FleetOptions {
  double lambda_star = 4.0;       // mgcp-sigmoid
  int grid_points = 1000;         // mgcp-sigmoid path grid
  double surrogate_lambda_star = 0.3;
  int surrogate_min_events = 6;
  int surrogate_max_events = 23;
};

struct Fleet {
  EventDataset data;
  std::vector<IntensityFn> truth;      // one per unit
  std::vector<double> lambda_max;      // thinning bound per unit
  std::vector<Eigen::Vector3d> params; // parametric kinds only
};

// Units are named u1..uN; uN is the conventional test unit.
Fleet generate_fleet(GeneratorKind kind, Eigen::Index n, const ObservationWindow &window,
                     std::uint64_t seed, const FleetOptions &options = {});

// Evaluates every truth curve on a grid (units x grid).
Eigen::MatrixXd truth_on_grid(const Fleet &fleet, const Eigen::VectorXd &grid);

}  // namespace mgcp
