#include "mgcp/simulation.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

#include "mgcp/csv.hpp"
#include "mgcp/errors.hpp"

namespace mgcp {

Eigen::Matrix3d repair_covariance(const Eigen::Matrix3d &cov) {
  const Eigen::Matrix3d sym = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(sym);
  const Eigen::Vector3d ev = es.eigenvalues().cwiseMax(0.0);
  if ((es.eigenvalues().array() >= 0.0).all()) return sym;
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

ParametricForm standard_form1() {
  Eigen::Matrix3d cov;
  cov << 5e-1, 4e-4, -1e-5,
         4e-4, 2.5e-1, 3e-7,
         1e-5, 3e-7, 1.0;
  return {FormFamily::form1, Eigen::Vector3d(3.0, 20.0, 65.0), repair_covariance(cov)};
}

ParametricForm standard_form2() {
  Eigen::Matrix3d cov;
  cov << 1.0, -1e-7, 2e-4,
         -1e-7, 1e-2, 3e-7,
         1e-5, 3e-7, 1.0;
  return {FormFamily::form2, Eigen::Vector3d(2.0, 2e-3, 50.0), repair_covariance(cov)};
}

double intensity_form1(double x, double a, double b, double c) {
  if (!(b > 0.0)) throw ValidationError("form1 decay b must be positive");
  const double u = (x - c) / 15.0;
  return a * std::exp(-x / b) + std::exp(-u * u);
}

double intensity_form2(double x, double a, double b, double c) {
  if (!(c > 0.0)) throw ValidationError("form2 decay c' must be positive");
  return std::max(0.0, a * std::sin(b * x * x) * std::exp(-x / c) + 1.0);
}

double evaluate_form(FormFamily family, double x, const Eigen::Vector3d &p) {
  return family == FormFamily::form1 ? intensity_form1(x, p[0], p[1], p[2])
                                     : intensity_form2(x, p[0], p[1], p[2]);
}

Eigen::Vector3d draw_unit_params(const ParametricForm &form, Rng &rng) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(form.cov);
  const Eigen::Matrix3d root =
      es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  const int positive = form.family == FormFamily::form1 ? 1 : 2;
  std::normal_distribution<double> normal;
  for (int attempt = 0; attempt < 100; ++attempt) {
    Eigen::Vector3d eps(normal(rng), normal(rng), normal(rng));
    Eigen::Vector3d p = form.mean + root * eps;
    if (p[positive] > 0.0) return p;
  }
  throw NumericalError("parameter draw rejected 100 times");
}

Eigen::Vector3d draw_unit_params(const ParametricForm &form, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return draw_unit_params(form, rng);
}

GridIntensity::GridIntensity(Eigen::VectorXd grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (grid_.size() < 2 || grid_.size() != values_.size())
    throw ValidationError("grid intensity needs >= 2 matching points");
}

double GridIntensity::operator()(double t) const {
  const Eigen::Index n = grid_.size();
  if (t <= grid_[0]) return values_[0];
  if (t >= grid_[n - 1]) return values_[n - 1];
  const auto *begin = grid_.data();
  const auto *it = std::upper_bound(begin, begin + n, t);
  const Eigen::Index hi = it - begin, lo = hi - 1;
  const double w = (t - grid_[lo]) / (grid_[hi] - grid_[lo]);
  return (1.0 - w) * values_[lo] + w * values_[hi];
}

SigmoidLinkSpec default_sigmoid_spec(Eigen::Index n, std::uint64_t seed,
                                     double lambda_star) {
  if (!(lambda_star > 0.0)) throw ValidationError("lambda_star must be positive");
  Rng rng = make_rng(derive_seed(seed, {0x5157}));
  std::uniform_real_distribution<double> width(1.0, 5.0), scale(1.0, 2.0);
  SigmoidLinkSpec spec;
  spec.lambda_star = lambda_star;
  spec.generator.length_scale = 10.0;
  spec.generator.width.resize(n);
  spec.generator.scale.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    spec.generator.width[i] = width(rng);
    spec.generator.scale[i] = scale(rng);
  }
  return spec;
}

Eigen::MatrixXd pivoted_cholesky(
    Eigen::Index n, const std::function<double(Eigen::Index, Eigen::Index)> &entry,
    double tol) {
  Eigen::VectorXd diag(n);
  for (Eigen::Index i = 0; i < n; ++i) diag[i] = entry(i, i);
  const double stop = tol * std::max(diag.maxCoeff(), 0.0);
  std::vector<Eigen::VectorXd> cols;
  for (Eigen::Index r = 0; r < n; ++r) {
    Eigen::Index piv;
    const double dmax = diag.maxCoeff(&piv);
    if (!(dmax > stop)) break;
    Eigen::VectorXd col(n);
    for (Eigen::Index i = 0; i < n; ++i) col[i] = entry(i, piv);
    for (const auto &c : cols) col -= c[piv] * c;
    col /= std::sqrt(dmax);
    diag -= col.cwiseAbs2();
    diag[piv] = 0.0;
    cols.push_back(std::move(col));
  }
  Eigen::MatrixXd f(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) f.col(static_cast<Eigen::Index>(c)) = cols[c];
  return f;
}

Eigen::MatrixXd sample_mgcp_paths(const SigmoidLinkSpec &spec,
                                  const ObservationWindow &window, Rng &rng) {
  validate(spec.generator);
  if (spec.grid_points < 2) throw ValidationError("grid needs >= 2 points");
  const Eigen::Index units = spec.generator.num_units();
  const Eigen::Index g = spec.grid_points;
  const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(g, window.start, window.end);
  const auto &th = spec.generator;
  auto entry = [&](Eigen::Index p, Eigen::Index q) {
    return output_cross_kernel(grid[p % g], grid[q % g], th.length_scale,
                               th.width[p / g], th.width[q / g], th.scale[p / g],
                               th.scale[q / g]);
  };
  const Eigen::MatrixXd factor = pivoted_cholesky(units * g, entry);
  std::normal_distribution<double> normal;
  Eigen::VectorXd eps(factor.cols());
  for (Eigen::Index k = 0; k < eps.size(); ++k) eps[k] = normal(rng);
  const Eigen::VectorXd f = factor * eps;
  Eigen::MatrixXd paths(units, g);
  for (Eigen::Index i = 0; i < units; ++i) paths.row(i) = f.segment(i * g, g).transpose();
  return paths;
}

std::vector<GridIntensity> sample_mgcp_sigmoid(const SigmoidLinkSpec &spec,
                                               const ObservationWindow &window,
                                               std::uint64_t seed) {
  if (!(spec.lambda_star > 0.0)) throw ValidationError("lambda_star must be positive");
  validate(window);
  Rng rng = make_rng(seed);
  const Eigen::MatrixXd paths = sample_mgcp_paths(spec, window, rng);
  const Eigen::VectorXd grid =
      Eigen::VectorXd::LinSpaced(spec.grid_points, window.start, window.end);
  std::vector<GridIntensity> out;
  for (Eigen::Index i = 0; i < paths.rows(); ++i) {
    Eigen::VectorXd v = spec.lambda_star / (1.0 + (-paths.row(i).array()).exp());
    out.emplace_back(grid, std::move(v));
  }
  return out;
}

std::vector<double> thinning_sample(const IntensityFn &rate, double lambda_max,
                                    const ObservationWindow &window, std::uint64_t seed) {
  validate(window);
  if (!(lambda_max > 0.0) || !std::isfinite(lambda_max))
    throw ValidationError("lambda_max must be positive and finite");
  constexpr int kCheckPoints = 1001;
  for (int k = 0; k < kCheckPoints; ++k) {
    const double t = window.start + window.length() * k / (kCheckPoints - 1);
    const double v = rate(t);
    if (!(v >= 0.0) || v > lambda_max)
      throw ValidationError("intensity " + format_double(v) + " at t=" +
                            format_double(t) + " violates [0, lambda_max=" +
                            format_double(lambda_max) + "]");
  }
  Rng rng = make_rng(seed);
  std::exponential_distribution<double> gap(lambda_max);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> events;
  double t = window.start;
  while (true) {
    t += gap(rng);
    if (t > window.end) break;
    if (unif(rng) * lambda_max <= rate(t)) events.push_back(t);
  }
  return events;
}

std::string to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::mgcp_sigmoid: return "mgcp-sigmoid";
    case GeneratorKind::form1: return "form1";
    case GeneratorKind::form2: return "form2";
    case GeneratorKind::surrogate: return "surrogate";
  }
  return "unknown";
}

GeneratorKind parse_generator_kind(const std::string &name) {
  if (name == "mgcp-sigmoid") return GeneratorKind::mgcp_sigmoid;
  if (name == "form1") return GeneratorKind::form1;
  if (name == "form2") return GeneratorKind::form2;
  if (name == "surrogate") return GeneratorKind::surrogate;
  throw ValidationError("unknown generator kind '" + name +
                        "' (expected mgcp-sigmoid, form1, form2, surrogate)");
}

namespace {

double grid_max(const IntensityFn &fn, const ObservationWindow &w, int points) {
  double m = 0.0;
  for (int k = 0; k < points; ++k) m = std::max(m, fn(w.start + w.length() * k / (points - 1)));
  return m;
}

std::string unit_name(Eigen::Index i) { return "u" + std::to_string(i + 1); }

}  // namespace

Fleet generate_fleet(GeneratorKind kind, Eigen::Index n, const ObservationWindow &window,
                     std::uint64_t seed, const FleetOptions &options) {
  validate(window);
  if (n < 2) throw ValidationError("a fleet needs at least 2 units");
  std::vector<IntensityFn> truth;
  std::vector<Eigen::Vector3d> params;
  if (kind == GeneratorKind::form1 || kind == GeneratorKind::form2) {
    const ParametricForm form =
        kind == GeneratorKind::form1 ? standard_form1() : standard_form2();
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Vector3d p =
          draw_unit_params(form, derive_seed(seed, {1, static_cast<std::uint64_t>(i)}));
      params.push_back(p);
      truth.push_back([family = form.family, p](double x) { return evaluate_form(family, x, p); });
    }
  } else {
    const double lambda_star = kind == GeneratorKind::surrogate
                                   ? options.surrogate_lambda_star
                                   : options.lambda_star;
    SigmoidLinkSpec spec = default_sigmoid_spec(n, derive_seed(seed, {2}), lambda_star);
    spec.grid_points = options.grid_points;
    auto curves = sample_mgcp_sigmoid(spec, window, derive_seed(seed, {3}));
    for (auto &c : curves)
      truth.push_back([c = std::move(c)](double x) { return c(x); });
  }

  std::vector<double> bounds;
  std::vector<UnitRecord> units;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double bound = 1.05 * grid_max(truth[static_cast<std::size_t>(i)], window, 10001);
    bounds.push_back(bound);
    const auto ui = static_cast<std::uint64_t>(i);
    std::vector<double> events;
    if (kind == GeneratorKind::surrogate) {
      bool ok = false;
      for (std::uint64_t attempt = 0; attempt < 500 && !ok; ++attempt) {
        events = thinning_sample(truth[static_cast<std::size_t>(i)], bound, window,
                                 derive_seed(seed, {4, ui, attempt}));
        const auto c = static_cast<int>(events.size());
        ok = c >= options.surrogate_min_events && c <= options.surrogate_max_events;
      }
      if (!ok)
        throw NumericalError("surrogate unit " + unit_name(i) +
                             " never produced an event count in range");
    } else {
      events = thinning_sample(truth[static_cast<std::size_t>(i)], bound, window,
                               derive_seed(seed, {4, ui}));
    }
    units.push_back(UnitRecord{unit_name(i), std::move(events), std::nullopt});
  }
  return Fleet{EventDataset(std::move(units), window), std::move(truth), std::move(bounds),
               std::move(params)};
}

Eigen::MatrixXd truth_on_grid(const Fleet &fleet, const Eigen::VectorXd &grid) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(fleet.truth.size()), grid.size());
  for (std::size_t i = 0; i < fleet.truth.size(); ++i)
    for (Eigen::Index k = 0; k < grid.size(); ++k)
      out(static_cast<Eigen::Index>(i), k) = fleet.truth[i](grid[k]);
  return out;
}

}  // namespace mgcp
