#include "mgcp/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mgcp/csv.hpp"
#include "mgcp/errors.hpp"
#include "mgcp/optimizer.hpp"
#include "mgcp/quadrature.hpp"
#include "mgcp/rng.hpp"

namespace mgcp {

void validate(const VariationalState &state) {
  const Eigen::Index m = state.mean.size();
  if (m < 1) throw ValidationError("variational state has no inducing points");
  if (state.inducing.size() != m || state.chol.rows() != m || state.chol.cols() != m)
    throw ValidationError("variational state dimensions are inconsistent");
  for (Eigen::Index a = 1; a < m; ++a)
    if (!(state.inducing[a] > state.inducing[a - 1]))
      throw ValidationError("inducing points must be strictly increasing");
  for (Eigen::Index a = 0; a < m; ++a) {
    if (!(state.chol(a, a) > 0.0))
      throw ValidationError("Cholesky factor of S needs a positive diagonal");
    for (Eigen::Index b = a + 1; b < m; ++b)
      if (state.chol(a, b) != 0.0)
        throw ValidationError("Cholesky factor of S must be lower triangular");
  }
  if (!state.mean.allFinite() || !state.chol.allFinite() || !state.inducing.allFinite())
    throw ValidationError("variational state has non-finite entries");
}

void normalize_signs(VariationalState &state) {
  for (Eigen::Index a = 0; a < state.chol.cols(); ++a)
    if (state.chol(a, a) < 0.0) state.chol.col(a) *= -1.0;
}

void validate(const FitConfig &config) {
  if (config.quad_order < 4) throw ValidationError("quad_order must be >= 4");
  if (!(config.tol > 0.0)) throw ValidationError("tol must be positive");
  if (config.max_iters < 1) throw ValidationError("max_iters must be >= 1");
  if (config.num_inducing < 1) throw ValidationError("num_inducing must be >= 1");
  if (!(config.init_length_scale_fraction > 0.0) || !(config.init_width_ratio > 0.0) ||
      !(config.init_chol_scale > 0.0))
    throw ValidationError("initialization settings must be positive");
}

namespace {

constexpr int kPanelOrder = 10;

// Shared by posterior_moments and the ELBO so both see identical arithmetic.
struct MomentsCore {
  Eigen::MatrixXd a;  // K_fX K_XX^-1, one row per point
  Eigen::VectorXd b;  // K_XX^-1 m
  Eigen::VectorXd mean;
  Eigen::VectorXd var_raw;
};

MomentsCore compute_moments(const Eigen::MatrixXd &kfx, const Eigen::VectorXd &kff,
                            const Eigen::LLT<Eigen::MatrixXd> &llt,
                            const VariationalState &state) {
  MomentsCore c;
  c.a = llt.solve(kfx.transpose()).transpose();
  c.b = llt.solve(state.mean);
  c.mean = kfx * c.b;
  const Eigen::MatrixXd s = state.covariance();
  const Eigen::MatrixXd as = c.a * s;
  c.var_raw = kff - kfx.cwiseProduct(c.a).rowwise().sum() +
              as.cwiseProduct(c.a).rowwise().sum();
  return c;
}

double kl_from_factor(const VariationalState &state,
                      const Eigen::LLT<Eigen::MatrixXd> &llt) {
  const Eigen::Index m = state.size();
  const auto lk = llt.matrixL();
  const Eigen::MatrixXd v = lk.solve(state.chol);
  const Eigen::VectorXd c = lk.solve(state.mean);
  double logdet_k = 0.0, logdet_s = 0.0;
  for (Eigen::Index a = 0; a < m; ++a) {
    logdet_k += 2.0 * std::log(llt.matrixLLT()(a, a));
    logdet_s += 2.0 * std::log(std::abs(state.chol(a, a)));
  }
  if (!std::isfinite(logdet_s)) throw NumericalError("variational covariance is singular");
  return 0.5 * (v.squaredNorm() + logdet_k - logdet_s - static_cast<double>(m) +
                c.squaredNorm());
}

void check_exponent(double ex, Eigen::Index unit, double t) {
  if (ex > kMaxExponent || std::isnan(ex))
    throw OverflowError("expected intensity exponent " + format_double(ex) +
                        " at unit " + std::to_string(unit) + ", t=" + format_double(t) +
                        " exceeds " + format_double(kMaxExponent) +
                        "; rescale the time axis or the event counts");
}

}  // namespace

Moments posterior_moments(const GramBundle &gram, const VariationalState &state) {
  auto core = compute_moments(gram.kfx, gram.kff_diag, gram.kxx_llt, state);
  Moments out{std::move(core.mean), core.var_raw.cwiseMax(kVarianceFloor)};
  return out;
}

Moments posterior_moments(std::span<const LatentPoint> points,
                          const Hyperparameters &theta, const VariationalState &state) {
  for (const auto &p : points)
    if (!std::isfinite(p.time)) throw ValidationError("non-finite evaluation time");
  const GramBundle gram = build_gram(points, state.inducing, theta);
  return posterior_moments(gram, state);
}

double kl_term(const VariationalState &state, const Eigen::LLT<Eigen::MatrixXd> &llt) {
  return kl_from_factor(state, llt);
}

double kl_term(const VariationalState &state, const Eigen::MatrixXd &kxx) {
  if (kxx.rows() != state.size() || kxx.cols() != state.size())
    throw ValidationError("K_XX does not match the variational state");
  double jitter = 0.0;
  return kl_from_factor(state, factor_with_jitter(kxx, jitter));
}

std::vector<Interval> observed_regions(const EventDataset &ds) {
  std::vector<Interval> r;
  r.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i)
    r.push_back({ds.window().start, ds.observation_end(i)});
  return r;
}

double expected_intensity_integral(const Hyperparameters &theta,
                                   const VariationalState &state, Eigen::Index unit,
                                   const Interval &region, int quad_order) {
  if (quad_order < 4) throw ValidationError("quad_order must be >= 4");
  const auto rule =
      composite_gauss_legendre(region.start, region.end, quad_order, kPanelOrder);
  std::vector<LatentPoint> pts;
  pts.reserve(static_cast<std::size_t>(rule.nodes.size()));
  for (Eigen::Index k = 0; k < rule.nodes.size(); ++k) pts.push_back({unit, rule.nodes[k]});
  const Moments mo = posterior_moments(pts, theta, state);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < rule.nodes.size(); ++k) {
    const double ex = mo.mean[k] + 0.5 * mo.var[k];
    check_exponent(ex, unit, rule.nodes[k]);
    sum += rule.weights[k] * std::exp(ex);
  }
  return sum;
}

IntegralTerm expected_integral_term(const Hyperparameters &theta,
                                    const VariationalState &state,
                                    std::span<const Interval> regions, int quad_order) {
  if (static_cast<Eigen::Index>(regions.size()) != theta.num_units())
    throw ValidationError("need one integration region per unit");
  IntegralTerm out{Eigen::VectorXd::Zero(theta.num_units()), 0.0};
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto unit = static_cast<Eigen::Index>(i);
    out.per_unit[unit] =
        expected_intensity_integral(theta, state, unit, regions[i], quad_order);
  }
  out.total = out.per_unit.sum();
  return out;
}

IntegralTerm expected_integral_term(const Hyperparameters &theta,
                                    const VariationalState &state,
                                    const ObservationWindow &window, int quad_order) {
  std::vector<Interval> regions(static_cast<std::size_t>(theta.num_units()),
                                Interval{window.start, window.end});
  return expected_integral_term(theta, state, regions, quad_order);
}

double data_term(const EventDataset &ds, const Hyperparameters &theta,
                 const VariationalState &state) {
  if (theta.num_units() != static_cast<Eigen::Index>(ds.size()))
    throw ValidationError("hyperparameters do not match the dataset's unit count");
  std::vector<LatentPoint> pts;
  for (std::size_t i = 0; i < ds.size(); ++i)
    for (double t : ds.unit(i).event_times)
      pts.push_back({static_cast<Eigen::Index>(i), t});
  if (pts.empty()) return 0.0;
  return posterior_moments(pts, theta, state).mean.sum();
}

Eigen::Index ParameterLayout::size() const {
  return inducing_offset() + (with_inducing ? num_inducing : 0);
}

Eigen::VectorXd pack(const Hyperparameters &theta, const VariationalState &state,
                     const ParameterLayout &layout) {
  Eigen::VectorXd x(layout.size());
  const Eigen::Index n = layout.num_units, m = layout.num_inducing;
  x[0] = std::log(theta.length_scale);
  x.segment(layout.log_width_offset(), n) = theta.width.array().log();
  x.segment(layout.scale_offset(), n) = theta.scale;
  x.segment(layout.mean_offset(), m) = state.mean;
  Eigen::Index k = layout.chol_offset();
  for (Eigen::Index c = 0; c < m; ++c)
    for (Eigen::Index r = c; r < m; ++r) x[k++] = state.chol(r, c);
  if (layout.with_inducing) x.segment(layout.inducing_offset(), m) = state.inducing;
  return x;
}

void unpack(const Eigen::VectorXd &x, const ParameterLayout &layout,
            Hyperparameters &theta, VariationalState &state) {
  if (x.size() != layout.size()) throw ValidationError("parameter vector has wrong size");
  const Eigen::Index n = layout.num_units, m = layout.num_inducing;
  theta.length_scale = std::exp(x[0]);
  theta.width = x.segment(layout.log_width_offset(), n).array().exp();
  theta.scale = x.segment(layout.scale_offset(), n);
  state.mean = x.segment(layout.mean_offset(), m);
  state.chol = Eigen::MatrixXd::Zero(m, m);
  Eigen::Index k = layout.chol_offset();
  for (Eigen::Index c = 0; c < m; ++c)
    for (Eigen::Index r = c; r < m; ++r) state.chol(r, c) = x[k++];
  if (layout.with_inducing) state.inducing = x.segment(layout.inducing_offset(), m);
}

ElboObjective::ElboObjective(const EventDataset &ds, const FitConfig &config) {
  validate(config);
  layout_.num_units = static_cast<Eigen::Index>(ds.size());
  layout_.num_inducing = config.num_inducing;
  layout_.with_inducing = config.optimize_inducing;
  inducing_ = equally_spaced(ds.window().start, ds.window().end, config.num_inducing);
  std::vector<double> weights;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto rule = composite_gauss_legendre(ds.window().start, ds.observation_end(i),
                                               config.quad_order, kPanelOrder);
    for (Eigen::Index k = 0; k < rule.nodes.size(); ++k) {
      points_.push_back({static_cast<Eigen::Index>(i), rule.nodes[k]});
      weights.push_back(rule.weights[k]);
    }
  }
  num_nodes_ = static_cast<Eigen::Index>(points_.size());
  node_weights_ = Eigen::Map<const Eigen::VectorXd>(weights.data(), num_nodes_);
  for (std::size_t i = 0; i < ds.size(); ++i)
    for (double t : ds.unit(i).event_times)
      points_.push_back({static_cast<Eigen::Index>(i), t});
}

void ElboObjective::set_inducing(Eigen::VectorXd z) {
  if (z.size() != layout_.num_inducing) throw ValidationError("inducing point count mismatch");
  inducing_ = std::move(z);
}

ElboTerms ElboObjective::evaluate(const Hyperparameters &theta,
                                  const VariationalState &state) const {
  ElboTerms terms;
  run(theta, state, &terms, nullptr);
  return terms;
}

double ElboObjective::value_and_gradient(const Eigen::VectorXd &x,
                                         Eigen::VectorXd &grad) const {
  Hyperparameters theta;
  VariationalState state;
  state.inducing = inducing_;
  unpack(x, layout_, theta, state);
  return run(theta, state, nullptr, &grad);
}

double ElboObjective::value(const Eigen::VectorXd &x) const {
  Hyperparameters theta;
  VariationalState state;
  state.inducing = inducing_;
  unpack(x, layout_, theta, state);
  return run(theta, state, nullptr, nullptr);
}

double ElboObjective::run(const Hyperparameters &theta, const VariationalState &state,
                          ElboTerms *terms, Eigen::VectorXd *grad) const {
  const Eigen::Index n = layout_.num_units;
  const Eigen::Index m = layout_.num_inducing;
  if (theta.num_units() != n || state.size() != m)
    throw ValidationError("state does not match the objective's layout");
  if (!state.inducing.allFinite()) throw NumericalError("non-finite inducing points");
  if (!(theta.length_scale > 0.0) || !std::isfinite(theta.length_scale) ||
      !(theta.width.array() > 0.0).all() || !theta.width.allFinite() ||
      !theta.scale.allFinite())
    throw NumericalError("hyperparameters out of range");
  const double ell = theta.length_scale;
  const auto &z = state.inducing;
  const auto num_points = static_cast<Eigen::Index>(points_.size());

  Eigen::VectorXd eta2(n), zeta(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi2 = theta.width[i] * theta.width[i];
    eta2[i] = xi2 + ell * ell;
    zeta[i] = std::sqrt(2.0 * xi2 + ell * ell);
  }

  Eigen::MatrixXd kfx(num_points, m), base(num_points, m);
  Eigen::VectorXd kff(num_points);
  for (Eigen::Index p = 0; p < num_points; ++p) {
    const auto &pt = points_[static_cast<std::size_t>(p)];
    const Eigen::Index i = pt.unit;
    const double amp = std::sqrt(ell * ell / eta2[i]);
    for (Eigen::Index a = 0; a < m; ++a) {
      const double d = pt.time - z[a];
      const double e = std::exp(-d * d / (2.0 * eta2[i]));
      base(p, a) = amp * e;
      kfx(p, a) = theta.scale[i] * amp * e;
    }
    kff[p] = output_prior_variance(i, theta);
  }

  const Eigen::MatrixXd kxx = latent_gram(z, ell);
  double jitter = 0.0;
  const auto llt = factor_with_jitter(kxx, jitter);
  const MomentsCore core = compute_moments(kfx, kff, llt, state);

  Eigen::VectorXd per_unit = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd g_mean = Eigen::VectorXd::Zero(num_points);
  Eigen::VectorXd g_var = Eigen::VectorXd::Zero(num_points);
  for (Eigen::Index p = 0; p < num_nodes_; ++p) {
    const auto &pt = points_[static_cast<std::size_t>(p)];
    const bool clamped = core.var_raw[p] < kVarianceFloor;
    const double v = clamped ? kVarianceFloor : core.var_raw[p];
    const double ex = core.mean[p] + 0.5 * v;
    check_exponent(ex, pt.unit, pt.time);
    const double we = node_weights_[p] * std::exp(ex);
    per_unit[pt.unit] += we;
    g_mean[p] = -we;
    g_var[p] = clamped ? 0.0 : -0.5 * we;
  }
  double data = 0.0;
  for (Eigen::Index p = num_nodes_; p < num_points; ++p) {
    data += core.mean[p];
    g_mean[p] = 1.0;
  }
  const double integral = per_unit.sum();
  const double kl = kl_from_factor(state, llt);
  const double value = data - integral - kl;

  if (terms) {
    terms->integral = integral;
    terms->data = data;
    terms->kl = kl;
    terms->value = value;
    terms->integral_per_unit = per_unit;
  }
  if (!grad) return value;

  grad->setZero(layout_.size());
  Eigen::VectorXd &gr = *grad;
  const Eigen::MatrixXd &a = core.a;
  const Eigen::VectorXd &b = core.b;
  const Eigen::MatrixXd &l = state.chol;
  const Eigen::MatrixXd s = state.covariance();
  const Eigen::MatrixXd kinv = llt.solve(Eigen::MatrixXd::Identity(m, m));

  // Variational mean and Cholesky factor.
  gr.segment(layout_.mean_offset(), m) = a.transpose() * g_mean - b;
  const Eigen::MatrixXd gs = a.transpose() * g_var.asDiagonal() * a;
  Eigen::MatrixXd gl = 2.0 * gs * l - kinv * l;
  for (Eigen::Index c = 0; c < m; ++c) gl(c, c) += 1.0 / l(c, c);
  Eigen::Index k = layout_.chol_offset();
  for (Eigen::Index c = 0; c < m; ++c)
    for (Eigen::Index r = c; r < m; ++r) gr[k++] = gl(r, c);

  // Sensitivities to the Gram entries.
  const Eigen::MatrixXd kinv_s = kinv * s;
  const Eigen::MatrixXd bmat = kinv_s * kinv - kinv;
  const Eigen::MatrixXd gk =
      g_mean * b.transpose() + 2.0 * (g_var.asDiagonal() * (kfx * bmat));
  const Eigen::VectorXd a_gmean = a.transpose() * g_mean;
  const Eigen::MatrixXd gkxx = -a_gmean * b.transpose() + gs - gs * kinv_s.transpose() -
                               kinv_s * gs -
                               0.5 * (kinv - kinv_s * kinv - b * b.transpose());

  double d_log_ell = 0.0;
  Eigen::VectorXd d_log_xi = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd d_scale = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd d_z = Eigen::VectorXd::Zero(m);
  const double ell2 = ell * ell;
  for (Eigen::Index p = 0; p < num_points; ++p) {
    const auto &pt = points_[static_cast<std::size_t>(p)];
    const Eigen::Index i = pt.unit;
    const double xi2 = theta.width[i] * theta.width[i];
    const double e2 = eta2[i];
    for (Eigen::Index c = 0; c < m; ++c) {
      const double d = pt.time - z[c];
      const double w = gk(p, c) * kfx(p, c);
      d_log_ell += w * (1.0 - ell2 / e2 + d * d * ell2 / (e2 * e2));
      d_log_xi[i] += w * (-xi2 / e2 + d * d * xi2 / (e2 * e2));
      d_scale[i] += gk(p, c) * base(p, c);
      d_z[c] += w * d / e2;
    }
    const double z2 = zeta[i] * zeta[i];
    d_log_ell += g_var[p] * kff[p] * (1.0 - ell2 / z2);
    d_log_xi[i] += g_var[p] * kff[p] * (-2.0 * xi2 / z2);
    d_scale[i] += g_var[p] * 2.0 * theta.scale[i] * ell / zeta[i];
  }
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < m; ++c) {
      if (r == c) continue;
      const double d = z[r] - z[c];
      d_log_ell += gkxx(r, c) * kxx(r, c) * d * d / ell2;
      // d K(z_r, z_c) / d z_r = K (z_c - z_r) / ell^2
      d_z[r] += (gkxx(r, c) + gkxx(c, r)) * kxx(r, c) * (-d) / ell2;
    }
  gr[0] = d_log_ell;
  gr.segment(layout_.log_width_offset(), n) = d_log_xi;
  gr.segment(layout_.scale_offset(), n) = d_scale;
  if (layout_.with_inducing) gr.segment(layout_.inducing_offset(), m) = d_z;
  return value;
}

double elbo(const EventDataset &ds, const Hyperparameters &theta,
            const VariationalState &state, const FitConfig &config) {
  return ElboObjective(ds, config).evaluate(theta, state).value;
}

Eigen::VectorXd elbo_gradient(const EventDataset &ds, const Hyperparameters &theta,
                              const VariationalState &state, const FitConfig &config) {
  ElboObjective obj(ds, config);
  obj.set_inducing(state.inducing);
  Eigen::VectorXd g;
  obj.value_and_gradient(pack(theta, state, obj.layout()), g);
  return g;
}

void FittedModel::refresh_cache() {
  kxx_llt = factor_with_jitter(latent_gram(state.inducing, theta.length_scale), jitter);
}

Eigen::Index FittedModel::unit_index(const std::string &unit_id) const {
  for (std::size_t i = 0; i < unit_ids.size(); ++i)
    if (unit_ids[i] == unit_id) return static_cast<Eigen::Index>(i);
  std::string known;
  for (const auto &u : unit_ids) known += (known.empty() ? "" : ", ") + u;
  throw ValidationError("unit '" + unit_id + "' is not in the model (available: " +
                        known + ")");
}

std::pair<Hyperparameters, VariationalState> initial_state(const EventDataset &ds,
                                                           const FitConfig &config) {
  validate(config);
  const auto n = static_cast<Eigen::Index>(ds.size());
  const auto &w = ds.window();
  Hyperparameters theta;
  theta.length_scale = config.init_length_scale_fraction * w.length();
  theta.width = Eigen::VectorXd::Constant(n, config.init_width_ratio * theta.length_scale);
  theta.scale = Eigen::VectorXd::Constant(n, config.init_scale);
  VariationalState state;
  state.inducing = equally_spaced(w.start, w.end, config.num_inducing);
  state.mean = Eigen::VectorXd::Zero(config.num_inducing);
  if (config.init_mean_noise > 0.0) {
    Rng rng = make_rng(derive_seed(config.seed, {0x1417}));
    std::normal_distribution<double> normal;
    for (Eigen::Index a = 0; a < state.mean.size(); ++a)
      state.mean[a] = config.init_mean_noise * normal(rng);
  }
  double jitter = 0.0;
  const auto llt = factor_with_jitter(latent_gram(state.inducing, theta.length_scale), jitter);
  state.chol = config.init_chol_scale * Eigen::MatrixXd(llt.matrixL());
  return {theta, state};
}

namespace {

// Restores strictly increasing inducing points after a free optimization of z.
void sort_inducing(VariationalState &state) {
  const Eigen::Index m = state.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return state.inducing[a] < state.inducing[b];
  });
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(m);
  for (Eigen::Index k = 0; k < m; ++k) perm.indices()[k] = static_cast<int>(order[static_cast<std::size_t>(k)]);
  // new[k] = old[order[k]]
  Eigen::VectorXd z(m), mean(m);
  Eigen::MatrixXd s = state.covariance(), s2(m, m);
  for (Eigen::Index r = 0; r < m; ++r) {
    z[r] = state.inducing[order[static_cast<std::size_t>(r)]];
    mean[r] = state.mean[order[static_cast<std::size_t>(r)]];
    for (Eigen::Index c = 0; c < m; ++c)
      s2(r, c) = s(order[static_cast<std::size_t>(r)], order[static_cast<std::size_t>(c)]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(s2);
  if (llt.info() != Eigen::Success) return;
  state.inducing = z;
  state.mean = mean;
  state.chol = llt.matrixL();
}

}  // namespace

FittedModel fit(const EventDataset &ds, const FitConfig &config) {
  validate(config);
  ElboObjective objective(ds, config);
  auto [theta0, state0] = initial_state(ds, config);
  objective.set_inducing(state0.inducing);
  const auto &layout = objective.layout();
  Eigen::VectorXd x0 = pack(theta0, state0, layout);

  Objective negative = [&](const Eigen::VectorXd &x, Eigen::VectorXd &g) {
    try {
      const double v = objective.value_and_gradient(x, g);
      g = -g;
      return -v;
    } catch (const NumericalError &) {
      g.setZero(x.size());
      return std::numeric_limits<double>::infinity();
    }
  };
  {
    Eigen::VectorXd g;
    if (!std::isfinite(negative(x0, g)))
      throw NumericalError("ELBO is not finite at the initial state");
  }

  OptimizerOptions options;
  options.max_iters = config.max_iters;
  options.rel_tol = config.tol;
  options.grad_tol = config.grad_tol;
  const OptimizerResult res = config.optimizer == OptimizerKind::lbfgs
                                  ? minimize_lbfgs(negative, x0, options)
                                  : minimize_adam(negative, x0, options);

  FittedModel model;
  model.state.inducing = state0.inducing;
  unpack(res.x, layout, model.theta, model.state);
  normalize_signs(model.state);
  if (config.optimize_inducing) sort_inducing(model.state);
  model.window = ds.window();
  model.unit_ids = ds.unit_ids();
  for (std::size_t i = 0; i < ds.size(); ++i)
    model.observation_end.push_back(ds.observation_end(i));
  model.elbo = objective.evaluate(model.theta, model.state).value;
  model.converged = res.converged;
  model.iterations = res.iterations;
  model.trace.reserve(res.trace.size());
  for (double f : res.trace) model.trace.push_back(-f);
  model.config = config;
  model.refresh_cache();
  return model;
}

}  // namespace mgcp
