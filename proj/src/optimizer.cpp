#include "mgcp/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace mgcp {

namespace {

struct Probe {
  double alpha = 0.0;
  double f = 0.0;
  double dg = 0.0;  // directional derivative
  Eigen::VectorXd x;
  Eigen::VectorXd g;
};

// Minimizer of the cubic through (a, fa, da) and (b, fb, db), clipped to the
// interior of [lo, hi]. Falls back to bisection.
double cubic_step(double a, double fa, double da, double b, double fb, double db) {
  const double lo = std::min(a, b), hi = std::max(a, b);
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  double t = 0.5 * (a + b);
  if (disc >= 0.0 && std::isfinite(disc)) {
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    const double denom = db - da + 2.0 * d2;
    if (denom != 0.0) {
      double c = b - (b - a) * (db + d2 - d1) / denom;
      if (std::isfinite(c)) t = c;
    }
  }
  const double margin = 0.1 * (hi - lo);
  if (!(t > lo + margin && t < hi - margin)) t = 0.5 * (lo + hi);
  return t;
}

class LineSearch {
 public:
  LineSearch(const Objective &obj, const OptimizerOptions &opt, int &evals)
      : obj_(obj), opt_(opt), evals_(evals) {}

  // Strong-Wolfe search along d from (x, f, g). Returns false on failure;
  // `best` still holds the lowest point evaluated.
  bool run(const Eigen::VectorXd &x, double f0, const Eigen::VectorXd &g0,
           const Eigen::VectorXd &d, double alpha_init, Probe &out, Probe &best) {
    const double dg0 = g0.dot(d);
    best.f = std::numeric_limits<double>::infinity();
    if (!(dg0 < 0.0)) return false;
    Probe prev{0.0, f0, dg0, x, g0};
    double alpha = alpha_init;
    for (int it = 0; it < opt_.max_line_search; ++it) {
      Probe cur = probe(x, d, alpha, best);
      if (!std::isfinite(cur.f)) {
        alpha = 0.5 * (prev.alpha + alpha);
        if (alpha - prev.alpha < 1e-16) return false;
        continue;
      }
      if (cur.f > f0 + opt_.c1 * alpha * dg0 || (it > 0 && cur.f >= prev.f))
        return zoom(x, f0, dg0, d, prev, cur, out, best);
      if (std::abs(cur.dg) <= -opt_.c2 * dg0) {
        out = std::move(cur);
        return true;
      }
      if (cur.dg >= 0.0) return zoom(x, f0, dg0, d, cur, prev, out, best);
      prev = std::move(cur);
      alpha *= 2.0;
    }
    return false;
  }

 private:
  Probe probe(const Eigen::VectorXd &x, const Eigen::VectorXd &d, double alpha,
              Probe &best) {
    Probe p;
    p.alpha = alpha;
    p.x = x + alpha * d;
    p.g.resize(x.size());
    ++evals_;
    p.f = obj_(p.x, p.g);
    if (!std::isfinite(p.f) || !p.g.allFinite()) {
      p.f = std::numeric_limits<double>::infinity();
      return p;
    }
    p.dg = p.g.dot(d);
    if (p.f < best.f) best = p;
    return p;
  }

  bool zoom(const Eigen::VectorXd &x, double f0, double dg0,
            const Eigen::VectorXd &d, Probe lo, Probe hi, Probe &out, Probe &best) {
    for (int it = 0; it < opt_.max_line_search; ++it) {
      double alpha;
      if (std::isfinite(hi.f))
        alpha = cubic_step(lo.alpha, lo.f, lo.dg, hi.alpha, hi.f, hi.dg);
      else
        alpha = 0.5 * (lo.alpha + hi.alpha);
      if (std::abs(hi.alpha - lo.alpha) < 1e-14 * std::max(1.0, std::abs(lo.alpha)))
        break;
      Probe cur = probe(x, d, alpha, best);
      if (!std::isfinite(cur.f) || cur.f > f0 + opt_.c1 * alpha * dg0 ||
          cur.f >= lo.f) {
        hi = std::move(cur);
      } else {
        if (std::abs(cur.dg) <= -opt_.c2 * dg0) {
          out = std::move(cur);
          return true;
        }
        if (cur.dg * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = std::move(cur);
      }
    }
    // Accept a sufficient-decrease point even without the curvature condition.
    if (lo.alpha > 0.0 && lo.f <= f0 + opt_.c1 * lo.alpha * dg0) {
      out = std::move(lo);
      return true;
    }
    return false;
  }

  const Objective &obj_;
  const OptimizerOptions &opt_;
  int &evals_;
};

struct Tracker {
  explicit Tracker(const OptimizerOptions &opt) : opt_(opt) {}

  // Records one iteration; returns true once the relative-change criterion has
  // held for `patience` iterations.
  bool step(double f_prev, double f) {
    const double scale = std::max({std::abs(f_prev), std::abs(f), 1.0});
    if (std::abs(f_prev - f) <= opt_.rel_tol * scale)
      ++quiet_;
    else
      quiet_ = 0;
    return quiet_ >= opt_.patience;
  }

  const OptimizerOptions &opt_;
  int quiet_ = 0;
};

}  // namespace

OptimizerResult minimize_adam(const Objective &objective, Eigen::VectorXd x0,
                              const OptimizerOptions &options) {
  OptimizerResult res;
  const Eigen::Index n = x0.size();
  Eigen::VectorXd g(n), m1 = Eigen::VectorXd::Zero(n), m2 = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd x = std::move(x0);
  double f = objective(x, g);
  ++res.evaluations;
  res.x = x;
  res.f = f;
  res.gradient = g;
  if (!std::isfinite(f)) return res;
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  Tracker tracker(options);
  for (int it = 1; it <= options.max_iters; ++it) {
    m1 = b1 * m1 + (1 - b1) * g;
    m2 = b2 * m2 + (1 - b2) * g.cwiseAbs2();
    const double c1 = 1.0 - std::pow(b1, it), c2 = 1.0 - std::pow(b2, it);
    Eigen::VectorXd step = options.adam_rate * (m1 / c1).array() /
                           ((m2 / c2).array().sqrt() + eps);
    Eigen::VectorXd trial = x - step;
    Eigen::VectorXd gt(n);
    double ft = objective(trial, gt);
    ++res.evaluations;
    res.iterations = it;
    if (!std::isfinite(ft) || !gt.allFinite()) {
      // Shrink the moments and retry from the same point.
      m1 *= 0.5;
      res.trace.push_back(res.f);
      continue;
    }
    const double f_prev = f;
    x = std::move(trial);
    f = ft;
    g = std::move(gt);
    if (f < res.f) {
      res.x = x;
      res.f = f;
      res.gradient = g;
    }
    res.trace.push_back(res.f);
    if (g.lpNorm<Eigen::Infinity>() <= options.grad_tol || tracker.step(f_prev, f)) {
      res.converged = true;
      break;
    }
  }
  return res;
}

OptimizerResult minimize_lbfgs(const Objective &objective, Eigen::VectorXd x0,
                               const OptimizerOptions &options) {
  OptimizerResult res;
  const Eigen::Index n = x0.size();
  Eigen::VectorXd x = std::move(x0), g(n);
  double f = objective(x, g);
  res.evaluations = 1;
  res.x = x;
  res.f = f;
  res.gradient = g;
  if (!std::isfinite(f) || !g.allFinite()) return res;

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  LineSearch ls(objective, options, res.evaluations);
  Tracker tracker(options);
  int failures = 0;

  for (int it = 1; it <= options.max_iters; ++it) {
    res.iterations = it;
    if (g.lpNorm<Eigen::Infinity>() <= options.grad_tol) {
      res.converged = true;
      break;
    }
    // Two-loop recursion.
    Eigen::VectorXd q = g;
    std::vector<double> alphas(s_hist.size());
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      alphas[k] = rho_hist[k] * s_hist[k].dot(q);
      q -= alphas[k] * y_hist[k];
    }
    double gamma = 1.0;
    if (!s_hist.empty())
      gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    else
      gamma = 1.0 / std::max(1.0, g.lpNorm<Eigen::Infinity>());
    Eigen::VectorXd d = gamma * q;
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = rho_hist[k] * y_hist[k].dot(d);
      d += (alphas[k] - beta) * s_hist[k];
    }
    d = -d;
    if (!(g.dot(d) < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -g / std::max(1.0, g.lpNorm<Eigen::Infinity>());
    }

    Probe next, best;
    const bool ok = ls.run(x, f, g, d, 1.0, next, best);
    if (!ok) {
      // Adam burst from the best point seen so far.
      ++failures;
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      Eigen::VectorXd start = (std::isfinite(best.f) && best.f < f) ? best.x : x;
      OptimizerOptions burst = options;
      burst.max_iters = options.adam_steps;
      OptimizerResult ar = minimize_adam(objective, start, burst);
      res.evaluations += ar.evaluations;
      if (ar.f < f) {
        const double f_prev = f;
        x = ar.x;
        f = ar.f;
        g = ar.gradient;
        res.x = x;
        res.f = f;
        res.gradient = g;
        res.trace.push_back(f);
        if (failures >= 3 && tracker.step(f_prev, f)) break;
        continue;
      }
      res.trace.push_back(res.f);
      break;
    }
    failures = 0;
    Eigen::VectorXd s = next.x - x;
    Eigen::VectorXd y = next.g - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > options.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    const double f_prev = f;
    x = std::move(next.x);
    f = next.f;
    g = std::move(next.g);
    if (f < res.f) {
      res.x = x;
      res.f = f;
      res.gradient = g;
    }
    res.trace.push_back(res.f);
    if (tracker.step(f_prev, f)) {
      res.converged = true;
      break;
    }
  }
  if (res.gradient.lpNorm<Eigen::Infinity>() <= options.grad_tol) res.converged = true;
  return res;
}

}  // namespace mgcp
