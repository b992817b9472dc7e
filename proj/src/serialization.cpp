#include "mgcp/serialization.hpp"

#include <fstream>
#include <ostream>

#include "mgcp/csv.hpp"
#include "mgcp/errors.hpp"

namespace mgcp {

using nlohmann::json;

namespace {

json vector_json(const Eigen::VectorXd &v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from(const json &j, const char *name) {
  if (!j.is_array()) throw ValidationError(std::string("model field '") + name + "' must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v[static_cast<Eigen::Index>(k)] = j[k].get<double>();
  return v;
}

const json &field(const json &doc, const char *name) {
  auto it = doc.find(name);
  if (it == doc.end()) throw ValidationError(std::string("model is missing '") + name + "'");
  return *it;
}

}  // namespace

json config_to_json(const FitConfig &c) {
  return json{{"quad_order", c.quad_order},
              {"max_iters", c.max_iters},
              {"tol", c.tol},
              {"grad_tol", c.grad_tol},
              {"optimizer", c.optimizer == OptimizerKind::lbfgs ? "lbfgs" : "adam"},
              {"seed", c.seed},
              {"num_inducing", c.num_inducing},
              {"optimize_inducing", c.optimize_inducing},
              {"init_length_scale_fraction", c.init_length_scale_fraction},
              {"init_width_ratio", c.init_width_ratio},
              {"init_scale", c.init_scale},
              {"init_chol_scale", c.init_chol_scale},
              {"init_mean_noise", c.init_mean_noise}};
}

namespace {

FitConfig config_from_json(const json &j) {
  FitConfig c;
  c.quad_order = j.value("quad_order", c.quad_order);
  c.max_iters = j.value("max_iters", c.max_iters);
  c.tol = j.value("tol", c.tol);
  c.grad_tol = j.value("grad_tol", c.grad_tol);
  c.optimizer = j.value("optimizer", std::string("lbfgs")) == "adam" ? OptimizerKind::adam
                                                                      : OptimizerKind::lbfgs;
  c.seed = j.value("seed", c.seed);
  c.num_inducing = j.value("num_inducing", c.num_inducing);
  c.optimize_inducing = j.value("optimize_inducing", c.optimize_inducing);
  c.init_length_scale_fraction = j.value("init_length_scale_fraction", c.init_length_scale_fraction);
  c.init_width_ratio = j.value("init_width_ratio", c.init_width_ratio);
  c.init_scale = j.value("init_scale", c.init_scale);
  c.init_chol_scale = j.value("init_chol_scale", c.init_chol_scale);
  c.init_mean_noise = j.value("init_mean_noise", c.init_mean_noise);
  return c;
}

}  // namespace

json model_to_json(const FittedModel &m) {
  json chol = json::array();
  for (Eigen::Index r = 0; r < m.state.chol.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(r + 1));
    for (Eigen::Index c = 0; c <= r; ++c) row[static_cast<std::size_t>(c)] = m.state.chol(r, c);
    chol.push_back(row);
  }
  return json{{"format", "mgcp-model"},
              {"version", 1},
              {"window", {{"start", m.window.start}, {"end", m.window.end}}},
              {"units", m.unit_ids},
              {"observation_end", m.observation_end},
              {"theta",
               {{"length_scale", m.theta.length_scale},
                {"width", vector_json(m.theta.width)},
                {"scale", vector_json(m.theta.scale)}}},
              {"inducing", vector_json(m.state.inducing)},
              {"mean", vector_json(m.state.mean)},
              {"chol_lower", chol},
              {"elbo", m.elbo},
              {"converged", m.converged},
              {"iterations", m.iterations},
              {"config", config_to_json(m.config)}};
}

FittedModel model_from_json(const json &doc) {
  try {
    if (field(doc, "format") != "mgcp-model" || field(doc, "version") != 1)
      throw ValidationError("not an mgcp-model version 1 document");
    FittedModel m;
    const json &w = field(doc, "window");
    m.window = ObservationWindow{field(w, "start").get<double>(), field(w, "end").get<double>()};
    validate(m.window);
    m.unit_ids = field(doc, "units").get<std::vector<std::string>>();
    m.observation_end = field(doc, "observation_end").get<std::vector<double>>();
    const json &th = field(doc, "theta");
    m.theta.length_scale = field(th, "length_scale").get<double>();
    m.theta.width = vector_from(field(th, "width"), "width");
    m.theta.scale = vector_from(field(th, "scale"), "scale");
    validate(m.theta);
    m.state.inducing = vector_from(field(doc, "inducing"), "inducing");
    m.state.mean = vector_from(field(doc, "mean"), "mean");
    const json &chol = field(doc, "chol_lower");
    const auto mm = m.state.mean.size();
    if (!chol.is_array() || static_cast<Eigen::Index>(chol.size()) != mm)
      throw ValidationError("chol_lower must have one row per inducing point");
    m.state.chol = Eigen::MatrixXd::Zero(mm, mm);
    for (Eigen::Index r = 0; r < mm; ++r) {
      const json &row = chol[static_cast<std::size_t>(r)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != r + 1)
        throw ValidationError("chol_lower row " + std::to_string(r) + " has the wrong length");
      for (Eigen::Index c = 0; c <= r; ++c) m.state.chol(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    validate(m.state);
    if (static_cast<Eigen::Index>(m.unit_ids.size()) != m.theta.num_units() ||
        m.observation_end.size() != m.unit_ids.size())
      throw ValidationError("unit list does not match the hyperparameters");
    m.elbo = field(doc, "elbo").get<double>();
    m.converged = doc.value("converged", false);
    m.iterations = doc.value("iterations", 0);
    if (doc.contains("config")) m.config = config_from_json(doc["config"]);
    m.refresh_cache();
    return m;
  } catch (const json::exception &e) {
    throw ValidationError(std::string("malformed model document: ") + e.what());
  }
}

void save_json(const json &doc, const std::filesystem::path &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os << doc.dump(2) << '\n';
  if (!os) throw Error("write failed for " + path.string());
}

void save_model(const FittedModel &model, const std::filesystem::path &path) {
  save_json(model_to_json(model), path);
}

FittedModel load_model(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open model file " + path.string());
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::exception &e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return model_from_json(doc);
}

void write_intensity_csv(std::ostream &os, const IntensityCurve &c) {
  os << "time,mu,var,mean_intensity,lo,hi\n";
  for (Eigen::Index k = 0; k < c.grid.size(); ++k)
    os << format_double(c.grid[k]) << ',' << format_double(c.mu[k]) << ','
       << format_double(c.var[k]) << ',' << format_double(c.mean_intensity[k]) << ','
       << format_double(c.lower[k]) << ',' << format_double(c.upper[k]) << '\n';
}

void write_forecast_csv(std::ostream &os, const CountForecast &f) {
  os << "t_star,L,lambda,y,prob\n";
  for (std::size_t y = 0; y < f.pmf.size(); ++y)
    os << format_double(f.t_star) << ',' << format_double(f.horizon) << ','
       << format_double(f.expected) << ',' << y << ',' << format_double(f.pmf[y]) << '\n';
}

}  // namespace mgcp
