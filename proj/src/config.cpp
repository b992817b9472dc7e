#include "mgcp/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>

#include "mgcp/csv.hpp"
#include "mgcp/errors.hpp"

namespace mgcp {

KeyValues parse_key_values(std::istream &is) {
  KeyValues kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body(trim(line));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", lineno);
    std::string key(trim(std::string_view(body).substr(0, eq)));
    std::string value(trim(std::string_view(body).substr(eq + 1)));
    if (key.empty()) throw ParseError("empty key", lineno);
    if (!kv.emplace(key, value).second) throw ParseError("duplicate key '" + key + "'", lineno);
  }
  return kv;
}

KeyValues load_key_values(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open config file " + path.string());
  return parse_key_values(is);
}

namespace {

template <class Int>
Int parse_int(const std::string &key, const std::string &s) {
  Int v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ValidationError("config key '" + key + "': '" + s + "' is not an integer");
  return v;
}

double parse_real(const std::string &key, const std::string &s) {
  double v = 0.0;
  if (!parse_double(s, v)) throw ValidationError("config key '" + key + "': '" + s + "' is not a finite number");
  return v;
}

bool parse_bool(const std::string &key, const std::string &s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ValidationError("config key '" + key + "': expected true or false");
}

}  // namespace

FitConfig apply_fit_config(const KeyValues &kv, FitConfig c) {
  for (const auto &[key, value] : kv) {
    if (key == "quad_order") c.quad_order = parse_int<int>(key, value);
    else if (key == "max_iters") c.max_iters = parse_int<int>(key, value);
    else if (key == "tol") c.tol = parse_real(key, value);
    else if (key == "grad_tol") c.grad_tol = parse_real(key, value);
    else if (key == "seed") c.seed = parse_int<std::uint64_t>(key, value);
    else if (key == "num_inducing") c.num_inducing = parse_int<Eigen::Index>(key, value);
    else if (key == "optimize_inducing") c.optimize_inducing = parse_bool(key, value);
    else if (key == "optimizer") {
      if (value == "lbfgs") c.optimizer = OptimizerKind::lbfgs;
      else if (value == "adam") c.optimizer = OptimizerKind::adam;
      else throw ValidationError("config key 'optimizer': expected lbfgs or adam");
    } else {
      throw ValidationError("unknown config key '" + key + "'");
    }
  }
  validate(c);
  return c;
}

}  // namespace mgcp
