#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "mgcp/inference.hpp"

namespace mgcp {

// `key = value` lines; '#' starts a comment, blank lines are skipped.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::istream &is);
KeyValues load_key_values(const std::filesystem::path &path);

// Applies the documented keys (quad_order, max_iters, tol, grad_tol, seed,
// num_inducing, optimize_inducing, optimizer) on top of `base`. Unknown keys
// are a ValidationError.
FitConfig apply_fit_config(const KeyValues &kv, FitConfig base = {});

}  // namespace mgcp
