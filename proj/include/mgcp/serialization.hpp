#pragma once

#include <filesystem>
#include <iosfwd>
#include <json.hpp>
#include <string>

#include "mgcp/inference.hpp"
#include "mgcp/prediction.hpp"

namespace mgcp {

// Fitted parameters, inducing points, variational state, window, unit order,
// ELBO and the fit configuration. Doubles are written with shortest
// round-trip formatting, so a save/load cycle is exact.
nlohmann::json model_to_json(const FittedModel &model);
FittedModel model_from_json(const nlohmann::json &doc);

void save_model(const FittedModel &model, const std::filesystem::path &path);
FittedModel load_model(const std::filesystem::path &path);

nlohmann::json config_to_json(const FitConfig &config);

// time,mu,var,mean_intensity,lo,hi
void write_intensity_csv(std::ostream &os, const IntensityCurve &curve);
// t_star,L,lambda,y,prob
void write_forecast_csv(std::ostream &os, const CountForecast &forecast);

// Writes `doc` with two-space indentation and a trailing newline.
void save_json(const nlohmann::json &doc, const std::filesystem::path &path);

}  // namespace mgcp
