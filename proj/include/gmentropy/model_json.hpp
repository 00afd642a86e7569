#pragma once

#include "gmentropy/bnn.hpp"
#include "gmentropy/mlp.hpp"

#include "json.hpp"

#include <filesystem>
#include <iosfwd>

namespace gmentropy {

struct TrainedModel {
  MLPSpec spec;
  VariationalPosterior posterior;
  double likelihood_std = 1e-2;
  double prior_std = 1e6;
};

nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);

TrainedModel load_model(const std::filesystem::path& path);
void save_model(const TrainedModel& model, const std::filesystem::path& path);

/// CSV with header "x,y", floats at 17 significant digits.
void write_dataset_csv(const Dataset& data, std::ostream& os);
Dataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace gmentropy
