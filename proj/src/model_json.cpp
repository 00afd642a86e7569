#include "gmentropy/model_json.hpp"

#include "gmentropy/errors.hpp"
#include "gmentropy/format.hpp"

#include <fstream>
#include <sstream>
#include <string>

namespace gmentropy {

namespace {

nlohmann::json vec_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::json model_to_json(const TrainedModel& model) {
  nlohmann::json comps = nlohmann::json::array();
  for (Eigen::Index k = 0; k < model.posterior.components(); ++k) {
    comps.push_back({{"logit", model.posterior.logits(k)},
                     {"mu", vec_to_json(model.posterior.means[static_cast<std::size_t>(k)])},
                     {"rho", vec_to_json(model.posterior.rhos[static_cast<std::size_t>(k)])}});
  }
  return {{"mlp",
           {{"input_dim", model.spec.input_dim},
            {"output_dim", model.spec.output_dim},
            {"hidden", model.spec.hidden},
            {"activation", "erf"}}},
          {"sigma_y", model.likelihood_std},
          {"sigma_w", model.prior_std},
          {"components", comps}};
}

TrainedModel model_from_json(const nlohmann::json& j) {
  try {
    TrainedModel m;
    const auto& mlp = j.at("mlp");
    m.spec.input_dim = mlp.at("input_dim").get<int>();
    m.spec.output_dim = mlp.at("output_dim").get<int>();
    m.spec.hidden = mlp.at("hidden").get<std::vector<int>>();
    if (mlp.value("activation", "erf") != "erf") throw UsageError("only erf activation is supported");
    m.spec.validate();
    m.likelihood_std = j.at("sigma_y").get<double>();
    m.prior_std = j.value("sigma_w", 1e6);
    const auto& comps = j.at("components");
    m.posterior.logits.resize(static_cast<Eigen::Index>(comps.size()));
    Eigen::Index k = 0;
    for (const auto& c : comps) {
      m.posterior.logits(k++) = c.at("logit").get<double>();
      m.posterior.means.push_back(vec_from_json(c.at("mu")));
      m.posterior.rhos.push_back(vec_from_json(c.at("rho")));
    }
    m.posterior.validate(m.spec);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed model JSON: ") + e.what());
  }
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open model file " + path.string());
  try {
    return model_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("cannot parse " + path.string() + ": " + e.what());
  }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write model file " + path.string());
  out << model_to_json(model).dump(1) << '\n';
}

void write_dataset_csv(const Dataset& data, std::ostream& os) {
  os << "x,y\n";
  for (const auto& p : data) os << format_double(p.x) << ',' << format_double(p.y) << '\n';
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open dataset file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,y", 0) != 0) {
    throw UsageError("dataset file must start with the header x,y");
  }
  Dataset out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw UsageError("malformed dataset row: " + line);
    try {
      out.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
    } catch (const std::exception&) {
      throw UsageError("malformed dataset row: " + line);
    }
  }
  if (out.empty()) throw UsageError("dataset file has no rows");
  return out;
}

}  // namespace gmentropy
