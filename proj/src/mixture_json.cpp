#include "gmentropy/mixture_json.hpp"

#include "gmentropy/errors.hpp"

#include <fstream>
#include <string>

namespace gmentropy {

namespace {

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::json mixture_to_json(const GaussianMixture& q) {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : q.components()) {
    nlohmann::json cov;
    switch (c.cov.kind()) {
      case CovarianceKind::Isotropic:
        cov = {{"kind", "iso"}, {"data", {c.cov.variances()[0]}}};
        break;
      case CovarianceKind::Diagonal:
        cov = {{"kind", "diag"}, {"data", to_vector(c.cov.variances())}};
        break;
      case CovarianceKind::Full: {
        const Eigen::MatrixXd m = c.cov.matrix();
        std::vector<double> flat;
        flat.reserve(static_cast<std::size_t>(m.size()));
        for (Eigen::Index r = 0; r < m.rows(); ++r)
          for (Eigen::Index col = 0; col < m.cols(); ++col) flat.push_back(m(r, col));
        cov = {{"kind", "full"}, {"data", flat}};
        break;
      }
    }
    comps.push_back({{"weight", c.weight}, {"mean", to_vector(c.mean)}, {"cov", cov}});
  }
  return {{"components", comps}};
}

GaussianMixture mixture_from_json(const nlohmann::json& doc) {
  try {
    std::vector<GaussianComponent> comps;
    for (const auto& jc : doc.at("components")) {
      const auto mean = from_vector(jc.at("mean").get<std::vector<double>>());
      const auto& jcov = jc.at("cov");
      const auto kind = jcov.at("kind").get<std::string>();
      const auto data = jcov.at("data").get<std::vector<double>>();
      const auto m = mean.size();
      Covariance cov = [&] {
        if (kind == "iso") {
          if (data.size() != 1) throw UsageError("iso covariance needs exactly one variance");
          return Covariance::isotropic(m, data[0]);
        }
        if (kind == "diag") {
          if (static_cast<Eigen::Index>(data.size()) != m) throw UsageError("diag covariance needs m variances");
          return Covariance::diagonal(from_vector(data));
        }
        if (kind == "full") {
          if (static_cast<Eigen::Index>(data.size()) != m * m) throw UsageError("full covariance needs m² entries");
          Eigen::MatrixXd mat(m, m);
          for (Eigen::Index r = 0; r < m; ++r)
            for (Eigen::Index c = 0; c < m; ++c) mat(r, c) = data[static_cast<std::size_t>(r * m + c)];
          return Covariance::full(std::move(mat));
        }
        throw UsageError("unknown covariance kind '" + kind + "'");
      }();
      comps.push_back({jc.at("weight").get<double>(), mean, std::move(cov)});
    }
    return GaussianMixture(std::move(comps));
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed mixture document: ") + e.what());
  }
}

GaussianMixture load_mixture(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open mixture file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("cannot parse " + path.string() + ": " + e.what());
  }
  return mixture_from_json(doc);
}

void save_mixture(const GaussianMixture& q, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path.string());
  out << mixture_to_json(q).dump(2) << '\n';
}

}  // namespace gmentropy
