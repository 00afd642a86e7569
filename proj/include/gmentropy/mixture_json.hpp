#pragma once

#include "gmentropy/mixture.hpp"

#include "json.hpp"

#include <filesystem>

namespace gmentropy {

/// {"components":[{"weight":w,"mean":[...],"cov":{"kind":"iso|diag|full","data":[...]}}]}
/// "iso" data holds one variance, "diag" m variances, "full" m² entries row-major.
nlohmann::json mixture_to_json(const GaussianMixture& q);
GaussianMixture mixture_from_json(const nlohmann::json& doc);

GaussianMixture load_mixture(const std::filesystem::path& path);
void save_mixture(const GaussianMixture& q, const std::filesystem::path& path);

}  // namespace gmentropy
