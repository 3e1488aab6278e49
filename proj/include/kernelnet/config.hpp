#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "kernelnet/kernel.hpp"

namespace kernelnet {

/// Kernel documents:
///   {"type": "uniform", "p": 0.1, "phi": 1.0}
///   {"type": "cosine", "coeffs": [a0, a1, ...]}
///   {"type": "product", "factors": [<kernel>, ...]}
/// Throws ConfigError on malformed documents; range checks are left to
/// `validate`.
ConnectionKernel kernel_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ConnectionKernel& kernel);

/// Model documents:
///   {"space": "circle", "radius": 20.0, "kernel": {...}}
///   {"space": "torus", "radii": [20.0, 20.0], "kernel": {"type": "product", ...}}
/// A missing radius (or radii) is filled from `default_radii`.
NetworkModel model_from_json(const nlohmann::json& doc, const std::vector<double>& default_radii = {});
nlohmann::json to_json(const NetworkModel& model);

}  // namespace kernelnet
