#include "kernelnet/config.hpp"

#include <string>

namespace kernelnet {

namespace {

template <class T>
T field(const nlohmann::json& doc, const char* key, const char* where) {
  if (!doc.is_object() || !doc.contains(key))
    throw ConfigError(std::string(where) + ": missing field \"" + key + "\"");
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string(where) + ": field \"" + key + "\" has the wrong type");
  }
}

}  // namespace

ConnectionKernel kernel_from_json(const nlohmann::json& doc) {
  const auto type = field<std::string>(doc, "type", "kernel");
  if (type == "uniform") return ConnectionKernel::uniform(field<double>(doc, "p", "uniform kernel"),
                                                          field<double>(doc, "phi", "uniform kernel"));
  if (type == "cosine") return ConnectionKernel::cosine(field<std::vector<double>>(doc, "coeffs", "cosine kernel"));
  if (type == "product") {
    const auto& list = doc.contains("factors") ? doc.at("factors") : nlohmann::json();
    if (!list.is_array()) throw ConfigError("product kernel: \"factors\" must be an array");
    std::vector<ConnectionKernel> factors;
    for (const auto& f : list) factors.push_back(kernel_from_json(f));
    return ConnectionKernel::product(std::move(factors));
  }
  throw ConfigError("kernel: unknown type \"" + type + "\" (expected uniform, cosine or product)");
}

nlohmann::json to_json(const ConnectionKernel& kernel) {
  if (const auto* u = std::get_if<UniformWindow>(&kernel.variant()))
    return {{"type", "uniform"}, {"p", u->p}, {"phi", u->half_width}};
  if (const auto* c = std::get_if<CosineSeries>(&kernel.variant())) return {{"type", "cosine"}, {"coeffs", c->coeffs}};
  nlohmann::json factors = nlohmann::json::array();
  for (const auto& f : kernel.factors()) factors.push_back(to_json(f));
  return {{"type", "product"}, {"factors", factors}};
}

NetworkModel model_from_json(const nlohmann::json& doc, const std::vector<double>& default_radii) {
  if (!doc.is_object()) throw ConfigError("model must be a JSON object");
  const std::string space = doc.value("space", std::string("circle"));
  auto kernel = kernel_from_json(doc.contains("kernel") ? doc.at("kernel") : nlohmann::json());
  if (space == "circle") {
    double r = 0.0;
    if (doc.contains("radius")) r = field<double>(doc, "radius", "circle model");
    else if (!default_radii.empty()) r = default_radii.front();
    else throw ConfigError("circle model: missing field \"radius\"");
    return NetworkModel(Circle{r}, std::move(kernel));
  }
  if (space == "torus") {
    std::vector<double> radii;
    if (doc.contains("radii")) radii = field<std::vector<double>>(doc, "radii", "torus model");
    else if (!default_radii.empty()) radii = default_radii;
    else throw ConfigError("torus model: missing field \"radii\"");
    return NetworkModel(Torus{std::move(radii)}, std::move(kernel));
  }
  throw ConfigError("model: unknown space \"" + space + "\" (expected circle or torus)");
}

nlohmann::json to_json(const NetworkModel& model) {
  nlohmann::json j{{"space", model.is_torus() ? "torus" : "circle"}, {"kernel", to_json(model.kernel())}};
  if (model.is_torus()) j["radii"] = model.radii();
  else j["radius"] = model.radius();
  return j;
}

}  // namespace kernelnet
