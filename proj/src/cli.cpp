#include "kernelnet/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <boost/math/distributions/normal.hpp>
#include <openssl/evp.h>

#include "kernelnet/config.hpp"
#include "kernelnet/fourier.hpp"
#include "kernelnet/mc.hpp"
#include "kernelnet/quadrature.hpp"

namespace kernelnet::cli {

namespace {

using nlohmann::json;

constexpr std::size_t kDefaultNodes = 1024;

std::vector<double> linspace(double start, double stop, std::size_t count) {
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i)
    v[i] = count == 1 ? start : start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
  if (count > 1) v.back() = stop;
  return v;
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, const char* where) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(where) + ": field \"" + key + "\" has the wrong type");
  }
}

std::vector<double> parse_grid(const json& node, const char* what) {
  if (node.is_array()) {
    try {
      return node.get<std::vector<double>>();
    } catch (const json::exception&) {
      throw ConfigError(std::string(what) + " grid must be numbers");
    }
  }
  if (node.is_object()) {
    const double start = get_or<double>(node, "start", 0.0, what);
    const double stop = get_or<double>(node, "stop", pi, what);
    const auto count = get_or<std::size_t>(node, "count", 17, what);
    if (count == 0) throw ConfigError(std::string(what) + " grid count must be >= 1");
    return linspace(start, stop, count);
  }
  throw ConfigError(std::string(what) + " grid must be a list or {start, stop, count}");
}

void check_grid(const std::vector<double>& g, const char* what, bool open_left) {
  if (g.empty()) throw ConfigError(std::string(what) + " grid is empty");
  for (std::size_t i = 0; i < g.size(); ++i) {
    const bool low_ok = open_left ? g[i] > 0.0 : g[i] >= 0.0;
    if (!low_ok || !(g[i] <= pi + 1e-12))
      throw ConfigError(std::string(what) + " grid value " + format_double(g[i]) + " outside " +
                        (open_left ? "(0, pi]" : "[0, pi]") + (open_left && g[i] <= 0.0 ? ": mean degree is zero" : ""));
    if (i > 0 && !(g[i] > g[i - 1])) throw ConfigError(std::string(what) + " grid must be strictly increasing");
  }
}

bool is_uniform(const ConnectionKernel& k) { return std::holds_alternative<UniformWindow>(k.variant()); }

bool all_uniform(const NetworkModel& m) {
  for (std::size_t i = 0; i < m.dimension(); ++i)
    if (!is_uniform(m.factor(i))) return false;
  return true;
}

const UniformWindow& uniform_of(const ConnectionKernel& k) { return std::get<UniformWindow>(k.variant()); }

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

// Product of per-dimension estimates with first-order error propagation.
Estimate product(const std::vector<Estimate>& parts) {
  double v = 1.0, upper = 1.0;
  for (const auto& e : parts) {
    v *= e.value;
    upper *= std::abs(e.value) + e.error;
  }
  return {v, upper - std::abs(v)};
}

// Node nearest to angular position b (per dimension) on the sampled grid.
std::size_t target_node(const RunConfig& cfg, std::span<const double> b) {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < cfg.mc.shape.size(); ++i) {
    const auto n = cfg.mc.shape[i];
    const auto off = static_cast<std::size_t>(std::llround(b[i] * static_cast<double>(n) / (2.0 * pi))) % n;
    idx = idx * n + off;
  }
  return idx;
}

Cell num(double v) { return v; }
Cell count(std::size_t v) { return static_cast<long long>(v); }

}  // namespace

// ---------------------------------------------------------------- config

json RunConfig::resolved() const {
  json compute_doc{{"modes", compute.modes},
                   {"truncation", compute.truncation},
                   {"correction_truncation", compute.correction_truncation},
                   {"tail_truncation", compute.tail_truncation},
                   {"tol", compute.tol},
                   {"tensor_tol", compute.tensor_tol},
                   {"cost_budget", compute.cost_budget},
                   {"k", compute.k_list},
                   {"b", compute.b_grid},
                   {"phi", compute.phi_grid},
                   {"sweep_k", compute.sweep_k}};
  if (!compute.b_vectors.empty()) compute_doc["b_vectors"] = compute.b_vectors;
  if (compute.check_b) compute_doc["check_b"] = *compute.check_b;
  return {{"model", to_json(*model)},
          {"compute", compute_doc},
          {"mc", {{"shape", mc.shape}, {"trials", mc.trials}, {"seed", mc.seed}, {"max_sep", mc.max_sep}}}};
}

std::string RunConfig::digest() const { return sha256_hex(resolved().dump()); }

RunConfig resolve_config(const json& doc, const Overrides& flags, const std::string& command) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig cfg;
  cfg.model_doc = doc.contains("model") ? doc.at("model")
                                         : json{{"space", "circle"}, {"kernel", {{"type", "uniform"}, {"p", 0.1}, {"phi", 1.0}}}};
  auto& mdoc = cfg.model_doc;
  if (!mdoc.is_object()) throw ConfigError("model must be a JSON object");
  if (flags.p || flags.phi) {
    json& k = mdoc["kernel"];
    if (!k.is_object() || k.value("type", std::string("uniform")) != "uniform")
      throw ConfigError("--p/--phi apply to a uniform kernel only");
    k["type"] = "uniform";
    if (flags.p) k["p"] = *flags.p;
    if (flags.phi) k["phi"] = *flags.phi;
  }
  if (flags.radius) mdoc["radius"] = *flags.radius;
  const bool torus = mdoc.value("space", std::string("circle")) == "torus";

  const json mc_doc = doc.value("mc", json::object());
  if (flags.n) cfg.mc.shape = {*flags.n};
  else if (mc_doc.contains("shape")) cfg.mc.shape = get_or<std::vector<std::size_t>>(mc_doc, "shape", {}, "mc");
  else if (mc_doc.contains("n")) cfg.mc.shape = {get_or<std::size_t>(mc_doc, "n", 0, "mc")};

  // Unit node spacing ties the radius to the node count: n = round(2 pi R).
  std::vector<double> default_radii;
  const char* rkey = torus ? "radii" : "radius";
  if (!mdoc.contains(rkey)) {
    if (cfg.mc.shape.empty()) cfg.mc.shape = {kDefaultNodes};
    for (auto s : cfg.mc.shape) default_radii.push_back(static_cast<double>(s) / (2.0 * pi));
  }
  try {
    cfg.model.emplace(model_from_json(mdoc, default_radii));
  } catch (const DimensionError& e) {
    throw ConfigError(e.what());
  }
  if (cfg.mc.shape.empty())
    for (double r : cfg.model->radii()) cfg.mc.shape.push_back(nodes_for_radius(r));
  if (cfg.mc.shape.size() != cfg.model->dimension())
    throw ConfigError("mc shape has " + std::to_string(cfg.mc.shape.size()) + " sides, model has dimension " +
                      std::to_string(cfg.model->dimension()));
  for (auto s : cfg.mc.shape)
    if (s < 3) throw ConfigError("mc node count must be >= 3 per dimension");

  cfg.mc.trials = get_or<std::size_t>(mc_doc, "trials", command == "mc-validate" ? 2000 : 1000, "mc");
  if (flags.trials) cfg.mc.trials = *flags.trials;
  if (cfg.mc.trials < 1) throw ConfigError("mc trials must be >= 1");
  cfg.mc.seed = get_or<std::uint64_t>(mc_doc, "seed", 1, "mc");
  if (flags.seed) cfg.mc.seed = *flags.seed;
  cfg.mc.max_sep = get_or<int>(mc_doc, "max_sep", 8, "mc");
  if (cfg.mc.max_sep < 0) throw ConfigError("mc max_sep must be >= 0");
  cfg.mc.threads = get_or<unsigned>(mc_doc, "threads", 0, "mc");
  if (flags.threads) cfg.mc.threads = *flags.threads;

  const json cdoc = doc.value("compute", json::object());
  auto& c = cfg.compute;
  c.truncation = get_or<std::size_t>(cdoc, "truncation", c.truncation, "compute");
  c.correction_truncation = get_or<std::size_t>(cdoc, "correction_truncation", c.correction_truncation, "compute");
  c.tail_truncation = get_or<std::size_t>(cdoc, "tail_truncation", c.tail_truncation, "compute");
  c.tol = get_or<double>(cdoc, "tol", c.tol, "compute");
  c.tensor_tol = get_or<double>(cdoc, "tensor_tol", c.tensor_tol, "compute");
  c.cost_budget = get_or<double>(cdoc, "cost_budget", c.cost_budget, "compute");
  c.k_list = get_or<std::vector<int>>(cdoc, "k", c.k_list, "compute");
  c.sweep_k = get_or<std::vector<int>>(cdoc, "sweep_k", c.sweep_k, "compute");
  c.b_vectors = get_or<std::vector<std::vector<double>>>(cdoc, "b_vectors", {}, "compute");
  if (cdoc.contains("check_b")) c.check_b = get_or<double>(cdoc, "check_b", 0.0, "compute");
  if (c.truncation < 1 || c.tail_truncation < 1) throw ConfigError("truncations must be >= 1");
  if (!(c.tol > 0.0) || !(c.tensor_tol > 0.0)) throw ConfigError("tolerances must be positive");
  for (int k : c.k_list)
    if (k < 0) throw ConfigError("k values must be >= 0");
  for (int k : c.sweep_k)
    if (k < 1) throw ConfigError("sweep k values must be >= 1");
  if (c.k_list.empty() || c.sweep_k.empty()) throw ConfigError("k lists must be non-empty");

  c.b_grid = cdoc.contains("b") ? parse_grid(cdoc.at("b"), "b") : linspace(0.0, pi, 17);
  check_grid(c.b_grid, "b", false);
  c.phi_grid = cdoc.contains("phi") ? parse_grid(cdoc.at("phi"), "phi") : linspace(pi / 100.0, pi, 100);
  check_grid(c.phi_grid, "phi", true);
  for (const auto& v : c.b_vectors)
    if (v.size() != cfg.model->dimension()) throw ConfigError("b_vectors entries must match the model dimension");

  std::vector<std::string> modes;
  if (flags.modes) modes = *flags.modes;
  else if (cdoc.contains("modes")) modes = get_or<std::vector<std::string>>(cdoc, "modes", {}, "compute");
  else if (command == "clustering") {
    if (all_uniform(*cfg.model)) modes.push_back("closed");
    modes.insert(modes.end(), {"leading", "quadrature"});
  } else if (command == "separation") {
    modes = {"leading", "quadrature"};
  }
  static const std::set<std::string> known{"closed", "leading", "full", "quadrature", "tensor", "discrete", "mc"};
  for (const auto& m : modes)
    if (!known.count(m)) throw ConfigError("unknown mode \"" + m + "\"");
  c.modes = modes;

  const json odoc = doc.value("output", json::object());
  cfg.output.format = get_or<std::string>(odoc, "format", "csv", "output");
  cfg.output.path = get_or<std::string>(odoc, "path", "", "output");
  if (flags.format) cfg.output.format = *flags.format;
  if (flags.out) cfg.output.path = *flags.out;
  if (cfg.output.format != "csv" && cfg.output.format != "json")
    throw ConfigError("output format must be csv or json");
  return cfg;
}

// ---------------------------------------------------------------- output

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string cell_text(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) return "";
        else if constexpr (std::is_same_v<T, std::string>) return v;
        else if constexpr (std::is_same_v<T, double>) return format_double(v);
        else return std::to_string(v);
      },
      c);
}

json cell_json(const Cell& c) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) return nullptr;
        else return v;
      },
      c);
}

}  // namespace

void write_csv(std::ostream& os, const Table& t, const std::string& digest) {
  os << "# kernelnet " << kToolVersion << "\n";
  os << "# schema: " << t.schema << "\n";
  os << "# config_sha256: " << digest << "\n";
  for (const auto& n : t.notes) os << "# " << n << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_text(row[i]);
    os << "\n";
  }
}

void write_json(std::ostream& os, const Table& t, const std::string& digest) {
  json rows = json::array();
  for (const auto& row : t.rows) {
    json r = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = cell_json(row[i]);
    rows.push_back(r);
  }
  json doc{{"tool", std::string("kernelnet ") + kToolVersion},
           {"schema", t.schema},
           {"config_sha256", digest},
           {"notes", t.notes},
           {"columns", t.columns},
           {"rows", rows}};
  os << doc.dump(2) << "\n";
}

// ---------------------------------------------------------------- commands

Report cmd_kernel_info(const RunConfig& cfg) {
  const auto& model = *cfg.model;
  Table t{"kernel-info/1", {"key", "value"}, {}, {"angles in radians; arc length = radius * angle"}};
  t.rows.push_back({std::string("kernel"), model.kernel().describe()});
  t.rows.push_back({std::string("space"), std::string(model.is_torus() ? "torus" : "circle")});
  t.rows.push_back({std::string("dimension"), count(model.dimension())});
  for (std::size_t i = 0; i < model.dimension(); ++i) {
    const std::string sfx = model.is_torus() ? "_" + std::to_string(i) : "";
    t.rows.push_back({"radius" + sfx, num(model.radii()[i])});
    t.rows.push_back({"nodes" + sfx, count(cfg.mc.shape[i])});
    t.rows.push_back({"support_radius" + sfx, num(model.factor(i).support_radius())});
  }
  const auto n = mean_degree(model);
  t.rows.push_back({std::string("mean_degree"), num(n.value)});
  if (n.degenerate) t.notes.push_back("mean degree is zero: clustering is undefined");
  if (!model.is_torus())
    t.rows.push_back({std::string("mean_degree_discrete"), num(discrete_mean_degree(cfg.mc.shape[0], model.kernel()))});
  const auto series = model_series(model, std::min<std::size_t>(cfg.compute.truncation, 8));
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto a = series[i].coeffs();
    for (std::size_t j = 0; j < std::min<std::size_t>(a.size(), 5); ++j) {
      const std::string sfx = model.is_torus() ? "_" + std::to_string(i) : "";
      t.rows.push_back({"a" + std::to_string(j) + sfx, num(a[j])});
    }
  }
  return {{{"", t}}, Exit::ok};
}

Report cmd_clustering(const RunConfig& cfg) {
  const auto& model = *cfg.model;
  const auto& c = cfg.compute;
  const double N = mean_degree(model).value;
  if (!(N > 0.0)) throw ConfigError("mean degree is zero; clustering is undefined");
  Table t{"clustering/1", {"mode", "value", "error_estimate", "trials"}, {}, {}};
  struct Row {
    std::string mode;
    double value, error;
    std::size_t trials;
  };
  std::vector<Row> rows;
  CorrectionOptions corr{c.correction_truncation, c.cost_budget, cfg.mc.threads};

  for (const auto& mode : c.modes) {
    if (mode == "closed") {
      if (!all_uniform(model)) throw ConfigError("closed mode needs uniform kernels");
      std::vector<Estimate> parts;
      for (std::size_t i = 0; i < model.dimension(); ++i) {
        const auto& u = uniform_of(model.factor(i));
        parts.push_back(clustering_uniform_closed(u.p, u.half_width, c.tail_truncation));
      }
      const auto e = product(parts);
      rows.push_back({mode, e.value, e.error, 0});
    } else if (mode == "leading" || mode == "full") {
      if (mode == "full" && model.is_torus()) throw ConfigError("full mode is available on the circle only");
      const auto series = model_series(model, c.truncation);
      std::vector<Estimate> parts;
      bool over = false;
      for (std::size_t i = 0; i < model.dimension(); ++i) {
        const double r = model.radii()[i];
        const auto e = clustering_from_series(series[i], r, mean_degree(model.factor(i), r),
                                              mode == "full" ? ClusteringMode::full : ClusteringMode::leading, corr);
        over = over || e.over_budget;
        parts.push_back(e);
      }
      const auto e = product(parts);
      if (over) t.notes.push_back("warning: correction sums exceed the configured cost budget");
      rows.push_back({mode, e.value, e.error, 0});
    } else if (mode == "quadrature") {
      const auto r = clustering_quad(model, QuadOptions{c.tol});
      rows.push_back({mode, r.value, r.error_estimate, 0});
    } else if (mode == "tensor") {
      const auto r = clustering_tensor(model, TensorGridOptions{c.tensor_tol});
      rows.push_back({mode, r.value, r.error_estimate, 0});
    } else if (mode == "discrete") {
      if (model.is_torus()) throw ConfigError("discrete mode is available on the circle only");
      rows.push_back({mode, discrete_clustering(cfg.mc.shape[0], model.kernel()), 0.0, 0});
    } else if (mode == "mc") {
      const auto tallies = run_trials<ClusteringTally>(cfg.mc.shape, model.kernel(), cfg.mc.trials, cfg.mc.seed,
                                                       clustering_tally, cfg.mc.threads);
      const auto e = empirical_clustering(tallies);
      rows.push_back({mode, e.mean, e.std_error, e.trials});
    }
  }

  for (const auto& r : rows)
    t.rows.push_back({r.mode, num(r.value), num(r.error), r.trials ? count(r.trials) : Cell{}});

  static const std::set<std::string> continuum{"closed", "leading", "quadrature", "tensor"};
  const Row* ref = nullptr;
  for (const auto& r : rows) {
    if (!continuum.count(r.mode)) continue;
    if (!ref) {
      ref = &r;
      continue;
    }
    const double d = std::abs(r.value - ref->value);
    const double tol = r.error + ref->error + 1e-12 * std::abs(ref->value);
    t.notes.push_back("agreement " + r.mode + " vs " + ref->mode + ": |delta|=" + format_double(d) +
                      " combined_tolerance=" + format_double(tol) + (d <= tol ? " ok" : " MISMATCH"));
  }
  const Row *mc = nullptr, *disc = nullptr;
  for (const auto& r : rows) {
    if (r.mode == "mc") mc = &r;
    if (r.mode == "discrete") disc = &r;
  }
  if (mc && disc) {
    const double d = std::abs(mc->value - disc->value);
    t.notes.push_back("agreement mc vs discrete: |delta|=" + format_double(d) +
                      " z=" + format_double(mc->error > 0 ? d / mc->error : (d == 0 ? 0.0 : INFINITY)));
  }
  return {{{"", t}}, Exit::ok};
}

Report cmd_separation(const RunConfig& cfg) {
  const auto& model = *cfg.model;
  const auto& c = cfg.compute;
  const std::size_t dim = model.dimension();
  // Torus rows carry one angle column per dimension.
  std::vector<std::string> bcols{"b"};
  if (model.is_torus()) {
    bcols.clear();
    for (std::size_t i = 0; i < dim; ++i) bcols.push_back("b_" + std::to_string(i));
  }
  std::vector<std::string> cols{"k"};
  cols.insert(cols.end(), bcols.begin(), bcols.end());
  cols.insert(cols.end(), {"mode", "value", "error_estimate", "trials"});
  Table t{model.is_torus() ? "separation-torus/1" : "separation/1", cols, {}, {}};
  t.notes.push_back("b is an angle in radians; arc length = radius * b");
  t.notes.push_back("k >= 1 values are expected chain counts (leading order), not probabilities, unless mode = mc");
  if (model.is_torus()) {
    t.notes.push_back("torus: b defaults to the diagonal (b, ..., b) unless b_vectors is set");
    for (const auto& mode : c.modes)
      if (mode == "full" || mode == "closed" || mode == "discrete")
        t.notes.push_back("mode " + mode + " is circle-only and was skipped");
  }

  std::vector<std::vector<double>> bvecs;
  std::vector<double> labels;
  if (model.is_torus() && !c.b_vectors.empty()) {
    bvecs = c.b_vectors;
    for (const auto& v : bvecs) labels.push_back(v[0]);
  } else {
    for (double b : c.b_grid) {
      bvecs.emplace_back(dim, b);
      labels.push_back(b);
    }
  }

  const bool with_mc = std::find(c.modes.begin(), c.modes.end(), "mc") != c.modes.end();
  std::vector<SeparationHistogram> hist;
  if (with_mc) {
    t.notes.push_back("mc: target node round(b * n / (2 pi)); value is the empirical P(S = k)");
    for (const auto& bv : bvecs) {
      const std::size_t target = target_node(cfg, bv);
      if (target == 0) {
        hist.push_back({});
        continue;
      }
      const auto seps = run_trials<int>(
          cfg.mc.shape, model.kernel(), cfg.mc.trials, cfg.mc.seed,
          [&](const GraphSample& g) { return separation(g, 0, target, cfg.mc.max_sep); }, cfg.mc.threads);
      hist.push_back(histogram_from_separations(seps, cfg.mc.max_sep));
    }
  }

  const auto series = model_series(model, c.truncation);
  CorrectionOptions corr{c.correction_truncation, c.cost_budget, cfg.mc.threads};
  bool over = false;
  for (int k : c.k_list) {
    for (std::size_t bi = 0; bi < bvecs.size(); ++bi) {
      const auto& bv = bvecs[bi];
      const double b = labels[bi];
      auto emit = [&](const std::string& mode, double v, double e, std::size_t trials = 0) {
        std::vector<Cell> row{static_cast<long long>(k)};
        if (model.is_torus())
          for (double x : bv) row.push_back(num(x));
        else
          row.push_back(num(b));
        row.insert(row.end(), {mode, num(v), num(e), trials ? count(trials) : Cell{}});
        t.rows.push_back(std::move(row));
      };
      if (k == 0) emit("kernel", model.kernel()(std::span<const double>(bv)), 0.0);
      for (const auto& mode : c.modes) {
        if (mode == "mc") {
          if (hist[bi].bins.empty() || k > cfg.mc.max_sep) continue;
          const auto& e = hist[bi].bins[static_cast<std::size_t>(k)];
          emit(mode, e.mean, e.std_error, e.trials);
          continue;
        }
        if (k == 0) continue;
        if (mode == "leading") {
          const auto e = p_sep_torus(series, model.radii(), k, bv);
          emit(mode, e.value, e.error);
        } else if (mode == "full") {
          if (model.is_torus() || k > 2) continue;
          const double qb = model.kernel()(b);
          if (k == 1) {
            const auto e = p1_full(series[0], model.radius(), b, qb);
            emit(mode, e.value, e.error);
          } else {
            const auto e = p2_full(series[0], model.radius(), b, qb, corr);
            over = over || e.over_budget;
            emit(mode, e.value, e.error);
          }
        } else if (mode == "closed") {
          if (model.is_torus() || !is_uniform(model.kernel())) continue;
          const auto& u = uniform_of(model.kernel());
          const double N = mean_degree(model.kernel(), model.radius());
          const auto e = b == pi ? p_k_pi_uniform(u.p, u.half_width, N, k, c.tail_truncation).value
                                 : p_k_b_uniform(u.p, u.half_width, N, k, b, c.tail_truncation);
          emit(mode, e.value, e.error);
        } else if (mode == "quadrature") {
          if (k > 2) continue;
          const auto r = p_chain_quad(model, k, bv, false, QuadOptions{c.tol});
          emit(mode, r.value, r.error_estimate);
        } else if (mode == "tensor") {
          if (k > 2) continue;
          const auto r = p_chain_tensor(model, k, bv, false, TensorGridOptions{c.tensor_tol});
          emit(mode, r.value, r.error_estimate);
        } else if (mode == "discrete") {
          if (model.is_torus() || k > 3) continue;
          const auto target = target_node(cfg, bv);
          if (target == 0) continue;
          const auto r = discrete_chain_count(cfg.mc.shape[0], model.kernel(), k, target, 2e9, cfg.mc.threads);
          emit(mode, r.reduced, 0.0);
        }
      }
    }
  }
  if (over) t.notes.push_back("warning: correction sums exceed the configured cost budget");
  return {{{"", t}}, Exit::ok};
}

Report cmd_sweep_phi(const RunConfig& cfg) {
  const auto& model = *cfg.model;
  const auto& c = cfg.compute;
  if (model.is_torus() || !is_uniform(model.kernel()))
    throw ConfigError("sweep-phi needs a uniform kernel on the circle");
  const double p = uniform_of(model.kernel()).p;
  if (!(p > 0.0)) throw ConfigError("sweep-phi needs p > 0: mean degree is zero");

  Table left{"sweep-phi-clustering/1", {"phi", "C_over_p", "error_estimate"}, {}, {}};
  left.notes.push_back("C_over_p = <C>/p of the uniform window; independent of p and R");
  Table right{"sweep-phi-separation/1", {"phi"}, {}, {}};
  right.notes.push_back("P_tilde_k = P(k, pi) / (pi N^k) of the uniform window at p = " + format_double(p));
  for (int k : c.sweep_k) {
    right.columns.push_back("P_tilde_k" + std::to_string(k));
    right.columns.push_back("error_k" + std::to_string(k));
  }
  for (double phi : c.phi_grid) {
    const auto e = clustering_uniform_closed(1.0, phi, c.tail_truncation);
    left.rows.push_back({num(phi), num(e.value), num(e.error)});
    std::vector<Cell> row{num(phi)};
    const double N = mean_degree(ConnectionKernel::uniform(p, phi), model.radius());
    for (int k : c.sweep_k) {
      const auto v = p_k_pi_uniform(p, phi, N, k, c.tail_truncation);
      row.push_back(num(v.normalized.value));
      row.push_back(num(v.normalized.error));
    }
    right.rows.push_back(std::move(row));
  }
  return {{{"clustering", left}, {"separation", right}}, Exit::ok};
}

Report cmd_mc_validate(const RunConfig& cfg) {
  const auto& model = *cfg.model;
  const auto& c = cfg.compute;
  if (model.is_torus()) throw ConfigError("mc-validate runs on the circle model");
  const auto& q = model.kernel();
  const double R = model.radius();
  const std::size_t n = cfg.mc.shape[0];
  const double N = mean_degree(model).value;
  if (!(N > 0.0)) throw ConfigError("mean degree is zero; clustering is undefined");

  Table t{"mc-validate/1", {"check", "value", "reference", "difference", "tolerance", "z_score", "status"}, {}, {}};
  bool all_ok = true;
  auto det = [&](const std::string& name, double v, double ref, double tol) {
    const double d = std::abs(v - ref);
    const bool ok = d <= tol;
    all_ok = all_ok && ok;
    t.rows.push_back({name, num(v), num(ref), num(d), num(tol), Cell{}, std::string(ok ? "pass" : "fail")});
  };
  // Bonferroni: the six MC checks share the false-alarm rate of one
  // two-sided 3-sigma test.
  constexpr int kMcChecks = 6;
  const double alpha = 2.0 * boost::math::cdf(boost::math::complement(boost::math::normal(), 3.0));
  const double z_crit = boost::math::quantile(boost::math::complement(boost::math::normal(), alpha / (2 * kMcChecks)));
  auto stat = [&](const std::string& name, const McEstimate& e, double ref) {
    const double d = std::abs(e.mean - ref);
    const double tol = z_crit * e.std_error;
    const bool ok = d <= tol;
    const double z = e.std_error > 0 ? d / e.std_error : (d == 0.0 ? 0.0 : INFINITY);
    all_ok = all_ok && ok;
    t.rows.push_back({name, num(e.mean), num(ref), num(d), num(tol), num(z), std::string(ok ? "pass" : "fail")});
  };

  // Fourier vs quadrature.
  const auto series = model_series(model, c.truncation);
  const auto quad_c = clustering_quad(model, QuadOptions{c.tol});
  const auto lead_c = clustering_from_series(series[0], R, N, ClusteringMode::leading);
  det("clustering_series_vs_quadrature", lead_c.value, quad_c.value,
      1e-6 * std::abs(quad_c.value) + quad_c.error_estimate);
  if (is_uniform(q)) {
    const auto& u = uniform_of(q);
    const auto closed = clustering_uniform_closed(u.p, u.half_width, c.tail_truncation);
    det("clustering_closed_vs_quadrature", closed.value, quad_c.value,
        1e-6 * std::abs(quad_c.value) + quad_c.error_estimate);
  }
  const double b = c.check_b.value_or(std::min(q.support_radius(), pi / 2.0));
  const std::size_t offset = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(b * n / (2.0 * pi))));
  for (int k : {1, 2}) {
    const double bb[] = {b};
    const auto quad = p_chain_quad(model, k, bb, false, QuadOptions{c.tol});
    const auto lead = p_sep_leading(series[0], R, k, b);
    det("chain" + std::to_string(k) + "_series_vs_quadrature", lead.value, quad.value,
        1e-3 * std::abs(quad.value) + quad.error_estimate + 1e-12);
  }

  // Monte Carlo vs exact discrete sums.
  struct TrialStats {
    double degree = 0.0;
    ClusteringTally tally;
    double chains1 = 0.0, chains2 = 0.0;
    int sep_near = -1, sep_far = -1;
  };
  // Direct links: one offset halfway into the window, one at the antipode.
  const std::size_t near = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(0.5 * std::min(q.support_radius(), pi) * n / (2.0 * pi))));
  const std::size_t far = n / 2;
  const auto stats = run_trials<TrialStats>(
      cfg.mc.shape, q, cfg.mc.trials, cfg.mc.seed,
      [&](const GraphSample& g) {
        TrialStats s;
        s.degree = sample_mean_degree(g);
        s.tally = clustering_tally(g);
        s.chains1 = count_chains(g, 0, offset, 1);
        s.chains2 = count_chains(g, 0, offset, 2);
        s.sep_near = separation(g, 0, near, 0);
        s.sep_far = separation(g, 0, far, 0);
        return s;
      },
      cfg.mc.threads);
  std::vector<double> deg, c1, c2;
  std::vector<ClusteringTally> tallies;
  std::vector<int> near_s, far_s;
  for (const auto& s : stats) {
    deg.push_back(s.degree);
    tallies.push_back(s.tally);
    c1.push_back(s.chains1);
    c2.push_back(s.chains2);
    near_s.push_back(s.sep_near);
    far_s.push_back(s.sep_far);
  }
  stat("mc_mean_degree_vs_discrete", summarize(deg), discrete_mean_degree(n, q));
  stat("mc_clustering_vs_discrete", empirical_clustering(tallies), discrete_clustering(n, q));
  stat("mc_chain1_vs_discrete", summarize(c1), discrete_chain_count(n, q, 1, offset).reduced);
  stat("mc_chain2_vs_discrete", summarize(c2), discrete_chain_count(n, q, 2, offset, 2e9, cfg.mc.threads).reduced);
  stat("mc_direct_link_near_vs_kernel", histogram_from_separations(near_s, 0).bins[0],
       q(2.0 * pi * static_cast<double>(near) / static_cast<double>(n)));
  stat("mc_direct_link_far_vs_kernel", histogram_from_separations(far_s, 0).bins[0],
       q(2.0 * pi * static_cast<double>(far) / static_cast<double>(n)));

  t.notes.push_back("check separation b = " + format_double(b) + " (node offset " + std::to_string(offset) + ")");
  t.notes.push_back("mc checks pass when |z| <= " + format_double(std::round(z_crit * 1000) / 1000) + " (" +
                    std::to_string(kMcChecks) + " checks at the joint level of one 3-sigma test)");
  t.notes.push_back(std::string("result: ") + (all_ok ? "all checks passed" : "FAILED"));
  return {{{"", t}}, all_ok ? Exit::ok : Exit::validation_failed};
}

// ---------------------------------------------------------------- entry point

namespace {

std::string suffixed(const std::string& path, const std::string& suffix, const std::string& format) {
  if (suffix.empty()) return path;
  std::filesystem::path p(path);
  const std::string ext = p.has_extension() ? p.extension().string() : "." + format;
  p.replace_extension();
  return p.string() + "_" + suffix + ext;
}

void emit(const Report& report, const RunConfig& cfg, std::ostream& out) {
  const auto digest = cfg.digest();
  auto write = [&](std::ostream& os, const Table& t) {
    if (cfg.output.format == "json") write_json(os, t, digest);
    else write_csv(os, t, digest);
  };
  for (std::size_t i = 0; i < report.tables.size(); ++i) {
    const auto& [suffix, table] = report.tables[i];
    if (cfg.output.path.empty()) {
      if (i) out << "\n";
      write(out, table);
      continue;
    }
    const auto path = suffixed(cfg.output.path, report.tables.size() > 1 ? suffix : "", cfg.output.format);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path);
    write(f, table);
    out << "wrote " << path << "\n";
  }
}

std::vector<std::string> split_modes(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Clustering and separation analytics for distance-kernel random networks on circles and tori"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("kernelnet ") + kToolVersion);

  std::string config_path, modes, format, out_path;
  std::uint64_t seed = 0;
  std::size_t trials = 0, n = 0;
  unsigned threads = 0;
  double p = 0, phi = 0, radius = 0;

  struct Sub {
    const char* name;
    const char* help;
    Report (*fn)(const RunConfig&);
  };
  const Sub subs[] = {
      {"kernel-info", "Describe the kernel, mean degree and leading Fourier coefficients", cmd_kernel_info},
      {"clustering", "Mean clustering coefficient by the requested modes", cmd_clustering},
      {"separation", "Separation curves P(k, b) over a b-grid", cmd_separation},
      {"sweep-phi", "Clustering ratio and normalized P(k, pi) over a window-width grid", cmd_sweep_phi},
      {"mc-validate", "Cross-check Fourier, quadrature and Monte Carlo routes", cmd_mc_validate},
  };
  std::map<CLI::App*, const Sub*> by_app;
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "Output path (stdout when omitted)");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--seed", seed, "Master seed for Monte Carlo trials");
    sub->add_option("--trials", trials, "Monte Carlo trials");
    sub->add_option("--modes", modes, "Comma-separated modes: closed,leading,full,quadrature,tensor,discrete,mc");
    sub->add_option("--threads", threads, "Worker threads (0 = hardware)");
    sub->add_option("--p", p, "Uniform kernel link probability");
    sub->add_option("--phi", phi, "Uniform kernel half-width angle (radians)");
    sub->add_option("--radius", radius, "Circle radius");
    sub->add_option("--n", n, "Ring node count for Monte Carlo");
    by_app[sub] = &s;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? Exit::ok : Exit::config_error;
  }

  CLI::App* chosen = app.get_subcommands().front();
  Overrides flags;
  if (chosen->count("--seed")) flags.seed = seed;
  if (chosen->count("--trials")) flags.trials = trials;
  if (chosen->count("--modes")) flags.modes = split_modes(modes);
  if (chosen->count("--format")) flags.format = format;
  if (chosen->count("--out")) flags.out = out_path;
  if (chosen->count("--threads")) flags.threads = threads;
  if (chosen->count("--p")) flags.p = p;
  if (chosen->count("--phi")) flags.phi = phi;
  if (chosen->count("--radius")) flags.radius = radius;
  if (chosen->count("--n")) flags.n = n;

  try {
    nlohmann::json doc = nlohmann::json::object();
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      doc = nlohmann::json::parse(f);
    }
    const auto cfg = resolve_config(doc, flags, chosen->get_name());
    set_default_threads(cfg.mc.threads);
    const auto report = by_app.at(chosen)->fn(cfg);
    emit(report, cfg, out);
    return report.exit_code;
  } catch (const nlohmann::json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return Exit::config_error;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return Exit::config_error;
  } catch (const DimensionError& e) {
    err << "config error: " << e.what() << "\n";
    return Exit::config_error;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << " (achieved tolerance " << e.achieved_tolerance() << ")\n";
    return Exit::numerical_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return Exit::numerical_error;
  }
}

}  // namespace kernelnet::cli
