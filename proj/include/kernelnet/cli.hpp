#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "kernelnet/kernel.hpp"

namespace kernelnet::cli {

inline constexpr const char* kToolVersion = "1.0.0";

/// Exit codes.
enum Exit : int { ok = 0, validation_failed = 1, config_error = 2, numerical_error = 3 };

struct ComputeSpec {
  std::vector<std::string> modes;
  std::size_t truncation = 4096;
  std::size_t correction_truncation = 128;
  std::size_t tail_truncation = 100000;
  double tol = 1e-9;
  double tensor_tol = 1e-6;
  double cost_budget = 1e8;
  std::vector<int> k_list{0, 1, 2};
  std::vector<double> b_grid;
  /// Torus only: explicit separation vectors; defaults to (b, ..., b).
  std::vector<std::vector<double>> b_vectors;
  std::vector<double> phi_grid;
  std::vector<int> sweep_k{1, 2, 4, 6, 10, 20};
  /// mc-validate: separation used by the chain and histogram checks.
  std::optional<double> check_b;
};

struct McSpec {
  std::vector<std::size_t> shape;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  int max_sep = 8;
  unsigned threads = 0;
};

struct OutputSpec {
  std::string format = "csv";
  std::string path;
};

/// Fully resolved run configuration. `model` is validated at resolution.
struct RunConfig {
  nlohmann::json model_doc;
  std::optional<NetworkModel> model;
  ComputeSpec compute;
  McSpec mc;
  OutputSpec output;

  /// The resolved computation parameters (no output or thread settings).
  nlohmann::json resolved() const;
  std::string digest() const;
};

/// Flag overrides applied on top of a config document.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::vector<std::string>> modes;
  std::optional<std::string> format;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  std::optional<double> p, phi, radius;
  std::optional<std::size_t> n;
};

/// Fills defaults for `command` and validates. Throws ConfigError.
RunConfig resolve_config(const nlohmann::json& doc, const Overrides& flags, const std::string& command);

using Cell = std::variant<std::monostate, std::string, double, long long>;

struct Table {
  std::string schema;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> notes;
};

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

void write_csv(std::ostream& os, const Table& t, const std::string& digest);
void write_json(std::ostream& os, const Table& t, const std::string& digest);

struct Report {
  std::vector<std::pair<std::string, Table>> tables;  // (file suffix, table)
  int exit_code = Exit::ok;
};

Report cmd_kernel_info(const RunConfig& cfg);
Report cmd_clustering(const RunConfig& cfg);
Report cmd_separation(const RunConfig& cfg);
Report cmd_sweep_phi(const RunConfig& cfg);
Report cmd_mc_validate(const RunConfig& cfg);

/// Full command-line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kernelnet::cli
