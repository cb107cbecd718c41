#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "horo/horoprod.hpp"
#include "horo/walk.hpp"

namespace horo::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes shared by every command.
enum Exit : int { ok = 0, verification_failed = 1, usage_error = 2, budget_exceeded = 3 };

struct TreeConfig {
  std::string kind = "homogeneous";  // or "galton_watson"
  ChildIndex children = 2;           // homogeneous only
  std::vector<double> offspring;     // galton_watson: offspring[i] = P(i+1 children)
  std::uint64_t seed = 0;            // galton_watson only

  PointedTreeEnv build(std::uint64_t seed_offset = 0) const;
  bool operator==(const TreeConfig&) const = default;
};

struct KernelConfig {
  std::string kind = "simple";  // "simple", "height_biased" or "move_weights"
  double up = 0.5;              // height_biased
  double down_weight = 1.0;     // move_weights
  double up_weight = 1.0;
  double hold = 0.0;

  Kernel build() const;
  bool operator==(const KernelConfig&) const = default;
};

/// Everything a command reads. Flags override fields after the config is loaded.
struct ExperimentConfig {
  std::string name;
  TreeConfig tree;
  TreeConfig tree_prime;
  KernelConfig kernel;
  std::uint64_t seed = 1;
  int radius = 6;
  std::size_t n = 10'000;
  std::size_t walks = 200;
  std::size_t depth = 10;
  double min_rate = 0.05;
  std::size_t checkpoints = 20;
  std::size_t n_max = 12;
  std::size_t entropy_walks = 200;
  double entropy_tolerance = 0.05;
  std::size_t environments = 1;  // entropy averaging for random trees
  std::size_t regularity_walks = 5;
  std::size_t budget = 4'000'000;
  std::size_t max_geodesics = 100'000;
  std::string relation;  // eqrel: relation file; empty means random relations
  std::size_t relations = 100;
  std::size_t graphs = 50;
  std::size_t eqrel_n_max = 4;
  std::size_t max_terms = 10'000'000;
  std::size_t max_points = 8;

  ProductEnv envs(std::uint64_t seed_offset = 0) const;
  bool operator==(const ExperimentConfig&) const = default;
};

/// Names accepted by preset().
std::vector<std::string> preset_names();
/// Throws ParseError for unknown names.
ExperimentConfig preset(const std::string& name);

/// JSON text; unknown keys and malformed values raise ParseError naming the
/// source and, for syntax errors, the line.
ExperimentConfig parse_config(const std::string& json_text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);
std::string config_json(const ExperimentConfig& c);

/// Named output files in emission order; the first is the primary output.
struct CommandResult {
  int exit_code = Exit::ok;
  std::string summary;  // aligned text for humans
  std::vector<std::pair<std::string, std::string>> files;
};

CommandResult cmd_verify_distance(const ExperimentConfig& c);
CommandResult cmd_geodesics(const ExperimentConfig& c, const std::string& x, const std::string& y);
CommandResult cmd_simulate(const ExperimentConfig& c);
CommandResult cmd_eqrel(const ExperimentConfig& c);
CommandResult cmd_entropy(const ExperimentConfig& c);

}  // namespace horo::cli
