// Command-line front end: horoprod <command> [--preset NAME | --config FILE] [flags]

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "horo/cli.hpp"
#include "horo/errors.hpp"

namespace {

using namespace horo::cli;

struct Overrides {
  std::string preset = "dl23";
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> radius;
  std::optional<std::size_t> n, walks, budget, depth, n_max;
  std::optional<std::string> relation;
  std::string out;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--preset", o.preset, "built-in experiment (dl22, dl23, gw-uniform123)");
  cmd->add_option("--config", o.config, "JSON experiment config; replaces --preset");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--radius", o.radius, "ball radius for verify-distance");
  cmd->add_option("--n", o.n, "walk length");
  cmd->add_option("--walks", o.walks, "number of walks");
  cmd->add_option("--budget", o.budget, "state budget for balls and exact n-step laws");
  cmd->add_option("--depth", o.depth, "end indices that must stabilize for a boundary verdict");
  cmd->add_option("--n-max", o.n_max, "largest n for exact entropies");
  cmd->add_option("--out", o.out, "directory for output files (default: primary output to stdout)");
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig c = o.config.empty() ? preset(o.preset) : load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.radius) c.radius = *o.radius;
  if (o.n) c.n = *o.n;
  if (o.walks) c.walks = *o.walks;
  if (o.budget) c.budget = *o.budget;
  if (o.depth) c.depth = *o.depth;
  if (o.n_max) c.n_max = *o.n_max;
  if (o.relation) c.relation = *o.relation;
  return c;
}

int emit(const CommandResult& r, const std::string& out) {
  if (out.empty()) {
    std::cerr << r.summary;
    if (!r.files.empty()) std::cout << r.files.front().second;
    return r.exit_code;
  }
  std::filesystem::create_directories(out);
  for (const auto& [name, content] : r.files) {
    const auto path = std::filesystem::path(out) / name;
    std::ofstream f(path, std::ios::binary);
    f << content;
    if (!f) {
      std::cerr << "cannot write " << path << '\n';
      return Exit::usage_error;
    }
  }
  std::cout << r.summary;
  for (const auto& [name, content] : r.files) std::cout << "wrote " << (std::filesystem::path(out) / name).string() << '\n';
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("Horospheric products of trees: distances, geodesics, random walks and entropy", "horoprod");
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Overrides o;
  std::string x, y;

  auto* verify = app.add_subcommand("verify-distance", "compare the distance formula with BFS on a ball");
  auto* geo = app.add_subcommand("geodesics", "enumerate all geodesics between two vertices");
  geo->add_option("x", x, "first vertex, e.g. (0:[]|0:[])")->required();
  geo->add_option("y", y, "second vertex")->required();
  auto* sim = app.add_subcommand("simulate", "sample walks and run every estimator");
  auto* eq = app.add_subcommand("eqrel", "verify equivalence-relation formulas on finite relations");
  eq->add_option("--relation", o.relation, "relation file; random relations when absent");
  auto* ent = app.add_subcommand("entropy", "exact entropies of the n-step laws");
  auto* pre = app.add_subcommand("preset", "print a preset config as JSON");
  std::string preset_name;
  pre->add_option("name", preset_name, "preset name")->required();
  for (auto* cmd : {verify, geo, sim, eq, ent}) add_common(cmd, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : Exit::usage_error;
  }

  try {
    if (*pre) {
      std::cout << config_json(preset(preset_name));
      return Exit::ok;
    }
    const ExperimentConfig c = resolve(o);
    if (*verify) return emit(cmd_verify_distance(c), o.out);
    if (*geo) return emit(cmd_geodesics(c, x, y), o.out);
    if (*sim) return emit(cmd_simulate(c), o.out);
    if (*eq) return emit(cmd_eqrel(c), o.out);
    if (*ent) return emit(cmd_entropy(c), o.out);
  } catch (const horo::BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what()
              << "\nhint: lower --radius / --n-max / --n, or raise --budget if memory allows\n";
    return Exit::budget_exceeded;
  } catch (const horo::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return Exit::usage_error;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return Exit::usage_error;
  } catch (const horo::Error& e) {
    std::cerr << "verification failure: " << e.what() << '\n';
    return Exit::verification_failed;
  }
  return Exit::usage_error;
}
