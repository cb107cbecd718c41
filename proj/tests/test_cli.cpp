#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "horo/cli.hpp"
#include "horo/errors.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace horo;
using namespace horo::cli;
using Json = nlohmann::json;

namespace {

Json primary_json(const CommandResult& r) { return Json::parse(r.files.front().second); }

ExperimentConfig small(const std::string& name) {
  auto c = preset(name);
  c.n = 400;
  c.walks = 20;
  c.n_max = 5;
  c.entropy_walks = 20;
  c.regularity_walks = 2;
  return c;
}

}  // namespace

TEST_CASE("shipped config files match the built-in presets") {
  for (const auto& name : preset_names()) {
    const auto path = std::string(HORO_SOURCE_DIR) + "/configs/" + name + ".json";
    CHECK(load_config(path) == preset(name));
    std::ifstream in(path);
    std::stringstream text;
    text << in.rdbuf();
    CHECK(text.str() == config_json(preset(name)));
  }
  CHECK_THROWS_AS(preset("dl99"), ParseError);
}

TEST_CASE("config round trip and errors") {
  auto c = preset("gw-uniform123");
  c.kernel.kind = "move_weights";
  c.kernel.down_weight = 2.5;
  c.kernel.hold = 0.1;
  c.relation = "x.rel";
  CHECK(parse_config(config_json(c)) == c);
  CHECK(parse_config("{}") == ExperimentConfig{});

  auto message = [](const std::string& text) {
    try {
      parse_config(text, "c.json");
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("{\"walks\": -1}") == "c.json: field 'walks': expected a nonnegative integer");
  CHECK(message("{\"bogus\": 1}") == "c.json: field 'bogus': unknown key");
  CHECK(message("{\"tree\": {\"kind\": \"line\"}}") == "c.json: field 'tree.kind': expected 'homogeneous' or 'galton_watson'");
  CHECK(message("{\n\"n\": 3,\n}").find("line 3") != std::string::npos);
}

TEST_CASE("verify-distance") {
  auto c = preset("dl22");
  c.radius = 0;
  auto r = cmd_verify_distance(c);
  CHECK(r.exit_code == Exit::ok);
  CHECK(primary_json(r)["pairs_checked"] == 1);

  c = preset("dl23");
  c.radius = 3;
  r = cmd_verify_distance(c);
  CHECK(r.exit_code == Exit::ok);
  CHECK(primary_json(r)["mismatches"] == 0);

  c.budget = 10;
  CHECK_THROWS_AS(cmd_verify_distance(c), BudgetExceeded);
}

TEST_CASE("geodesics") {
  const auto c = preset("dl22");
  const auto envs = c.envs();
  auto r = cmd_geodesics(c, "(0:[]|0:[])", "(0:[]|0:[])");
  CHECK(r.exit_code == Exit::ok);
  CHECK(primary_json(r)["count"] == 1);

  r = cmd_geodesics(c, "(0:[]|0:[])", "(1:[]|0:[0])");
  auto j = primary_json(r);
  CHECK(j["distance"] == 1);
  CHECK(j["count"] == 1);
  CHECK(j["geodesics"][0].size() == 2);

  const auto a = ProductVertex::origin();
  const auto b = parse_product_vertex("(1:[1]|1:[1])");
  r = cmd_geodesics(c, to_string(a), to_string(b));
  j = primary_json(r);
  CHECK(r.exit_code == Exit::ok);
  CHECK(j["distance"] == 4);
  CHECK(j["case"] == "iii");
  const auto truth = oracle::all_shortest_paths(envs, a, b, oracle::product_bfs(envs, a, 4),
                                                oracle::product_bfs(envs, b, 4));
  CHECK(j["count"] == truth.size());

  CHECK_THROWS_AS(cmd_geodesics(c, "(0:[]|0:[", "(0:[]|0:[])"), ParseError);
}

TEST_CASE("simulate is deterministic and reports every estimator") {
  const auto c = small("dl23");
  const auto a = cmd_simulate(c);
  const auto b = cmd_simulate(c);
  REQUIRE(a.files.size() == 3);
  CHECK(a.files == b.files);
  CHECK(a.exit_code == Exit::ok);
  const auto j = primary_json(a);
  CHECK(j["drift"]["one_step_at_start"].get<double>() == doctest::Approx(0.2));
  CHECK(j["entropy"]["entropies"].size() == 6);
  CHECK(j["regularity"].size() == 2);
  CHECK(j["boundary"]["drift_sign"] == 1);
  CHECK(a.files[1].second.rfind("n,H_n,increment,speed_hat,drift_hat\n", 0) == 0);
  CHECK(a.files[2].second.rfind("walk,seed,final_height,final_distance,verdict,stabilized\n", 0) == 0);

  auto other = c;
  other.seed = 2;
  CHECK(cmd_simulate(other).files != a.files);

  auto flat = small("dl22");
  flat.n_max = 0;
  const auto f = primary_json(cmd_simulate(flat));
  CHECK(f["entropy"].is_null());
  CHECK(f["drift"]["one_step_at_start"] == 0.0);
}

TEST_CASE("entropy command") {
  auto c = preset("dl22");
  c.n_max = 9;
  auto r = cmd_entropy(c);
  REQUIRE(r.files.size() == 2);
  std::istringstream csv(r.files[0].second);
  std::string line;
  std::getline(csv, line);
  CHECK(line == "n,H_n,increment");
  std::getline(csv, line);
  CHECK(line == "0,0,");
  CHECK(Json::parse(r.files[1].second)["nonincreasing"] == true);

  c = preset("dl23");
  c.n_max = 8;
  CHECK(Json::parse(cmd_entropy(c).files[1].second)["final_increment"].get<double>() > 0.1);

  c = preset("gw-uniform123");
  c.n_max = 4;
  const auto g = Json::parse(cmd_entropy(c).files[1].second);
  CHECK(g["environments"] == 4);
  CHECK(g["spread"].size() == 5);
}

TEST_CASE("eqrel command") {
  auto c = preset("dl22");
  c.relation = std::string(HORO_SOURCE_DIR) + "/configs/sample.rel";
  auto r = cmd_eqrel(c);
  CHECK(r.exit_code == Exit::ok);
  CHECK(primary_json(r)["relation"]["passed"] == true);

  // Uniform measure with a symmetric kernel.
  const auto path = (std::filesystem::temp_directory_path() / "horo_test_cli_symmetric.rel").string();
  {
    std::ofstream f(path);
    f << "points 3\nclasses 0 0 0\nmu 1 1 1\nrow 0 0.2 0.3 0.5\nrow 1 0.3 0.4 0.3\nrow 2 0.5 0.3 0.2\n";
  }
  c.relation = path;
  r = cmd_eqrel(c);
  CHECK(primary_json(r)["relation"]["reversible"] == true);

  c.relation.clear();
  r = cmd_eqrel(c);
  const auto j = primary_json(r);
  CHECK(r.exit_code == Exit::ok);
  CHECK(j["relations_passed"] == 100);
  CHECK(j["graphs_passed"] == 50);
}
