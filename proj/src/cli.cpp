#include "horo/cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include "horo/eqrel.hpp"
#include "horo/errors.hpp"
#include "horo/estimate.hpp"
#include "horo/product_graph.hpp"
#include "json.hpp"

namespace horo::cli {

using Json = nlohmann::ordered_json;

PointedTreeEnv TreeConfig::build(std::uint64_t seed_offset) const {
  if (kind == "homogeneous") return PointedTreeEnv::homogeneous(children);
  if (kind == "galton_watson") return PointedTreeEnv::galton_watson(offspring, seed + seed_offset);
  throw ParseError("unknown tree kind '" + kind + "'");
}

Kernel KernelConfig::build() const {
  if (kind == "simple") return Kernel::simple(hold);
  if (kind == "height_biased") return Kernel::height_biased(up, hold);
  if (kind == "move_weights") return Kernel::move_weights(down_weight, up_weight, hold);
  throw ParseError("unknown kernel kind '" + kind + "'");
}

ProductEnv ExperimentConfig::envs(std::uint64_t seed_offset) const {
  return {tree.build(seed_offset), tree_prime.build(seed_offset)};
}

std::vector<std::string> preset_names() { return {"dl22", "dl23", "gw-uniform123"}; }

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  if (name == "dl22") {
    c.tree.children = 2;
    c.tree_prime.children = 2;
  } else if (name == "dl23") {
    c.tree.children = 2;
    c.tree_prime.children = 3;
  } else if (name == "gw-uniform123") {
    for (auto* t : {&c.tree, &c.tree_prime}) {
      t->kind = "galton_watson";
      t->offspring = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    }
    c.tree.seed = 42;
    c.tree_prime.seed = 43;
    c.n_max = 8;
    c.environments = 4;
  } else {
    throw ParseError("unknown preset '" + name + "'");
  }
  return c;
}

namespace {

Json tree_json(const TreeConfig& t) {
  Json j;
  j["kind"] = t.kind;
  if (t.kind == "homogeneous") {
    j["children"] = t.children;
  } else {
    j["offspring"] = t.offspring;
    j["seed"] = t.seed;
  }
  return j;
}

Json kernel_json(const KernelConfig& k) {
  Json j;
  j["kind"] = k.kind;
  if (k.kind == "height_biased") j["up"] = k.up;
  if (k.kind == "move_weights") {
    j["down_weight"] = k.down_weight;
    j["up_weight"] = k.up_weight;
  }
  j["hold"] = k.hold;
  return j;
}

class ConfigReader {
 public:
  explicit ConfigReader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& field, const std::string& msg) const {
    throw ParseError(source_ + ": field '" + field + "': " + msg);
  }

  template <class T>
  void number(const Json& v, const std::string& field, T& out) const {
    if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) fail(field, "expected a number");
      out = v.get<T>();
    } else if constexpr (std::is_signed_v<T>) {
      if (!v.is_number_integer()) fail(field, "expected an integer");
      out = v.get<T>();
    } else {
      if (!v.is_number_unsigned()) fail(field, "expected a nonnegative integer");
      out = v.get<T>();
    }
  }

  void string(const Json& v, const std::string& field, std::string& out) const {
    if (!v.is_string()) fail(field, "expected a string");
    out = v.get<std::string>();
  }

  void object(const Json& j, const std::string& where,
              const std::map<std::string, std::function<void(const Json&)>>& fields) const {
    if (!j.is_object()) fail(where, "expected an object");
    for (const auto& [key, value] : j.items()) {
      auto it = fields.find(key);
      if (it == fields.end()) fail(where.empty() ? key : where + "." + key, "unknown key");
      it->second(value);
    }
  }

  void tree(const Json& j, const std::string& where, TreeConfig& t) const {
    object(j, where, {
        {"kind", [&](const Json& v) { string(v, where + ".kind", t.kind); }},
        {"children", [&](const Json& v) { number(v, where + ".children", t.children); }},
        {"seed", [&](const Json& v) { number(v, where + ".seed", t.seed); }},
        {"offspring",
         [&](const Json& v) {
           if (!v.is_array()) fail(where + ".offspring", "expected an array");
           t.offspring.clear();
           for (const auto& x : v) {
             double d = 0;
             number(x, where + ".offspring", d);
             t.offspring.push_back(d);
           }
         }},
    });
    if (t.kind != "homogeneous" && t.kind != "galton_watson")
      fail(where + ".kind", "expected 'homogeneous' or 'galton_watson'");
  }

  void kernel(const Json& j, KernelConfig& k) const {
    object(j, "kernel", {
        {"kind", [&](const Json& v) { string(v, "kernel.kind", k.kind); }},
        {"up", [&](const Json& v) { number(v, "kernel.up", k.up); }},
        {"down_weight", [&](const Json& v) { number(v, "kernel.down_weight", k.down_weight); }},
        {"up_weight", [&](const Json& v) { number(v, "kernel.up_weight", k.up_weight); }},
        {"hold", [&](const Json& v) { number(v, "kernel.hold", k.hold); }},
    });
    if (k.kind != "simple" && k.kind != "height_biased" && k.kind != "move_weights")
      fail("kernel.kind", "expected 'simple', 'height_biased' or 'move_weights'");
  }

 private:
  std::string source_;
};

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

// Two-column aligned summary.
class Summary {
 public:
  Summary& row(const std::string& k, const std::string& v) {
    out_ << std::left << std::setw(28) << k << v << '\n';
    return *this;
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

Json header(const ExperimentConfig& c, const char* command) {
  Json j;
  j["command"] = command;
  j["version"] = kVersion;
  j["config"] = Json::parse(config_json(c));
  return j;
}

Json estimate_json(const MeanEstimate& m) { return Json{{"mean", m.mean}, {"ci", m.ci}}; }

Json regularity_json(const RegularityReport& r) {
  Json j;
  j["lambda"] = r.lambda;
  j["length"] = r.length;
  j["tracking"] = r.tracking ? Json(*r.tracking) : Json(nullptr);
  j["jump"] = r.jump;
  j["height_slope"] = r.height_slope;
  j["height_residual"] = r.height_residual;
  j["drift_gap"] = r.drift_gap;
  j["tree"] = r.tree;
  j["threshold"] = r.threshold;
  j["regular"] = r.regular;
  return j;
}

}  // namespace

std::string config_json(const ExperimentConfig& c) {
  Json j;
  j["name"] = c.name;
  j["tree"] = tree_json(c.tree);
  j["tree_prime"] = tree_json(c.tree_prime);
  j["kernel"] = kernel_json(c.kernel);
  j["seed"] = c.seed;
  j["radius"] = c.radius;
  j["n"] = c.n;
  j["walks"] = c.walks;
  j["depth"] = c.depth;
  j["min_rate"] = c.min_rate;
  j["checkpoints"] = c.checkpoints;
  j["n_max"] = c.n_max;
  j["entropy_walks"] = c.entropy_walks;
  j["entropy_tolerance"] = c.entropy_tolerance;
  j["environments"] = c.environments;
  j["regularity_walks"] = c.regularity_walks;
  j["budget"] = c.budget;
  j["max_geodesics"] = c.max_geodesics;
  j["relation"] = c.relation;
  j["relations"] = c.relations;
  j["graphs"] = c.graphs;
  j["eqrel_n_max"] = c.eqrel_n_max;
  j["max_terms"] = c.max_terms;
  j["max_points"] = c.max_points;
  return j.dump(2) + "\n";
}

ExperimentConfig parse_config(const std::string& json_text, const std::string& source) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw ParseError(source + ": " + e.what());
  }
  ConfigReader r(source);
  ExperimentConfig c;
  auto num = [&](const char* key, auto& field) {
    return std::pair<const std::string, std::function<void(const Json&)>>{
        key, [&r, key, &field](const Json& v) { r.number(v, key, field); }};
  };
  r.object(j, "", {
      {"name", [&](const Json& v) { r.string(v, "name", c.name); }},
      {"tree", [&](const Json& v) { r.tree(v, "tree", c.tree); }},
      {"tree_prime", [&](const Json& v) { r.tree(v, "tree_prime", c.tree_prime); }},
      {"kernel", [&](const Json& v) { r.kernel(v, c.kernel); }},
      {"relation", [&](const Json& v) { r.string(v, "relation", c.relation); }},
      num("seed", c.seed),
      num("radius", c.radius),
      num("n", c.n),
      num("walks", c.walks),
      num("depth", c.depth),
      num("min_rate", c.min_rate),
      num("checkpoints", c.checkpoints),
      num("n_max", c.n_max),
      num("entropy_walks", c.entropy_walks),
      num("entropy_tolerance", c.entropy_tolerance),
      num("environments", c.environments),
      num("regularity_walks", c.regularity_walks),
      num("budget", c.budget),
      num("max_geodesics", c.max_geodesics),
      num("relations", c.relations),
      num("graphs", c.graphs),
      num("eqrel_n_max", c.eqrel_n_max),
      num("max_terms", c.max_terms),
      num("max_points", c.max_points),
  });
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

CommandResult cmd_verify_distance(const ExperimentConfig& c) {
  const auto envs = c.envs();
  const auto r = verify_distance_formula(envs, c.radius, c.budget);
  Json j = header(c, "verify-distance");
  j["radius"] = r.radius;
  j["ball_size"] = r.ball_size;
  j["pairs_checked"] = r.pairs_checked;
  j["mismatches"] = r.mismatches;
  j["method"] = r.method;
  Json ex = Json::array();
  for (const auto& m : r.examples) ex.push_back(Json{{"a", m.a}, {"b", m.b}, {"formula", m.formula}, {"bfs", m.bfs}});
  j["examples"] = ex;
  j["passed"] = r.passed();

  CommandResult out;
  out.exit_code = r.passed() ? Exit::ok : Exit::verification_failed;
  out.summary = Summary()
                    .row("radius", std::to_string(r.radius))
                    .row("ball size", std::to_string(r.ball_size))
                    .row("pairs checked", std::to_string(r.pairs_checked))
                    .row("mismatches", std::to_string(r.mismatches))
                    .row("method", r.method)
                    .str();
  out.files.emplace_back("verify_distance.json", dump(j));
  return out;
}

CommandResult cmd_geodesics(const ExperimentConfig& c, const std::string& xs, const std::string& ys) {
  const auto envs = c.envs();
  const auto a = parse_product_vertex(xs);
  const auto b = parse_product_vertex(ys);
  envs.tree.validate(a.x());
  envs.tree_prime.validate(a.x_prime());
  envs.tree.validate(b.x());
  envs.tree_prime.validate(b.x_prime());

  const auto d = product_distance(a, b);
  const auto e = enumerate_geodesics(envs, a, b, c.max_geodesics);
  const auto predicted = count_geodesics(envs, a, b);
  bool lengths_ok = true;
  Json paths = Json::array();
  for (const auto& p : e.paths) {
    if (static_cast<std::int64_t>(p.size()) != d + 1 || !is_path(envs, p) || p.front() != a || p.back() != b)
      lengths_ok = false;
    Json path = Json::array();
    for (const auto& v : p) path.push_back(to_string(v));
    paths.push_back(path);
  }
  const bool count_ok = e.truncated || predicted == e.paths.size();

  Json j = header(c, "geodesics");
  j["x"] = to_string(a);
  j["y"] = to_string(b);
  j["distance"] = d;
  j["case"] = case_label(e.gcase);
  j["count"] = e.paths.size();
  j["predicted_count"] = predicted;
  j["truncated"] = e.truncated;
  j["lengths_ok"] = lengths_ok;
  j["geodesics"] = paths;

  CommandResult out;
  out.exit_code = lengths_ok && count_ok ? Exit::ok : Exit::verification_failed;
  out.summary = Summary()
                    .row("distance", std::to_string(d))
                    .row("case", std::string("(") + case_label(e.gcase) + ")")
                    .row("geodesics", std::to_string(e.paths.size()) + (e.truncated ? " (truncated)" : ""))
                    .row("predicted", std::to_string(predicted))
                    .row("lengths ok", lengths_ok ? "yes" : "no")
                    .str();
  out.files.emplace_back("geodesics.json", dump(j));
  return out;
}

CommandResult cmd_simulate(const ExperimentConfig& c) {
  const auto envs = c.envs();
  const auto kernel = c.kernel.build();
  const auto start = ProductVertex::origin();

  SimulationOptions opt;
  opt.n = c.n;
  opt.walks = c.walks;
  opt.seed = c.seed;
  opt.prefix_depth = c.depth;
  opt.min_rate = c.min_rate;
  opt.checkpoints = c.checkpoints;
  const auto sim = simulate(envs, kernel, start, opt);

  EstimateReport r;
  r.n = c.n;
  r.walks = c.walks;
  r.seed = c.seed;
  r.drift = drift_estimate(sim, envs, kernel, start);
  r.speed = speed_estimate(sim);
  r.boundary = boundary_convergence_stats(sim, envs, kernel, start);
  r.series = sim.series;
  if (c.n_max > 0)
    r.entropy = asymptotic_entropy_estimate(envs, kernel, start, c.n_max, c.entropy_walks, c.seed, c.budget,
                                            c.entropy_tolerance);

  // Regularity of the first walks against the ray toward their own limit.
  const double lambda = std::min(1.0, std::abs(r.drift.one_step_at_start));
  Json regularity = Json::array();
  for (std::size_t w = 0; w < std::min(c.regularity_walks, c.walks); ++w) {
    const auto wr = walk_regularity(envs, kernel, start, c.n, walk_seed(c.seed, w), lambda, c.depth);
    Json e = regularity_json(wr.report);
    e["walk"] = w;
    e["verdict"] = limit_label(wr.verdict.kind);
    regularity.push_back(e);
  }

  const bool boundary_ok = r.boundary.drift_sign != 0
                               ? r.boundary.match_fraction >= 0.5
                               : r.boundary.fraction(LimitKind::upper) + r.boundary.fraction(LimitKind::lower) < 0.5;
  const double speed_gap = std::abs(r.speed.mean - std::abs(r.drift.trajectory));

  Json j = header(c, "simulate");
  j["n"] = r.n;
  j["walks"] = r.walks;
  j["seed"] = r.seed;
  j["drift"] = Json{{"trajectory", r.drift.trajectory},
                    {"ci", r.drift.ci},
                    {"one_step", r.drift.one_step},
                    {"one_step_at_start", r.drift.one_step_at_start}};
  j["speed"] = estimate_json(r.speed);
  j["speed_drift_gap"] = speed_gap;
  j["speed_drift_within_ci"] = speed_gap <= r.speed.ci + r.drift.ci;
  if (r.entropy) {
    const auto& e = *r.entropy;
    Json h;
    h["n_max"] = c.n_max;
    h["entropies"] = e.entropies;
    h["increments"] = increments(e.entropies);
    h["nonincreasing"] = increments_nonincreasing(e.entropies);
    h["last_increment"] = e.last_increment;
    h["h_over_n"] = e.h_over_n;
    h["sampled"] = estimate_json(e.sampled);
    h["sampled_walks"] = c.entropy_walks;
    h["gap"] = e.gap;
    h["agree"] = e.agree;
    h["tolerance"] = e.tolerance;
    j["entropy"] = h;
  } else {
    j["entropy"] = nullptr;
  }
  Json b;
  b["prefix_depth"] = r.boundary.prefix_depth;
  b["min_rate"] = c.min_rate;
  b["upper"] = r.boundary.upper;
  b["lower"] = r.boundary.lower;
  b["none"] = r.boundary.none;
  b["drift_sign"] = r.boundary.drift_sign;
  b["match_fraction"] = r.boundary.match_fraction;
  b["matches_drift"] = boundary_ok;
  Json hist = Json::object();
  for (const auto& [k, v] : r.boundary.histogram) hist[k] = v;
  b["histogram"] = hist;
  j["boundary"] = b;
  j["regularity"] = regularity;
  Json series = Json::array();
  for (const auto& cp : r.series)
    series.push_back(Json{{"n", cp.n}, {"mean_height", cp.mean_height}, {"mean_distance", cp.mean_distance}});
  j["series"] = series;

  std::ostringstream walks_csv;
  walks_csv << "walk,seed,final_height,final_distance,verdict,stabilized\n";
  for (std::size_t w = 0; w < sim.walks.size(); ++w) {
    const auto& rec = sim.walks[w];
    walks_csv << w << ',' << rec.seed << ',' << rec.final_height << ',' << rec.final_distance << ','
              << limit_label(rec.verdict.kind) << ',' << rec.verdict.stabilized << '\n';
  }
  std::ostringstream series_csv;
  write_series_csv(series_csv, r);
  std::ostringstream text;
  write_text(text, r);

  CommandResult out;
  out.exit_code = boundary_ok ? Exit::ok : Exit::verification_failed;
  out.summary = text.str();
  out.files.emplace_back("simulate_report.json", dump(j));
  out.files.emplace_back("simulate_series.csv", series_csv.str());
  out.files.emplace_back("simulate_walks.csv", walks_csv.str());
  return out;
}

CommandResult cmd_eqrel(const ExperimentConfig& c) {
  auto to_json = [](const RelationVerification& v) {
    auto st = [](const StationarityReport& s) {
      return Json{{"global", s.global},
                  {"global_residual", s.global_residual},
                  {"leafwise", s.leafwise},
                  {"leafwise_residual", s.leafwise_residual},
                  {"agree", s.agree}};
    };
    Json j;
    j["points"] = v.points;
    j["classes"] = v.classes;
    j["cocycle_multiplicativity"] = v.cocycle_multiplicativity;
    j["density_formula"] = v.density_formula;
    j["tested_measure"] = st(v.tested);
    j["stationary_measure"] = st(v.stationary);
    j["degree_measure"] = v.degree ? st(*v.degree) : Json(nullptr);
    j["reversible"] = v.reversibility.reversible;
    j["reversibility_violation"] = v.reversibility.max_violation;
    j["detailed_balance"] = v.reversibility.detailed_balance;
    j["cocycle_expectation"] = v.cocycle_expectation;
    Json ids = Json::array();
    for (const auto& id : v.identities)
      ids.push_back(Json{{"k", id.k}, {"n", id.n}, {"lhs", id.lhs}, {"rhs", id.rhs}, {"diff", id.diff}});
    j["identities"] = ids;
    j["monotone"] = v.monotone;
    j["phi"] = v.phi;
    j["passed"] = v.passed;
    return j;
  };

  Json j = header(c, "eqrel");
  Summary s;
  bool all = true;
  if (!c.relation.empty()) {
    const auto file = load_relation(c.relation);
    const auto v = verify_relation(file.relation, file.lambda, c.seed, c.eqrel_n_max, c.max_terms);
    j["source"] = c.relation;
    j["relation"] = to_json(v);
    all = v.passed;
    s.row("relation", c.relation)
        .row("points / classes", std::to_string(v.points) + " / " + std::to_string(v.classes))
        .row("reversible", v.reversibility.reversible ? "yes" : "no")
        .row("identities checked", std::to_string(v.identities.size()));
  } else {
    Json rels = Json::array(), graphs = Json::array();
    std::size_t ok_rel = 0, ok_graph = 0;
    for (std::size_t i = 0; i < c.relations; ++i) {
      const auto seed = hash_combine(c.seed, i);
      const auto v = verify_relation(random_relation(seed, c.max_points), std::nullopt, seed, c.eqrel_n_max,
                                     c.max_terms);
      ok_rel += v.passed;
      Json e = to_json(v);
      e["seed"] = seed;
      rels.push_back(e);
    }
    for (std::size_t i = 0; i < c.graphs; ++i) {
      const auto seed = hash_combine(c.seed ^ 0x67726170ULL, i);
      const auto v = verify_relation(random_graphed_relation(seed, std::max<std::size_t>(2, c.max_points)),
                                     std::nullopt, seed, c.eqrel_n_max, c.max_terms);
      ok_graph += v.passed;
      Json e = to_json(v);
      e["seed"] = seed;
      graphs.push_back(e);
    }
    j["source"] = "random";
    j["relations_passed"] = ok_rel;
    j["graphs_passed"] = ok_graph;
    j["relations"] = rels;
    j["graphs"] = graphs;
    all = ok_rel == c.relations && ok_graph == c.graphs;
    s.row("random relations passed", std::to_string(ok_rel) + "/" + std::to_string(c.relations))
        .row("random graphs passed", std::to_string(ok_graph) + "/" + std::to_string(c.graphs));
  }
  j["passed"] = all;
  s.row("all checks", all ? "pass" : "FAIL");

  CommandResult out;
  out.exit_code = all ? Exit::ok : Exit::verification_failed;
  out.summary = s.str();
  out.files.emplace_back("eqrel.json", dump(j));
  return out;
}

CommandResult cmd_entropy(const ExperimentConfig& c) {
  const auto kernel = c.kernel.build();
  const bool random_env = c.tree.kind != "homogeneous" || c.tree_prime.kind != "homogeneous";
  std::vector<double> h, spread;
  std::size_t environments = 1;
  if (random_env && c.environments > 1) {
    std::vector<ProductEnv> envs;
    for (std::size_t i = 0; i < c.environments; ++i) envs.push_back(c.envs(i));
    auto avg = entropy_sequence_over_environments(envs, kernel, c.n_max, c.budget);
    h = std::move(avg.mean);
    spread = std::move(avg.spread);
    environments = avg.environments;
  } else {
    h = entropy_sequence(c.envs(), kernel, ProductVertex::origin(), c.n_max, c.budget);
  }
  const auto inc = increments(h);
  const bool mono = increments_nonincreasing(h);

  std::ostringstream csv;
  csv << "n,H_n,increment\n";
  for (std::size_t n = 0; n < h.size(); ++n) {
    csv << n << ',' << fmt(h[n]) << ',';
    if (n > 0) csv << fmt(inc[n - 1]);
    csv << '\n';
  }
  Json j = header(c, "entropy");
  j["n_max"] = c.n_max;
  j["environments"] = environments;
  j["entropies"] = h;
  j["increments"] = inc;
  if (!spread.empty()) j["spread"] = spread;
  j["nonincreasing"] = mono;
  j["final_increment"] = inc.empty() ? 0.0 : inc.back();

  CommandResult out;
  out.summary = Summary()
                    .row("n_max", std::to_string(c.n_max))
                    .row("environments", std::to_string(environments))
                    .row("H_n_max", fmt(h.back()))
                    .row("final increment", inc.empty() ? "-" : fmt(inc.back()))
                    .row("increments nonincreasing", mono ? "yes" : "no")
                    .str();
  out.files.emplace_back("entropy.csv", csv.str());
  out.files.emplace_back("entropy.json", dump(j));
  return out;
}

}  // namespace horo::cli
