#include "levymc/config.hpp"

#include <fstream>

#include <json.hpp>

namespace levymc {

namespace {

using nlohmann::json;

LevyMeasure measure_from_json(const json& j, const std::string& where) {
  std::string kind = j.value("kind", "");
  try {
    if (kind == "point_mass")
      return LevyMeasure::point_mass(j.at("intensity").get<double>(),
                                     j.at("jump").get<double>());
    if (kind == "gaussian")
      return LevyMeasure::gaussian_jumps(j.at("intensity").get<double>(),
                                         j.at("mean").get<double>(),
                                         j.at("stddev").get<double>());
    if (kind == "power_tail")
      return LevyMeasure::power_tail(j.at("amplitude").get<double>(),
                                     j.at("alpha").get<double>());
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + ".kind: expected point_mass | gaussian | power_tail, got '" +
                    kind + "'");
}

KappaRule rule_from_string(const std::string& s, const std::string& where) {
  if (s == "fixed") return KappaRule::Fixed;
  if (s == "convergence") return KappaRule::Convergence;
  if (s == "rate") return KappaRule::Rate;
  throw ConfigError(where + ": expected fixed | convergence | rate, got '" + s + "'");
}

SpatialGrid rebuild_grid(double lo, double hi, double dx) {
  if (!(hi > lo)) throw ConfigError("config: [scheme].box must satisfy hi > lo");
  if (!(dx > 0.0)) throw ConfigError("config: [scheme].spacing must be > 0");
  int count = std::max(2, 1 + static_cast<int>(std::ceil((hi - lo) / dx - 1e-9)));
  return SpatialGrid::uniform_1d(lo, hi, count);
}

}  // namespace

RunSetup default_setup(const std::string& problem_key) {
  RunSetup setup;
  setup.problem = make_problem(problem_key);
  setup.scheme.T = setup.problem.T;
  setup.scheme.n = 50;
  setup.scheme.grid = setup.problem.grid;
  setup.scheme.samples_per_node = 1000;
  setup.scheme.kappa_rule = setup.problem.default_rule;
  setup.scheme.fixed_kappa = setup.problem.fixed_kappa;
  return setup;
}

void apply_config_file(RunSetup& setup, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    // e.what() carries the byte offset of the failure
    throw ConfigError(path + ": " + e.what());
  }

  // Sections apply in a fixed order with [problem] first: selecting a
  // problem key rebuilds the defaults that the other sections then override.
  static const char* known[] = {"problem", "measure", "controls", "scheme",
                                "kappa_rule"};
  for (const auto& [section, body] : doc.items()) {
    (void)body;
    bool ok = false;
    for (const char* k : known) ok = ok || section == k;
    if (!ok) throw ConfigError(path + ": unknown section [" + section + "]");
  }
  for (const char* section_name : known) {
    if (!doc.contains(section_name)) continue;
    const std::string section = section_name;
    const json& body = doc.at(section_name);
    if (section == "problem") {
      if (body.contains("key")) {
        setup = default_setup(body.at("key").get<std::string>());
      }
      if (body.contains("T")) {
        setup.problem.T = body.at("T").get<double>();
        setup.scheme.T = setup.problem.T;
        if (!(setup.problem.T > 0.0))
          throw ConfigError(path + ": [problem].T must be > 0");
      }
      if (body.contains("interior"))
        setup.problem.interior_halfwidth = body.at("interior").get<double>();
    } else if (section == "measure") {
      setup.problem.measure = measure_from_json(body, path + ": [measure]");
    } else if (section == "controls") {
      if (body.contains("alpha_grid"))
        setup.problem.problem.alpha_grid = body.at("alpha_grid").get<std::vector<double>>();
      if (body.contains("beta_grid"))
        setup.problem.problem.beta_grid = body.at("beta_grid").get<std::vector<double>>();
      if (setup.problem.problem.alpha_grid.empty() ||
          setup.problem.problem.beta_grid.empty())
        throw ConfigError(path + ": [controls] grids must be nonempty");
    } else if (section == "scheme") {
      if (body.contains("n")) {
        setup.scheme.n = body.at("n").get<int>();
        if (setup.scheme.n < 1) throw ConfigError(path + ": [scheme].n must be >= 1");
      }
      if (body.contains("samples")) {
        setup.scheme.samples_per_node = body.at("samples").get<long>();
        if (setup.scheme.samples_per_node < 1)
          throw ConfigError(path + ": [scheme].samples must be >= 1");
      }
      double lo = setup.scheme.grid.lo(0), hi = setup.scheme.grid.hi(0);
      double dx = setup.scheme.grid.spacing(0);
      bool regrid = false;
      if (body.contains("box")) {
        auto box = body.at("box").get<std::vector<double>>();
        if (box.size() != 2) throw ConfigError(path + ": [scheme].box must be [lo, hi]");
        lo = box[0];
        hi = box[1];
        regrid = true;
      }
      if (body.contains("spacing")) {
        dx = body.at("spacing").get<double>();
        regrid = true;
      }
      if (regrid) setup.scheme.grid = rebuild_grid(lo, hi, dx);
      if (body.contains("monotonized"))
        setup.scheme.monotonized = body.at("monotonized").get<bool>();
      if (body.contains("seed"))
        setup.scheme.seed = body.at("seed").get<std::uint64_t>();
      if (body.contains("antithetic"))
        setup.scheme.antithetic = body.at("antithetic").get<bool>();
    } else if (section == "kappa_rule") {
      if (body.contains("rule"))
        setup.scheme.kappa_rule = rule_from_string(body.at("rule").get<std::string>(),
                                                   path + ": [kappa_rule].rule");
      if (body.contains("kappa")) {
        setup.scheme.fixed_kappa = body.at("kappa").get<double>();
        if (setup.scheme.fixed_kappa < 0.0)
          throw ConfigError(path + ": [kappa_rule].kappa must be >= 0");
      }
    }
  }
}

LevyMeasure measure_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("--measure: ") + e.what());
  }
  return measure_from_json(j, "--measure");
}

}  // namespace levymc
