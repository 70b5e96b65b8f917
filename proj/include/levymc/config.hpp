#pragma once

#include <string>

#include "levymc/bench.hpp"

namespace levymc {

/// Settings shared by the CLI subcommands; assembled from the built-in
/// problem, then a JSON config document, then command-line flags (later
/// sources win).
struct RunSetup {
  BenchmarkProblem problem;
  SchemeConfig scheme;
};

/// Build the default setup for a named problem.
RunSetup default_setup(const std::string& problem_key);

/// Apply a JSON config document. Recognized sections: [problem], [measure],
/// [controls], [scheme], [kappa_rule]. Unknown keys raise ConfigError with
/// the offending path.
void apply_config_file(RunSetup& setup, const std::string& path);

LevyMeasure measure_from_json_text(const std::string& text);

}  // namespace levymc
