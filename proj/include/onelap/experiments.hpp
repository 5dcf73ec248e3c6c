// Copyright The onelap Authors.
// SPDX-License-Identifier: Apache-2.0

// Experiment orchestration behind `onelap run|validate|list`.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "onelap/concave_convex.hpp"
#include "onelap/config.hpp"
#include "onelap/grid.hpp"
#include "onelap/plap.hpp"

namespace onelap {

const char* tool_version();

/// radial_oracle, cheeger, sattinger_demo, cc_sweep, density_appendixA
std::vector<std::string> list_experiments();

/// Static checks only; never runs a solver. Each issue names its key.
std::vector<std::string> validate_config(const Config& cfg);

struct Artifact {
  std::string name;     ///< file name inside the output directory
  std::string content;  ///< exact bytes
};

struct RunResult {
  std::string experiment;
  std::vector<std::pair<std::string, std::string>> manifest;  ///< ordered key: value
  std::vector<Artifact> files;                                ///< CSVs and field files
  std::string summary;                                        ///< one line for the console

  const std::string* manifest_value(const std::string& key) const;
  std::string manifest_text() const;
};

/// Validates, runs the experiment in memory and returns every artifact.
/// Throws ConfigError with all issues if validation fails.
RunResult execute(const Config& cfg);

/// execute() followed by writing all artifacts (plus manifest.txt) into
/// `output_dir` (config key output_dir when empty). Nothing is written if
/// the run throws.
RunResult run(const Config& cfg, const std::string& output_dir = {});

// Builders shared with the tests, so manifest values can be recomputed
// from a config.
GridPtr grid_from_config(const Config& cfg);
PlapConfig solver_from_config(const Config& cfg);
CcProblem cc_problem_from_config(const Config& cfg);

}  // namespace onelap
