// Copyright The onelap Authors.
// SPDX-License-Identifier: Apache-2.0

// onelap run <config> | validate <config> | list

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "onelap/onelap.h"

namespace {

int report_failure(onelap_status s) {
  std::fprintf(stderr, "onelap: %s: %s\n", onelap_status_name(s), onelap_last_error());
  return s == ONELAP_E_CONFIG ? 2 : 1;
}

// prints the issue list; returns true if the config is clean
bool check(onelap_config* cfg, const std::string& path) {
  size_t n = 0;
  if (onelap_config_validate(cfg, &n) != ONELAP_OK) {
    report_failure(ONELAP_E_CONFIG);
    return false;
  }
  for (size_t i = 0; i < n; ++i) std::fprintf(stderr, "%s: %s\n", path.c_str(), onelap_config_issue(cfg, i));
  return n == 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"onelap: 1-Laplacian experiments"};
  app.set_version_flag("--version", std::string("onelap ") + onelap_version());
  app.require_subcommand(1);

  std::string run_path, out_dir, validate_path;
  int threads = 0;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", run_path, "Config file")->required();
  run->add_option("-o,--output", out_dir, "Output directory (default: output_dir from the config)");
  run->add_option("-j,--threads", threads, "Thread cap (default: ONELAP_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);
  auto* val = app.add_subcommand("validate", "Check a config file without running solvers");
  val->add_option("config", validate_path, "Config file")->required();
  auto* list = app.add_subcommand("list", "List the available experiments");

  CLI11_PARSE(app, argc, argv);

  if (*list) {
    for (size_t i = 0; i < onelap_experiment_count(); ++i) std::printf("%s\n", onelap_experiment_name(i));
    return 0;
  }

  const std::string& path = *run ? run_path : validate_path;
  onelap_config* cfg = nullptr;
  if (onelap_status s = onelap_config_load(path.c_str(), &cfg); s != ONELAP_OK) return report_failure(s);

  if (*val) {
    const bool ok = check(cfg, path);
    onelap_config_free(cfg);
    if (ok) std::printf("%s: ok\n", path.c_str());
    return ok ? 0 : 2;
  }

  if (!check(cfg, path)) {
    onelap_config_free(cfg);
    return 2;
  }
  if (threads > 0) onelap_set_threads(threads);
  onelap_result* res = nullptr;
  const onelap_status s = onelap_run(cfg, out_dir.empty() ? nullptr : out_dir.c_str(), &res);
  onelap_config_free(cfg);
  if (s != ONELAP_OK) return report_failure(s);
  std::printf("%s: %s\n", onelap_result_experiment(res), onelap_result_summary(res));
  onelap_result_free(res);
  return 0;
}
