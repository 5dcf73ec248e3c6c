// Copyright The onelap Authors.
// SPDX-License-Identifier: Apache-2.0

#include "onelap/onelap.h"

#include <exception>
#include <new>
#include <string>
#include <vector>

#include "onelap/cheeger.hpp"
#include "onelap/config.hpp"
#include "onelap/error.hpp"
#include "onelap/experiments.hpp"
#include "onelap/parallel.hpp"

struct onelap_config {
  onelap::Config cfg;
  std::vector<std::string> issues;
  std::string text;
};

struct onelap_result {
  onelap::RunResult r;
  std::string manifest;
};

namespace {

thread_local std::string g_last_error;

onelap_status fail(onelap_status s, const char* what) {
  g_last_error = what;
  return s;
}

template <class Fn>
onelap_status guarded(Fn&& fn) {
  try {
    fn();
    return ONELAP_OK;
  } catch (const onelap::Error& e) {
    return fail(static_cast<onelap_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(ONELAP_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(ONELAP_E_INTERNAL, e.what());
  } catch (...) {
    return fail(ONELAP_E_INTERNAL, "unknown error");
  }
}

}  // namespace

extern "C" {

const char* onelap_version(void) { return onelap::tool_version(); }

const char* onelap_last_error(void) { return g_last_error.c_str(); }

const char* onelap_status_name(onelap_status s) {
  switch (s) {
    case ONELAP_OK: return "ok";
    case ONELAP_E_CONTRACT: return "contract_violation";
    case ONELAP_E_ORDERING: return "ordering_violation";
    case ONELAP_E_MONOTONICITY: return "monotonicity_violation";
    case ONELAP_E_NUMERICAL: return "numerical_error";
    case ONELAP_E_CONFIG: return "config_error";
    case ONELAP_E_IO: return "io_error";
    case ONELAP_E_CERTIFICATE: return "invalid_certificate";
    case ONELAP_E_REFUSED: return "refused";
    case ONELAP_E_ARGUMENT: return "bad_argument";
    case ONELAP_E_INTERNAL: return "internal_error";
  }
  return "unknown";
}

onelap_status onelap_set_threads(int n) {
  if (n < 0) return fail(ONELAP_E_ARGUMENT, "thread count must be >= 0");
  return guarded([&] { onelap::set_thread_limit(n); });
}

size_t onelap_experiment_count(void) { return onelap::list_experiments().size(); }

const char* onelap_experiment_name(size_t i) {
  static const std::vector<std::string> names = onelap::list_experiments();
  return i < names.size() ? names[i].c_str() : nullptr;
}

onelap_status onelap_config_load(const char* path, onelap_config** out) {
  if (!path || !out) return fail(ONELAP_E_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new onelap_config{onelap::Config::load(path), {}, {}}; });
}

onelap_status onelap_config_parse(const char* text, onelap_config** out) {
  if (!text || !out) return fail(ONELAP_E_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new onelap_config{onelap::Config::parse(text), {}, {}}; });
}

onelap_status onelap_config_set(onelap_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return fail(ONELAP_E_ARGUMENT, "null argument");
  return guarded([&] { cfg->cfg.set(key, value); });
}

const char* onelap_config_text(onelap_config* cfg) {
  if (!cfg) return nullptr;
  cfg->text = cfg->cfg.to_text();
  return cfg->text.c_str();
}

void onelap_config_free(onelap_config* cfg) { delete cfg; }

onelap_status onelap_config_validate(onelap_config* cfg, size_t* n_issues) {
  if (!cfg || !n_issues) return fail(ONELAP_E_ARGUMENT, "null argument");
  return guarded([&] {
    cfg->issues = onelap::validate_config(cfg->cfg);
    *n_issues = cfg->issues.size();
  });
}

const char* onelap_config_issue(const onelap_config* cfg, size_t i) {
  if (!cfg || i >= cfg->issues.size()) return nullptr;
  return cfg->issues[i].c_str();
}

onelap_status onelap_execute(const onelap_config* cfg, onelap_result** out) {
  if (!cfg || !out) return fail(ONELAP_E_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto* r = new onelap_result{onelap::execute(cfg->cfg), {}};
    r->manifest = r->r.manifest_text();
    *out = r;
  });
}

onelap_status onelap_run(const onelap_config* cfg, const char* output_dir, onelap_result** out) {
  if (!cfg || !out) return fail(ONELAP_E_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto* r = new onelap_result{onelap::run(cfg->cfg, output_dir ? output_dir : ""), {}};
    r->manifest = r->r.manifest_text();
    *out = r;
  });
}

const char* onelap_result_experiment(const onelap_result* r) { return r ? r->r.experiment.c_str() : nullptr; }
const char* onelap_result_summary(const onelap_result* r) { return r ? r->r.summary.c_str() : nullptr; }
const char* onelap_result_manifest(const onelap_result* r) { return r ? r->manifest.c_str() : nullptr; }

const char* onelap_result_value(const onelap_result* r, const char* key) {
  if (!r || !key) return nullptr;
  const std::string* v = r->r.manifest_value(key);
  return v ? v->c_str() : nullptr;
}

size_t onelap_result_file_count(const onelap_result* r) { return r ? r->r.files.size() : 0; }

const char* onelap_result_file_name(const onelap_result* r, size_t i) {
  if (!r || i >= r->r.files.size()) return nullptr;
  return r->r.files[i].name.c_str();
}

const char* onelap_result_file_data(const onelap_result* r, size_t i, size_t* size) {
  if (!r || i >= r->r.files.size()) return nullptr;
  if (size) *size = r->r.files[i].content.size();
  return r->r.files[i].content.data();
}

void onelap_result_free(onelap_result* r) { delete r; }

onelap_status onelap_lambda1_ball(int n, double radius, double* out) {
  if (!out) return fail(ONELAP_E_ARGUMENT, "null argument");
  return guarded([&] { *out = onelap::lambda1_ball(n, radius); });
}

}  // extern "C"
