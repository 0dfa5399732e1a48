#include "watrec.h"

#include <cstring>
#include <new>
#include <string>

#include "watrec/error.hpp"
#include "watrec/experiment.hpp"
#include "watrec/oracle.hpp"

using watrec::ConfigError;
using watrec::Experiment;
using watrec::ExperimentConfig;

struct watrec_experiment {
  Experiment impl;
};

namespace {

thread_local std::string g_last_error;

char* dup_text(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <class Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return WATREC_OK;
  } catch (const ConfigError& e) {
    g_last_error = e.what();
    return WATREC_ERR_CONFIG;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return WATREC_ERR_RUNTIME;
  } catch (...) {
    g_last_error = "unknown error";
    return WATREC_ERR_RUNTIME;
  }
}

std::vector<std::string> split_csv(const char* names) {
  std::vector<std::string> out;
  std::string cur;
  for (const char* p = names; *p; ++p) {
    if (*p == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (*p != ' ') {
      cur += *p;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

extern "C" {

const char* watrec_version(void) { return "0.1.0"; }

const char* watrec_last_error(void) { return g_last_error.c_str(); }

void watrec_free_text(char* text) { delete[] text; }

int watrec_experiment_open(const char* config_path, watrec_experiment** out) {
  return guarded([&] {
    if (!config_path || !out) throw ConfigError("null argument");
    *out = new watrec_experiment{Experiment(ExperimentConfig::from_json_file(config_path))};
  });
}

void watrec_experiment_close(watrec_experiment* exp) { delete exp; }

int watrec_experiment_set_seed(watrec_experiment* exp, uint64_t master_seed) {
  return guarded([&] {
    if (!exp) throw ConfigError("null experiment");
    exp->impl.set_master_seed(master_seed);
  });
}

int watrec_experiment_set_scenarios(watrec_experiment* exp, int32_t num_scenarios) {
  return guarded([&] {
    if (!exp) throw ConfigError("null experiment");
    exp->impl.set_num_scenarios(num_scenarios);
  });
}

int watrec_experiment_set_resources(watrec_experiment* exp, int32_t resource_units) {
  return guarded([&] {
    if (!exp) throw ConfigError("null experiment");
    exp->impl.set_resource_units(resource_units);
  });
}

int watrec_experiment_set_threads(watrec_experiment* exp, int32_t threads) {
  return guarded([&] {
    if (!exp) throw ConfigError("null experiment");
    exp->impl.set_threads(threads);
  });
}

int watrec_experiment_select_planners(watrec_experiment* exp, const char* names) {
  return guarded([&] {
    if (!exp || !names) throw ConfigError("null argument");
    exp->impl.select_planners(split_csv(names));
  });
}

int watrec_experiment_sample_scenarios(watrec_experiment* exp, char** json_out) {
  return guarded([&] {
    if (!exp || !json_out) throw ConfigError("null argument");
    *json_out = dup_text(exp->impl.scenarios_json());
  });
}

int watrec_experiment_plan_trace(watrec_experiment* exp, const char* planner_name,
                                 int32_t scenario_index, char** text_out) {
  return guarded([&] {
    if (!exp || !planner_name || !text_out) throw ConfigError("null argument");
    *text_out = dup_text(exp->impl.plan_trace(planner_name, scenario_index));
  });
}

int watrec_experiment_run_batch(watrec_experiment* exp, const char* out_dir,
                                char** summary_json_out) {
  return guarded([&] {
    if (!exp || !out_dir) throw ConfigError("null argument");
    std::string summary = exp->impl.run_batch_to(out_dir);
    if (summary_json_out) *summary_json_out = dup_text(summary);
  });
}

int watrec_oracle_check(uint64_t seed, int32_t num_mdps, char** report_json_out) {
  return guarded([&] {
    auto report = watrec::oracle_self_check(seed, num_mdps);
    if (report_json_out) *report_json_out = dup_text(report.to_json());
    if (!report.pass) throw watrec::RuntimeError("oracle self-check failed");
  });
}

}  // extern "C"
