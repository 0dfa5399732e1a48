#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "watrec.h"

namespace {

int fail(int code) {
  std::fprintf(stderr, "error: %s\n", watrec_last_error());
  return code;
}

int write_output(const std::string& path, const char* text) {
  if (path.empty()) {
    std::fputs(text, stdout);
    if (*text && text[std::strlen(text) - 1] != '\n') std::fputc('\n', stdout);
    return 0;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    std::fprintf(stderr, "error: cannot write %s\n", path.c_str());
    return 3;
  }
  f << text;
  if (*text && text[std::strlen(text) - 1] != '\n') f << '\n';
  return 0;
}

struct CommonOpts {
  std::string config;
  std::string out;
  std::string planners;
  std::uint64_t seed = 0;
  int scenarios = 0;
  int resources = 0;
  int threads = 0;

  bool has_seed = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_config) {
  auto* cfg = cmd->add_option("--config", o.config, "experiment config JSON");
  if (needs_config) cfg->required();
  cmd->add_option("--out", o.out, "output file (default: stdout)");
  cmd->add_option("--seed", o.seed, "master seed override")
      ->each([&o](const std::string&) { o.has_seed = true; });
  cmd->add_option("--scenarios", o.scenarios, "number of damage scenarios");
  cmd->add_option("--planners", o.planners, "comma-separated planner names to run");
  cmd->add_option("--resources", o.resources, "repair crews available");
  cmd->add_option("--threads", o.threads, "worker threads for batch runs");
}

// Applies overrides in flag order; returns 0 or the error exit code.
int apply_overrides(watrec_experiment* exp, const CommonOpts& o) {
  int rc;
  if (o.has_seed && (rc = watrec_experiment_set_seed(exp, o.seed)) != WATREC_OK) return fail(rc);
  if (o.scenarios > 0 && (rc = watrec_experiment_set_scenarios(exp, o.scenarios)) != WATREC_OK)
    return fail(rc);
  if (o.resources > 0 && (rc = watrec_experiment_set_resources(exp, o.resources)) != WATREC_OK)
    return fail(rc);
  if (o.threads > 0 && (rc = watrec_experiment_set_threads(exp, o.threads)) != WATREC_OK)
    return fail(rc);
  if (!o.planners.empty() &&
      (rc = watrec_experiment_select_planners(exp, o.planners.c_str())) != WATREC_OK)
    return fail(rc);
  return 0;
}

struct ExperimentGuard {
  watrec_experiment* exp = nullptr;
  ~ExperimentGuard() { watrec_experiment_close(exp); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic simulator and planner for post-earthquake water network recovery"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(watrec_version()));

  CommonOpts scen_o, plan_o, batch_o, oracle_o;
  std::string plan_planner;
  int plan_scenario = 0;
  int oracle_mdps = 100;

  auto* scen = app.add_subcommand("scenario", "sample damage scenarios and print them");
  add_common(scen, scen_o, true);

  auto* plan = app.add_subcommand("plan", "trace one planner through one scenario");
  add_common(plan, plan_o, true);
  plan->add_option("--planner", plan_planner, "planner name (default: first configured)");
  plan->add_option("--scenario", plan_scenario, "scenario index to plan");

  auto* batch = app.add_subcommand("batch", "run the full planner comparison");
  add_common(batch, batch_o, true);
  batch->get_option("--out")->required()->description("output directory");

  auto* oracle = app.add_subcommand("oracle-check", "verify the exact MDP solver");
  oracle->add_option("--seed", oracle_o.seed, "sweep seed")->each([&oracle_o](const std::string&) {
    oracle_o.has_seed = true;
  });
  oracle->add_option("--mdps", oracle_mdps, "number of random MDPs");
  oracle->add_option("--out", oracle_o.out, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (app.got_subcommand(scen)) {
    ExperimentGuard g;
    int rc = watrec_experiment_open(scen_o.config.c_str(), &g.exp);
    if (rc != WATREC_OK) return fail(rc);
    if ((rc = apply_overrides(g.exp, scen_o)) != 0) return rc;
    char* text = nullptr;
    if ((rc = watrec_experiment_sample_scenarios(g.exp, &text)) != WATREC_OK) return fail(rc);
    rc = write_output(scen_o.out, text);
    watrec_free_text(text);
    return rc;
  }

  if (app.got_subcommand(plan)) {
    ExperimentGuard g;
    int rc = watrec_experiment_open(plan_o.config.c_str(), &g.exp);
    if (rc != WATREC_OK) return fail(rc);
    if ((rc = apply_overrides(g.exp, plan_o)) != 0) return rc;
    if (plan_planner.empty()) {
      if (!plan_o.planners.empty())
        plan_planner = plan_o.planners.substr(0, plan_o.planners.find(','));
      else {
        std::fprintf(stderr, "error: plan needs --planner or --planners\n");
        return 2;
      }
    }
    char* text = nullptr;
    if ((rc = watrec_experiment_plan_trace(g.exp, plan_planner.c_str(), plan_scenario, &text)) !=
        WATREC_OK)
      return fail(rc);
    rc = write_output(plan_o.out, text);
    watrec_free_text(text);
    return rc;
  }

  if (app.got_subcommand(batch)) {
    ExperimentGuard g;
    int rc = watrec_experiment_open(batch_o.config.c_str(), &g.exp);
    if (rc != WATREC_OK) return fail(rc);
    if ((rc = apply_overrides(g.exp, batch_o)) != 0) return rc;
    char* summary = nullptr;
    if ((rc = watrec_experiment_run_batch(g.exp, batch_o.out.c_str(), &summary)) != WATREC_OK)
      return fail(rc);
    watrec_free_text(summary);
    std::printf("wrote curves.csv, mean_curves.csv, summary.json to %s\n", batch_o.out.c_str());
    return 0;
  }

  if (app.got_subcommand(oracle)) {
    char* report = nullptr;
    std::uint64_t seed = oracle_o.has_seed ? oracle_o.seed : 1u;
    int rc = watrec_oracle_check(seed, oracle_mdps, &report);
    if (report) {
      int wrc = write_output(oracle_o.out, report);
      watrec_free_text(report);
      if (rc == WATREC_OK) return wrc;
    }
    return rc == WATREC_OK ? 0 : fail(rc);
  }

  return 2;
}
