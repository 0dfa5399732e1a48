#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "watrec/hazard.hpp"
#include "watrec/mdp.hpp"
#include "watrec/network.hpp"
#include "watrec/planner.hpp"

namespace watrec {

// Stream tags consumed directly beneath the master seed.
inline constexpr std::uint64_t kScenarioStreamTag = 0xB1;
inline constexpr std::uint64_t kExecStreamTag = 0xB2;
inline constexpr std::uint64_t kStageStreamTag = 0xB3;

struct ExperimentConfig {
  std::string network_path;
  std::string hazard_path;
  std::vector<PlannerConfig> planners;
  int num_scenarios = 100;
  int resource_units = 3;
  double horizon_days = 0.0;  // 0: extend to the slowest planner's saturation
  double grid_step_days = 0.25;
  std::uint64_t master_seed = 1;
  ServiceabilityOptions service;
  int threads = 1;

  // Relative network/hazard paths resolve against the config file's directory.
  static ExperimentConfig from_json_file(const std::string& path);
  static ExperimentConfig from_json_text(const std::string& text, const std::string& base_dir,
                                         const std::string& origin = "<memory>");
  void validate() const;
};

struct CurvePoint {
  double day = 0.0;
  std::int64_t served = 0;
};

struct ScenarioRun {
  int scenario_id = 0;
  int num_damaged = 0;               // components damaged at day 0
  std::vector<CurvePoint> curve;     // starts at (0, s0), one point per epoch
  std::vector<StageReport> stages;
  long long simq_calls = 0;
};

struct PlannerResult {
  std::string name;
  std::vector<ScenarioRun> runs;
  std::vector<double> mean_curve;  // over scenarios, on the shared day grid
  std::vector<double> auc;         // per scenario, over [0, horizon]
  double auc_mean = 0.0;
  double auc_stderr = 0.0;
  long long simq_calls = 0;
};

struct BatchResult {
  std::vector<double> grid_days;
  double horizon_days = 0.0;
  std::vector<PlannerResult> planners;
};

// Served population at `day` under step interpolation (curves jump at repair
// completions and hold in between).
double curve_value_at(const std::vector<CurvePoint>& curve, double day);

// Integral of the step curve over [0, horizon]; population-days.
double curve_auc(const std::vector<CurvePoint>& curve, double horizon_days);

// Plays one damage scenario to full recovery under one planner. Scenario,
// stage, and execution streams all derive from (master_seed, scenario_id), so
// any (planner, scenario) cell can be recomputed in isolation.
ScenarioRun run_recovery(const RecoveryMdp& mdp, const StagePlanner& planner,
                         const DamageScenario& scenario, int scenario_id,
                         std::uint64_t master_seed);

// Loaded, validated experiment: network + hazard + planner roster. Thin
// stateful wrapper the C API exposes.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig cfg);

  const ExperimentConfig& config() const { return cfg_; }
  const WaterNetwork& network() const { return network_; }
  const HazardModel& hazard() const { return hazard_; }

  void set_master_seed(std::uint64_t seed) { cfg_.master_seed = seed; }
  void set_num_scenarios(int n);
  void set_resource_units(int m);
  void set_threads(int t);
  // Restricts and reorders the planner roster; unknown names are errors.
  void select_planners(const std::vector<std::string>& names);

  std::vector<DamageScenario> sample_scenarios() const;
  std::string scenarios_json() const;
  std::string plan_trace(const std::string& planner_name, int scenario_index) const;

  BatchResult run_batch() const;
  // Runs the batch and writes curves.csv, mean_curves.csv, summary.json under
  // out_dir (created if needed). Returns the summary JSON text.
  std::string run_batch_to(const std::string& out_dir) const;

 private:
  ExperimentConfig cfg_;
  WaterNetwork network_;
  HazardModel hazard_;
};

}  // namespace watrec
