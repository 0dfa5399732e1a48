#pragma once

#include <cstdint>
#include <vector>

#include "watrec/hazard.hpp"
#include "watrec/network.hpp"
#include "watrec/rng.hpp"

namespace watrec {

inline constexpr double kNoResidual = -1.0;

struct DamagedEntry {
  int component = -1;
  DamageState state = DamageState::None;
  double pipe_breaks = 0.0;
  // Remaining crew-days once a crew has started; kNoResidual until then.
  double residual_days = kNoResidual;
};

// Post-event decision state: the still-damaged components (ascending component
// index), their repair progress, and elapsed time since the event.
struct RecoveryState {
  std::vector<DamagedEntry> damaged;
  double elapsed_days = 0.0;
  int num_damaged() const { return static_cast<int>(damaged.size()); }
};

// assign[i] marks damaged[i] as crewed this epoch; popcount = min(M, L').
struct RepairAction {
  std::vector<std::uint8_t> assign;
  int weight() const;
};

struct TransitionOutcome {
  RecoveryState next;
  double completion_time = 0.0;  // t-hat, days until the first completion(s)
  double reward = 0.0;
  std::vector<int> completed;  // component indices restored this epoch
};

bool is_terminal(const RecoveryState& s);

RecoveryState initial_state(const WaterNetwork& net, const DamageScenario& scenario);

double sample_repair_time(const RepairTimeTable& table, ComponentKind kind, DamageState state,
                          double pipe_breaks, Rng& rng);

// All minimal-cardinality assignments (weight = min(M, L')). When the exact
// count exceeds `cap`, a uniform without-replacement sample of `cap` distinct
// assignments is returned instead; either way the list is sorted
// lexicographically over assignment bits.
std::vector<RepairAction> enumerate_actions(int num_damaged, int resource_units, int cap,
                                            Rng& rng);

std::int64_t serviceable_now(const WaterNetwork& net, const RecoveryState& s,
                             const ServiceabilityOptions& opt = {});

// Advances one decision epoch: fresh repair-time draws for newly crewed
// entries, time jumps to the earliest completion among crewed entries (ties
// all complete), survivors keep reduced residuals, idle entries keep theirs.
// Reward is serviceable population after the epoch divided by cumulative
// elapsed days.
TransitionOutcome simulate_transition(const WaterNetwork& net, const RepairTimeTable& table,
                                      const ServiceabilityOptions& opt, const RecoveryState& s,
                                      const RepairAction& a, Rng& rng);

// Model facade the planner templates run against.
class RecoveryMdp {
 public:
  using State = RecoveryState;
  using Action = RepairAction;
  struct Step {
    State next;
    double reward;
  };

  RecoveryMdp(const WaterNetwork& net, const RepairTimeTable& table, ServiceabilityOptions opt,
              int resource_units);

  bool is_terminal(const State& s) const { return watrec::is_terminal(s); }
  Step step(const State& s, const Action& a, Rng& rng) const;
  TransitionOutcome step_detailed(const State& s, const Action& a, Rng& rng) const;
  std::vector<Action> candidate_actions(const State& s, int cap, Rng& rng) const;

  int resource_units() const { return resource_units_; }
  const WaterNetwork& network() const { return *net_; }
  const RepairTimeTable& repair_table() const { return table_; }
  const ServiceabilityOptions& service_options() const { return opt_; }

 private:
  const WaterNetwork* net_;
  RepairTimeTable table_;
  ServiceabilityOptions opt_;
  int resource_units_;
};

}  // namespace watrec
