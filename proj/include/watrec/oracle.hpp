#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "watrec/rng.hpp"

namespace watrec {

struct TabularOutcome {
  int next = 0;
  double prob = 0.0;
  double reward = 0.0;
};

// Explicit finite MDP for exact computation. actions[s][a] lists the outcome
// distribution of taking a in s; every state has at least one action.
struct TabularMdp {
  std::vector<std::vector<std::vector<TabularOutcome>>> actions;
  double r_max = 0.0;

  int num_states() const { return static_cast<int>(actions.size()); }
  int num_actions(int s) const { return static_cast<int>(actions[static_cast<size_t>(s)].size()); }
  void validate() const;

  static TabularMdp from_json_file(const std::string& path);
  static TabularMdp from_json_text(const std::string& text,
                                   const std::string& origin = "<memory>");
};

// Value iteration on V(s) = max_a gamma * sum_s' P [V(s') + R]; stops when the
// sup-norm change is <= tol, so the result is within gamma*tol/(1-gamma) of V*.
std::vector<double> value_iteration(const TabularMdp& mdp, double gamma, double tol);

// One backup: Q(s,a) = gamma * sum_s' P [V(s') + R].
std::vector<std::vector<double>> q_from_value(const TabularMdp& mdp,
                                              std::span<const double> value, double gamma);

// Fixed-point of the policy-restricted backup, same convention and stopping
// rule as value_iteration.
std::vector<double> policy_value(const TabularMdp& mdp, std::span<const int> policy,
                                 double gamma, double tol);

// Argmax over Q rows, lowest index on ties.
std::vector<int> greedy_policy(const std::vector<std::vector<double>>& q);

double bellman_residual(const TabularMdp& mdp, std::span<const double> value, double gamma);

// Random small MDP: 2..max_states states, 1..max_actions actions each, <= 3
// successors per action, rewards in [0, 1].
TabularMdp random_mdp(Rng& rng, int max_states, int max_actions);

struct OracleReport {
  int num_mdps = 0;
  double max_bellman_residual = 0.0;
  double max_contraction_ratio = 0.0;   // ||TV - TU|| / (gamma ||V - U||), should be <= 1
  int improvement_violations = 0;       // states where greedy made the policy worse
  double worst_improvement_gap = 0.0;   // min over states of V_greedy - V_base
  bool pass = false;
  std::string to_json() const;
};

// Self-contained verification sweep over `num_mdps` random MDPs; the CLI's
// oracle-check subcommand and the acceptance suite both run this.
OracleReport oracle_self_check(std::uint64_t seed, int num_mdps);

// Adapter so planner templates run on tabular problems. States/actions are ints.
class TabularModel {
 public:
  using State = int;
  using Action = int;
  struct Step {
    State next;
    double reward;
  };

  explicit TabularModel(const TabularMdp& mdp) : mdp_(&mdp) {}
  bool is_terminal(State) const { return false; }
  Step step(State s, Action a, Rng& rng) const;
  std::vector<Action> candidate_actions(State s, int cap, Rng& rng) const;

 private:
  const TabularMdp* mdp_;
};

}  // namespace watrec
