#pragma once

#include <concepts>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "watrec/error.hpp"
#include "watrec/mdp.hpp"
#include "watrec/rng.hpp"

namespace watrec {

template <class M>
concept SimulationModel = requires(const M& m, const typename M::State& s,
                                   const typename M::Action& a, Rng& rng) {
  { m.is_terminal(s) } -> std::convertible_to<bool>;
  { m.step(s, a, rng).next } -> std::convertible_to<typename M::State>;
  { m.step(s, a, rng).reward } -> std::convertible_to<double>;
};

// Stream tags consumed beneath a per-stage key.
inline constexpr std::uint64_t kEnumStreamTag = 0xA1;
inline constexpr std::uint64_t kSimSampleTag = 0xA2;

// Running mean/variance of one action's return samples (Welford).
struct QEstimate {
  int action_index = 0;
  long long count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }
  double variance() const {
    if (count < 2) return 0.0;
    double v = m2 / static_cast<double>(count - 1);
    return v > 0.0 ? v : 0.0;
  }
};

// Argmax of mean, lowest index on ties.
int best_index(const std::vector<QEstimate>& estimates);

struct OcbaConfig {
  int n0 = 5;                    // warmup samples per action
  double delta_fraction = 0.15;  // round increment as a fraction of the action count
  double epsilon_delta = 1e-9;   // floor for mean gaps
  double epsilon_var = 1e-9;     // floor for variances
};

// Splits `increment` further samples across actions following the optimal
// computing budget allocation ratios at the current estimates. Entries are
// nonnegative and sum exactly to `increment`.
std::vector<long long> ocba_allocate(const std::vector<QEstimate>& estimates, long long increment,
                                     const OcbaConfig& cfg);

// Approximate probability the current best stays best: product over rivals of
// normal tail odds at the observed gaps. Diagnostic only.
double approx_pcs(const std::vector<QEstimate>& estimates);

// One truncated rollout return: play `a0`, then `policy` for up to h-1 more
// epochs, discounting per epoch with the first reward undiscounted.
template <SimulationModel M, class Policy>
double sim_q(const M& model, const typename M::State& s0, const typename M::Action& a0,
             Policy&& policy, int h, double gamma, Rng& rng) {
  auto first = model.step(s0, a0, rng);
  double total = first.reward;
  double disc = 1.0;
  typename M::State s = std::move(first.next);
  for (int p = 1; p < h && !model.is_terminal(s); ++p) {
    disc *= gamma;
    auto a = policy(s, rng);
    auto st = model.step(s, a, rng);
    total += disc * st.reward;
    s = std::move(st.next);
  }
  return total;
}

struct RolloutResult {
  int selected = 0;  // index into candidates
  std::vector<QEstimate> estimates;
  long long simq_calls = 0;
};

// Total-equal-allocation rollout: alpha SimQ samples per candidate. Sample j
// of candidate i runs on the stream derived from (stream_key, i, j), so the
// result is independent of evaluation order.
template <SimulationModel M, class Policy>
RolloutResult uniform_rollout(const M& model, const typename M::State& s,
                              const std::vector<typename M::Action>& candidates, Policy&& policy,
                              int h, double gamma, int alpha, std::uint64_t stream_key) {
  if (candidates.empty()) throw ConfigError("uniform_rollout: no candidate actions");
  if (alpha < 1) throw ConfigError("uniform_rollout: alpha must be positive");
  if (h < 1) throw ConfigError("uniform_rollout: horizon must be positive");

  RolloutResult out;
  out.estimates.resize(candidates.size());
  for (size_t i = 0; i < candidates.size(); ++i) {
    out.estimates[i].action_index = static_cast<int>(i);
    for (int j = 0; j < alpha; ++j) {
      Rng rng(derive_stream(stream_key, {kSimSampleTag, static_cast<std::uint64_t>(i),
                                         static_cast<std::uint64_t>(j)}));
      out.estimates[i].add(sim_q(model, s, candidates[i], policy, h, gamma, rng));
    }
  }
  out.simq_calls = static_cast<long long>(candidates.size()) * alpha;
  out.selected = best_index(out.estimates);
  return out;
}

// Sequential OCBA rollout under a fixed total budget: n0 warmup samples per
// candidate, then rounds of ocba_allocate until exactly `budget` SimQ calls
// are spent. Streams are keyed by (candidate, per-candidate sample index), so
// allocation order doesn't affect any individual sample.
template <SimulationModel M, class Policy>
RolloutResult ocba_rollout(const M& model, const typename M::State& s,
                           const std::vector<typename M::Action>& candidates, Policy&& policy,
                           int h, double gamma, long long budget, const OcbaConfig& cfg,
                           std::uint64_t stream_key) {
  const int n = static_cast<int>(candidates.size());
  if (n == 0) throw ConfigError("ocba_rollout: no candidate actions");
  if (cfg.n0 < 2) throw ConfigError("ocba_rollout: n0 must be at least 2");
  if (h < 1) throw ConfigError("ocba_rollout: horizon must be positive");

  RolloutResult out;
  out.estimates.resize(candidates.size());
  auto draw_one = [&](int i) {
    auto& est = out.estimates[static_cast<size_t>(i)];
    Rng rng(derive_stream(stream_key, {kSimSampleTag, static_cast<std::uint64_t>(i),
                                       static_cast<std::uint64_t>(est.count)}));
    est.add(sim_q(model, s, candidates[static_cast<size_t>(i)], policy, h, gamma, rng));
    ++out.simq_calls;
  };

  for (int i = 0; i < n; ++i) {
    out.estimates[static_cast<size_t>(i)].action_index = i;
    for (int j = 0; j < cfg.n0; ++j) draw_one(i);
  }
  if (n == 1) {
    out.selected = 0;
    return out;
  }
  if (budget < static_cast<long long>(n) * cfg.n0)
    throw ConfigError("ocba_rollout: budget is below the n * n0 warmup cost");

  while (out.simq_calls < budget) {
    long long delta = std::llround(cfg.delta_fraction * n);
    if (delta < 1) delta = 1;
    if (delta > budget - out.simq_calls) delta = budget - out.simq_calls;
    auto extra = ocba_allocate(out.estimates, delta, cfg);
    for (int i = 0; i < n; ++i)
      for (long long r = 0; r < extra[static_cast<size_t>(i)]; ++r) draw_one(i);
  }
  out.selected = best_index(out.estimates);
  return out;
}

enum class BasePolicyKind : std::uint8_t { KindPriority, RandomUniform, ImpactGreedy };
enum class PlannerKind : std::uint8_t { Base, Tea, Ocba };

std::string_view to_string(BasePolicyKind k);
std::string_view to_string(PlannerKind k);

// Heuristic repair policy used to execute rollouts (and as the no-lookahead
// baseline). KindPriority fixes Well > BoosterPump > Tank > PipeSegment with
// shorter expected repairs first; ImpactGreedy crews the components whose solo
// completion would add the most served population per expected day.
class BasePolicy {
 public:
  BasePolicy(const RecoveryMdp& mdp, BasePolicyKind kind);
  RepairAction operator()(const RecoveryState& s, Rng& rng) const;
  BasePolicyKind kind() const { return kind_; }

 private:
  const RecoveryMdp* mdp_;
  BasePolicyKind kind_;
};

// Per-stage SimQ budget, either fixed or linear in the candidate count.
struct BudgetSpec {
  double per_action = 5.0;
  double constant = 5000.0;
  long long resolve(int num_candidates) const;
};

struct PlannerConfig {
  std::string name;
  PlannerKind kind = PlannerKind::Base;
  BasePolicyKind base_policy = BasePolicyKind::KindPriority;
  int h = 10;
  int alpha = 200;
  double gamma = 0.99;
  int action_cap = 64;
  BudgetSpec budget;
  OcbaConfig ocba;
  void validate() const;
};

struct StageReport {
  int stage = 0;
  int num_candidates = 0;
  long long budget = 0;  // nominal SimQ budget this stage, 0 for the base planner
  long long simq_calls = 0;
};

// Binds an MDP to a planner config and picks one repair action per decision
// epoch. `stage_key` namespaces every stream the stage consumes, which is what
// makes plans reproducible and thread-count independent.
class StagePlanner {
 public:
  StagePlanner(const RecoveryMdp& mdp, const PlannerConfig& cfg);
  const PlannerConfig& config() const { return cfg_; }
  RepairAction select(const RecoveryState& s, std::uint64_t stage_key,
                      StageReport* report = nullptr) const;

 private:
  const RecoveryMdp* mdp_;
  PlannerConfig cfg_;
  BasePolicy base_;
};

}  // namespace watrec
