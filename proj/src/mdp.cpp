#include "watrec/mdp.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "watrec/error.hpp"

namespace watrec {

int RepairAction::weight() const {
  int w = 0;
  for (auto b : assign) w += b ? 1 : 0;
  return w;
}

bool is_terminal(const RecoveryState& s) { return s.damaged.empty(); }

RecoveryState initial_state(const WaterNetwork& net, const DamageScenario& scenario) {
  if (scenario.size() != static_cast<size_t>(net.num_components()))
    throw ConfigError("damage scenario covers " + std::to_string(scenario.size()) +
                      " components, network has " + std::to_string(net.num_components()));
  RecoveryState s;
  for (int i = 0; i < net.num_components(); ++i) {
    const auto& d = scenario[static_cast<size_t>(i)];
    if (d.state == DamageState::None) continue;
    if (net.component(i).kind == ComponentKind::PipeSegment && !(d.pipe_breaks > 0.0))
      throw ConfigError("failed pipe '" + net.component(i).id + "' has no break count");
    s.damaged.push_back({i, d.state, d.pipe_breaks, kNoResidual});
  }
  return s;
}

double sample_repair_time(const RepairTimeTable& table, ComponentKind kind, DamageState state,
                          double pipe_breaks, Rng& rng) {
  return rng.exponential(table.mean_days(kind, state, pipe_breaks));
}

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

// C(n, k) with saturation; each partial product C(n-k+i, i) is an integer.
std::uint64_t comb_count(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t c = 1;
  for (int i = 1; i <= k; ++i) {
    std::uint64_t num = static_cast<std::uint64_t>(n - k + i);
    if (c > kSaturated / num) return kSaturated;
    c = c * num / static_cast<std::uint64_t>(i);
  }
  return c;
}

RepairAction to_action(const std::vector<int>& picks, int num_damaged) {
  RepairAction a;
  a.assign.assign(static_cast<size_t>(num_damaged), 0);
  for (int p : picks) a.assign[static_cast<size_t>(p)] = 1;
  return a;
}

}  // namespace

std::vector<RepairAction> enumerate_actions(int num_damaged, int resource_units, int cap,
                                            Rng& rng) {
  if (resource_units < 1) throw ConfigError("resource_units must be at least 1");
  if (cap < 1) throw ConfigError("action cap must be at least 1");
  if (num_damaged <= 0) return {};
  const int m = std::min(resource_units, num_damaged);

  std::vector<RepairAction> out;
  if (comb_count(num_damaged, m) <= static_cast<std::uint64_t>(cap)) {
    std::vector<int> picks(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) picks[static_cast<size_t>(i)] = i;
    for (;;) {
      out.push_back(to_action(picks, num_damaged));
      int i = m - 1;
      while (i >= 0 && picks[static_cast<size_t>(i)] == num_damaged - m + i) --i;
      if (i < 0) break;
      ++picks[static_cast<size_t>(i)];
      for (int j = i + 1; j < m; ++j)
        picks[static_cast<size_t>(j)] = picks[static_cast<size_t>(j - 1)] + 1;
    }
    return out;
  }

  // Too many to enumerate: draw `cap` distinct subsets uniformly. std::set
  // keeps them deduplicated and already in lexicographic order.
  std::set<std::vector<int>> chosen;
  std::vector<int> pool(static_cast<size_t>(num_damaged));
  while (chosen.size() < static_cast<size_t>(cap)) {
    for (int i = 0; i < num_damaged; ++i) pool[static_cast<size_t>(i)] = i;
    std::vector<int> picks(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
      std::uint64_t j = rng.below(static_cast<std::uint64_t>(num_damaged - i));
      picks[static_cast<size_t>(i)] = pool[static_cast<size_t>(i) + j];
      std::swap(pool[static_cast<size_t>(i) + j], pool[static_cast<size_t>(i)]);
    }
    std::sort(picks.begin(), picks.end());
    chosen.insert(std::move(picks));
  }
  out.reserve(chosen.size());
  for (const auto& picks : chosen) out.push_back(to_action(picks, num_damaged));
  return out;
}

std::int64_t serviceable_now(const WaterNetwork& net, const RecoveryState& s,
                             const ServiceabilityOptions& opt) {
  std::vector<DamageState> dense(static_cast<size_t>(net.num_components()), DamageState::None);
  for (const auto& e : s.damaged) dense[static_cast<size_t>(e.component)] = e.state;
  return net.serviceable_population(dense, opt);
}

TransitionOutcome simulate_transition(const WaterNetwork& net, const RepairTimeTable& table,
                                      const ServiceabilityOptions& opt, const RecoveryState& s,
                                      const RepairAction& a, Rng& rng) {
  if (a.assign.size() != s.damaged.size())
    throw ConfigError("action covers " + std::to_string(a.assign.size()) +
                      " entries, state has " + std::to_string(s.damaged.size()));
  if (a.weight() < 1) throw ConfigError("action assigns no crews");

  // Fresh draws for newly crewed entries, in damaged-list order.
  std::vector<double> residual(s.damaged.size());
  for (size_t i = 0; i < s.damaged.size(); ++i) {
    const auto& e = s.damaged[i];
    residual[i] = e.residual_days;
    if (a.assign[i] && residual[i] == kNoResidual) {
      const auto& c = net.component(e.component);
      residual[i] = sample_repair_time(table, c.kind, e.state, e.pipe_breaks, rng);
    }
  }

  double t_hat = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < s.damaged.size(); ++i)
    if (a.assign[i]) t_hat = std::min(t_hat, residual[i]);

  TransitionOutcome out;
  out.completion_time = t_hat;
  out.next.elapsed_days = s.elapsed_days + t_hat;
  for (size_t i = 0; i < s.damaged.size(); ++i) {
    DamagedEntry e = s.damaged[i];
    if (a.assign[i]) {
      if (residual[i] == t_hat) {
        out.completed.push_back(e.component);
        continue;
      }
      e.residual_days = residual[i] - t_hat;
    }
    out.next.damaged.push_back(e);
  }
  out.reward = static_cast<double>(serviceable_now(net, out.next, opt)) / out.next.elapsed_days;
  return out;
}

RecoveryMdp::RecoveryMdp(const WaterNetwork& net, const RepairTimeTable& table,
                         ServiceabilityOptions opt, int resource_units)
    : net_(&net), table_(table), opt_(opt), resource_units_(resource_units) {
  if (resource_units < 1) throw ConfigError("resource_units must be at least 1");
}

RecoveryMdp::Step RecoveryMdp::step(const State& s, const Action& a, Rng& rng) const {
  auto out = step_detailed(s, a, rng);
  return {std::move(out.next), out.reward};
}

TransitionOutcome RecoveryMdp::step_detailed(const State& s, const Action& a, Rng& rng) const {
  int want = std::min(resource_units_, s.num_damaged());
  if (a.weight() != want)
    throw ConfigError("action assigns " + std::to_string(a.weight()) + " crews, expected " +
                      std::to_string(want));
  return simulate_transition(*net_, table_, opt_, s, a, rng);
}

std::vector<RecoveryMdp::Action> RecoveryMdp::candidate_actions(const State& s, int cap,
                                                                Rng& rng) const {
  return enumerate_actions(s.num_damaged(), resource_units_, cap, rng);
}

}  // namespace watrec
