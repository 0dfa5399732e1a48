#include "watrec/planner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "watrec/stats.hpp"

namespace watrec {

int best_index(const std::vector<QEstimate>& estimates) {
  if (estimates.empty()) throw ConfigError("best_index: no estimates");
  int b = 0;
  for (size_t i = 1; i < estimates.size(); ++i)
    if (estimates[i].mean > estimates[static_cast<size_t>(b)].mean) b = static_cast<int>(i);
  return b;
}

std::vector<long long> ocba_allocate(const std::vector<QEstimate>& estimates, long long increment,
                                     const OcbaConfig& cfg) {
  const int n = static_cast<int>(estimates.size());
  if (n < 2) throw ConfigError("ocba_allocate: need at least two actions");
  if (increment < 0) throw ConfigError("ocba_allocate: negative increment");
  std::vector<long long> give(static_cast<size_t>(n), 0);
  if (increment == 0) return give;

  const int b = best_index(estimates);

  // Target sampling ratios: rivals get var / gap^2 relative weight, the best
  // gets sqrt(var_b * sum_i tau_i^2 / var_i). Floors keep degenerate stages
  // (zero variance, tied means) well defined.
  std::vector<double> tau(static_cast<size_t>(n), 0.0);
  double sum_sq_over_var = 0.0;
  for (int i = 0; i < n; ++i) {
    if (i == b) continue;
    double var = std::max(estimates[static_cast<size_t>(i)].variance(), cfg.epsilon_var);
    double gap = estimates[static_cast<size_t>(b)].mean - estimates[static_cast<size_t>(i)].mean;
    if (gap < cfg.epsilon_delta) gap = cfg.epsilon_delta;
    tau[static_cast<size_t>(i)] = var / (gap * gap);
    sum_sq_over_var += tau[static_cast<size_t>(i)] * tau[static_cast<size_t>(i)] / var;
  }
  double var_b = std::max(estimates[static_cast<size_t>(b)].variance(), cfg.epsilon_var);
  tau[static_cast<size_t>(b)] = std::sqrt(var_b * sum_sq_over_var);

  double tau_total = std::accumulate(tau.begin(), tau.end(), 0.0);
  if (!(tau_total > 0.0) || !std::isfinite(tau_total)) {
    give[static_cast<size_t>(b)] = increment;
    return give;
  }

  long long have = 0;
  for (const auto& e : estimates) have += e.count;

  // Deficit toward the ideal post-round profile, rescaled to the increment.
  std::vector<double> want(static_cast<size_t>(n), 0.0);
  double want_total = 0.0;
  double scale = static_cast<double>(have + increment) / tau_total;
  for (int i = 0; i < n; ++i) {
    double ideal = tau[static_cast<size_t>(i)] * scale;
    want[static_cast<size_t>(i)] =
        std::max(0.0, ideal - static_cast<double>(estimates[static_cast<size_t>(i)].count));
    want_total += want[static_cast<size_t>(i)];
  }
  if (!(want_total > 0.0)) {
    give[static_cast<size_t>(b)] = increment;
    return give;
  }

  double f = static_cast<double>(increment) / want_total;
  std::vector<std::pair<double, int>> frac;
  frac.reserve(static_cast<size_t>(n));
  long long assigned = 0;
  for (int i = 0; i < n; ++i) {
    double x = want[static_cast<size_t>(i)] * f;
    long long whole = static_cast<long long>(std::floor(x));
    give[static_cast<size_t>(i)] = whole;
    assigned += whole;
    frac.push_back({x - static_cast<double>(whole), i});
  }
  std::sort(frac.begin(), frac.end(), [](const auto& a, const auto& b2) {
    if (a.first != b2.first) return a.first > b2.first;
    return a.second < b2.second;
  });
  long long rem = increment - assigned;
  for (size_t r = 0; r < frac.size() && rem > 0; ++r, --rem)
    ++give[static_cast<size_t>(frac[r].second)];
  give[static_cast<size_t>(b)] += rem;  // fp slack, normally zero
  return give;
}

double approx_pcs(const std::vector<QEstimate>& estimates) {
  const int b = best_index(estimates);
  const auto& best = estimates[static_cast<size_t>(b)];
  if (best.count < 1) throw ConfigError("approx_pcs: unsampled best action");
  double pcs = 1.0;
  for (size_t i = 0; i < estimates.size(); ++i) {
    if (static_cast<int>(i) == b) continue;
    const auto& e = estimates[i];
    if (e.count < 1) throw ConfigError("approx_pcs: unsampled action");
    double gap = best.mean - e.mean;
    double se2 = best.variance() / static_cast<double>(best.count) +
                 e.variance() / static_cast<double>(e.count);
    if (se2 <= 0.0)
      pcs *= gap > 0.0 ? 1.0 : 0.5;
    else
      pcs *= norm_cdf(gap / std::sqrt(se2));
  }
  return pcs;
}

std::string_view to_string(BasePolicyKind k) {
  switch (k) {
    case BasePolicyKind::KindPriority: return "kind_priority";
    case BasePolicyKind::RandomUniform: return "random_uniform";
    case BasePolicyKind::ImpactGreedy: return "impact_greedy";
  }
  return "?";
}

std::string_view to_string(PlannerKind k) {
  switch (k) {
    case PlannerKind::Base: return "base";
    case PlannerKind::Tea: return "tea";
    case PlannerKind::Ocba: return "ocba";
  }
  return "?";
}

BasePolicy::BasePolicy(const RecoveryMdp& mdp, BasePolicyKind kind) : mdp_(&mdp), kind_(kind) {}

namespace {

int kind_rank(ComponentKind k) {
  switch (k) {
    case ComponentKind::Well: return 0;
    case ComponentKind::BoosterPump: return 1;
    case ComponentKind::Tank: return 2;
    case ComponentKind::PipeSegment: return 3;
  }
  return 4;
}

RepairAction pick_to_action(const std::vector<int>& picks, size_t num_damaged) {
  RepairAction a;
  a.assign.assign(num_damaged, 0);
  for (int p : picks) a.assign[static_cast<size_t>(p)] = 1;
  return a;
}

}  // namespace

RepairAction BasePolicy::operator()(const RecoveryState& s, Rng& rng) const {
  const int L = s.num_damaged();
  if (L == 0) throw ConfigError("base policy invoked on a terminal state");
  const int m = std::min(mdp_->resource_units(), L);
  const auto& net = mdp_->network();
  const auto& table = mdp_->repair_table();

  std::vector<int> idx(static_cast<size_t>(L));
  for (int i = 0; i < L; ++i) idx[static_cast<size_t>(i)] = i;

  switch (kind_) {
    case BasePolicyKind::KindPriority: {
      std::vector<double> mean(static_cast<size_t>(L));
      for (int i = 0; i < L; ++i) {
        const auto& e = s.damaged[static_cast<size_t>(i)];
        mean[static_cast<size_t>(i)] =
            table.mean_days(net.component(e.component).kind, e.state, e.pipe_breaks);
      }
      std::partial_sort(idx.begin(), idx.begin() + m, idx.end(), [&](int a, int b) {
        const auto& ea = s.damaged[static_cast<size_t>(a)];
        const auto& eb = s.damaged[static_cast<size_t>(b)];
        int ra = kind_rank(net.component(ea.component).kind);
        int rb = kind_rank(net.component(eb.component).kind);
        if (ra != rb) return ra < rb;
        if (mean[static_cast<size_t>(a)] != mean[static_cast<size_t>(b)])
          return mean[static_cast<size_t>(a)] < mean[static_cast<size_t>(b)];
        return ea.component < eb.component;
      });
      break;
    }
    case BasePolicyKind::RandomUniform: {
      for (int i = 0; i < m; ++i) {
        std::uint64_t j = rng.below(static_cast<std::uint64_t>(L - i));
        std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(i) + j]);
      }
      break;
    }
    case BasePolicyKind::ImpactGreedy: {
      // Served-population gain per expected crewing day if this entry alone
      // finished now.
      std::vector<DamageState> dense(static_cast<size_t>(net.num_components()),
                                     DamageState::None);
      for (const auto& e : s.damaged) dense[static_cast<size_t>(e.component)] = e.state;
      const auto& opt = mdp_->service_options();
      double base_served = static_cast<double>(net.serviceable_population(dense, opt));
      std::vector<double> rate(static_cast<size_t>(L));
      for (int i = 0; i < L; ++i) {
        const auto& e = s.damaged[static_cast<size_t>(i)];
        dense[static_cast<size_t>(e.component)] = DamageState::None;
        double gain =
            static_cast<double>(net.serviceable_population(dense, opt)) - base_served;
        dense[static_cast<size_t>(e.component)] = e.state;
        double days = e.residual_days != kNoResidual
                          ? e.residual_days
                          : table.mean_days(net.component(e.component).kind, e.state,
                                            e.pipe_breaks);
        rate[static_cast<size_t>(i)] = gain / std::max(days, 1e-9);
      }
      std::partial_sort(idx.begin(), idx.begin() + m, idx.end(), [&](int a, int b) {
        if (rate[static_cast<size_t>(a)] != rate[static_cast<size_t>(b)])
          return rate[static_cast<size_t>(a)] > rate[static_cast<size_t>(b)];
        return s.damaged[static_cast<size_t>(a)].component <
               s.damaged[static_cast<size_t>(b)].component;
      });
      break;
    }
  }

  std::vector<int> picks(idx.begin(), idx.begin() + m);
  return pick_to_action(picks, static_cast<size_t>(L));
}

long long BudgetSpec::resolve(int num_candidates) const {
  if (num_candidates < 1) throw ConfigError("budget for an empty candidate set");
  long long b = std::llround(per_action * num_candidates + constant);
  if (b < 1) throw ConfigError("resolved SimQ budget is not positive");
  return b;
}

void PlannerConfig::validate() const {
  if (name.empty()) throw ConfigError("planner needs a name");
  if (h < 1) throw ConfigError("planner '" + name + "': h must be at least 1");
  if (!(gamma >= 0.0) || !(gamma < 1.0))
    throw ConfigError("planner '" + name + "': gamma must lie in [0, 1)");
  if (action_cap < 1) throw ConfigError("planner '" + name + "': action_cap must be positive");
  if (kind == PlannerKind::Tea && alpha < 1)
    throw ConfigError("planner '" + name + "': alpha must be positive");
  if (kind == PlannerKind::Ocba) {
    if (ocba.n0 < 2) throw ConfigError("planner '" + name + "': n0 must be at least 2");
    if (!(ocba.delta_fraction > 0.0))
      throw ConfigError("planner '" + name + "': delta_fraction must be positive");
    if (budget.per_action < 0.0 || budget.constant < 0.0 ||
        budget.per_action + budget.constant <= 0.0)
      throw ConfigError("planner '" + name + "': invalid SimQ budget");
  }
}

StagePlanner::StagePlanner(const RecoveryMdp& mdp, const PlannerConfig& cfg)
    : mdp_(&mdp), cfg_(cfg), base_(mdp, cfg.base_policy) {
  cfg_.validate();
}

RepairAction StagePlanner::select(const RecoveryState& s, std::uint64_t stage_key,
                                  StageReport* report) const {
  if (watrec::is_terminal(s)) throw ConfigError("planning on a terminal state");

  if (cfg_.kind == PlannerKind::Base) {
    Rng rng(derive_stream(stage_key, {kEnumStreamTag}));
    if (report) {
      report->num_candidates = 0;
      report->budget = 0;
      report->simq_calls = 0;
    }
    return base_(s, rng);
  }

  Rng enum_rng(derive_stream(stage_key, {kEnumStreamTag}));
  auto candidates = mdp_->candidate_actions(s, cfg_.action_cap, enum_rng);
  auto policy = [this](const RecoveryState& st, Rng& r) { return base_(st, r); };

  RolloutResult res;
  long long budget = 0;
  if (cfg_.kind == PlannerKind::Tea) {
    res = uniform_rollout(*mdp_, s, candidates, policy, cfg_.h, cfg_.gamma, cfg_.alpha,
                          stage_key);
    budget = static_cast<long long>(candidates.size()) * cfg_.alpha;
  } else {
    budget = cfg_.budget.resolve(static_cast<int>(candidates.size()));
    res = ocba_rollout(*mdp_, s, candidates, policy, cfg_.h, cfg_.gamma, budget, cfg_.ocba,
                       stage_key);
  }
  if (report) {
    report->num_candidates = static_cast<int>(candidates.size());
    report->budget = budget;
    report->simq_calls = res.simq_calls;
  }
  return candidates[static_cast<size_t>(res.selected)];
}

}  // namespace watrec
