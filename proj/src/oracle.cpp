#include "watrec/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "watrec/error.hpp"

namespace watrec {

using nlohmann::json;
using nlohmann::ordered_json;

void TabularMdp::validate() const {
  if (actions.empty()) throw ConfigError("tabular MDP has no states");
  const int S = num_states();
  for (int s = 0; s < S; ++s) {
    const auto& acts = actions[static_cast<size_t>(s)];
    if (acts.empty())
      throw ConfigError("state " + std::to_string(s) + " has no actions");
    for (size_t a = 0; a < acts.size(); ++a) {
      double total = 0.0;
      if (acts[a].empty())
        throw ConfigError("state " + std::to_string(s) + " action " + std::to_string(a) +
                          " has no outcomes");
      for (const auto& o : acts[a]) {
        if (o.next < 0 || o.next >= S)
          throw ConfigError("transition target " + std::to_string(o.next) + " out of range");
        if (o.prob < 0.0 || o.prob > 1.0)
          throw ConfigError("transition probability out of [0, 1]");
        if (std::abs(o.reward) > r_max)
          throw ConfigError("|reward| exceeds r_max");
        total += o.prob;
      }
      if (std::abs(total - 1.0) > 1e-9)
        throw ConfigError("state " + std::to_string(s) + " action " + std::to_string(a) +
                          ": probabilities sum to " + std::to_string(total));
    }
  }
}

namespace {

void check_gamma_tol(double gamma, double tol) {
  if (!(gamma >= 0.0) || !(gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
}

double backup(const TabularMdp& mdp, std::span<const double> v, double gamma, int s, int a) {
  double acc = 0.0;
  for (const auto& o : mdp.actions[static_cast<size_t>(s)][static_cast<size_t>(a)])
    acc += o.prob * (v[static_cast<size_t>(o.next)] + o.reward);
  return gamma * acc;
}

}  // namespace

std::vector<double> value_iteration(const TabularMdp& mdp, double gamma, double tol) {
  check_gamma_tol(gamma, tol);
  mdp.validate();
  const int S = mdp.num_states();
  std::vector<double> v(static_cast<size_t>(S), 0.0), next(static_cast<size_t>(S), 0.0);
  for (long iter = 0; iter < 100000000L; ++iter) {
    double diff = 0.0;
    for (int s = 0; s < S; ++s) {
      double best = -HUGE_VAL;
      for (int a = 0; a < mdp.num_actions(s); ++a) best = std::max(best, backup(mdp, v, gamma, s, a));
      next[static_cast<size_t>(s)] = best;
      diff = std::max(diff, std::abs(best - v[static_cast<size_t>(s)]));
    }
    v.swap(next);
    if (diff <= tol) return v;
  }
  throw RuntimeError("value iteration did not converge");
}

std::vector<std::vector<double>> q_from_value(const TabularMdp& mdp,
                                              std::span<const double> value, double gamma) {
  if (value.size() != static_cast<size_t>(mdp.num_states()))
    throw ConfigError("value vector size does not match state count");
  std::vector<std::vector<double>> q(static_cast<size_t>(mdp.num_states()));
  for (int s = 0; s < mdp.num_states(); ++s) {
    q[static_cast<size_t>(s)].resize(static_cast<size_t>(mdp.num_actions(s)));
    for (int a = 0; a < mdp.num_actions(s); ++a)
      q[static_cast<size_t>(s)][static_cast<size_t>(a)] = backup(mdp, value, gamma, s, a);
  }
  return q;
}

std::vector<double> policy_value(const TabularMdp& mdp, std::span<const int> policy,
                                 double gamma, double tol) {
  check_gamma_tol(gamma, tol);
  const int S = mdp.num_states();
  if (policy.size() != static_cast<size_t>(S))
    throw ConfigError("policy size does not match state count");
  for (int s = 0; s < S; ++s)
    if (policy[static_cast<size_t>(s)] < 0 || policy[static_cast<size_t>(s)] >= mdp.num_actions(s))
      throw ConfigError("policy action out of range at state " + std::to_string(s));

  std::vector<double> v(static_cast<size_t>(S), 0.0), next(static_cast<size_t>(S), 0.0);
  for (long iter = 0; iter < 100000000L; ++iter) {
    double diff = 0.0;
    for (int s = 0; s < S; ++s) {
      next[static_cast<size_t>(s)] = backup(mdp, v, gamma, s, policy[static_cast<size_t>(s)]);
      diff = std::max(diff, std::abs(next[static_cast<size_t>(s)] - v[static_cast<size_t>(s)]));
    }
    v.swap(next);
    if (diff <= tol) return v;
  }
  throw RuntimeError("policy evaluation did not converge");
}

std::vector<int> greedy_policy(const std::vector<std::vector<double>>& q) {
  std::vector<int> pi(q.size(), 0);
  for (size_t s = 0; s < q.size(); ++s) {
    if (q[s].empty()) throw ConfigError("empty Q row");
    int best = 0;
    for (size_t a = 1; a < q[s].size(); ++a)
      if (q[s][a] > q[s][static_cast<size_t>(best)]) best = static_cast<int>(a);
    pi[s] = best;
  }
  return pi;
}

double bellman_residual(const TabularMdp& mdp, std::span<const double> value, double gamma) {
  if (value.size() != static_cast<size_t>(mdp.num_states()))
    throw ConfigError("value vector size does not match state count");
  double worst = 0.0;
  for (int s = 0; s < mdp.num_states(); ++s) {
    double best = -HUGE_VAL;
    for (int a = 0; a < mdp.num_actions(s); ++a) best = std::max(best, backup(mdp, value, gamma, s, a));
    worst = std::max(worst, std::abs(best - value[static_cast<size_t>(s)]));
  }
  return worst;
}

TabularMdp random_mdp(Rng& rng, int max_states, int max_actions) {
  if (max_states < 2 || max_actions < 1) throw ConfigError("random_mdp needs >= 2 states, >= 1 action");
  const int S = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_states - 1)));
  TabularMdp mdp;
  mdp.actions.resize(static_cast<size_t>(S));
  mdp.r_max = 1.0;
  std::vector<int> order(static_cast<size_t>(S));
  for (int s = 0; s < S; ++s) {
    const int A = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_actions)));
    mdp.actions[static_cast<size_t>(s)].resize(static_cast<size_t>(A));
    for (int a = 0; a < A; ++a) {
      const int branch = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(S, 3))));
      for (int i = 0; i < S; ++i) order[static_cast<size_t>(i)] = i;
      auto& outcomes = mdp.actions[static_cast<size_t>(s)][static_cast<size_t>(a)];
      double total = 0.0;
      for (int i = 0; i < branch; ++i) {
        std::uint64_t j = rng.below(static_cast<std::uint64_t>(S - i));
        std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(i) + j]);
        double w = 0.1 + rng.uniform01();
        outcomes.push_back({order[static_cast<size_t>(i)], w, rng.uniform01()});
        total += w;
      }
      for (auto& o : outcomes) o.prob /= total;
    }
  }
  mdp.validate();
  return mdp;
}

OracleReport oracle_self_check(std::uint64_t seed, int num_mdps) {
  if (num_mdps < 1) throw ConfigError("oracle check needs at least one MDP");
  OracleReport rep;
  rep.num_mdps = num_mdps;
  rep.worst_improvement_gap = HUGE_VAL;
  constexpr double gammas[] = {0.9, 0.95, 0.99};

  for (int k = 0; k < num_mdps; ++k) {
    Rng rng(derive_stream(seed, {0xC1, static_cast<std::uint64_t>(k)}));
    TabularMdp mdp = random_mdp(rng, 8, 4);
    const double gamma = gammas[k % 3];
    const int S = mdp.num_states();

    auto v_star = value_iteration(mdp, gamma, 1e-10);
    rep.max_bellman_residual =
        std::max(rep.max_bellman_residual, bellman_residual(mdp, v_star, gamma));

    // One-step contraction on two random value vectors.
    std::vector<double> u(static_cast<size_t>(S)), w(static_cast<size_t>(S));
    double dist = 0.0;
    for (int s = 0; s < S; ++s) {
      u[static_cast<size_t>(s)] = 10.0 * rng.uniform01();
      w[static_cast<size_t>(s)] = 10.0 * rng.uniform01();
      dist = std::max(dist, std::abs(u[static_cast<size_t>(s)] - w[static_cast<size_t>(s)]));
    }
    double tdist = 0.0;
    for (int s = 0; s < S; ++s) {
      double bu = -HUGE_VAL, bw = -HUGE_VAL;
      for (int a = 0; a < mdp.num_actions(s); ++a) {
        bu = std::max(bu, backup(mdp, u, gamma, s, a));
        bw = std::max(bw, backup(mdp, w, gamma, s, a));
      }
      tdist = std::max(tdist, std::abs(bu - bw));
    }
    if (dist > 0.0)
      rep.max_contraction_ratio = std::max(rep.max_contraction_ratio, tdist / (gamma * dist));

    // Greedy improvement over the fixed base policy "always action 0".
    std::vector<int> base(static_cast<size_t>(S), 0);
    auto v_base = policy_value(mdp, base, gamma, 1e-12);
    auto greedy = greedy_policy(q_from_value(mdp, v_base, gamma));
    auto v_greedy = policy_value(mdp, greedy, gamma, 1e-12);
    for (int s = 0; s < S; ++s) {
      double gap = v_greedy[static_cast<size_t>(s)] - v_base[static_cast<size_t>(s)];
      rep.worst_improvement_gap = std::min(rep.worst_improvement_gap, gap);
      if (gap < -1e-8) ++rep.improvement_violations;
    }
  }

  rep.pass = rep.max_bellman_residual < 1e-8 && rep.improvement_violations == 0 &&
             rep.max_contraction_ratio <= 1.0 + 1e-9;
  return rep;
}

std::string OracleReport::to_json() const {
  ordered_json j;
  j["num_mdps"] = num_mdps;
  j["max_bellman_residual"] = max_bellman_residual;
  j["max_contraction_ratio"] = max_contraction_ratio;
  j["improvement_violations"] = improvement_violations;
  j["worst_improvement_gap"] = worst_improvement_gap;
  j["pass"] = pass;
  return j.dump(2);
}

TabularModel::Step TabularModel::step(State s, Action a, Rng& rng) const {
  const auto& outcomes = mdp_->actions[static_cast<size_t>(s)][static_cast<size_t>(a)];
  double u = rng.uniform01();
  double cum = 0.0;
  for (const auto& o : outcomes) {
    cum += o.prob;
    if (u < cum) return {o.next, o.reward};
  }
  return {outcomes.back().next, outcomes.back().reward};
}

std::vector<TabularModel::Action> TabularModel::candidate_actions(State s, int, Rng&) const {
  std::vector<Action> all(static_cast<size_t>(mdp_->num_actions(s)));
  for (size_t a = 0; a < all.size(); ++a) all[a] = static_cast<int>(a);
  return all;
}

namespace {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TabularMdp TabularMdp::from_json_file(const std::string& path) {
  return from_json_text(read_text_file(path), path);
}

TabularMdp TabularMdp::from_json_text(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  try {
    TabularMdp mdp;
    mdp.r_max = doc.at("r_max").get<double>();
    for (const json& js : doc.at("states")) {
      std::vector<std::vector<TabularOutcome>> acts;
      for (const json& ja : js) {
        std::vector<TabularOutcome> outs;
        for (const json& jo : ja)
          outs.push_back({jo.at("next").get<int>(), jo.at("prob").get<double>(),
                          jo.at("reward").get<double>()});
        acts.push_back(std::move(outs));
      }
      mdp.actions.push_back(std::move(acts));
    }
    mdp.validate();
    return mdp;
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

}  // namespace watrec
