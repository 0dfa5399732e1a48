// Acceptance gate. Ten checks, one [PASS]/[FAIL] line each, exit code equal
// to the number of failures. Every tolerance is pinned here in code.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabular_ref.hpp"
#include "watrec/experiment.hpp"
#include "watrec/oracle.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using watrec::derive_stream;
using watrec::Rng;

namespace {

constexpr std::uint64_t kSeed = 20260818ull;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double secs() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

// Bails out of the enclosing check with a streamed failure detail.
#define EXPECT(cond, detail)        \
  do {                              \
    if (!(cond)) {                  \
      std::ostringstream os_;       \
      os_.precision(12);            \
      os_ << detail;                \
      return os_.str();             \
    }                               \
  } while (0)

int g_failed = 0;

void criterion(int idx, const char* name, const std::function<std::string(std::string&)>& body) {
  Timer t;
  std::string note, err;
  try {
    err = body(note);
  } catch (const std::exception& e) {
    err = std::string("unexpected exception: ") + e.what();
  }
  if (err.empty()) {
    std::printf("[PASS] %2d %s%s%s [%.1fs]\n", idx, name, note.empty() ? "" : ": ", note.c_str(),
                t.secs());
  } else {
    std::printf("[FAIL] %2d %s: %s [%.1fs]\n", idx, name, err.c_str(), t.secs());
    ++g_failed;
  }
  std::fflush(stdout);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// 1: the exact solver vouches for itself on a fresh sweep.
std::string c1_oracle_self_check(std::string& note) {
  Timer t;
  watrec::OracleReport rep = watrec::oracle_self_check(kSeed, 100);
  EXPECT(rep.num_mdps == 100, "sweep covered " << rep.num_mdps << " MDPs, wanted 100");
  EXPECT(rep.max_bellman_residual <= 1e-8,
         "Bellman residual " << rep.max_bellman_residual << " above 1e-8");
  EXPECT(rep.improvement_violations == 0,
         rep.improvement_violations << " states where the greedy policy got worse");
  EXPECT(rep.pass, "report flags itself as failing");
  EXPECT(t.secs() < 10.0, "took " << t.secs() << "s, limit 10s");
  std::ostringstream os;
  os.precision(3);
  os << "residual " << rep.max_bellman_residual << ", zero improvement violations";
  note = os.str();
  return {};
}

// 2: truncated returns stay within gamma^h * r_max / (1 - gamma) of the fixed
// point, for the same convention the sampling estimator uses (first reward
// undiscounted). The library solver carries one extra leading gamma, so its
// Q / gamma must agree with the independent reference before the bound runs.
std::string c2_truncation_bound(std::string& note) {
  const double gamma = 0.99;
  Rng gen(derive_stream(kSeed, {2}));
  double worst_ratio = 0.0;
  for (int m = 0; m < 25; ++m) {
    watrec::TabularMdp mdp = watrec::random_mdp(gen, 8, 4);
    const int S = mdp.num_states();
    std::vector<int> pi(static_cast<size_t>(S), 0);

    ref::QTable q_inf = ref::infinite_horizon_q(mdp, pi, gamma);
    std::vector<double> v_lib = watrec::policy_value(mdp, pi, gamma, 1e-13);
    ref::QTable q_lib = watrec::q_from_value(mdp, v_lib, gamma);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < mdp.num_actions(s); ++a) {
        double lib = q_lib[static_cast<size_t>(s)][static_cast<size_t>(a)] / gamma;
        double want = q_inf[static_cast<size_t>(s)][static_cast<size_t>(a)];
        EXPECT(std::abs(lib - want) <= 1e-8, "solver vs reference differ by "
                                                 << std::abs(lib - want) << " at mdp " << m
                                                 << " s" << s << " a" << a);
      }

    for (int h : {1, 5, 10, 25}) {
      ref::QTable q_h = ref::finite_horizon_q(mdp, pi, gamma, h);
      const double bound = std::pow(gamma, h) * mdp.r_max / (1.0 - gamma);
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < mdp.num_actions(s); ++a) {
          double diff = std::abs(q_inf[static_cast<size_t>(s)][static_cast<size_t>(a)] -
                                 q_h[static_cast<size_t>(s)][static_cast<size_t>(a)]);
          EXPECT(diff <= bound + 1e-9, "mdp " << m << " s" << s << " a" << a << " h" << h
                                              << ": |Q_inf - Q_h| = " << diff
                                              << " exceeds bound " << bound);
          if (bound > 0.0) worst_ratio = std::max(worst_ratio, diff / bound);
        }
    }
  }
  std::ostringstream os;
  os.precision(3);
  os << "25 MDPs, h in {1,5,10,25}, worst |error|/bound " << worst_ratio;
  note = os.str();
  return {};
}

// 3: heavy uniform rollout recovers the exact truncated argmax almost always.
std::string c3_rollout_argmax(std::string& note) {
  Timer t;
  const double gamma = 0.99;
  const int h = 5;
  const int alpha = 10000;
  Rng gen(derive_stream(kSeed, {3}));
  int states = 0, agree = 0;
  for (int m = 0; m < 12; ++m) {
    watrec::TabularMdp mdp = watrec::random_mdp(gen, 8, 4);
    watrec::TabularModel model(mdp);
    std::vector<int> pi(static_cast<size_t>(mdp.num_states()), 0);
    ref::QTable exact = ref::finite_horizon_q(mdp, pi, gamma, h);
    auto policy = [](int, Rng&) { return 0; };
    for (int s = 0; s < mdp.num_states(); ++s) {
      std::vector<int> candidates(static_cast<size_t>(mdp.num_actions(s)));
      for (size_t a = 0; a < candidates.size(); ++a) candidates[a] = static_cast<int>(a);
      watrec::RolloutResult res = watrec::uniform_rollout(
          model, s, candidates, policy, h, gamma, alpha,
          derive_stream(kSeed, {3, static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(s)}));
      ++states;
      if (res.selected == ref::argmax_row(exact[static_cast<size_t>(s)])) ++agree;
    }
  }
  double frac = static_cast<double>(agree) / static_cast<double>(states);
  EXPECT(frac >= 0.95,
         "rollout matched the exact argmax in only " << agree << "/" << states << " states");
  EXPECT(t.secs() < 120.0, "took " << t.secs() << "s, limit 120s");
  std::ostringstream os;
  os << "agreement " << agree << "/" << states << " states, alpha 10^4";
  note = os.str();
  return {};
}

// 4: closed-form pipe failure value plus a monotonicity property sweep.
std::string c4_pipe_failure(std::string& note) {
  const double p0 = watrec::pipe_failure_probability(1.0, 1.0, 50.0);
  EXPECT(std::abs(p0 - 0.0892619825738008) <= 1e-12,
         "P_f(1, 1, 50) = " << p0 << ", frozen value 0.0892619825738008");
  EXPECT(std::abs(p0 - (1.0 - std::exp(-0.0935))) <= 1e-13,
         "P_f(1, 1, 50) disagrees with 1 - exp(-0.0935)");

  Rng rng(derive_stream(kSeed, {4}));
  for (int i = 0; i < 10000; ++i) {
    double k = 0.3 + 3.0 * rng.uniform01();
    double l = 0.05 + 5.0 * rng.uniform01();
    double v = 1.0 + 120.0 * rng.uniform01();
    double p1 = watrec::pipe_failure_probability(k, l, v);
    EXPECT(p1 >= 0.0 && p1 < 1.0, "triple " << i << ": probability " << p1 << " out of range");
    EXPECT(p1 <= watrec::pipe_break_rate(k, l, v),
           "triple " << i << ": probability exceeds the break rate");
    double p2 = watrec::pipe_failure_probability(k * (1.0 + 2.0 * rng.uniform01()),
                                                 l * (1.0 + 2.0 * rng.uniform01()),
                                                 v * (1.0 + 2.0 * rng.uniform01()));
    EXPECT(p2 >= p1, "triple " << i << ": scaling every input up dropped the probability from "
                               << p1 << " to " << p2);
  }
  note = "frozen closed form to 1e-12, 10^4 monotone triples, zero violations";
  return {};
}

// 5: empirical repair-time means hit every table cell within 2%.
std::string c5_repair_calibration(std::string& note) {
  const watrec::RepairTimeTable table = watrec::RepairTimeTable::standard();
  const watrec::ComponentKind kinds[3] = {watrec::ComponentKind::Well,
                                          watrec::ComponentKind::BoosterPump,
                                          watrec::ComponentKind::Tank};
  const watrec::DamageState states[4] = {watrec::DamageState::Minor, watrec::DamageState::Moderate,
                                         watrec::DamageState::Extensive,
                                         watrec::DamageState::Complete};
  const int n = 100000;
  double worst_rel = 0.0;
  for (int k = 0; k < 3; ++k)
    for (int s = 0; s < 4; ++s) {
      Rng rng(derive_stream(kSeed, {5, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(s)}));
      double sum = 0.0;
      for (int i = 0; i < n; ++i)
        sum += watrec::sample_repair_time(table, kinds[k], states[s], 0.0, rng);
      double mean = sum / n;
      double want = table.facility_mean_days[static_cast<size_t>(k)][static_cast<size_t>(s)];
      double rel = std::abs(mean - want) / want;
      EXPECT(rel <= 0.02, watrec::to_string(kinds[k]) << "/" << watrec::to_string(states[s])
                                                      << ": mean " << mean << " vs " << want
                                                      << " (" << rel * 100.0 << "%)");
      worst_rel = std::max(worst_rel, rel);
    }
  {
    Rng rng(derive_stream(kSeed, {5, 99}));
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
      sum += watrec::sample_repair_time(table, watrec::ComponentKind::PipeSegment,
                                        watrec::DamageState::Complete, 3.7, rng);
    double mean = sum / n;
    double rel = std::abs(mean - 3.7) / 3.7;
    EXPECT(rel <= 0.02, "pipe with 3.7 expected breaks: mean " << mean << " vs 3.7");
    worst_rel = std::max(worst_rel, rel);
  }
  std::ostringstream os;
  os.precision(3);
  os << "12 facility cells + pipe, 1e5 draws each, worst error " << worst_rel * 100.0 << "%";
  note = os.str();
  return {};
}

// Checks 6 through 8 share one comparison batch. First caller pays the run.
struct DeskBatch {
  std::string err;
  json summary;
  double run_secs = 0.0;
};

const DeskBatch& desk_batch() {
  static DeskBatch cached = [] {
    DeskBatch d;
    try {
      Timer t;
      watrec::ExperimentConfig cfg = watrec::ExperimentConfig::from_json_file(
          std::string(WATREC_DATA_DIR) + "/experiment_desk.json");
      watrec::Experiment exp(cfg);
      exp.set_threads(4);
      fs::path dir = fs::temp_directory_path() / "watrec_acceptance_batch";
      fs::remove_all(dir);
      std::string text = exp.run_batch_to(dir.string());
      d.run_secs = t.secs();
      d.summary = json::parse(text);
    } catch (const std::exception& e) {
      d.err = e.what();
    }
    return d;
  }();
  return cached;
}

const json* find_planner(const json& summary, const std::string& name) {
  for (const json& p : summary.at("planners"))
    if (p.at("name").get<std::string>() == name) return &p;
  return nullptr;
}

// 6: the lookahead planner beats the base policy by more than two standard
// errors of the paired per-scenario AUC difference.
std::string c6_tea_beats_base(std::string& note) {
  const DeskBatch& b = desk_batch();
  EXPECT(b.err.empty(), "batch failed: " << b.err);
  EXPECT(b.run_secs < 900.0, "batch took " << b.run_secs << "s, limit 900s");

  const json* base = find_planner(b.summary, "base");
  const json* tea = find_planner(b.summary, "tea");
  EXPECT(base && tea, "summary is missing the base or tea planner");
  auto a0 = base->at("auc_per_scenario").get<std::vector<double>>();
  auto a1 = tea->at("auc_per_scenario").get<std::vector<double>>();
  EXPECT(a0.size() == 20 && a1.size() == 20,
         "expected 20 paired AUC values, got " << a0.size() << " and " << a1.size());

  double mean = 0.0;
  for (size_t i = 0; i < a1.size(); ++i) mean += a1[i] - a0[i];
  mean /= static_cast<double>(a1.size());
  double ss = 0.0;
  for (size_t i = 0; i < a1.size(); ++i) {
    double d = (a1[i] - a0[i]) - mean;
    ss += d * d;
  }
  double se = std::sqrt(ss / static_cast<double>(a1.size() - 1)) /
              std::sqrt(static_cast<double>(a1.size()));
  EXPECT(mean > 0.0, "mean paired AUC difference " << mean << " is not positive");
  EXPECT(se > 0.0, "degenerate paired difference spread");
  EXPECT(mean > 2.0 * se,
         "mean paired AUC difference " << mean << " is only " << mean / se << " standard errors");
  std::ostringstream os;
  os.precision(4);
  os << "paired AUC gain " << mean << " population-days, " << mean / se << " standard errors";
  note = os.str();
  return {};
}

// 7: OCBA at a tenth of TEA's per-stage samples keeps at least 95% of the AUC.
std::string c7_ocba_efficiency(std::string& note) {
  const DeskBatch& b = desk_batch();
  EXPECT(b.err.empty(), "batch failed: " << b.err);
  EXPECT(b.run_secs < 900.0, "batch took " << b.run_secs << "s, limit 900s");

  const json* tea = find_planner(b.summary, "tea");
  const json* ocba = find_planner(b.summary, "ocba");
  EXPECT(tea && ocba, "summary is missing the tea or ocba planner");
  double tea_mean = tea->at("auc_mean").get<double>();
  double ocba_mean = ocba->at("auc_mean").get<double>();
  EXPECT(tea_mean > 0.0, "tea AUC mean " << tea_mean << " is not positive");
  EXPECT(ocba_mean >= 0.95 * tea_mean,
         "OCBA mean AUC " << ocba_mean << " below 95% of TEA's " << tea_mean);

  long long tea_calls = tea->at("simq_calls").get<long long>();
  long long ocba_calls = ocba->at("simq_calls").get<long long>();
  EXPECT(tea_calls > 0, "tea recorded no SimQ calls");
  EXPECT(10 * ocba_calls <= tea_calls,
         "OCBA spent " << ocba_calls << " SimQ calls, more than a tenth of TEA's " << tea_calls);
  std::ostringstream os;
  os.precision(6);
  os << "AUC ratio " << ocba_mean / tea_mean << " at budget ratio "
     << static_cast<double>(ocba_calls) / static_cast<double>(tea_calls);
  note = os.str();
  return {};
}

// 8: per-stage accounting from the emitted summary. TEA spends exactly
// n * alpha SimQ calls per stage and OCBA exactly its resolved budget B.
std::string c8_budget_accounting(std::string& note) {
  const DeskBatch& b = desk_batch();
  EXPECT(b.err.empty(), "batch failed: " << b.err);

  long long tea_stages = 0, ocba_stages = 0;
  for (const json& p : b.summary.at("planners")) {
    const std::string name = p.at("name").get<std::string>();
    long long total = 0;
    for (const json& run : p.at("scenarios")) {
      int sid = run.at("scenario_id").get<int>();
      for (const json& st : run.at("stages")) {
        long long n = st.at("candidates").get<long long>();
        long long budget = st.at("budget").get<long long>();
        long long calls = st.at("simq_calls").get<long long>();
        total += calls;
        if (name == "base") {
          EXPECT(n == 0 && budget == 0 && calls == 0,
                 "base planner recorded sampling work in scenario " << sid);
        } else if (name == "tea") {
          EXPECT(calls == n * 20, "tea scenario " << sid << " stage " << st.at("stage")
                                                  << ": " << calls << " calls for " << n
                                                  << " candidates, wanted n*alpha = " << n * 20);
          EXPECT(budget == calls, "tea budget " << budget << " != calls " << calls);
          ++tea_stages;
        } else if (name == "ocba") {
          EXPECT(budget == 2 * n, "ocba scenario " << sid << " stage " << st.at("stage")
                                                   << ": budget " << budget << " for " << n
                                                   << " candidates, wanted 2n");
          EXPECT(calls == budget, "ocba scenario " << sid << " stage " << st.at("stage") << ": "
                                                   << calls << " calls, budget " << budget);
          ++ocba_stages;
        }
      }
    }
    EXPECT(total == p.at("simq_calls").get<long long>(),
           name << ": stage calls sum to " << total << ", planner total says "
                << p.at("simq_calls").get<long long>());
  }
  EXPECT(tea_stages > 0 && ocba_stages > 0, "no sampled stages found in the summary");
  std::ostringstream os;
  os << tea_stages << " tea stages at n*alpha, " << ocba_stages << " ocba stages at exactly B";
  note = os.str();
  return {};
}

// 9: the CLI writes byte-identical artifacts under different thread counts.
std::string c9_thread_determinism(std::string& note) {
  const fs::path d1 = fs::temp_directory_path() / "watrec_acceptance_t1";
  const fs::path d4 = fs::temp_directory_path() / "watrec_acceptance_t4";
  fs::remove_all(d1);
  fs::remove_all(d4);

  auto run = [](const fs::path& out, int threads) {
    std::ostringstream cmd;
    cmd << WATREC_CLI_PATH << " batch --config " << WATREC_DATA_DIR << "/experiment_desk.json"
        << " --out " << out.string() << " --threads " << threads << " > /dev/null";
    return std::system(cmd.str().c_str());
  };
  EXPECT(run(d1, 1) == 0, "CLI batch with --threads 1 failed");
  EXPECT(run(d4, 4) == 0, "CLI batch with --threads 4 failed");

  size_t bytes = 0;
  for (const char* f : {"curves.csv", "mean_curves.csv", "summary.json"}) {
    std::string x = read_file(d1 / f);
    std::string y = read_file(d4 / f);
    EXPECT(!x.empty(), d1.string() << "/" << f << " is missing or empty");
    EXPECT(x == y, f << " differs between --threads 1 and --threads 4");
    bytes += x.size();
  }
  fs::remove_all(d1);
  fs::remove_all(d4);
  std::ostringstream os;
  os << "3 artifacts, " << bytes << " bytes, byte-identical";
  note = os.str();
  return {};
}

// 10: library serviceability equals an independent simple-path enumeration on
// the 10-node fixture, for all 1024 damage patterns of 10 chosen components.
std::string c10_serviceability_oracle(std::string& note) {
  watrec::WaterNetwork net = watrec::WaterNetwork::from_json_file(
      std::string(WATREC_TEST_DATA_DIR) + "/small_network.json");
  EXPECT(net.total_population() == 2000, "fixture population changed");

  // Mirror of the fixture, kept separate from the loader on purpose.
  // Nodes: 0 w1, 1 w2, 2 b1, 3 t1, 4..9 r1..r6.
  constexpr int kComps = 14;
  constexpr int kNodes = 10;
  const char* ids[kComps] = {"well_1",  "well_2",  "bps_1",   "tank_1",  "p_w1_b1",
                             "p_w2_b1", "p_b1_t1", "p_t1_r1", "p_r1_r2", "p_r2_r3",
                             "p_r1_r4", "p_r4_r5", "p_r5_r6", "p_r3_r6"};
  struct E {
    int a, b, pipe;
  };
  const E edges[10] = {{0, 2, 4}, {1, 2, 5}, {2, 3, 6},  {3, 4, 7},  {4, 5, 8},
                       {5, 6, 9}, {4, 7, 10}, {7, 8, 11}, {8, 9, 12}, {9, 6, 13}};
  const std::uint32_t guard_mask[kNodes] = {0, 0, 1u << 2, 1u << 3, 0, 0, 0, 0, 0, 0};
  const long long pop[kNodes] = {0, 0, 0, 0, 500, 300, 200, 400, 250, 350};
  const int well_comp[2] = {0, 1};
  const int well_node[2] = {0, 1};

  std::vector<std::vector<std::pair<int, int>>> adj(kNodes);
  for (const E& e : edges) {
    adj[static_cast<size_t>(e.a)].push_back({e.b, e.pipe});
    adj[static_cast<size_t>(e.b)].push_back({e.a, e.pipe});
  }

  // Every simple path from a well, as the mask of components it needs.
  std::vector<std::vector<std::uint32_t>> paths(kNodes);
  std::function<void(int, std::uint32_t, std::uint32_t)> walk =
      [&](int u, std::uint32_t need, std::uint32_t seen) {
        need |= guard_mask[u];
        paths[static_cast<size_t>(u)].push_back(need);
        for (auto [v, pipe] : adj[static_cast<size_t>(u)])
          if (!(seen >> v & 1))
            walk(v, need | (1u << pipe), seen | (1u << v));
      };
  for (int w = 0; w < 2; ++w) walk(well_node[w], 1u << well_comp[w], 1u << well_node[w]);

  int lib_idx[kComps];
  for (int j = 0; j < kComps; ++j) {
    lib_idx[j] = net.component_index(ids[j]);
    EXPECT(lib_idx[j] >= 0, "fixture is missing component " << ids[j]);
  }

  const int selected[10] = {0, 1, 2, 3, 4, 6, 7, 8, 9, 11};
  for (std::uint32_t bits = 0; bits < 1024; ++bits) {
    std::uint32_t damaged = 0;
    std::vector<watrec::DamageState> dense(static_cast<size_t>(net.num_components()),
                                           watrec::DamageState::None);
    for (int j = 0; j < 10; ++j)
      if (bits >> j & 1) {
        damaged |= 1u << selected[j];
        dense[static_cast<size_t>(lib_idx[selected[j]])] = watrec::DamageState::Complete;
      }
    long long brute = 0;
    for (int node = 0; node < kNodes; ++node) {
      if (pop[node] == 0) continue;
      for (std::uint32_t need : paths[static_cast<size_t>(node)])
        if (!(need & damaged)) {
          brute += pop[node];
          break;
        }
    }
    long long lib = net.serviceable_population(dense);
    EXPECT(lib == brute,
           "pattern " << bits << ": library " << lib << ", path enumeration " << brute);
  }
  note = "1024 damage patterns, exact agreement";
  return {};
}

}  // namespace

int main() {
  std::printf("watrec acceptance gate\n");
  criterion(1, "exact solver self-check on 100 random MDPs", c1_oracle_self_check);
  criterion(2, "finite-horizon truncation bound", c2_truncation_bound);
  criterion(3, "uniform rollout recovers the exact argmax", c3_rollout_argmax);
  criterion(4, "pipe failure closed form and monotonicity", c4_pipe_failure);
  criterion(5, "repair time calibration", c5_repair_calibration);
  criterion(6, "lookahead beats the base policy", c6_tea_beats_base);
  criterion(7, "OCBA holds TEA quality at a tenth of the samples", c7_ocba_efficiency);
  criterion(8, "per-stage SimQ budget accounting", c8_budget_accounting);
  criterion(9, "byte-identical CLI artifacts across thread counts", c9_thread_determinism);
  criterion(10, "serviceability matches simple-path enumeration", c10_serviceability_oracle);

  if (g_failed == 0)
    std::printf("acceptance: 10/10 criteria passed\n");
  else
    std::printf("acceptance: %d of 10 criteria FAILED\n", g_failed);
  return g_failed;
}
