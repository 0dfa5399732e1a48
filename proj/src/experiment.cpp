#include "watrec/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "watrec/error.hpp"

namespace watrec {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

BasePolicyKind parse_base_policy(const std::string& s) {
  if (s == "kind_priority") return BasePolicyKind::KindPriority;
  if (s == "random_uniform") return BasePolicyKind::RandomUniform;
  if (s == "impact_greedy") return BasePolicyKind::ImpactGreedy;
  throw ConfigError("unknown base_policy_kind '" + s + "'");
}

PlannerConfig parse_planner(const json& j, size_t pos) {
  const std::string where = "planners[" + std::to_string(pos) + "]";
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  PlannerConfig p;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "base")
    p.kind = PlannerKind::Base;
  else if (kind == "tea")
    p.kind = PlannerKind::Tea;
  else if (kind == "ocba")
    p.kind = PlannerKind::Ocba;
  else
    throw ConfigError(where + ": unknown planner kind '" + kind + "'");

  p.name = j.value("name", kind);
  if (j.contains("base_policy_kind"))
    p.base_policy = parse_base_policy(j.at("base_policy_kind").get<std::string>());
  p.h = j.value("h", p.h);
  p.alpha = j.value("alpha", p.alpha);
  p.gamma = j.value("gamma", p.gamma);
  p.action_cap = j.value("action_cap", p.action_cap);
  if (j.contains("B")) {
    const json& b = j.at("B");
    if (b.is_number()) {
      p.budget.per_action = 0.0;
      p.budget.constant = b.get<double>();
    } else {
      p.budget.per_action = b.value("per_action", 0.0);
      p.budget.constant = b.value("constant", 0.0);
    }
  }
  if (j.contains("n0")) p.ocba.n0 = j.at("n0").get<int>();
  if (j.contains("delta_fraction")) p.ocba.delta_fraction = j.at("delta_fraction").get<double>();
  p.validate();
  return p;
}

ordered_json planner_to_json(const PlannerConfig& p) {
  ordered_json j;
  j["name"] = p.name;
  j["kind"] = std::string(to_string(p.kind));
  j["base_policy_kind"] = std::string(to_string(p.base_policy));
  if (p.kind != PlannerKind::Base) {
    j["h"] = p.h;
    j["gamma"] = p.gamma;
    j["action_cap"] = p.action_cap;
  }
  if (p.kind == PlannerKind::Tea) j["alpha"] = p.alpha;
  if (p.kind == PlannerKind::Ocba) {
    j["B"] = {{"per_action", p.budget.per_action}, {"constant", p.budget.constant}};
    j["n0"] = p.ocba.n0;
    j["delta_fraction"] = p.ocba.delta_fraction;
  }
  return j;
}

}  // namespace

double curve_value_at(const std::vector<CurvePoint>& curve, double day) {
  if (curve.empty()) throw ConfigError("empty recovery curve");
  double served = static_cast<double>(curve.front().served);
  for (const auto& pt : curve) {
    if (pt.day > day) break;
    served = static_cast<double>(pt.served);
  }
  return served;
}

double curve_auc(const std::vector<CurvePoint>& curve, double horizon_days) {
  if (curve.empty()) throw ConfigError("empty recovery curve");
  if (!(horizon_days >= 0.0)) throw ConfigError("negative AUC horizon");
  double area = 0.0;
  for (size_t i = 0; i < curve.size(); ++i) {
    double start = std::min(curve[i].day, horizon_days);
    double end = (i + 1 < curve.size()) ? std::min(curve[i + 1].day, horizon_days) : horizon_days;
    if (end > start) area += static_cast<double>(curve[i].served) * (end - start);
  }
  return area;
}

ScenarioRun run_recovery(const RecoveryMdp& mdp, const StagePlanner& planner,
                         const DamageScenario& scenario, int scenario_id,
                         std::uint64_t master_seed) {
  ScenarioRun run;
  run.scenario_id = scenario_id;
  RecoveryState s = initial_state(mdp.network(), scenario);
  run.num_damaged = s.num_damaged();
  run.curve.push_back({0.0, serviceable_now(mdp.network(), s, mdp.service_options())});

  for (int stage = 0; !is_terminal(s); ++stage) {
    StageReport rep;
    rep.stage = stage;
    std::uint64_t stage_key =
        derive_stream(master_seed, {kStageStreamTag, static_cast<std::uint64_t>(scenario_id),
                                    static_cast<std::uint64_t>(stage)});
    RepairAction a = planner.select(s, stage_key, &rep);
    Rng exec(derive_stream(master_seed, {kExecStreamTag, static_cast<std::uint64_t>(scenario_id),
                                         static_cast<std::uint64_t>(stage)}));
    auto out = mdp.step_detailed(s, a, exec);
    s = std::move(out.next);
    run.curve.push_back({s.elapsed_days, serviceable_now(mdp.network(), s, mdp.service_options())});
    run.stages.push_back(rep);
    run.simq_calls += rep.simq_calls;
  }
  return run;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  return from_json_text(read_text_file(path), fs::path(path).parent_path().string(), path);
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text,
                                                  const std::string& base_dir,
                                                  const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }

  try {
    ExperimentConfig cfg;
    auto resolve = [&base_dir](const std::string& p) {
      fs::path fp(p);
      if (fp.is_absolute() || base_dir.empty()) return p;
      return (fs::path(base_dir) / fp).string();
    };
    cfg.network_path = resolve(doc.at("network").get<std::string>());
    cfg.hazard_path = resolve(doc.at("hazard").get<std::string>());
    for (size_t i = 0; i < doc.at("planners").size(); ++i)
      cfg.planners.push_back(parse_planner(doc.at("planners").at(i), i));
    cfg.num_scenarios = doc.value("num_scenarios", cfg.num_scenarios);
    cfg.resource_units = doc.value("resources", cfg.resource_units);
    cfg.horizon_days = doc.value("horizon_days", cfg.horizon_days);
    cfg.grid_step_days = doc.value("grid_step_days", cfg.grid_step_days);
    cfg.master_seed = doc.value("master_seed", cfg.master_seed);
    cfg.service.minor_is_functional =
        doc.value("minor_is_functional", cfg.service.minor_is_functional);
    cfg.threads = doc.value("threads", cfg.threads);
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

void ExperimentConfig::validate() const {
  if (network_path.empty() || hazard_path.empty())
    throw ConfigError("experiment needs network and hazard paths");
  if (planners.empty()) throw ConfigError("experiment needs at least one planner");
  for (size_t i = 0; i < planners.size(); ++i) {
    planners[i].validate();
    for (size_t j = i + 1; j < planners.size(); ++j)
      if (planners[i].name == planners[j].name)
        throw ConfigError("duplicate planner name '" + planners[i].name + "'");
  }
  if (num_scenarios < 1) throw ConfigError("num_scenarios must be at least 1");
  if (resource_units < 1) throw ConfigError("resources must be at least 1");
  if (horizon_days < 0.0) throw ConfigError("horizon_days must be nonnegative");
  if (!(grid_step_days > 0.0)) throw ConfigError("grid_step_days must be positive");
  if (threads < 1 || threads > 512) throw ConfigError("threads must lie in [1, 512]");
}

Experiment::Experiment(ExperimentConfig cfg)
    : cfg_(std::move(cfg)),
      network_(WaterNetwork::from_json_file(cfg_.network_path)),
      hazard_(HazardModel::from_json_file(cfg_.hazard_path)) {
  cfg_.validate();
}

void Experiment::set_num_scenarios(int n) {
  if (n < 1) throw ConfigError("num_scenarios must be at least 1");
  cfg_.num_scenarios = n;
}

void Experiment::set_resource_units(int m) {
  if (m < 1) throw ConfigError("resources must be at least 1");
  cfg_.resource_units = m;
}

void Experiment::set_threads(int t) {
  if (t < 1 || t > 512) throw ConfigError("threads must lie in [1, 512]");
  cfg_.threads = t;
}

void Experiment::select_planners(const std::vector<std::string>& names) {
  if (names.empty()) throw ConfigError("planner selection is empty");
  std::vector<PlannerConfig> picked;
  for (const auto& name : names) {
    auto it = std::find_if(cfg_.planners.begin(), cfg_.planners.end(),
                           [&](const PlannerConfig& p) { return p.name == name; });
    if (it == cfg_.planners.end()) throw ConfigError("unknown planner '" + name + "'");
    if (std::any_of(picked.begin(), picked.end(),
                    [&](const PlannerConfig& p) { return p.name == name; }))
      throw ConfigError("planner '" + name + "' selected twice");
    picked.push_back(*it);
  }
  cfg_.planners = std::move(picked);
}

std::vector<DamageScenario> Experiment::sample_scenarios() const {
  std::vector<DamageScenario> out;
  out.reserve(static_cast<size_t>(cfg_.num_scenarios));
  for (int i = 0; i < cfg_.num_scenarios; ++i) {
    Rng rng(derive_stream(cfg_.master_seed, {kScenarioStreamTag, static_cast<std::uint64_t>(i)}));
    out.push_back(sample_scenario(network_, hazard_, rng));
  }
  return out;
}

std::string Experiment::scenarios_json() const {
  auto scenarios = sample_scenarios();
  ordered_json root;
  root["master_seed"] = cfg_.master_seed;
  root["num_scenarios"] = cfg_.num_scenarios;
  root["event"] = {{"magnitude", hazard_.event.magnitude},
                   {"epicenter", {hazard_.event.epicenter[0], hazard_.event.epicenter[1]}}};
  root["total_population"] = network_.total_population();
  root["scenarios"] = ordered_json::array();
  for (size_t i = 0; i < scenarios.size(); ++i) {
    RecoveryState s0 = initial_state(network_, scenarios[i]);
    ordered_json js;
    js["scenario_id"] = i;
    js["num_damaged"] = s0.num_damaged();
    js["serviceable_at_t0"] = serviceable_now(network_, s0, cfg_.service);
    ordered_json dmg = ordered_json::object(), breaks = ordered_json::object();
    for (const auto& e : s0.damaged) {
      const auto& c = network_.component(e.component);
      dmg[c.id] = std::string(to_string(e.state));
      if (c.kind == ComponentKind::PipeSegment) breaks[c.id] = e.pipe_breaks;
    }
    js["damage"] = std::move(dmg);
    js["pipe_breaks"] = std::move(breaks);
    root["scenarios"].push_back(std::move(js));
  }
  return root.dump(2);
}

std::string Experiment::plan_trace(const std::string& planner_name, int scenario_index) const {
  if (scenario_index < 0 || scenario_index >= cfg_.num_scenarios)
    throw ConfigError("scenario index out of range");
  auto it = std::find_if(cfg_.planners.begin(), cfg_.planners.end(),
                         [&](const PlannerConfig& p) { return p.name == planner_name; });
  if (it == cfg_.planners.end()) throw ConfigError("unknown planner '" + planner_name + "'");

  Rng srng(derive_stream(cfg_.master_seed,
                         {kScenarioStreamTag, static_cast<std::uint64_t>(scenario_index)}));
  DamageScenario scenario = sample_scenario(network_, hazard_, srng);

  RecoveryMdp mdp(network_, hazard_.repair, cfg_.service, cfg_.resource_units);
  StagePlanner planner(mdp, *it);

  const std::int64_t total = network_.total_population();
  std::ostringstream out;
  RecoveryState s = initial_state(network_, scenario);
  out << "planner " << planner_name << ", scenario " << scenario_index << ": "
      << s.num_damaged() << " components damaged, " << serviceable_now(network_, s, cfg_.service)
      << "/" << total << " served at day 0\n";

  for (int stage = 0; !is_terminal(s); ++stage) {
    StageReport rep;
    rep.stage = stage;
    std::uint64_t stage_key = derive_stream(
        cfg_.master_seed, {kStageStreamTag, static_cast<std::uint64_t>(scenario_index),
                           static_cast<std::uint64_t>(stage)});
    RepairAction a = planner.select(s, stage_key, &rep);

    out << "stage " << stage << ": assign [";
    bool first = true;
    for (size_t i = 0; i < a.assign.size(); ++i)
      if (a.assign[i]) {
        out << (first ? "" : " ") << network_.component(s.damaged[i].component).id;
        first = false;
      }
    out << "]";
    if (rep.num_candidates > 0)
      out << " (candidates " << rep.num_candidates << ", simq " << rep.simq_calls << ")";

    Rng exec(derive_stream(cfg_.master_seed,
                           {kExecStreamTag, static_cast<std::uint64_t>(scenario_index),
                            static_cast<std::uint64_t>(stage)}));
    auto step = mdp.step_detailed(s, a, exec);
    s = std::move(step.next);
    out << " -> completed [";
    for (size_t i = 0; i < step.completed.size(); ++i)
      out << (i ? " " : "") << network_.component(step.completed[i]).id;
    out << "] day " << fmt_g(s.elapsed_days) << ", served "
        << serviceable_now(network_, s, cfg_.service) << "/" << total << "\n";
  }
  out << "fully recovered at day " << fmt_g(s.elapsed_days) << "\n";
  return out.str();
}

BatchResult Experiment::run_batch() const {
  cfg_.validate();
  auto scenarios = sample_scenarios();
  RecoveryMdp mdp(network_, hazard_.repair, cfg_.service, cfg_.resource_units);

  std::vector<StagePlanner> planners;
  planners.reserve(cfg_.planners.size());
  for (const auto& pc : cfg_.planners) planners.emplace_back(mdp, pc);

  const size_t np = planners.size();
  const size_t ns = scenarios.size();
  std::vector<std::vector<ScenarioRun>> runs(np, std::vector<ScenarioRun>(ns));

  // (planner, scenario) cells are independent by stream construction, so any
  // schedule gives identical results; threads just pick cells off a counter.
  std::atomic<size_t> cursor{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&]() {
    for (;;) {
      size_t job = cursor.fetch_add(1);
      if (job >= np * ns) return;
      size_t p = job / ns, sidx = job % ns;
      try {
        runs[p][sidx] = run_recovery(mdp, planners[p], scenarios[sidx],
                                     static_cast<int>(sidx), cfg_.master_seed);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  int nthreads = std::min<int>(cfg_.threads, static_cast<int>(np * ns));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  BatchResult result;
  double horizon = cfg_.horizon_days;
  if (horizon <= 0.0) {
    double latest = 0.0;
    for (const auto& per_planner : runs)
      for (const auto& run : per_planner)
        if (!run.curve.empty()) latest = std::max(latest, run.curve.back().day);
    horizon = std::ceil(latest / cfg_.grid_step_days) * cfg_.grid_step_days;
    if (horizon <= 0.0) horizon = cfg_.grid_step_days;
  }
  result.horizon_days = horizon;
  for (double d = 0.0; d <= horizon + 1e-9; d += cfg_.grid_step_days)
    result.grid_days.push_back(d);

  for (size_t p = 0; p < np; ++p) {
    PlannerResult pr;
    pr.name = cfg_.planners[p].name;
    pr.runs = std::move(runs[p]);
    pr.mean_curve.resize(result.grid_days.size(), 0.0);
    for (const auto& run : pr.runs) {
      pr.simq_calls += run.simq_calls;
      pr.auc.push_back(curve_auc(run.curve, horizon));
      for (size_t k = 0; k < result.grid_days.size(); ++k)
        pr.mean_curve[k] += curve_value_at(run.curve, result.grid_days[k]);
    }
    for (auto& v : pr.mean_curve) v /= static_cast<double>(ns);
    double mean = 0.0;
    for (double a : pr.auc) mean += a;
    mean /= static_cast<double>(pr.auc.size());
    pr.auc_mean = mean;
    if (pr.auc.size() > 1) {
      double ss = 0.0;
      for (double a : pr.auc) ss += (a - mean) * (a - mean);
      pr.auc_stderr = std::sqrt(ss / static_cast<double>(pr.auc.size() - 1)) /
                      std::sqrt(static_cast<double>(pr.auc.size()));
    }
    result.planners.push_back(std::move(pr));
  }
  return result;
}

std::string Experiment::run_batch_to(const std::string& out_dir) const {
  BatchResult batch = run_batch();

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw RuntimeError("cannot create output directory " + out_dir + ": " + ec.message());

  auto open_out = [&](const char* name) {
    std::ofstream f(fs::path(out_dir) / name, std::ios::binary);
    if (!f) throw RuntimeError(std::string("cannot write ") + name + " under " + out_dir);
    return f;
  };

  {
    auto f = open_out("curves.csv");
    f << "scenario_id,planner,elapsed_days,served_population\n";
    for (const auto& pr : batch.planners)
      for (const auto& run : pr.runs)
        for (const auto& pt : run.curve)
          f << run.scenario_id << ',' << pr.name << ',' << fmt_g(pt.day) << ',' << pt.served
            << '\n';
  }
  {
    auto f = open_out("mean_curves.csv");
    f << "planner,day,mean_served\n";
    for (const auto& pr : batch.planners)
      for (size_t k = 0; k < batch.grid_days.size(); ++k)
        f << pr.name << ',' << fmt_g(batch.grid_days[k]) << ',' << fmt_g(pr.mean_curve[k])
          << '\n';
  }

  ordered_json root;
  root["master_seed"] = cfg_.master_seed;
  ordered_json cfgj;
  cfgj["network"] = cfg_.network_path;
  cfgj["hazard"] = cfg_.hazard_path;
  cfgj["num_scenarios"] = cfg_.num_scenarios;
  cfgj["resources"] = cfg_.resource_units;
  cfgj["horizon_days"] = batch.horizon_days;
  cfgj["grid_step_days"] = cfg_.grid_step_days;
  cfgj["minor_is_functional"] = cfg_.service.minor_is_functional;
  cfgj["planners"] = ordered_json::array();
  for (const auto& pc : cfg_.planners) cfgj["planners"].push_back(planner_to_json(pc));
  root["config"] = std::move(cfgj);
  root["network"] = {{"components", network_.num_components()},
                     {"nodes", network_.num_nodes()},
                     {"total_population", network_.total_population()}};

  root["planners"] = ordered_json::array();
  for (const auto& pr : batch.planners) {
    ordered_json jp;
    jp["name"] = pr.name;
    jp["auc_mean"] = pr.auc_mean;
    jp["auc_stderr"] = pr.auc_stderr;
    jp["auc_per_scenario"] = pr.auc;
    jp["simq_calls"] = pr.simq_calls;
    jp["scenarios"] = ordered_json::array();
    for (const auto& run : pr.runs) {
      ordered_json jr;
      jr["scenario_id"] = run.scenario_id;
      jr["num_damaged"] = run.num_damaged;
      jr["final_day"] = run.curve.empty() ? 0.0 : run.curve.back().day;
      jr["stages"] = ordered_json::array();
      for (const auto& st : run.stages)
        jr["stages"].push_back({{"stage", st.stage},
                                {"candidates", st.num_candidates},
                                {"budget", st.budget},
                                {"simq_calls", st.simq_calls}});
      jp["scenarios"].push_back(std::move(jr));
    }
    root["planners"].push_back(std::move(jp));
  }
  std::string summary = root.dump(2);
  {
    auto f = open_out("summary.json");
    f << summary << '\n';
  }
  return summary;
}

}  // namespace watrec
