#include "watrec/hazard.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "watrec/error.hpp"
#include "watrec/stats.hpp"

namespace watrec {

using nlohmann::json;

const FragilityRow& FragilitySet::row(ComponentKind k) const {
  switch (k) {
    case ComponentKind::Well: return well;
    case ComponentKind::BoosterPump: return booster_pump;
    case ComponentKind::Tank: return tank;
    default: throw ConfigError("pipes have no fragility row");
  }
}

RepairTimeTable RepairTimeTable::standard() {
  RepairTimeTable t;
  // HAZUS-style mean restoration days, Minor..Complete.
  t.facility_mean_days[0] = {0.8, 1.5, 10.5, 26.0};  // wells
  t.facility_mean_days[1] = {0.9, 3.1, 13.5, 35.0};  // booster pump stations
  t.facility_mean_days[2] = {1.2, 3.1, 93.0, 155.0}; // tanks
  t.pipe_days_per_break = 1.0;
  return t;
}

double RepairTimeTable::mean_days(ComponentKind kind, DamageState state,
                                  double pipe_breaks) const {
  if (state == DamageState::None)
    throw ConfigError("undamaged components have no repair time");
  if (kind == ComponentKind::PipeSegment) {
    if (!(pipe_breaks > 0.0)) throw ConfigError("failed pipes need a positive break count");
    return pipe_breaks * pipe_days_per_break;
  }
  return facility_mean_days[static_cast<size_t>(kind)][static_cast<size_t>(damaged_index(state))];
}

double site_distance_km(const SeismicEvent& ev, const std::array<double, 2>& site) {
  return std::hypot(site[0] - ev.epicenter[0], site[1] - ev.epicenter[1]);
}

double median_intensity(const SeismicEvent& ev, const std::array<double, 2>& site,
                        const GmpeParams& gmpe) {
  double r = site_distance_km(ev, site);
  return std::exp(gmpe.a0 + gmpe.a1 * ev.magnitude - gmpe.a2 * std::log(r + gmpe.c));
}

double sample_intensity(const SeismicEvent& ev, const std::array<double, 2>& site,
                        const GmpeParams& gmpe, Rng& rng) {
  return median_intensity(ev, site, gmpe) * std::exp(gmpe.sigma_ln * sample_normal(rng));
}

std::array<double, kNumDamagedStates> exceedance_probabilities(const FragilityRow& row,
                                                               double im) {
  std::array<double, kNumDamagedStates> p{};
  if (!(im > 0.0)) return p;
  for (int s = 0; s < kNumDamagedStates; ++s) {
    const auto& c = row.curve[static_cast<size_t>(s)];
    p[static_cast<size_t>(s)] = norm_cdf(std::log(im / c.median) / c.beta);
  }
  return p;
}

DamageState sample_facility_damage(const FragilityRow& row, double pga, Rng& rng) {
  auto exceed = exceedance_probabilities(row, pga);
  double u = rng.uniform01();
  // P(state == s) = P(>= s) - P(>= s+1); walk from Complete down.
  for (int s = kNumDamagedStates - 1; s >= 0; --s)
    if (u < exceed[static_cast<size_t>(s)]) return static_cast<DamageState>(s + 1);
  return DamageState::None;
}

double pipe_break_rate(double k, double length_km, double pgv_cm_s) {
  if (k < 0.0 || length_km < 0.0 || pgv_cm_s < 0.0)
    throw ConfigError("pipe break rate inputs must be nonnegative");
  return k * 0.00187 * pgv_cm_s * length_km;
}

double pipe_failure_probability(double k, double length_km, double pgv_cm_s) {
  return -std::expm1(-pipe_break_rate(k, length_km, pgv_cm_s));
}

DamageScenario sample_scenario(const WaterNetwork& net, const HazardModel& hazard, Rng& rng) {
  DamageScenario out(static_cast<size_t>(net.num_components()));
  for (int i = 0; i < net.num_components(); ++i) {
    const Component& c = net.component(i);
    auto& d = out[static_cast<size_t>(i)];
    if (c.kind == ComponentKind::PipeSegment) {
      double pgv = sample_intensity(hazard.event, c.site, hazard.gmpe_pgv, rng);
      double k = c.pipe_k > 0.0 ? c.pipe_k : hazard.pipe_k_default;
      double rate = pipe_break_rate(k, c.pipe_length_km, pgv);
      if (rng.uniform01() < -std::expm1(-rate)) {
        d.state = DamageState::Complete;
        d.pipe_breaks = rate;
      }
    } else {
      double pga = sample_intensity(hazard.event, c.site, hazard.gmpe_pga, rng);
      d.state = sample_facility_damage(hazard.fragility.row(c.kind), pga, rng);
    }
  }
  return out;
}

namespace {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

GmpeParams parse_gmpe(const json& j, const std::string& where) {
  GmpeParams g;
  g.a0 = j.at("a0").get<double>();
  g.a1 = j.at("a1").get<double>();
  g.a2 = j.at("a2").get<double>();
  g.c = j.at("c").get<double>();
  g.sigma_ln = j.at("sigma_ln").get<double>();
  if (g.c <= 0.0) throw ConfigError(where + ": c must be positive");
  if (g.sigma_ln < 0.0) throw ConfigError(where + ": sigma_ln must be nonnegative");
  return g;
}

FragilityRow parse_fragility_row(const json& j, const std::string& where) {
  static constexpr const char* names[] = {"Minor", "Moderate", "Extensive", "Complete"};
  FragilityRow row;
  double prev = 0.0;
  for (int s = 0; s < kNumDamagedStates; ++s) {
    const json& jc = j.at(names[s]);
    auto& c = row.curve[static_cast<size_t>(s)];
    c.median = jc.at("median").get<double>();
    c.beta = jc.at("beta").get<double>();
    if (!(c.median > prev))
      throw ConfigError(where + ": fragility medians must increase across damage states");
    if (!(c.beta > 0.0)) throw ConfigError(where + ": fragility beta must be positive");
    prev = c.median;
  }
  return row;
}

}  // namespace

HazardModel HazardModel::from_json_file(const std::string& path) {
  return from_json_text(read_text_file(path), path);
}

HazardModel HazardModel::from_json_text(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }

  try {
    HazardModel h;
    const json& ev = doc.at("event");
    h.event.magnitude = ev.at("magnitude").get<double>();
    h.event.epicenter[0] = ev.at("epicenter").at(0).get<double>();
    h.event.epicenter[1] = ev.at("epicenter").at(1).get<double>();
    if (!(h.event.magnitude > 0.0)) throw ConfigError("event.magnitude must be positive");

    h.gmpe_pga = parse_gmpe(doc.at("gmpe_pga"), "gmpe_pga");
    h.gmpe_pgv = parse_gmpe(doc.at("gmpe_pgv"), "gmpe_pgv");

    const json& frag = doc.at("fragility");
    h.fragility.well = parse_fragility_row(frag.at("Well"), "fragility.Well");
    h.fragility.booster_pump = parse_fragility_row(frag.at("BoosterPump"), "fragility.BoosterPump");
    h.fragility.tank = parse_fragility_row(frag.at("Tank"), "fragility.Tank");

    if (doc.contains("pipe")) {
      const json& p = doc.at("pipe");
      if (p.contains("K")) h.pipe_k_default = p.at("K").get<double>();
      if (p.contains("days_per_break"))
        h.repair.pipe_days_per_break = p.at("days_per_break").get<double>();
    }
    if (!(h.pipe_k_default > 0.0)) throw ConfigError("pipe.K must be positive");
    if (!(h.repair.pipe_days_per_break > 0.0))
      throw ConfigError("pipe.days_per_break must be positive");

    if (doc.contains("repair_times")) {
      static constexpr const char* kinds[] = {"Well", "BoosterPump", "Tank"};
      static constexpr const char* states[] = {"Minor", "Moderate", "Extensive", "Complete"};
      const json& rt = doc.at("repair_times");
      for (int k = 0; k < 3; ++k) {
        if (!rt.contains(kinds[k])) continue;
        for (int s = 0; s < kNumDamagedStates; ++s) {
          double v = rt.at(kinds[k]).at(states[s]).get<double>();
          if (!(v > 0.0)) throw ConfigError("repair_times must be positive");
          h.repair.facility_mean_days[static_cast<size_t>(k)][static_cast<size_t>(s)] = v;
        }
      }
    }
    return h;
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

}  // namespace watrec
