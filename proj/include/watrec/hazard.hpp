#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "watrec/network.hpp"
#include "watrec/rng.hpp"

namespace watrec {

struct SeismicEvent {
  double magnitude = 6.9;
  std::array<double, 2> epicenter{0.0, 0.0};  // km, same frame as component sites
};

// ln IM = a0 + a1*Mw - a2*ln(R + c) + sigma_ln * Z. PGA in g, PGV in cm/s.
struct GmpeParams {
  double a0 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double c = 0.0;
  double sigma_ln = 0.0;
};

struct FragilityCurve {
  double median = 0.0;  // intensity at 50% exceedance
  double beta = 0.0;    // lognormal dispersion
};

// One row per facility kind, curves for Minor..Complete with increasing medians.
struct FragilityRow {
  std::array<FragilityCurve, kNumDamagedStates> curve;
};

struct FragilitySet {
  FragilityRow well, booster_pump, tank;
  const FragilityRow& row(ComponentKind k) const;
};

// Mean repair days by facility kind and damage state; pipe repairs scale with
// the expected break count.
struct RepairTimeTable {
  // [Well, BoosterPump, Tank] x [Minor, Moderate, Extensive, Complete]
  std::array<std::array<double, kNumDamagedStates>, 3> facility_mean_days{};
  double pipe_days_per_break = 1.0;
  static RepairTimeTable standard();
  double mean_days(ComponentKind kind, DamageState state, double pipe_breaks) const;
};

struct HazardModel {
  SeismicEvent event;
  GmpeParams gmpe_pga, gmpe_pgv;
  FragilitySet fragility;
  double pipe_k_default = 1.0;
  RepairTimeTable repair = RepairTimeTable::standard();

  static HazardModel from_json_file(const std::string& path);
  static HazardModel from_json_text(const std::string& text,
                                    const std::string& origin = "<memory>");
};

double site_distance_km(const SeismicEvent& ev, const std::array<double, 2>& site);

// Median (Z = 0) intensity at a site.
double median_intensity(const SeismicEvent& ev, const std::array<double, 2>& site,
                        const GmpeParams& gmpe);

// One lognormal draw around the median.
double sample_intensity(const SeismicEvent& ev, const std::array<double, 2>& site,
                        const GmpeParams& gmpe, Rng& rng);

// P(state >= each damaged state) at intensity `im`, nonincreasing across states.
std::array<double, kNumDamagedStates> exceedance_probabilities(const FragilityRow& row,
                                                               double im);

DamageState sample_facility_damage(const FragilityRow& row, double pga, Rng& rng);

// Expected break count for a segment of `length_km` at peak ground velocity
// `pgv_cm_s`: an upper-bound break rate linear in PGV.
double pipe_break_rate(double k, double length_km, double pgv_cm_s);

// P(at least one break) = 1 - exp(-rate).
double pipe_failure_probability(double k, double length_km, double pgv_cm_s);

struct ComponentDamage {
  DamageState state = DamageState::None;
  double pipe_breaks = 0.0;  // expected breaks for failed pipes, else 0
};

using DamageScenario = std::vector<ComponentDamage>;  // indexed by component

// Samples intensities and damage for every component, in component order.
DamageScenario sample_scenario(const WaterNetwork& net, const HazardModel& hazard, Rng& rng);

}  // namespace watrec
