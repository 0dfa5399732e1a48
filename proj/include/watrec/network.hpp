#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "watrec/damage.hpp"

namespace watrec {

enum class ComponentKind : std::uint8_t { Well, BoosterPump, Tank, PipeSegment };

constexpr std::string_view to_string(ComponentKind k) noexcept {
  switch (k) {
    case ComponentKind::Well: return "Well";
    case ComponentKind::BoosterPump: return "BoosterPump";
    case ComponentKind::Tank: return "Tank";
    case ComponentKind::PipeSegment: return "PipeSegment";
  }
  return "?";
}

struct Component {
  std::string id;
  ComponentKind kind = ComponentKind::Well;
  std::array<double, 2> site{0.0, 0.0};  // km in the local grid
  std::string attached_node;             // facilities only; pipes live on edges
  double pipe_length_km = 0.0;           // > 0 iff PipeSegment
  double pipe_k = 0.0;                   // ground-motion vulnerability factor; 0 = use hazard default
};

struct DemandRegion {
  std::string node;
  std::int64_t population = 0;
};

struct ServiceabilityOptions {
  // When true, Minor damage leaves a component operational.
  bool minor_is_functional = false;
};

// Operational components deliver/carry water; damaged ones don't. Only the
// Minor state is policy-dependent.
constexpr bool is_operational(DamageState damage, const ServiceabilityOptions& opt = {}) noexcept {
  if (damage == DamageState::None) return true;
  if (damage == DamageState::Minor) return opt.minor_is_functional;
  return false;
}

// Undirected water network: nodes joined by pipe-segment edges, with wells,
// booster pump stations, and tanks attached to nodes. Demand regions hold the
// served population. Immutable after construction; all loaders validate.
class WaterNetwork {
 public:
  struct EdgeDef {
    std::string a, b;
    std::string pipe_id;
  };
  struct Edge {
    int node_a, node_b;
    int pipe;  // component index
  };

  WaterNetwork(std::vector<Component> components, std::vector<EdgeDef> edges,
               std::vector<DemandRegion> regions);

  static WaterNetwork from_json_file(const std::string& path);
  static WaterNetwork from_json_text(const std::string& text,
                                     const std::string& origin = "<memory>");

  int num_components() const { return static_cast<int>(components_.size()); }
  int num_nodes() const { return static_cast<int>(node_names_.size()); }
  const Component& component(int idx) const { return components_[static_cast<size_t>(idx)]; }
  const std::vector<Component>& components() const { return components_; }
  int component_index(std::string_view id) const;  // -1 when absent
  int node_index(std::string_view name) const;     // -1 when absent
  const std::string& node_name(int idx) const { return node_names_[static_cast<size_t>(idx)]; }

  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<DemandRegion>& demand_regions() const { return regions_; }
  std::int64_t total_population() const { return total_population_; }
  int count_kind(ComponentKind k) const;

  // Population of every region reachable from an operational well through
  // passable nodes and edges. `by_component` is indexed by component.
  std::int64_t serviceable_population(std::span<const DamageState> by_component,
                                      const ServiceabilityOptions& opt = {}) const;

  // Id-keyed variant; every key must name a component.
  std::int64_t serviceable_population(
      const std::unordered_map<std::string, DamageState>& damage,
      const ServiceabilityOptions& opt = {}) const;

  // (component, node) of each well / its wellhead.
  const std::vector<std::pair<int, int>>& wells() const { return wells_; }
  // Pump/tank components guarding each node; a node is passable only when all
  // its guards are operational.
  const std::vector<std::vector<int>>& node_guards() const { return node_guards_; }
  const std::vector<std::vector<std::pair<int, int>>>& adjacency() const { return adjacency_; }
  std::int64_t node_population(int node) const { return node_population_[static_cast<size_t>(node)]; }

 private:
  void build_indices();
  void validate() const;

  std::vector<Component> components_;
  std::vector<EdgeDef> edge_defs_;
  std::vector<DemandRegion> regions_;

  std::vector<std::string> node_names_;
  std::unordered_map<std::string, int> node_by_name_;
  std::unordered_map<std::string, int> component_by_id_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::pair<int, int>>> adjacency_;  // node -> (neighbor, pipe)
  std::vector<std::vector<int>> node_guards_;
  std::vector<std::pair<int, int>> wells_;
  std::vector<std::int64_t> node_population_;
  std::int64_t total_population_ = 0;
};

}  // namespace watrec
