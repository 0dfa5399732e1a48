#include "watrec/network.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "watrec/error.hpp"

namespace watrec {

using nlohmann::json;

namespace {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ComponentKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "Well") return ComponentKind::Well;
  if (s == "BoosterPump") return ComponentKind::BoosterPump;
  if (s == "Tank") return ComponentKind::Tank;
  if (s == "PipeSegment") return ComponentKind::PipeSegment;
  throw ConfigError(where + ": unknown component kind '" + s + "'");
}

}  // namespace

WaterNetwork::WaterNetwork(std::vector<Component> components, std::vector<EdgeDef> edges,
                           std::vector<DemandRegion> regions)
    : components_(std::move(components)),
      edge_defs_(std::move(edges)),
      regions_(std::move(regions)) {
  build_indices();
  validate();
}

int WaterNetwork::component_index(std::string_view id) const {
  auto it = component_by_id_.find(std::string(id));
  return it == component_by_id_.end() ? -1 : it->second;
}

int WaterNetwork::node_index(std::string_view name) const {
  auto it = node_by_name_.find(std::string(name));
  return it == node_by_name_.end() ? -1 : it->second;
}

int WaterNetwork::count_kind(ComponentKind k) const {
  int n = 0;
  for (const auto& c : components_)
    if (c.kind == k) ++n;
  return n;
}

void WaterNetwork::build_indices() {
  for (size_t i = 0; i < components_.size(); ++i) {
    const auto& c = components_[i];
    if (c.id.empty()) throw ConfigError("component " + std::to_string(i) + " has an empty id");
    if (!component_by_id_.emplace(c.id, static_cast<int>(i)).second)
      throw ConfigError("duplicate component id '" + c.id + "'");
  }

  auto intern_node = [this](const std::string& name) {
    auto it = node_by_name_.find(name);
    if (it != node_by_name_.end()) return it->second;
    int idx = static_cast<int>(node_names_.size());
    node_names_.push_back(name);
    node_by_name_.emplace(name, idx);
    return idx;
  };

  for (const auto& c : components_)
    if (c.kind != ComponentKind::PipeSegment) {
      if (c.attached_node.empty())
        throw ConfigError("component '" + c.id + "': facilities need an attached node");
      intern_node(c.attached_node);
    }
  for (const auto& e : edge_defs_) {
    intern_node(e.a);
    intern_node(e.b);
  }
  for (const auto& r : regions_) {
    if (node_by_name_.find(r.node) == node_by_name_.end())
      throw ConfigError("demand region node '" + r.node + "' appears on no edge or facility");
  }

  adjacency_.assign(node_names_.size(), {});
  node_guards_.assign(node_names_.size(), {});
  node_population_.assign(node_names_.size(), 0);

  std::vector<int> pipe_use(components_.size(), 0);
  for (size_t i = 0; i < edge_defs_.size(); ++i) {
    const auto& e = edge_defs_[i];
    int pipe = component_index(e.pipe_id);
    if (pipe < 0)
      throw ConfigError("edge " + std::to_string(i) + ": unknown pipe '" + e.pipe_id + "'");
    if (components_[static_cast<size_t>(pipe)].kind != ComponentKind::PipeSegment)
      throw ConfigError("edge " + std::to_string(i) + ": component '" + e.pipe_id +
                        "' is not a pipe segment");
    if (++pipe_use[static_cast<size_t>(pipe)] > 1)
      throw ConfigError("pipe '" + e.pipe_id + "' is referenced by more than one edge");
    int a = node_index(e.a), b = node_index(e.b);
    if (a == b) throw ConfigError("edge " + std::to_string(i) + " connects '" + e.a + "' to itself");
    edges_.push_back({a, b, pipe});
    adjacency_[static_cast<size_t>(a)].push_back({b, pipe});
    adjacency_[static_cast<size_t>(b)].push_back({a, pipe});
  }
  for (size_t i = 0; i < components_.size(); ++i)
    if (components_[i].kind == ComponentKind::PipeSegment && pipe_use[i] == 0)
      throw ConfigError("pipe '" + components_[i].id + "' lies on no edge");

  for (size_t i = 0; i < components_.size(); ++i) {
    const auto& c = components_[i];
    if (c.kind == ComponentKind::PipeSegment) continue;
    int node = node_index(c.attached_node);
    if (c.kind == ComponentKind::Well)
      wells_.push_back({static_cast<int>(i), node});
    else
      node_guards_[static_cast<size_t>(node)].push_back(static_cast<int>(i));
  }

  for (const auto& r : regions_) {
    node_population_[static_cast<size_t>(node_index(r.node))] += r.population;
    total_population_ += r.population;
  }
}

void WaterNetwork::validate() const {
  for (const auto& c : components_) {
    if (c.kind == ComponentKind::PipeSegment) {
      if (!(c.pipe_length_km > 0.0))
        throw ConfigError("pipe '" + c.id + "': length_km must be positive");
      if (c.pipe_k < 0.0) throw ConfigError("pipe '" + c.id + "': K must be nonnegative");
      if (!c.attached_node.empty())
        throw ConfigError("pipe '" + c.id + "': pipes lie on edges, not nodes");
    } else {
      if (c.pipe_length_km != 0.0 || c.pipe_k != 0.0)
        throw ConfigError("component '" + c.id + "': length_km/K apply to pipes only");
    }
  }
  if (wells_.empty()) throw ConfigError("network has no wells");
  if (regions_.empty()) throw ConfigError("network has no demand regions");
  for (const auto& r : regions_)
    if (r.population <= 0)
      throw ConfigError("demand region '" + r.node + "': population must be positive");

  std::vector<DamageState> pristine(components_.size(), DamageState::None);
  if (serviceable_population(pristine) != total_population_) {
    // plain connectivity sweep to name one offender
    std::vector<char> seen(node_names_.size(), 0);
    std::deque<int> q;
    for (const auto& [comp, node] : wells_)
      if (!seen[static_cast<size_t>(node)]) {
        seen[static_cast<size_t>(node)] = 1;
        q.push_back(node);
      }
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (const auto& [v, pipe] : adjacency_[static_cast<size_t>(u)])
        if (!seen[static_cast<size_t>(v)]) {
          seen[static_cast<size_t>(v)] = 1;
          q.push_back(v);
        }
    }
    for (const auto& r : regions_)
      if (!seen[static_cast<size_t>(node_index(r.node))])
        throw ConfigError("demand region '" + r.node + "' is unreachable from every well");
    throw ConfigError("network is not fully serviceable when undamaged");
  }
}

std::int64_t WaterNetwork::serviceable_population(std::span<const DamageState> by_component,
                                                  const ServiceabilityOptions& opt) const {
  if (by_component.size() != components_.size())
    throw ConfigError("damage vector covers " + std::to_string(by_component.size()) +
                      " components, network has " + std::to_string(components_.size()));

  std::vector<char> node_ok(node_names_.size(), 1);
  for (size_t n = 0; n < node_guards_.size(); ++n)
    for (int guard : node_guards_[n])
      if (!is_operational(by_component[static_cast<size_t>(guard)], opt)) {
        node_ok[n] = 0;
        break;
      }

  std::vector<char> visited(node_names_.size(), 0);
  std::deque<int> queue;
  for (const auto& [comp, node] : wells_) {
    if (!is_operational(by_component[static_cast<size_t>(comp)], opt)) continue;
    if (!node_ok[static_cast<size_t>(node)]) continue;
    if (!visited[static_cast<size_t>(node)]) {
      visited[static_cast<size_t>(node)] = 1;
      queue.push_back(node);
    }
  }
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (const auto& [v, pipe] : adjacency_[static_cast<size_t>(u)]) {
      if (visited[static_cast<size_t>(v)]) continue;
      if (!is_operational(by_component[static_cast<size_t>(pipe)], opt)) continue;
      if (!node_ok[static_cast<size_t>(v)]) continue;
      visited[static_cast<size_t>(v)] = 1;
      queue.push_back(v);
    }
  }

  std::int64_t served = 0;
  for (size_t n = 0; n < node_population_.size(); ++n)
    if (visited[n]) served += node_population_[n];
  return served;
}

std::int64_t WaterNetwork::serviceable_population(
    const std::unordered_map<std::string, DamageState>& damage,
    const ServiceabilityOptions& opt) const {
  std::vector<DamageState> dense(components_.size(), DamageState::None);
  for (const auto& [id, state] : damage) {
    int idx = component_index(id);
    if (idx < 0) throw ConfigError("damage map names unknown component '" + id + "'");
    dense[static_cast<size_t>(idx)] = state;
  }
  if (damage.size() != components_.size())
    for (const auto& c : components_)
      if (damage.find(c.id) == damage.end())
        throw ConfigError("damage map is missing component '" + c.id + "'");
  return serviceable_population(dense, opt);
}

WaterNetwork WaterNetwork::from_json_file(const std::string& path) {
  return from_json_text(read_text_file(path), path);
}

WaterNetwork WaterNetwork::from_json_text(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }

  try {
    if (!doc.is_object()) throw ConfigError("top level must be an object");
    std::vector<Component> components;
    for (size_t i = 0; i < doc.at("components").size(); ++i) {
      const json& jc = doc.at("components").at(i);
      std::string where = "components[" + std::to_string(i) + "]";
      Component c;
      c.id = jc.at("id").get<std::string>();
      c.kind = parse_kind(jc.at("kind").get<std::string>(), where);
      if (jc.contains("site")) {
        c.site[0] = jc.at("site").at(0).get<double>();
        c.site[1] = jc.at("site").at(1).get<double>();
      }
      if (c.kind == ComponentKind::PipeSegment) {
        c.pipe_length_km = jc.at("length_km").get<double>();
        if (jc.contains("K")) c.pipe_k = jc.at("K").get<double>();
      } else {
        c.attached_node = jc.at("node").get<std::string>();
      }
      components.push_back(std::move(c));
    }

    std::vector<EdgeDef> edges;
    for (const json& je : doc.at("edges")) {
      edges.push_back({je.at("a").get<std::string>(), je.at("b").get<std::string>(),
                       je.at("pipe").get<std::string>()});
    }

    std::vector<DemandRegion> regions;
    for (const json& jr : doc.at("demand_regions")) {
      regions.push_back({jr.at("node").get<std::string>(), jr.at("population").get<std::int64_t>()});
    }

    return WaterNetwork(std::move(components), std::move(edges), std::move(regions));
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

}  // namespace watrec
