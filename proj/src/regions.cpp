#include "reoc/regions.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace reoc {

std::string to_string(RegionKind k) {
  switch (k) {
    case RegionKind::Synchronous: return "synchronous";
    case RegionKind::Asynchronous: return "asynchronous";
    case RegionKind::Mixed: return "mixed";
  }
  return "?";
}

RegionKind classify(const Automaton& a) {
  for (const auto& t : a.transitions())
    if (t.sync.count() > 1) return RegionKind::Synchronous;
  return RegionKind::Asynchronous;
}

const Region* RegionPartition::find(int id) const {
  for (const auto& r : regions)
    if (r.id == id) return &r;
  return nullptr;
}

std::vector<int> RegionPartition::neighbours(int id) const {
  std::vector<int> out;
  for (auto [x, y] : adjacency) {
    if (x == id) out.push_back(y);
    if (y == id) out.push_back(x);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Recomputes port sets, adjacency and counts from region memberships.
void finish(RegionPartition& pt, const std::vector<PrimitiveCA>& prims,
            const std::vector<std::string>& external_ports) {
  std::set<std::string> ext(external_ports.begin(), external_ports.end());
  std::map<std::string, std::set<int>> owners;  // port -> regions using it
  for (const auto& r : pt.regions)
    for (auto m : r.members)
      for (const auto& p : prims[m].automaton.ports()) owners[p].insert(r.id);

  pt.adjacency.clear();
  for (const auto& [port, rs] : owners)
    for (auto i = rs.begin(); i != rs.end(); ++i)
      for (auto j = std::next(i); j != rs.end(); ++j) pt.adjacency.insert({*i, *j});

  pt.m1 = pt.m2 = 0;
  for (auto& r : pt.regions) {
    std::set<std::string> ports;
    for (auto m : r.members)
      for (const auto& p : prims[m].automaton.ports()) ports.insert(p);
    r.internal_ports.clear();
    r.boundary_ports.clear();
    r.external = false;
    for (const auto& p : ports) {
      bool is_ext = ext.count(p) > 0;
      r.external = r.external || is_ext;
      if (is_ext || owners[p].size() > 1)
        r.boundary_ports.push_back(p);
      else
        r.internal_ports.push_back(p);
    }
    (r.kind == RegionKind::Asynchronous ? pt.m1 : pt.m2)++;
  }
}

}  // namespace

RegionPartition split(const std::vector<PrimitiveCA>& prims,
                      const std::vector<std::string>& external_ports) {
  const std::size_t n = prims.size();
  std::vector<RegionKind> kind(n);
  for (std::size_t i = 0; i < n; ++i) kind[i] = classify(prims[i]);

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::map<std::string, std::size_t> first_sync_owner;
  for (std::size_t i = 0; i < n; ++i) {
    if (kind[i] != RegionKind::Synchronous) continue;
    for (const auto& p : prims[i].automaton.ports()) {
      auto [it, fresh] = first_sync_owner.try_emplace(p, i);
      if (!fresh) {
        auto a = find(i), b = find(it->second);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }

  // Regions ordered by their least member index.
  RegionPartition pt;
  std::map<std::size_t, std::size_t> root_region;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t key = kind[i] == RegionKind::Synchronous ? find(i) : i;
    auto [it, fresh] = root_region.try_emplace(key, pt.regions.size());
    if (fresh) {
      Region r;
      r.id = static_cast<int>(pt.regions.size());
      r.kind = kind[i];
      pt.regions.push_back(std::move(r));
    }
    pt.regions[it->second].members.push_back(i);
  }
  finish(pt, prims, external_ports);
  return pt;
}

RegionPartition merge_mixed(const RegionPartition& in, const std::vector<PrimitiveCA>& prims,
                            const std::vector<std::string>& external_ports, MergeOrder order) {
  RegionPartition pt = in;
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<int> ids;
    for (const auto& r : pt.regions) ids.push_back(r.id);
    if (order == MergeOrder::Descending) std::reverse(ids.begin(), ids.end());
    for (int id : ids) {
      const Region* ar = pt.find(id);
      if (ar == nullptr || ar->kind != RegionKind::Asynchronous || ar->external) continue;
      auto nb = pt.neighbours(id);
      if (nb.size() != 1) continue;
      auto target = std::find_if(pt.regions.begin(), pt.regions.end(),
                                 [&](const Region& r) { return r.id == nb[0]; });
      if (target->kind == RegionKind::Asynchronous) continue;
      target->members.insert(target->members.end(), ar->members.begin(), ar->members.end());
      std::sort(target->members.begin(), target->members.end());
      target->kind = RegionKind::Mixed;
      pt.regions.erase(std::find_if(pt.regions.begin(), pt.regions.end(),
                                    [&](const Region& r) { return r.id == id; }));
      finish(pt, prims, external_ports);
      changed = true;
    }
  }
  return pt;
}

int merge_count(const RegionPartition& before, const RegionPartition& after) {
  return static_cast<int>(before.regions.size()) - static_cast<int>(after.regions.size());
}

nlohmann::ordered_json to_json(const RegionPartition& pt, const std::vector<PrimitiveCA>& prims) {
  nlohmann::ordered_json j;
  auto regions = nlohmann::ordered_json::array();
  for (const auto& r : pt.regions) {
    nlohmann::ordered_json jr;
    jr["id"] = r.id;
    jr["kind"] = to_string(r.kind);
    std::vector<std::string> members;
    for (auto m : r.members) members.push_back(prims[m].owner);
    jr["members"] = members;
    jr["boundary_ports"] = r.boundary_ports;
    regions.push_back(std::move(jr));
  }
  j["regions"] = std::move(regions);
  auto edges = nlohmann::ordered_json::array();
  for (auto [x, y] : pt.adjacency) edges.push_back({x, y});
  j["edges"] = std::move(edges);
  j["m1"] = pt.m1;
  j["m2"] = pt.m2;
  return j;
}

}  // namespace reoc
