#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "reoc/connector.hpp"

namespace reoc {

enum class RegionKind { Synchronous, Asynchronous, Mixed };
std::string to_string(RegionKind k);

/// Asynchronous iff every transition fires at most one port.
RegionKind classify(const Automaton& a);
inline RegionKind classify(const PrimitiveCA& p) { return classify(p.automaton); }

struct Region {
  int id = 0;
  RegionKind kind = RegionKind::Synchronous;
  std::vector<std::size_t> members;        // indices into the primitive list, ascending
  std::vector<std::string> internal_ports;  // sorted
  std::vector<std::string> boundary_ports;  // sorted
  bool external = false;                   // owns an external port
};

struct RegionPartition {
  std::vector<Region> regions;  // ascending id
  std::set<std::pair<int, int>> adjacency;  // (lo, hi) pairs of region ids
  int m1 = 0;  // asynchronous regions
  int m2 = 0;  // synchronous or mixed regions

  [[nodiscard]] const Region* find(int id) const;
  [[nodiscard]] std::vector<int> neighbours(int id) const;
};

/// One region per asynchronous primitive; synchronous primitives grouped by
/// connected components of port sharing.
RegionPartition split(const std::vector<PrimitiveCA>& primitives,
                      const std::vector<std::string>& external_ports);

enum class MergeOrder { Ascending, Descending };

/// Absorbs every asynchronous region without external ports whose only
/// neighbour is a synchronous or mixed region, to fixpoint.
RegionPartition merge_mixed(const RegionPartition& pt, const std::vector<PrimitiveCA>& primitives,
                            const std::vector<std::string>& external_ports,
                            MergeOrder order = MergeOrder::Ascending);

/// Number of absorptions merge_mixed performs.
int merge_count(const RegionPartition& before, const RegionPartition& after);

/// {regions:[{id, kind, members, boundary_ports}], edges, m1, m2}
nlohmann::ordered_json to_json(const RegionPartition& pt, const std::vector<PrimitiveCA>& primitives);

}  // namespace reoc
