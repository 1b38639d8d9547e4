#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reoc/automaton.hpp"
#include "reoc/data.hpp"

namespace reoc {

enum class NodeKind { BoundarySource, BoundarySink, Internal };

struct Node {
  std::string name;
  NodeKind kind = NodeKind::Internal;
  friend bool operator==(const Node&, const Node&) = default;
};

enum class ChannelKind { Sync, SyncDrain, Fifo1, Fifo1Full };

/// A channel with ends `<id>.src` (attached to `src`) and `<id>.snk`
/// (attached to `snk`). For SyncDrain both ends take data from their node.
struct Channel {
  std::string id;
  ChannelKind kind = ChannelKind::Sync;
  std::string src;
  std::string snk;
  std::string init;  // Fifo1Full only
  friend bool operator==(const Channel&, const Channel&) = default;
};

struct Connector {
  std::string name;
  std::vector<Node> nodes;
  std::vector<Channel> channels;
  std::optional<std::vector<std::string>> domain;  // absent: data-agnostic

  [[nodiscard]] DataDomain data_domain() const;
  [[nodiscard]] const Node* node(std::string_view name) const;
  /// External ports of the boundary nodes, sorted.
  [[nodiscard]] std::vector<std::string> external_ports() const;

  friend bool operator==(const Connector&, const Connector&) = default;
};

std::string src_port(const Channel& c);
std::string snk_port(const Channel& c);
std::string external_port(std::string_view node);

/// Throws ValidationError on dangling ends, boundary violations, duplicate
/// names, a disconnected graph, or an init literal outside the domain.
void validate(const Connector& c);

/// Line-oriented connector source. Throws SyntaxError or ValidationError.
Connector parse_connector(std::string_view text);

/// Canonical source text; parse_connector(serialize(c)) == c for connectors
/// whose nodes are grouped sources, sinks, internals.
std::string serialize(const Connector& c);

struct PrimitiveCA {
  std::string owner;  // channel id or node name
  bool is_channel = false;
  Automaton automaton;
};

/// One automaton per channel (declaration order) then per node.
/// Throws DomainMismatch when a fifo1full literal is outside `domain`.
std::vector<PrimitiveCA> primitive_automata(const Connector& c, const DataDomain& domain);

enum class Family { Alternator, AsyncMerger, Sequencer, SyncChain };

struct FamilySpec {
  Family family = Family::Alternator;
  int size = 2;
  std::optional<std::vector<std::string>> domain;
};

inline constexpr int kMaxFamilySize = 4096;

/// Throws InvalidSize.
Connector gen_family(const FamilySpec& spec);

std::optional<Family> parse_family(std::string_view name);
std::string family_name(Family f);

}  // namespace reoc
