#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "reoc/automaton.hpp"
#include "reoc/connector.hpp"
#include "reoc/errors.hpp"
#include "reoc/regions.hpp"
#include "json.hpp"

namespace reoc {

enum class Strategy { Centralized, Distributed, Middleground, Mixed };

std::string to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view name);
inline constexpr Strategy kAllStrategies[] = {Strategy::Centralized, Strategy::Distributed,
                                              Strategy::Middleground, Strategy::Mixed};

inline constexpr std::size_t kDefaultBudget = 1'000'000;

struct FoldOptions {
  std::size_t budget = kDefaultBudget;
  /// Quotient by bisimulation after every step.
  bool reduce = true;
  std::string unit = "0";
};

struct FoldResult {
  Automaton automaton;
  std::vector<FoldStep> log;
};

/// Greedy product fold. Starts from the first member, then repeatedly takes
/// the member sharing most ports with the accumulator (ties: lowest index).
/// After each product, hides the `hide_set` ports no remaining member uses.
/// Throws BudgetExceeded carrying the log so far.
FoldResult fold_region(std::span<const Automaton> members, std::span<const std::string> hide_set,
                       const FoldOptions& opts = {}, std::span<const std::string> names = {});

struct Unit {
  int id = 0;
  std::string role;  // region kind, or "whole"
  std::vector<std::string> members;
  Automaton automaton;
};

struct UnitStats {
  int unit = 0;
  std::size_t states = 0;
  std::size_t transitions = 0;
};

struct CompileStats {
  std::vector<UnitStats> units;
  std::size_t total_states = 0;
  std::size_t total_transitions = 0;
  std::size_t max_states = 0;
  std::size_t max_transitions = 0;
  int m1 = 0;
  int m2 = 0;
  std::vector<FoldStep> fold_log;
  double wall_ms = 0.0;
};

struct CompiledProtocol {
  Strategy strategy = Strategy::Centralized;
  std::vector<Unit> units;
  /// Port -> the two unit ids sharing it.
  std::map<std::string, std::pair<int, int>> shared_ports;
  std::vector<std::string> external_ports;
  CompileStats stats;

  /// Unit owning an external port.
  [[nodiscard]] int owner_of(const std::string& port) const;
};

struct CompileOptions {
  std::size_t budget = kDefaultBudget;
  bool reduce = true;
};

/// Throws ValidationError, DomainMismatch, BudgetExceeded.
CompiledProtocol compile(const Connector& c, Strategy s, const DataDomain& domain,
                         const CompileOptions& opts = {});

/// Product of every unit with all shared ports hidden: the protocol the
/// units denote together.
Automaton flatten(const CompiledProtocol& cp, const FoldOptions& opts = {});

/// The centralized automaton of a connector over `domain`.
Automaton centralized_automaton(const Connector& c, const DataDomain& domain,
                                const CompileOptions& opts = {});

struct ScanPattern {
  std::vector<std::string> ports;  // sorted
  bool found = false;
};

struct ScanReport {
  std::string connector;
  int buffers = 0;
  std::size_t product_states = 0;
  std::size_t product_transitions = 0;
  /// Unions of x >= 2 consecutive upward moves {I_i, O_i+1}; searched in the
  /// unhidden full product.
  std::vector<ScanPattern> moves;
  /// Unions of the sink step {Z, O_1} with the move {I_1, O_2}, searched
  /// in the middleground synchronous-region unit.
  std::vector<ScanPattern> region_unions;

  [[nodiscard]] bool any_move_found() const;
};

/// Scans a connector whose buffers are fifo1 channels F1..Fn (alternator
/// shape, I_i = Fi.src, O_i = Fi.snk). Throws ValidationError otherwise,
/// BudgetExceeded when the full product is too large.
ScanReport disabled_transition_scan(const Connector& c, const DataDomain& domain,
                                    std::size_t budget = kDefaultBudget);

nlohmann::ordered_json to_json(const ScanReport& r);

}  // namespace reoc
