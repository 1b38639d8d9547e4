#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "reoc/data.hpp"
#include "reoc/port_set.hpp"

namespace reoc {

/// One CA transition. Port and state indices refer to the owning automaton.
struct Transition {
  uint32_t from = 0;
  PortSet sync;
  Guard guard;
  uint32_t to = 0;

  [[nodiscard]] bool silent() const { return sync.empty(); }
};

/// A guard atom spelled with names, for building automata by hand.
struct NamedAtom {
  Atom::Kind kind = Atom::Kind::PortPort;
  std::string a;
  std::string b;  // port name, or literal for PortLiteral

  static NamedAtom pp(std::string x, std::string y) {
    return {Atom::Kind::PortPort, std::move(x), std::move(y)};
  }
  static NamedAtom pl(std::string port, std::string lit) {
    return {Atom::Kind::PortLiteral, std::move(port), std::move(lit)};
  }
};

/// Constraint automaton. Always kept in canonical order: ports and states
/// sorted by name, transitions sorted by (from, sync, guard, to) and unique.
class Automaton {
public:
  /// The identity for product: one state, no ports, no transitions.
  explicit Automaton(DataDomain domain = {});

  /// Low-level constructor used by the algebra; canonicalizes order.
  Automaton(DataDomain domain, std::vector<std::string> ports, std::vector<std::string> states,
            uint32_t initial, std::vector<Transition> transitions);

  [[nodiscard]] const DataDomain& domain() const { return domain_; }
  [[nodiscard]] const std::vector<std::string>& ports() const { return ports_; }
  [[nodiscard]] const std::vector<std::string>& states() const { return states_; }
  [[nodiscard]] uint32_t initial() const { return initial_; }
  [[nodiscard]] const std::vector<Transition>& transitions() const { return transitions_; }

  /// Transitions leaving `state`, contiguous in canonical order.
  [[nodiscard]] std::span<const Transition> outgoing(uint32_t state) const {
    return {transitions_.data() + offsets_[state], transitions_.data() + offsets_[state + 1]};
  }
  [[nodiscard]] std::size_t outgoing_offset(uint32_t state) const { return offsets_[state]; }

  [[nodiscard]] std::optional<uint32_t> port_index(std::string_view name) const;
  [[nodiscard]] std::optional<uint32_t> state_index(std::string_view name) const;
  [[nodiscard]] std::vector<std::string> port_names(const PortSet& s) const;
  [[nodiscard]] PortSet port_set(std::span<const std::string> names) const;
  [[nodiscard]] PortSet all_ports() const;

  [[nodiscard]] bool has_silent() const;

  /// Throws Error unless every structural invariant holds; silent transitions
  /// are rejected when `allow_silent` is false.
  void validate(bool allow_silent = false) const;

  /// Names of a transition's sync set joined with `sep`, for diagnostics.
  [[nodiscard]] std::string label(const Transition& t, std::string_view sep = ",") const;

private:
  void canonicalize();

  DataDomain domain_;
  std::vector<std::string> ports_;
  std::vector<std::string> states_;
  uint32_t initial_ = 0;
  std::vector<Transition> transitions_;
  std::vector<std::size_t> offsets_;
};

/// Name-based construction of small automata (primitives, tests).
class AutomatonBuilder {
public:
  explicit AutomatonBuilder(DataDomain domain = {}) : domain_(std::move(domain)) {}

  AutomatonBuilder& port(std::string name);
  AutomatonBuilder& state(std::string name);
  AutomatonBuilder& initial(std::string name);
  AutomatonBuilder& transition(std::string from, std::vector<std::string> sync,
                               std::vector<NamedAtom> guard, std::string to);

  /// Throws UnknownPort / Error on dangling references, DomainMismatch on
  /// literals outside the domain. Unsatisfiable guards drop the transition.
  [[nodiscard]] Automaton build() const;

private:
  struct Pending {
    std::string from;
    std::vector<std::string> sync;
    std::vector<NamedAtom> guard;
    std::string to;
  };
  DataDomain domain_;
  std::vector<std::string> ports_;
  std::vector<std::string> states_;
  std::optional<std::string> initial_;
  std::vector<Pending> transitions_;
};

struct ProductOptions {
  std::size_t budget = std::numeric_limits<std::size_t>::max();
  /// When false every state pair is kept, not only those reachable.
  bool reachable_only = true;
};

/// Synchronous product with joint, independent and truly concurrent steps.
/// Throws DomainMismatch, or BudgetExceeded (unit/step left blank) once the
/// transition count passes opts.budget.
Automaton product(const Automaton& a, const Automaton& b, const ProductOptions& opts = {});

/// Hides `hidden` ports: strips them from labels, quantifies them out of
/// guards, folds silent steps into the visible steps that follow them, and
/// prunes. Throws UnknownPort.
Automaton hide(const Automaton& a, std::span<const std::string> hidden,
               std::size_t budget = std::numeric_limits<std::size_t>::max());

/// hide without the final pruning; states only reachable via silent steps
/// are still present.
Automaton eliminate_silent(const Automaton& a, std::span<const std::string> hidden,
                           std::size_t budget = std::numeric_limits<std::size_t>::max());

Automaton prune_unreachable(const Automaton& a);

/// Quotient of the reachable part by the coarsest strong bisimulation over syntactic labels.
/// States are named after the least member of their class.
Automaton reduce(const Automaton& a);

/// Strong bisimilarity over semantic labels (sync set, data assignment).
/// Throws PortMismatch if port sets differ, DomainMismatch on domains.
bool bisimilar(const Automaton& a, const Automaton& b);

struct Counts {
  std::size_t states = 0;
  std::size_t transitions = 0;
  friend bool operator==(const Counts&, const Counts&) = default;
};
Counts counts(const Automaton& a);

/// Renames ports; unmapped ports keep their name. Throws Error on collisions.
Automaton rename_ports(const Automaton& a, const std::map<std::string, std::string>& names);

/// Renames states to q0..qN in breadth-first order from the initial state.
Automaton compact_states(const Automaton& a);

}  // namespace reoc
