#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reoc/port_set.hpp"

namespace reoc {

/// Finite ordered set of data literals. The data-agnostic domain holds the
/// single literal "*" and makes every guard vacuous.
class DataDomain {
public:
  static constexpr std::string_view kAgnosticValue = "*";

  DataDomain();  // data-agnostic
  static DataDomain agnostic() { return {}; }
  /// Throws Error on empty or duplicate values.
  static DataDomain of(std::vector<std::string> values);

  [[nodiscard]] bool is_agnostic() const { return agnostic_; }
  [[nodiscard]] const std::vector<std::string>& values() const { return values_; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] const std::string& value(uint32_t i) const { return values_.at(i); }
  [[nodiscard]] std::optional<uint32_t> index_of(std::string_view lit) const;

  friend bool operator==(const DataDomain&, const DataDomain&) = default;

private:
  bool agnostic_ = true;
  std::vector<std::string> values_;
};

/// One equality atom: port == port, or port == literal. Port indices refer to
/// the owning automaton's port table; literal indices to its domain.
struct Atom {
  enum class Kind : uint8_t { PortPort, PortLiteral };
  Kind kind = Kind::PortPort;
  uint32_t a = 0;
  uint32_t b = 0;

  static Atom pp(uint32_t x, uint32_t y) { return {Kind::PortPort, x, y}; }
  static Atom pl(uint32_t port, uint32_t lit) { return {Kind::PortLiteral, port, lit}; }

  friend auto operator<=>(const Atom&, const Atom&) = default;
};

/// Conjunction of atoms in canonical form (see canonicalize). Empty means true.
using Guard = std::vector<Atom>;

/// Canonical form of a conjunction: per equality class, pp(min, m) for every
/// other member m and pl(min, lit) when bound; sorted. Ports not in `keep` are
/// existentially quantified away. Returns nullopt when unsatisfiable.
/// Over a singleton domain every satisfiable conjunction collapses to true.
std::optional<Guard> canonicalize(std::span<const Atom> atoms, const DataDomain& domain,
                                  const PortSet* keep = nullptr);

/// Every assignment of `ports` (ascending) satisfying `guard`, as literal
/// index vectors parallel to `ports`, in lexicographic order.
std::vector<std::vector<uint32_t>> satisfying_assignments(std::span<const uint32_t> ports,
                                                          std::span<const Atom> guard,
                                                          const DataDomain& domain);

/// The lexicographically least satisfying assignment, if any.
std::optional<std::vector<uint32_t>> first_assignment(std::span<const uint32_t> ports,
                                                      std::span<const Atom> guard,
                                                      const DataDomain& domain);

}  // namespace reoc
