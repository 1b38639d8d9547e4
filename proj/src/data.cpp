#include "reoc/data.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "reoc/errors.hpp"

namespace reoc {

DataDomain::DataDomain() : agnostic_(true), values_{std::string(kAgnosticValue)} {}

DataDomain DataDomain::of(std::vector<std::string> values) {
  if (values.empty()) throw Error("data domain must hold at least one value");
  std::set<std::string> seen;
  for (const auto& v : values) {
    if (v.empty()) throw Error("empty data literal");
    if (!seen.insert(v).second) throw Error("duplicate data literal '" + v + "'");
  }
  DataDomain d;
  d.agnostic_ = false;
  d.values_ = std::move(values);
  return d;
}

std::optional<uint32_t> DataDomain::index_of(std::string_view lit) const {
  for (uint32_t i = 0; i < values_.size(); ++i)
    if (values_[i] == lit) return i;
  return std::nullopt;
}

namespace {

constexpr uint32_t kUnbound = UINT32_MAX;

// Union-find over the ports an atom list mentions.
struct Classes {
  std::vector<uint32_t> ports;   // sorted unique
  std::vector<uint32_t> parent;
  std::vector<uint32_t> literal;  // per root
  bool conflict = false;

  explicit Classes(std::span<const Atom> atoms) {
    for (const auto& at : atoms) {
      ports.push_back(at.a);
      if (at.kind == Atom::Kind::PortPort) ports.push_back(at.b);
    }
    std::sort(ports.begin(), ports.end());
    ports.erase(std::unique(ports.begin(), ports.end()), ports.end());
    parent.resize(ports.size());
    std::iota(parent.begin(), parent.end(), 0u);
    literal.assign(ports.size(), kUnbound);
    for (const auto& at : atoms) {
      if (at.kind == Atom::Kind::PortPort)
        unite(slot(at.a), slot(at.b));
      else
        bind(slot(at.a), at.b);
    }
  }

  uint32_t slot(uint32_t port) const {
    return static_cast<uint32_t>(std::lower_bound(ports.begin(), ports.end(), port) - ports.begin());
  }
  uint32_t find(uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void bind(uint32_t x, uint32_t lit) {
    uint32_t r = find(x);
    if (literal[r] == kUnbound)
      literal[r] = lit;
    else if (literal[r] != lit)
      conflict = true;
  }
  void unite(uint32_t x, uint32_t y) {
    x = find(x);
    y = find(y);
    if (x == y) return;
    if (y < x) std::swap(x, y);
    parent[y] = x;
    if (literal[y] != kUnbound) bind(x, literal[y]);
  }
};

}  // namespace

std::optional<Guard> canonicalize(std::span<const Atom> atoms, const DataDomain& domain,
                                  const PortSet* keep) {
  if (atoms.empty() || domain.size() == 1) return Guard{};
  Classes cls(atoms);
  if (cls.conflict) return std::nullopt;

  // Smallest kept member per root.
  std::vector<uint32_t> rep(cls.ports.size(), kUnbound);
  for (uint32_t i = 0; i < cls.ports.size(); ++i) {
    if (keep != nullptr && !keep->test(cls.ports[i])) continue;
    uint32_t r = cls.find(i);
    if (rep[r] == kUnbound) rep[r] = cls.ports[i];
  }
  Guard out;
  for (uint32_t i = 0; i < cls.ports.size(); ++i) {
    uint32_t p = cls.ports[i];
    if (keep != nullptr && !keep->test(p)) continue;
    uint32_t r = cls.find(i);
    if (rep[r] != p) {
      out.push_back(Atom::pp(rep[r], p));
    } else if (cls.literal[r] != kUnbound) {
      out.push_back(Atom::pl(p, cls.literal[r]));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<uint32_t>> satisfying_assignments(std::span<const uint32_t> ports,
                                                          std::span<const Atom> guard,
                                                          const DataDomain& domain) {
  std::vector<std::vector<uint32_t>> out;
  Classes cls(guard);
  if (cls.conflict) return out;

  // Each port either follows an earlier port of its class, is pinned to a
  // literal, or is free.
  const std::size_t n = ports.size();
  std::vector<int> follows(n, -1);
  std::vector<uint32_t> pinned(n, kUnbound);
  std::vector<std::size_t> free_slots;
  std::vector<std::pair<uint32_t, std::size_t>> root_first;  // root -> first index
  for (std::size_t i = 0; i < n; ++i) {
    auto it = std::lower_bound(cls.ports.begin(), cls.ports.end(), ports[i]);
    if (it == cls.ports.end() || *it != ports[i]) {
      free_slots.push_back(i);
      continue;
    }
    uint32_t r = cls.find(static_cast<uint32_t>(it - cls.ports.begin()));
    auto prev = std::find_if(root_first.begin(), root_first.end(),
                             [&](const auto& e) { return e.first == r; });
    if (prev != root_first.end()) {
      follows[i] = static_cast<int>(prev->second);
    } else {
      root_first.emplace_back(r, i);
      if (cls.literal[r] != kUnbound)
        pinned[i] = cls.literal[r];
      else
        free_slots.push_back(i);
    }
  }

  std::vector<uint32_t> choice(free_slots.size(), 0);
  const auto dsize = static_cast<uint32_t>(domain.size());
  while (true) {
    std::vector<uint32_t> asg(n, 0);
    for (std::size_t f = 0; f < free_slots.size(); ++f) asg[free_slots[f]] = choice[f];
    for (std::size_t i = 0; i < n; ++i) {
      if (pinned[i] != kUnbound) asg[i] = pinned[i];
      if (follows[i] >= 0) asg[i] = asg[static_cast<std::size_t>(follows[i])];
    }
    out.push_back(std::move(asg));
    // Odometer, last free slot fastest, yields lexicographic order.
    std::size_t k = free_slots.size();
    while (k > 0) {
      if (++choice[k - 1] < dsize) break;
      choice[k - 1] = 0;
      --k;
    }
    if (k == 0) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<std::vector<uint32_t>> first_assignment(std::span<const uint32_t> ports,
                                                      std::span<const Atom> guard,
                                                      const DataDomain& domain) {
  Classes cls(guard);
  if (cls.conflict) return std::nullopt;
  std::vector<uint32_t> asg(ports.size(), 0);
  for (std::size_t i = 0; i < ports.size(); ++i) {
    auto it = std::lower_bound(cls.ports.begin(), cls.ports.end(), ports[i]);
    if (it == cls.ports.end() || *it != ports[i]) continue;
    uint32_t r = cls.find(static_cast<uint32_t>(it - cls.ports.begin()));
    if (cls.literal[r] != kUnbound) asg[i] = cls.literal[r];
  }
  (void)domain;
  return asg;
}

}  // namespace reoc
