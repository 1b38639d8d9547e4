#include "reoc/automaton.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>
#include <unordered_map>

#include "reoc/errors.hpp"

namespace reoc {

namespace {

bool transition_less(const Transition& x, const Transition& y) {
  if (x.from != y.from) return x.from < y.from;
  if (!(x.sync == y.sync)) return lex_less(x.sync, y.sync);
  if (x.guard != y.guard) return x.guard < y.guard;
  return x.to < y.to;
}

bool transition_equal(const Transition& x, const Transition& y) {
  return x.from == y.from && x.to == y.to && x.sync == y.sync && x.guard == y.guard;
}

std::vector<Atom> remap_guard(const Guard& g, std::span<const uint32_t> port_map) {
  std::vector<Atom> out;
  out.reserve(g.size());
  for (const auto& at : g) {
    if (at.kind == Atom::Kind::PortPort)
      out.push_back(Atom::pp(port_map[at.a], port_map[at.b]));
    else
      out.push_back(Atom::pl(port_map[at.a], at.b));
  }
  return out;
}

PortSet remap_ports(const PortSet& s, std::span<const uint32_t> port_map, std::size_t universe) {
  PortSet out(universe);
  for (auto p : s.members()) out.set(port_map[p]);
  return out;
}

}  // namespace

Automaton::Automaton(DataDomain domain)
    : domain_(std::move(domain)), states_{"q"}, initial_(0), offsets_{0, 0} {}

Automaton::Automaton(DataDomain domain, std::vector<std::string> ports,
                     std::vector<std::string> states, uint32_t initial,
                     std::vector<Transition> transitions)
    : domain_(std::move(domain)),
      ports_(std::move(ports)),
      states_(std::move(states)),
      initial_(initial),
      transitions_(std::move(transitions)) {
  canonicalize();
}

void Automaton::canonicalize() {
  if (states_.empty()) throw Error("automaton without states");
  if (initial_ >= states_.size()) throw Error("initial state out of range");
  if (!std::is_sorted(ports_.begin(), ports_.end()) ||
      std::adjacent_find(ports_.begin(), ports_.end()) != ports_.end())
    throw Error("port table must be sorted and unique");

  std::vector<uint32_t> order(states_.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(),
            [&](uint32_t x, uint32_t y) { return states_[x] < states_[y]; });
  if (!std::is_sorted(order.begin(), order.end())) {
    std::vector<uint32_t> rank(order.size());
    for (uint32_t i = 0; i < order.size(); ++i) rank[order[i]] = i;
    std::vector<std::string> sorted(states_.size());
    for (uint32_t i = 0; i < order.size(); ++i) sorted[i] = std::move(states_[order[i]]);
    states_ = std::move(sorted);
    initial_ = rank[initial_];
    for (auto& t : transitions_) {
      t.from = rank[t.from];
      t.to = rank[t.to];
    }
  }
  if (std::adjacent_find(states_.begin(), states_.end()) != states_.end())
    throw Error("duplicate state name '" +
                *std::adjacent_find(states_.begin(), states_.end()) + "'");

  std::sort(transitions_.begin(), transitions_.end(), transition_less);
  transitions_.erase(std::unique(transitions_.begin(), transitions_.end(), transition_equal),
                     transitions_.end());
  offsets_.assign(states_.size() + 1, 0);
  for (const auto& t : transitions_) ++offsets_[t.from + 1];
  std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
}

std::optional<uint32_t> Automaton::port_index(std::string_view name) const {
  auto it = std::lower_bound(ports_.begin(), ports_.end(), name);
  if (it == ports_.end() || *it != name) return std::nullopt;
  return static_cast<uint32_t>(it - ports_.begin());
}

std::optional<uint32_t> Automaton::state_index(std::string_view name) const {
  auto it = std::lower_bound(states_.begin(), states_.end(), name);
  if (it == states_.end() || *it != name) return std::nullopt;
  return static_cast<uint32_t>(it - states_.begin());
}

std::vector<std::string> Automaton::port_names(const PortSet& s) const {
  std::vector<std::string> out;
  for (auto p : s.members()) out.push_back(ports_[p]);
  return out;
}

PortSet Automaton::port_set(std::span<const std::string> names) const {
  PortSet s(ports_.size());
  for (const auto& n : names) {
    auto idx = port_index(n);
    if (!idx) throw UnknownPort("unknown port '" + n + "'");
    s.set(*idx);
  }
  return s;
}

PortSet Automaton::all_ports() const {
  PortSet s(ports_.size());
  for (std::size_t i = 0; i < ports_.size(); ++i) s.set(i);
  return s;
}

bool Automaton::has_silent() const {
  return std::any_of(transitions_.begin(), transitions_.end(),
                     [](const Transition& t) { return t.silent(); });
}

void Automaton::validate(bool allow_silent) const {
  for (const auto& t : transitions_) {
    if (t.from >= states_.size() || t.to >= states_.size())
      throw Error("transition endpoint out of range");
    for (auto p : t.sync.members())
      if (p >= ports_.size()) throw Error("sync port out of range");
    if (!allow_silent && t.silent()) throw Error("silent transition in exported automaton");
    for (const auto& at : t.guard) {
      if (!t.sync.test(at.a) || (at.kind == Atom::Kind::PortPort && !t.sync.test(at.b)))
        throw Error("guard mentions a port outside the sync set");
      if (at.kind == Atom::Kind::PortLiteral && at.b >= domain_.size())
        throw Error("guard literal outside the data domain");
    }
  }
}

std::string Automaton::label(const Transition& t, std::string_view sep) const {
  std::string out;
  for (auto p : t.sync.members()) {
    if (!out.empty()) out += sep;
    out += ports_[p];
  }
  return out;
}

// ---------------------------------------------------------------------------

AutomatonBuilder& AutomatonBuilder::port(std::string name) {
  ports_.push_back(std::move(name));
  return *this;
}

AutomatonBuilder& AutomatonBuilder::state(std::string name) {
  states_.push_back(std::move(name));
  return *this;
}

AutomatonBuilder& AutomatonBuilder::initial(std::string name) {
  initial_ = std::move(name);
  return *this;
}

AutomatonBuilder& AutomatonBuilder::transition(std::string from, std::vector<std::string> sync,
                                               std::vector<NamedAtom> guard, std::string to) {
  transitions_.push_back({std::move(from), std::move(sync), std::move(guard), std::move(to)});
  return *this;
}

Automaton AutomatonBuilder::build() const {
  std::vector<std::string> ports = ports_;
  std::sort(ports.begin(), ports.end());
  ports.erase(std::unique(ports.begin(), ports.end()), ports.end());
  for (const auto& p : ports)
    if (p.empty()) throw Error("empty port name");

  std::vector<std::string> states = states_;
  if (states.empty()) throw Error("automaton without states");
  auto state_of = [&](const std::string& n) -> uint32_t {
    auto it = std::find(states.begin(), states.end(), n);
    if (it == states.end()) throw Error("unknown state '" + n + "'");
    return static_cast<uint32_t>(it - states.begin());
  };
  auto port_of = [&](const std::string& n) -> uint32_t {
    auto it = std::lower_bound(ports.begin(), ports.end(), n);
    if (it == ports.end() || *it != n) throw UnknownPort("unknown port '" + n + "'");
    return static_cast<uint32_t>(it - ports.begin());
  };

  std::vector<Transition> ts;
  for (const auto& pt : transitions_) {
    Transition t;
    t.from = state_of(pt.from);
    t.to = state_of(pt.to);
    t.sync = PortSet(ports.size());
    for (const auto& p : pt.sync) t.sync.set(port_of(p));
    std::vector<Atom> atoms;
    for (const auto& na : pt.guard) {
      uint32_t a = port_of(na.a);
      if (!t.sync.test(a)) throw Error("guard port '" + na.a + "' not in sync set");
      if (na.kind == Atom::Kind::PortPort) {
        uint32_t b = port_of(na.b);
        if (!t.sync.test(b)) throw Error("guard port '" + na.b + "' not in sync set");
        atoms.push_back(Atom::pp(a, b));
      } else {
        auto lit = domain_.index_of(na.b);
        if (!lit) throw DomainMismatch("literal '" + na.b + "' not in data domain");
        atoms.push_back(Atom::pl(a, *lit));
      }
    }
    auto g = canonicalize(atoms, domain_);
    if (!g) continue;
    t.guard = std::move(*g);
    ts.push_back(std::move(t));
  }
  uint32_t init = initial_ ? state_of(*initial_) : 0;
  return Automaton(domain_, std::move(ports), std::move(states), init, std::move(ts));
}

// ---------------------------------------------------------------------------

Automaton product(const Automaton& a, const Automaton& b, const ProductOptions& opts) {
  if (!(a.domain() == b.domain()))
    throw DomainMismatch("product operands use different data domains");
  const auto& dom = a.domain();

  std::vector<std::string> ports;
  std::set_union(a.ports().begin(), a.ports().end(), b.ports().begin(), b.ports().end(),
                 std::back_inserter(ports));
  const std::size_t universe = ports.size();
  auto index_map = [&](const std::vector<std::string>& src) {
    std::vector<uint32_t> m(src.size());
    for (std::size_t i = 0; i < src.size(); ++i)
      m[i] = static_cast<uint32_t>(std::lower_bound(ports.begin(), ports.end(), src[i]) -
                                   ports.begin());
    return m;
  };
  const auto amap = index_map(a.ports());
  const auto bmap = index_map(b.ports());

  PortSet shared(universe);
  {
    PortSet in_a(universe);
    for (auto m : amap) in_a.set(m);
    for (auto m : bmap)
      if (in_a.test(m)) shared.set(m);
  }

  struct Lifted {
    PortSet sync;
    PortSet key;
    std::vector<Atom> guard;
  };
  auto lift = [&](const Automaton& x, std::span<const uint32_t> map) {
    std::vector<Lifted> out;
    out.reserve(x.transitions().size());
    for (const auto& t : x.transitions()) {
      Lifted l;
      l.sync = remap_ports(t.sync, map, universe);
      l.key = l.sync & shared;
      l.guard = remap_guard(t.guard, map);
      out.push_back(std::move(l));
    }
    return out;
  };
  const auto la = lift(a, amap);
  const auto lb = lift(b, bmap);

  // Per b-state: transitions grouped by their shared-port key.
  std::vector<std::unordered_map<PortSet, std::vector<std::size_t>, PortSetHash>> bkeys(
      b.states().size());
  for (uint32_t s = 0; s < b.states().size(); ++s) {
    auto base = b.outgoing_offset(s);
    for (std::size_t i = 0; i < b.outgoing(s).size(); ++i) bkeys[s][lb[base + i].key].push_back(base + i);
  }

  std::vector<std::string> states;
  std::unordered_map<uint64_t, uint32_t> ids;
  std::deque<std::pair<uint32_t, uint32_t>> queue;
  auto id_of = [&](uint32_t sa, uint32_t sb) -> uint32_t {
    uint64_t key = (uint64_t{sa} << 32) | sb;
    auto [it, fresh] = ids.try_emplace(key, static_cast<uint32_t>(states.size()));
    if (fresh) {
      states.push_back("(" + a.states()[sa] + "," + b.states()[sb] + ")");
      queue.emplace_back(sa, sb);
    }
    return it->second;
  };

  std::vector<Transition> ts;
  auto emit = [&](uint32_t from, PortSet sync, std::vector<Atom> atoms, uint32_t ta, uint32_t tb) {
    auto g = canonicalize(atoms, dom);
    if (!g) return;
    ts.push_back({from, std::move(sync), std::move(*g), id_of(ta, tb)});
    if (ts.size() > opts.budget) throw BudgetExceeded("", 0, ts.size(), opts.budget);
  };

  if (opts.reachable_only) {
    id_of(a.initial(), b.initial());
  } else {
    for (uint32_t sa = 0; sa < a.states().size(); ++sa)
      for (uint32_t sb = 0; sb < b.states().size(); ++sb) id_of(sa, sb);
  }
  const uint32_t init = ids.at((uint64_t{a.initial()} << 32) | b.initial());

  const PortSet empty_key(universe);
  while (!queue.empty()) {
    auto [sa, sb] = queue.front();
    queue.pop_front();
    const uint32_t from = ids.at((uint64_t{sa} << 32) | sb);
    const auto abase = a.outgoing_offset(sa);
    const auto aout = a.outgoing(sa);
    for (std::size_t i = 0; i < aout.size(); ++i) {
      const auto& ta = aout[i];
      const auto& lta = la[abase + i];
      if (lta.key.empty()) emit(from, lta.sync, lta.guard, ta.to, sb);
      auto it = bkeys[sb].find(lta.key);
      if (it == bkeys[sb].end()) continue;
      for (auto j : it->second) {
        const auto& ltb = lb[j];
        std::vector<Atom> atoms = lta.guard;
        atoms.insert(atoms.end(), ltb.guard.begin(), ltb.guard.end());
        emit(from, lta.sync | ltb.sync, std::move(atoms), ta.to, b.transitions()[j].to);
      }
    }
    auto it = bkeys[sb].find(empty_key);
    if (it != bkeys[sb].end())
      for (auto j : it->second)
        emit(from, lb[j].sync, lb[j].guard, sa, b.transitions()[j].to);
  }
  return Automaton(dom, std::move(ports), std::move(states), init, std::move(ts));
}

// ---------------------------------------------------------------------------

Automaton eliminate_silent(const Automaton& a, std::span<const std::string> hidden,
                           std::size_t budget) {
  const PortSet hide_set = a.port_set(hidden);
  PortSet keep = a.all_ports();
  keep.subtract(hide_set);

  std::vector<std::string> ports;
  std::vector<uint32_t> remap(a.ports().size(), UINT32_MAX);
  for (uint32_t i = 0; i < a.ports().size(); ++i) {
    if (!keep.test(i)) continue;
    remap[i] = static_cast<uint32_t>(ports.size());
    ports.push_back(a.ports()[i]);
  }

  // Relabel.
  std::vector<Transition> relabeled;
  relabeled.reserve(a.transitions().size());
  for (const auto& t : a.transitions()) {
    PortSet sync(ports.size());
    for (auto p : t.sync.members())
      if (keep.test(p)) sync.set(remap[p]);
    auto g = canonicalize(t.guard, a.domain(), &keep);
    if (!g) continue;
    relabeled.push_back({t.from, std::move(sync), remap_guard(*g, remap), t.to});
  }

  const std::size_t n = a.states().size();
  std::vector<std::vector<uint32_t>> silent_succ(n);
  std::vector<std::vector<std::size_t>> visible_out(n);
  for (std::size_t i = 0; i < relabeled.size(); ++i) {
    const auto& t = relabeled[i];
    if (t.silent())
      silent_succ[t.from].push_back(t.to);
    else
      visible_out[t.from].push_back(i);
  }

  std::vector<Transition> ts;
  std::vector<uint32_t> mark(n, UINT32_MAX);
  std::vector<uint32_t> stack;
  for (uint32_t q = 0; q < n; ++q) {
    // Silent closure of q, q included.
    stack.assign(1, q);
    mark[q] = q;
    while (!stack.empty()) {
      uint32_t p = stack.back();
      stack.pop_back();
      for (auto i : visible_out[p]) {
        const auto& t = relabeled[i];
        ts.push_back({q, t.sync, t.guard, t.to});
      }
      for (auto r : silent_succ[p])
        if (mark[r] != q) {
          mark[r] = q;
          stack.push_back(r);
        }
    }
    if (ts.size() > budget) throw BudgetExceeded("", 0, ts.size(), budget);
  }
  return Automaton(a.domain(), std::move(ports), a.states(), a.initial(), std::move(ts));
}

Automaton hide(const Automaton& a, std::span<const std::string> hidden, std::size_t budget) {
  return prune_unreachable(eliminate_silent(a, hidden, budget));
}

Automaton prune_unreachable(const Automaton& a) {
  const std::size_t n = a.states().size();
  std::vector<uint32_t> remap(n, UINT32_MAX);
  std::vector<uint32_t> order{a.initial()};
  remap[a.initial()] = 0;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (const auto& t : a.outgoing(order[i]))
      if (remap[t.to] == UINT32_MAX) {
        remap[t.to] = static_cast<uint32_t>(order.size());
        order.push_back(t.to);
      }
  if (order.size() == n) return a;

  std::vector<std::string> states;
  states.reserve(order.size());
  for (auto s : order) states.push_back(a.states()[s]);
  std::vector<Transition> ts;
  for (const auto& t : a.transitions())
    if (remap[t.from] != UINT32_MAX) ts.push_back({remap[t.from], t.sync, t.guard, remap[t.to]});
  return Automaton(a.domain(), a.ports(), std::move(states), 0, std::move(ts));
}

// ---------------------------------------------------------------------------

namespace {

/// Coarsest stable partition of a labeled transition system whose edges are
/// (from, label, to) with dense integer labels.
struct Edge {
  uint32_t from;
  uint32_t label;
  uint32_t to;
};

std::vector<uint32_t> refine(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<std::vector<std::pair<uint32_t, uint32_t>>> out(n);
  for (const auto& e : edges) out[e.from].emplace_back(e.label, e.to);
  std::vector<uint32_t> block(n, 0);
  std::size_t blocks = 1;
  while (true) {
    std::map<std::pair<uint32_t, std::vector<std::pair<uint32_t, uint32_t>>>, uint32_t> sig_ids;
    std::vector<uint32_t> next(n);
    for (std::size_t s = 0; s < n; ++s) {
      std::vector<std::pair<uint32_t, uint32_t>> sig;
      sig.reserve(out[s].size());
      for (auto [lab, to] : out[s]) sig.emplace_back(lab, block[to]);
      std::sort(sig.begin(), sig.end());
      sig.erase(std::unique(sig.begin(), sig.end()), sig.end());
      auto [it, fresh] =
          sig_ids.try_emplace({block[s], std::move(sig)}, static_cast<uint32_t>(sig_ids.size()));
      next[s] = it->second;
    }
    block = std::move(next);
    if (sig_ids.size() == blocks) return block;
    blocks = sig_ids.size();
  }
}

}  // namespace

Automaton reduce(const Automaton& input) {
  const Automaton a = prune_unreachable(input);
  std::map<std::pair<std::vector<uint32_t>, Guard>, uint32_t> labels;
  std::vector<Edge> edges;
  edges.reserve(a.transitions().size());
  for (const auto& t : a.transitions()) {
    auto [it, fresh] = labels.try_emplace({t.sync.members(), t.guard},
                                          static_cast<uint32_t>(labels.size()));
    edges.push_back({t.from, it->second, t.to});
  }
  const auto block = refine(a.states().size(), edges);
  const uint32_t nblocks =
      block.empty() ? 0 : *std::max_element(block.begin(), block.end()) + 1;
  if (nblocks == a.states().size()) return a;

  // States are sorted by name, so the first member seen is the least.
  std::vector<uint32_t> rep(nblocks, UINT32_MAX);
  for (uint32_t s = 0; s < a.states().size(); ++s)
    if (rep[block[s]] == UINT32_MAX) rep[block[s]] = s;
  std::vector<std::string> states(nblocks);
  for (uint32_t b = 0; b < nblocks; ++b) states[b] = a.states()[rep[b]];
  std::vector<Transition> ts;
  for (uint32_t b = 0; b < nblocks; ++b)
    for (const auto& t : a.outgoing(rep[b])) ts.push_back({b, t.sync, t.guard, block[t.to]});
  return Automaton(a.domain(), a.ports(), std::move(states), block[a.initial()], std::move(ts));
}

bool bisimilar(const Automaton& a, const Automaton& b) {
  if (a.ports() != b.ports()) throw PortMismatch("bisimilar: port sets differ");
  if (!(a.domain() == b.domain())) throw DomainMismatch("bisimilar: data domains differ");

  std::map<std::vector<uint32_t>, uint32_t> labels;
  std::vector<Edge> edges;
  auto add = [&](const Automaton& x, uint32_t offset) {
    for (const auto& t : x.transitions()) {
      auto ports = t.sync.members();
      for (auto& asg : satisfying_assignments(ports, t.guard, x.domain())) {
        std::vector<uint32_t> key = ports;
        key.push_back(UINT32_MAX);
        key.insert(key.end(), asg.begin(), asg.end());
        auto [it, fresh] = labels.try_emplace(std::move(key), static_cast<uint32_t>(labels.size()));
        edges.push_back({t.from + offset, it->second, t.to + offset});
      }
    }
  };
  const auto off = static_cast<uint32_t>(a.states().size());
  add(a, 0);
  add(b, off);
  const auto block = refine(a.states().size() + b.states().size(), edges);
  return block[a.initial()] == block[b.initial() + off];
}

Counts counts(const Automaton& a) { return {a.states().size(), a.transitions().size()}; }

Automaton rename_ports(const Automaton& a, const std::map<std::string, std::string>& names) {
  std::vector<std::string> renamed(a.ports().size());
  for (std::size_t i = 0; i < a.ports().size(); ++i) {
    auto it = names.find(a.ports()[i]);
    renamed[i] = it == names.end() ? a.ports()[i] : it->second;
  }
  std::vector<std::string> ports = renamed;
  std::sort(ports.begin(), ports.end());
  if (std::adjacent_find(ports.begin(), ports.end()) != ports.end())
    throw Error("port renaming collides on '" + *std::adjacent_find(ports.begin(), ports.end()) +
                "'");
  std::vector<uint32_t> map(renamed.size());
  for (std::size_t i = 0; i < renamed.size(); ++i)
    map[i] = static_cast<uint32_t>(std::lower_bound(ports.begin(), ports.end(), renamed[i]) -
                                   ports.begin());
  std::vector<Transition> ts;
  for (const auto& t : a.transitions()) {
    auto g = canonicalize(remap_guard(t.guard, map), a.domain());
    ts.push_back({t.from, remap_ports(t.sync, map, ports.size()), std::move(*g), t.to});
  }
  return Automaton(a.domain(), std::move(ports), a.states(), a.initial(), std::move(ts));
}

Automaton compact_states(const Automaton& a) {
  const std::size_t n = a.states().size();
  std::vector<uint32_t> order{a.initial()};
  std::vector<uint32_t> rank(n, UINT32_MAX);
  rank[a.initial()] = 0;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (const auto& t : a.outgoing(order[i]))
      if (rank[t.to] == UINT32_MAX) {
        rank[t.to] = static_cast<uint32_t>(order.size());
        order.push_back(t.to);
      }
  for (uint32_t s = 0; s < n; ++s)
    if (rank[s] == UINT32_MAX) {
      rank[s] = static_cast<uint32_t>(order.size());
      order.push_back(s);
    }
  std::vector<std::string> states(n);
  for (uint32_t s = 0; s < n; ++s) states[rank[s]] = "q" + std::to_string(rank[s]);
  std::vector<Transition> ts;
  ts.reserve(a.transitions().size());
  for (const auto& t : a.transitions()) ts.push_back({rank[t.from], t.sync, t.guard, rank[t.to]});
  return Automaton(a.domain(), a.ports(), std::move(states), 0, std::move(ts));
}

}  // namespace reoc
