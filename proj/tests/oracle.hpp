// Independent reference semantics for tests: automata expanded to concrete
// labelled transition systems whose labels are port -> value maps.
#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "reoc/automaton.hpp"
#include "reoc/connector.hpp"

namespace oracle {

using Label = std::map<std::string, std::string>;

struct Lts {
  std::set<std::string> ports;
  int initial = 0;
  int states = 1;
  std::set<std::tuple<int, Label, int>> trans;
};

// Checks every atom of `g` literally against a full assignment.
inline bool holds(const reoc::Guard& g, const std::map<uint32_t, uint32_t>& asg) {
  for (const auto& at : g) {
    auto a = asg.find(at.a);
    if (a == asg.end()) return false;
    if (at.kind == reoc::Atom::Kind::PortPort) {
      auto b = asg.find(at.b);
      if (b == asg.end() || a->second != b->second) return false;
    } else if (a->second != at.b) {
      return false;
    }
  }
  return true;
}

inline Lts expand(const reoc::Automaton& a) {
  Lts out;
  out.ports.insert(a.ports().begin(), a.ports().end());
  out.states = static_cast<int>(a.states().size());
  out.initial = static_cast<int>(a.initial());
  const auto d = static_cast<uint32_t>(a.domain().size());
  for (const auto& t : a.transitions()) {
    auto ports = t.sync.members();
    std::vector<uint32_t> v(ports.size(), 0);
    while (true) {
      std::map<uint32_t, uint32_t> asg;
      for (std::size_t i = 0; i < ports.size(); ++i) asg[ports[i]] = v[i];
      if (holds(t.guard, asg)) {
        Label l;
        for (std::size_t i = 0; i < ports.size(); ++i)
          l[a.ports()[ports[i]]] = a.domain().value(v[i]);
        out.trans.emplace(static_cast<int>(t.from), l, static_cast<int>(t.to));
      }
      std::size_t k = v.size();
      while (k > 0 && ++v[k - 1] == d) v[--k] = 0;
      if (k == 0) break;
    }
  }
  return out;
}

inline std::vector<std::vector<std::pair<Label, int>>> adjacency(const Lts& a) {
  std::vector<std::vector<std::pair<Label, int>>> adj(static_cast<std::size_t>(a.states));
  for (const auto& [f, l, t] : a.trans) adj[static_cast<std::size_t>(f)].emplace_back(l, t);
  return adj;
}

// Joint, independent and simultaneous steps in one rule: two moves (either
// may idle, not both) combine when they agree on every port they share.
inline Lts product(const Lts& a, const Lts& b) {
  Lts out;
  out.ports = a.ports;
  out.ports.insert(b.ports.begin(), b.ports.end());
  auto aa = adjacency(a);
  auto ab = adjacency(b);
  std::map<std::pair<int, int>, int> id;
  std::deque<std::pair<int, int>> work;
  auto get = [&](std::pair<int, int> s) {
    auto [it, fresh] = id.emplace(s, static_cast<int>(id.size()));
    if (fresh) work.push_back(s);
    return it->second;
  };
  get({a.initial, b.initial});
  auto agrees = [](const Label& x, const Label& y, const std::set<std::string>& other) {
    for (const auto& [p, v] : x)
      if (other.contains(p)) {
        auto it = y.find(p);
        if (it == y.end() || it->second != v) return false;
      }
    return true;
  };
  while (!work.empty()) {
    auto [p, q] = work.front();
    work.pop_front();
    int from = id.at({p, q});
    std::vector<std::pair<Label, int>> ma = aa[static_cast<std::size_t>(p)];
    std::vector<std::pair<Label, int>> mb = ab[static_cast<std::size_t>(q)];
    ma.emplace_back(Label{}, -1);
    mb.emplace_back(Label{}, -1);
    for (const auto& [la, ta] : ma)
      for (const auto& [lb, tb] : mb) {
        if (ta < 0 && tb < 0) continue;
        if (!agrees(la, lb, b.ports) || !agrees(lb, la, a.ports)) continue;
        Label l = la;
        l.insert(lb.begin(), lb.end());
        int to = get({ta < 0 ? p : ta, tb < 0 ? q : tb});
        out.trans.emplace(from, l, to);
      }
  }
  out.states = static_cast<int>(id.size());
  return out;
}

inline Lts restrict_reachable(const Lts& a) {
  auto adj = adjacency(a);
  std::map<int, int> id{{a.initial, 0}};
  std::deque<int> work{a.initial};
  while (!work.empty()) {
    int s = work.front();
    work.pop_front();
    for (const auto& [l, t] : adj[static_cast<std::size_t>(s)])
      if (id.emplace(t, static_cast<int>(id.size())).second) work.push_back(t);
  }
  Lts out;
  out.ports = a.ports;
  out.states = static_cast<int>(id.size());
  for (const auto& [f, l, t] : a.trans)
    if (id.contains(f)) out.trans.emplace(id.at(f), l, id.at(t));
  return out;
}

// Relabels, then replaces silent prefixes: q =tau*=> p -l-> r gives q -l-> r.
inline Lts hide(const Lts& a, const std::set<std::string>& hidden) {
  std::vector<std::vector<std::pair<Label, int>>> adj(static_cast<std::size_t>(a.states));
  for (const auto& [f, l, t] : a.trans) {
    Label v;
    for (const auto& [p, x] : l)
      if (!hidden.contains(p)) v[p] = x;
    adj[static_cast<std::size_t>(f)].emplace_back(v, t);
  }
  Lts out;
  for (const auto& p : a.ports)
    if (!hidden.contains(p)) out.ports.insert(p);
  out.states = a.states;
  out.initial = a.initial;
  for (int q = 0; q < a.states; ++q) {
    std::set<int> closure{q};
    std::deque<int> work{q};
    while (!work.empty()) {
      int s = work.front();
      work.pop_front();
      for (const auto& [l, t] : adj[static_cast<std::size_t>(s)])
        if (l.empty() && closure.insert(t).second) work.push_back(t);
    }
    for (int s : closure)
      for (const auto& [l, t] : adj[static_cast<std::size_t>(s)])
        if (!l.empty()) out.trans.emplace(q, l, t);
  }
  return restrict_reachable(out);
}

// Coarsest strong bisimulation over the states of `a`, as block numbers.
inline std::vector<int> blocks(const Lts& a) {
  auto adj = adjacency(a);
  std::vector<int> block(static_cast<std::size_t>(a.states), 0);
  while (true) {
    std::map<std::pair<int, std::set<std::pair<Label, int>>>, int> sig;
    std::vector<int> next(block.size());
    for (std::size_t s = 0; s < block.size(); ++s) {
      std::set<std::pair<Label, int>> moves;
      for (const auto& [l, t] : adj[s]) moves.emplace(l, block[static_cast<std::size_t>(t)]);
      auto key = std::make_pair(block[s], moves);
      auto it = sig.emplace(key, static_cast<int>(sig.size())).first;
      next[s] = it->second;
    }
    bool stable = sig.size() == static_cast<std::size_t>(
                                    *std::max_element(block.begin(), block.end()) + 1);
    block = std::move(next);
    if (stable) return block;
  }
}

inline Lts quotient(const Lts& a) {
  auto r = restrict_reachable(a);
  auto b = blocks(r);
  Lts out;
  out.ports = r.ports;
  out.states = *std::max_element(b.begin(), b.end()) + 1;
  out.initial = b[static_cast<std::size_t>(r.initial)];
  for (const auto& [f, l, t] : r.trans)
    out.trans.emplace(b[static_cast<std::size_t>(f)], l, b[static_cast<std::size_t>(t)]);
  return out;
}

inline bool bisimilar(const Lts& a, const Lts& b) {
  if (a.ports != b.ports) return false;
  Lts u;
  u.ports = a.ports;
  u.states = a.states + b.states;
  u.trans = a.trans;
  for (const auto& [f, l, t] : b.trans) u.trans.emplace(f + a.states, l, t + a.states);
  auto bl = blocks(u);
  return bl[static_cast<std::size_t>(a.initial)] == bl[static_cast<std::size_t>(b.initial + a.states)];
}

// Monolithic product of a connector's primitives, in an order where each
// operand touches the ports already present when possible.
inline Lts full_product(const std::vector<reoc::PrimitiveCA>& prims) {
  std::vector<Lts> parts;
  for (const auto& p : prims) parts.push_back(expand(p.automaton));
  std::vector<bool> used(parts.size(), false);
  Lts acc = parts[0];
  used[0] = true;
  for (std::size_t n = 1; n < parts.size(); ++n) {
    std::size_t pick = parts.size();
    for (std::size_t i = 0; i < parts.size() && pick == parts.size(); ++i)
      if (!used[i] && std::any_of(parts[i].ports.begin(), parts[i].ports.end(),
                                  [&](const std::string& p) { return acc.ports.contains(p); }))
        pick = i;
    if (pick == parts.size())
      pick = static_cast<std::size_t>(std::find(used.begin(), used.end(), false) - used.begin());
    used[pick] = true;
    acc = product(acc, parts[pick]);
  }
  return acc;
}

inline std::set<std::string> internal_ports(const Lts& a, const std::vector<std::string>& keep) {
  std::set<std::string> out;
  for (const auto& p : a.ports)
    if (std::find(keep.begin(), keep.end(), p) == keep.end()) out.insert(p);
  return out;
}

inline Lts rename(const Lts& a, const std::map<std::string, std::string>& names) {
  auto f = [&](const std::string& p) {
    auto it = names.find(p);
    return it == names.end() ? p : it->second;
  };
  Lts out;
  out.states = a.states;
  out.initial = a.initial;
  for (const auto& p : a.ports) out.ports.insert(f(p));
  for (const auto& [s, l, t] : a.trans) {
    Label m;
    for (const auto& [p, v] : l) m[f(p)] = v;
    out.trans.emplace(s, m, t);
  }
  return out;
}

}  // namespace oracle
