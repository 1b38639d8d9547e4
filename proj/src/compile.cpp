#include "reoc/compile.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <stdexcept>

namespace reoc {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::Centralized: return "centralized";
    case Strategy::Distributed: return "distributed";
    case Strategy::Middleground: return "middleground";
    case Strategy::Mixed: return "mixed";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  for (auto s : kAllStrategies)
    if (to_string(s) == name) return s;
  return std::nullopt;
}

int CompiledProtocol::owner_of(const std::string& port) const {
  for (const auto& u : units)
    if (u.automaton.port_index(port)) return u.id;
  return -1;
}

FoldResult fold_region(std::span<const Automaton> members, std::span<const std::string> hide_set,
                       const FoldOptions& opts, std::span<const std::string> names) {
  if (members.empty()) throw Error("fold of an empty member list");
  const std::set<std::string> to_hide(hide_set.begin(), hide_set.end());
  std::map<std::string, int> pending;  // port -> remaining members using it
  for (std::size_t i = 1; i < members.size(); ++i)
    for (const auto& p : members[i].ports()) ++pending[p];
  for (const auto& p : to_hide) {
    bool found = std::any_of(members.begin(), members.end(), [&](const Automaton& m) {
      return m.port_index(p).has_value();
    });
    if (!found) throw UnknownPort("hide set port '" + p + "' occurs in no member");
  }

  std::vector<FoldStep> log;
  auto name_of = [&](std::size_t i) {
    return i < names.size() ? names[i] : "#" + std::to_string(i);
  };
  int step = 0;
  auto fail = [&](const BudgetExceeded& e) {
    throw BudgetExceeded(opts.unit, step, e.size(), opts.budget, log);
  };

  auto settle = [&](Automaton acc, std::size_t product_states, std::size_t product_transitions,
                    std::size_t operand) {
    std::vector<std::string> now;
    for (const auto& p : acc.ports())
      if (to_hide.count(p) && pending[p] == 0) now.push_back(p);
    try {
      acc = hide(acc, now, opts.budget);
    } catch (const BudgetExceeded& e) {
      fail(e);
    }
    if (opts.reduce) acc = compact_states(reduce(acc));
    log.push_back({opts.unit, step, name_of(operand), product_states, product_transitions,
                   acc.states().size(), acc.transitions().size()});
    if (acc.transitions().size() > opts.budget)
      fail(BudgetExceeded(opts.unit, step, acc.transitions().size(), opts.budget));
    return acc;
  };

  Automaton acc = prune_unreachable(members[0]);
  {
    auto s0 = acc.states().size();
    auto t0 = acc.transitions().size();
    acc = settle(std::move(acc), s0, t0, 0);
  }

  std::vector<bool> used(members.size(), false);
  used[0] = true;
  for (std::size_t round = 1; round < members.size(); ++round) {
    ++step;
    std::size_t best = members.size();
    std::size_t best_shared = 0;
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (used[i]) continue;
      std::size_t shared = 0;
      for (const auto& p : members[i].ports())
        if (acc.port_index(p)) ++shared;
      if (best == members.size() || shared > best_shared) {
        best = i;
        best_shared = shared;
      }
    }
    used[best] = true;
    for (const auto& p : members[best].ports()) --pending[p];
    Automaton next;
    try {
      next = product(acc, members[best], ProductOptions{opts.budget, true});
    } catch (const BudgetExceeded& e) {
      fail(e);
    }
    auto ps = next.states().size();
    auto pt = next.transitions().size();
    acc = settle(std::move(next), ps, pt, best);
  }
  return {std::move(acc), std::move(log)};
}

namespace {

void record_ports(CompiledProtocol& cp) {
  std::map<std::string, std::vector<int>> owners;
  for (const auto& u : cp.units)
    for (const auto& p : u.automaton.ports()) owners[p].push_back(u.id);
  std::set<std::string> ext(cp.external_ports.begin(), cp.external_ports.end());
  for (const auto& [p, us] : owners) {
    if (ext.count(p)) {
      if (us.size() != 1) throw std::logic_error("external port " + p + " in several units");
    } else if (us.size() == 2) {
      cp.shared_ports[p] = {us[0], us[1]};
    } else {
      throw std::logic_error("port " + p + " owned by " + std::to_string(us.size()) + " units");
    }
  }
}

}  // namespace

CompiledProtocol compile(const Connector& c, Strategy s, const DataDomain& domain,
                         const CompileOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  validate(c);
  CompiledProtocol cp;
  cp.strategy = s;
  cp.external_ports = c.external_ports();
  const auto prims = primitive_automata(c, domain);

  auto fold_members = [&](const std::vector<std::size_t>& idx, const std::vector<std::string>& hide_set,
                          int unit_id) {
    std::vector<Automaton> ms;
    std::vector<std::string> names;
    for (auto i : idx) {
      ms.push_back(prims[i].automaton);
      names.push_back(prims[i].owner);
    }
    FoldOptions fo{opts.budget, opts.reduce, std::to_string(unit_id)};
    try {
      auto r = fold_region(ms, hide_set, fo, names);
      cp.stats.fold_log.insert(cp.stats.fold_log.end(), r.log.begin(), r.log.end());
      return compact_states(r.automaton);
    } catch (const BudgetExceeded& e) {
      auto full = cp.stats.fold_log;
      full.insert(full.end(), e.log().begin(), e.log().end());
      throw BudgetExceeded(e.unit(), e.step(), e.size(), e.budget(), std::move(full));
    }
  };

  switch (s) {
    case Strategy::Distributed: {
      for (std::size_t i = 0; i < prims.size(); ++i) {
        auto kind = classify(prims[i]);
        (kind == RegionKind::Asynchronous ? cp.stats.m1 : cp.stats.m2)++;
        cp.units.push_back({static_cast<int>(i), to_string(kind), {prims[i].owner}, prims[i].automaton});
      }
      break;
    }
    case Strategy::Centralized: {
      std::vector<std::size_t> all(prims.size());
      for (std::size_t i = 0; i < prims.size(); ++i) all[i] = i;
      std::set<std::string> ports;
      for (const auto& p : prims)
        for (const auto& x : p.automaton.ports()) ports.insert(x);
      for (const auto& e : cp.external_ports) ports.erase(e);
      std::vector<std::string> owners;
      for (const auto& p : prims) owners.push_back(p.owner);
      cp.units.push_back({0, "whole", owners,
                          fold_members(all, {ports.begin(), ports.end()}, 0)});
      cp.stats.m1 = 0;
      cp.stats.m2 = 1;
      break;
    }
    case Strategy::Middleground:
    case Strategy::Mixed: {
      auto pt = split(prims, cp.external_ports);
      if (s == Strategy::Mixed) pt = merge_mixed(pt, prims, cp.external_ports);
      cp.stats.m1 = pt.m1;
      cp.stats.m2 = pt.m2;
      for (const auto& r : pt.regions) {
        std::vector<std::string> owners;
        for (auto m : r.members) owners.push_back(prims[m].owner);
        cp.units.push_back({r.id, to_string(r.kind), owners,
                            fold_members(r.members, r.internal_ports, r.id)});
      }
      break;
    }
  }

  record_ports(cp);
  for (const auto& u : cp.units) {
    auto n = counts(u.automaton);
    cp.stats.units.push_back({u.id, n.states, n.transitions});
    cp.stats.total_states += n.states;
    cp.stats.total_transitions += n.transitions;
    cp.stats.max_states = std::max(cp.stats.max_states, n.states);
    cp.stats.max_transitions = std::max(cp.stats.max_transitions, n.transitions);
  }
  cp.stats.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return cp;
}

Automaton flatten(const CompiledProtocol& cp, const FoldOptions& opts) {
  std::vector<Automaton> ms;
  std::vector<std::string> names;
  for (const auto& u : cp.units) {
    ms.push_back(u.automaton);
    names.push_back("unit" + std::to_string(u.id));
  }
  std::vector<std::string> hidden;
  for (const auto& [p, us] : cp.shared_ports) hidden.push_back(p);
  return fold_region(ms, hidden, opts, names).automaton;
}

Automaton centralized_automaton(const Connector& c, const DataDomain& domain,
                                const CompileOptions& opts) {
  return compile(c, Strategy::Centralized, domain, opts).units.front().automaton;
}

}  // namespace reoc

namespace reoc {

bool ScanReport::any_move_found() const {
  return std::any_of(moves.begin(), moves.end(), [](const ScanPattern& p) { return p.found; });
}

namespace {

// True iff some reachable transition's sync set covers `ports`.
bool carries(const Automaton& a, const std::vector<std::string>& ports) {
  std::vector<uint32_t> idx;
  for (const auto& p : ports) {
    auto i = a.port_index(p);
    if (!i) return false;
    idx.push_back(*i);
  }
  auto reachable = prune_unreachable(a);
  return std::any_of(reachable.transitions().begin(), reachable.transitions().end(),
                     [&](const Transition& t) {
                       return std::all_of(idx.begin(), idx.end(),
                                          [&](uint32_t i) { return t.sync.test(i); });
                     });
}

std::vector<std::string> sorted(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

ScanReport disabled_transition_scan(const Connector& c, const DataDomain& domain,
                                    std::size_t budget) {
  validate(c);
  int n = 0;
  while (std::any_of(c.channels.begin(), c.channels.end(), [&](const Channel& ch) {
    return ch.id == "F" + std::to_string(n + 1) && ch.kind == ChannelKind::Fifo1;
  }))
    ++n;
  if (n < 1) throw ValidationError("scan needs fifo1 buffers named F1..Fn");
  auto in = [](int i) { return "F" + std::to_string(i) + ".src"; };
  auto out = [](int i) { return "F" + std::to_string(i) + ".snk"; };

  ScanReport r;
  r.connector = c.name;
  r.buffers = n;

  std::vector<Automaton> members;
  std::vector<std::string> names;
  for (auto& p : primitive_automata(c, domain)) {
    members.push_back(std::move(p.automaton));
    names.push_back(p.owner);
  }
  FoldOptions opts;
  opts.budget = budget;
  opts.unit = "scan";
  opts.reduce = false;
  auto full = fold_region(members, {}, opts, names).automaton;
  auto size = counts(full);
  r.product_states = size.states;
  r.product_transitions = size.transitions;

  for (int x = 2; x <= n - 1; ++x)
    for (int i = 1; i + x <= n; ++i) {
      std::vector<std::string> ports;
      for (int j = i; j < i + x; ++j) {
        ports.push_back(in(j));
        ports.push_back(out(j + 1));
      }
      ScanPattern p{sorted(std::move(ports)), false};
      p.found = carries(full, p.ports);
      r.moves.push_back(std::move(p));
    }

  if (n >= 2) {
    CompileOptions copts;
    copts.budget = budget;
    auto cp = compile(c, Strategy::Middleground, domain, copts);
    auto sinks = std::vector<std::string>{};
    for (const auto& node : c.nodes)
      if (node.kind == NodeKind::BoundarySink) sinks.push_back(external_port(node.name));
    for (const auto& z : sinks) {
      ScanPattern p{sorted({z, out(1), in(1), out(2)}), false};
      for (const auto& u : cp.units)
        if (u.role == to_string(RegionKind::Synchronous) && carries(u.automaton, p.ports))
          p.found = true;
      r.region_unions.push_back(std::move(p));
    }
  }
  return r;
}

nlohmann::ordered_json to_json(const ScanReport& r) {
  nlohmann::ordered_json j;
  j["connector"] = r.connector;
  j["buffers"] = r.buffers;
  j["product_states"] = r.product_states;
  j["product_transitions"] = r.product_transitions;
  auto patterns = [](const std::vector<ScanPattern>& ps) {
    auto a = nlohmann::ordered_json::array();
    for (const auto& p : ps) a.push_back({{"ports", p.ports}, {"found", p.found}});
    return a;
  };
  j["moves"] = patterns(r.moves);
  j["region_unions"] = patterns(r.region_unions);
  j["any_move_found"] = r.any_move_found();
  return j;
}

}  // namespace reoc
