#include "reoc/runtime.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "reoc/errors.hpp"

namespace reoc {

std::size_t StimulusScript::total_operations() const {
  std::size_t n = 0;
  for (const auto& [p, q] : writes) n += q.size();
  for (const auto& [p, c] : reads) n += c;
  return n;
}

std::size_t StimulusScript::step_limit() const {
  return max_steps != 0 ? max_steps : 10 * total_operations();
}

StimulusScript script_from_json(const nlohmann::json& j) {
  StimulusScript s;
  try {
    if (!j.is_object()) throw Error("script must be a JSON object");
    if (j.contains("writes"))
      for (const auto& [port, lits] : j.at("writes").items())
        s.writes[port] = lits.get<std::vector<std::string>>();
    if (j.contains("reads"))
      for (const auto& [port, n] : j.at("reads").items()) {
        if (!n.is_number_unsigned() && !(n.is_number_integer() && n.get<long long>() >= 0))
          throw Error("read count for " + port + " must be a non-negative integer");
        s.reads[port] = n.get<std::size_t>();
      }
    if (j.contains("seed")) s.seed = j.at("seed").get<uint64_t>();
    if (j.contains("max_steps")) s.max_steps = j.at("max_steps").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed script: ") + e.what());
  }
  return s;
}

nlohmann::json to_json(const StimulusScript& s) {
  nlohmann::json j;
  j["writes"] = nlohmann::json::object();
  for (const auto& [p, q] : s.writes) j["writes"][p] = q;
  j["reads"] = nlohmann::json::object();
  for (const auto& [p, c] : s.reads) j["reads"][p] = c;
  j["seed"] = s.seed;
  j["max_steps"] = s.max_steps;
  return j;
}

StimulusScript resolve_script(const StimulusScript& s, const std::vector<std::string>& ports,
                              const DataDomain& domain) {
  auto resolve = [&](const std::string& name) {
    for (const auto& candidate : {name, name + ".ext"})
      if (std::binary_search(ports.begin(), ports.end(), candidate)) return candidate;
    throw UnknownPort("script names unknown port " + name);
  };
  StimulusScript out;
  out.seed = s.seed;
  out.max_steps = s.max_steps;
  for (const auto& [p, q] : s.writes) {
    for (const auto& lit : q)
      if (!domain.index_of(lit))
        throw DomainMismatch("literal " + lit + " written at " + p + " is not in the domain");
    auto& dst = out.writes[resolve(p)];
    dst.insert(dst.end(), q.begin(), q.end());
  }
  for (const auto& [p, c] : s.reads) {
    auto name = resolve(p);
    if (out.writes.contains(name)) throw Error("port " + name + " is both written and read");
    out.reads[name] += c;
  }
  return out;
}

nlohmann::json to_json(const Trace& t) {
  auto j = nlohmann::json::array();
  for (const auto& s : t) {
    nlohmann::json step;
    step["ports"] = s.ports;
    step["data"] = s.data;
    j.push_back(step);
  }
  return j;
}

Trace trace_from_json(const nlohmann::json& j) {
  Trace t;
  try {
    for (const auto& step : j) {
      TraceStep s;
      s.ports = step.at("ports").get<std::vector<std::string>>();
      std::sort(s.ports.begin(), s.ports.end());
      if (step.contains("data")) s.data = step.at("data").get<std::map<std::string, std::string>>();
      t.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed trace: ") + e.what());
  }
  return t;
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

TraceStep parse_trace_line(std::string_view line) {
  auto semi = line.find(';');
  if (semi != std::string_view::npos && line.find(';', semi + 1) != std::string_view::npos)
    throw Error("trace line has more than one ';'");
  TraceStep s;
  for (auto& p : split(line.substr(0, semi), ',')) {
    if (p.empty()) throw Error("empty port in trace line");
    s.ports.push_back(std::move(p));
  }
  std::sort(s.ports.begin(), s.ports.end());
  if (std::adjacent_find(s.ports.begin(), s.ports.end()) != s.ports.end())
    throw Error("duplicate port in trace line");
  if (semi != std::string_view::npos && !trim(line.substr(semi + 1)).empty()) {
    for (const auto& kv : split(line.substr(semi + 1), ',')) {
      auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == kv.size())
        throw Error("malformed assignment '" + kv + "'");
      auto port = trim(std::string_view(kv).substr(0, eq));
      if (!std::binary_search(s.ports.begin(), s.ports.end(), port))
        throw Error("assignment to port " + port + " outside the step");
      if (!s.data.emplace(port, trim(std::string_view(kv).substr(eq + 1))).second)
        throw Error("port " + port + " assigned twice");
    }
  }
  return s;
}

std::string format_trace_line(const TraceStep& s) {
  std::string out;
  for (std::size_t i = 0; i < s.ports.size(); ++i) out += (i ? "," : "") + s.ports[i];
  out += ';';
  bool first = true;
  for (const auto& [p, v] : s.data) {
    out += (first ? "" : ",") + p + "=" + v;
    first = false;
  }
  return out;
}

Trace parse_trace_lines(std::string_view text) {
  Trace t;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    auto line = text.substr(start, nl == std::string_view::npos ? nl : nl - start);
    if (!trim(line).empty()) t.push_back(parse_trace_line(line));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return t;
}

std::vector<std::string> values_at(const Trace& t, const std::string& port) {
  std::vector<std::string> out;
  for (const auto& s : t)
    if (auto it = s.data.find(port); it != s.data.end()) out.push_back(it->second);
  return out;
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "completed";
    case RunStatus::Stuck: return "stuck with pending io";
    case RunStatus::StepLimit: return "step limit";
    case RunStatus::Deadlock: return "deadlock";
  }
  return "?";
}

namespace {

struct Endpoint {
  enum class Kind : uint8_t { Idle, Write, Read, Shared };
  Kind kind = Kind::Idle;
  std::deque<uint32_t> queue;
  std::size_t remaining = 0;
};

std::vector<Endpoint> make_endpoints(const Automaton& a, const StimulusScript& s,
                                     const std::set<std::string>& shared = {}) {
  std::vector<Endpoint> eps(a.ports().size());
  for (uint32_t p = 0; p < a.ports().size(); ++p) {
    const auto& name = a.ports()[p];
    if (shared.contains(name)) {
      eps[p].kind = Endpoint::Kind::Shared;
    } else if (auto w = s.writes.find(name); w != s.writes.end()) {
      eps[p].kind = Endpoint::Kind::Write;
      for (const auto& lit : w->second) eps[p].queue.push_back(*a.domain().index_of(lit));
    } else if (auto r = s.reads.find(name); r != s.reads.end()) {
      eps[p].kind = Endpoint::Kind::Read;
      eps[p].remaining = r->second;
    }
  }
  return eps;
}

// An enabled transition of one automaton. Atoms use global port indices.
struct Offer {
  std::size_t transition = 0;
  PortSet sync;
  std::vector<Atom> atoms;
};

std::vector<Offer> collect_offers(const Automaton& a, uint32_t state,
                                  const std::vector<Endpoint>& eps,
                                  const std::vector<uint32_t>& global) {
  std::vector<Offer> out;
  auto ts = a.outgoing(state);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto& t = ts[i];
    std::vector<Atom> local = t.guard;
    bool ok = true;
    for (auto p : t.sync.members()) {
      const auto& ep = eps[p];
      if (ep.kind == Endpoint::Kind::Idle ||
          (ep.kind == Endpoint::Kind::Write && ep.queue.empty()) ||
          (ep.kind == Endpoint::Kind::Read && ep.remaining == 0)) {
        ok = false;
        break;
      }
      if (ep.kind == Endpoint::Kind::Write) local.push_back(Atom::pl(p, ep.queue.front()));
    }
    if (!ok || !first_assignment({}, local, a.domain())) continue;
    Offer o{a.outgoing_offset(state) + i, t.sync, {}};
    for (auto at : local) {
      at.a = global[at.a];
      if (at.kind == Atom::Kind::PortPort) at.b = global[at.b];
      o.atoms.push_back(at);
    }
    out.push_back(std::move(o));
  }
  std::stable_sort(out.begin(), out.end(), [&](const Offer& x, const Offer& y) {
    const auto& tx = a.transitions()[x.transition];
    const auto& ty = a.transitions()[y.transition];
    if (lex_less(tx.sync, ty.sync)) return true;
    if (lex_less(ty.sync, tx.sync)) return false;
    return tx.to < ty.to;
  });
  return out;
}

// Consumes the script operations of `t`'s external ports; returns how many.
std::size_t consume(const Transition& t, std::vector<Endpoint>& eps) {
  std::size_t n = 0;
  for (auto p : t.sync.members()) {
    auto& ep = eps[p];
    if (ep.kind == Endpoint::Kind::Write) {
      ep.queue.pop_front();
      ++n;
    } else if (ep.kind == Endpoint::Kind::Read) {
      --ep.remaining;
      ++n;
    }
  }
  return n;
}

std::vector<uint32_t> identity(std::size_t n) {
  std::vector<uint32_t> v(n);
  for (uint32_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace

RunResult run_reference(const Automaton& big, const StimulusScript& script0) {
  if (big.has_silent()) throw Error("run_reference needs an automaton without silent transitions");
  auto script = resolve_script(script0, big.ports(), big.domain());
  auto eps = make_endpoints(big, script);
  auto global = identity(big.ports().size());
  std::size_t remaining = script.total_operations();
  const std::size_t limit = script.step_limit();
  std::mt19937_64 rng(script.seed);
  uint32_t state = big.initial();

  RunResult r;
  while (true) {
    if (remaining == 0) {
      r.status = RunStatus::Completed;
      break;
    }
    if (r.steps >= limit) {
      r.status = RunStatus::StepLimit;
      break;
    }
    auto offers = collect_offers(big, state, eps, global);
    if (offers.empty()) {
      r.status = RunStatus::Stuck;
      r.diagnostic = "no transition enabled in state " + big.states()[state] + " with " +
                     std::to_string(remaining) + " operations pending";
      break;
    }
    const auto& o = offers[rng() % offers.size()];
    const auto& t = big.transitions()[o.transition];
    auto ports = t.sync.members();
    auto values = *first_assignment(ports, o.atoms, big.domain());
    TraceStep step;
    for (std::size_t i = 0; i < ports.size(); ++i) {
      step.ports.push_back(big.ports()[ports[i]]);
      step.data[big.ports()[ports[i]]] = big.domain().value(values[i]);
    }
    remaining -= consume(t, eps);
    state = t.to;
    r.trace.push_back(std::move(step));
    r.log.push_back({{{0, o.transition}}, true});
    ++r.steps;
  }
  return r;
}

namespace {

constexpr uint64_t kNotIdle = std::numeric_limits<uint64_t>::max();

// Port of a unit shared with another unit.
struct Link {
  uint32_t local = 0;
  int other = 0;
  uint32_t other_local = 0;
};

class RegionalRun {
public:
  RegionalRun(const CompiledProtocol& cp, const StimulusScript& script0) : cp_(cp) {
    for (const auto& u : cp.units)
      ports_.insert(ports_.end(), u.automaton.ports().begin(), u.automaton.ports().end());
    std::sort(ports_.begin(), ports_.end());
    ports_.erase(std::unique(ports_.begin(), ports_.end()), ports_.end());

    const auto& domain = cp.units.front().automaton.domain();
    script_ = resolve_script(script0, cp.external_ports, domain);
    std::set<std::string> shared;
    for (const auto& [p, owners] : cp.shared_ports) shared.insert(p);

    for (std::size_t u = 0; u < cp.units.size(); ++u) units_.push_back(std::make_unique<UnitState>());
    for (std::size_t u = 0; u < cp.units.size(); ++u) {
      const auto& a = cp.units[u].automaton;
      if (a.has_silent()) throw Error("unit " + std::to_string(u) + " has silent transitions");
      auto& st = unit(u);
      st.a = &a;
      st.state = a.initial();
      st.eps = make_endpoints(a, script_, shared);
      for (const auto& p : a.ports())
        st.global.push_back(static_cast<uint32_t>(
            std::lower_bound(ports_.begin(), ports_.end(), p) - ports_.begin()));
      st.rng.seed(script_.seed ^ (static_cast<uint64_t>(u) * 0x9E3779B97F4A7C15ull));
      st.jitter.seed(~script_.seed + static_cast<uint64_t>(u));
      st.offers = collect_offers(a, st.state, st.eps, st.global);
    }
    for (std::size_t u = 0; u < cp.units.size(); ++u) {
      const auto& a = *unit(u).a;
      for (uint32_t p = 0; p < a.ports().size(); ++p) {
        auto it = cp.shared_ports.find(a.ports()[p]);
        if (it == cp.shared_ports.end()) continue;
        int other = it->second.first == static_cast<int>(u) ? it->second.second : it->second.first;
        unit(u).links.push_back(
            {p, other, *unit(other).a->port_index(a.ports()[p])});
      }
    }
    remaining_ = script_.total_operations();
    limit_ = script_.step_limit();
    idle_.assign(units_.size(), kNotIdle);
  }

  RunResult run() {
    if (remaining_ == 0) return std::move(result_);
    std::vector<std::thread> threads;
    threads.reserve(units_.size());
    for (std::size_t u = 0; u < units_.size(); ++u)
      threads.emplace_back([this, u] { protocol_thread(static_cast<int>(u)); });
    {
      std::unique_lock lk(coord_);
      started_ = true;
      cv_.notify_all();
      cv_.wait(lk, [&] { return done_; });
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads) t.join();
    if (result_.status == RunStatus::Deadlock) result_.diagnostic = describe();
    return std::move(result_);
  }

private:
  struct UnitState {
    const Automaton* a = nullptr;
    std::mutex m;
    uint32_t state = 0;
    uint64_t version = 0;
    std::vector<Endpoint> eps;
    std::vector<Offer> offers;
    std::vector<uint32_t> global;
    std::vector<Link> links;
    std::mt19937_64 rng;
    std::mt19937_64 jitter;  // seeded yields, separate from the choice stream
  };

  struct Snapshot {
    uint64_t version = 0;
    std::vector<Offer> offers;
  };

  // Combination search over the snapshots of the units a step must involve.
  struct Search {
    RegionalRun& run;
    std::vector<std::optional<Snapshot>> snaps;
    std::vector<int> choice;

    explicit Search(RegionalRun& r)
        : run(r), snaps(r.units_.size()), choice(r.units_.size(), -1) {}

    const Snapshot& snap(int u) {
      auto& s = snaps[static_cast<std::size_t>(u)];
      if (!s) {
        auto& st = run.unit(u);
        std::lock_guard lk(st.m);
        s = Snapshot{st.version, st.offers};
      }
      return *s;
    }

    bool compatible(int v, const Offer& o) {
      for (const auto& l : run.unit(v).links) {
        int c = choice[static_cast<std::size_t>(l.other)];
        if (c < 0) continue;
        const auto& other = snap(l.other).offers[static_cast<std::size_t>(c)];
        if (o.sync.test(l.local) != other.sync.test(l.other_local)) return false;
      }
      return true;
    }

    bool data_ok() {
      std::vector<Atom> atoms;
      for (std::size_t u = 0; u < choice.size(); ++u)
        if (choice[u] >= 0) {
          const auto& o = snap(static_cast<int>(u)).offers[static_cast<std::size_t>(choice[u])];
          atoms.insert(atoms.end(), o.atoms.begin(), o.atoms.end());
        }
      return first_assignment({}, atoms, run.unit(0).a->domain()).has_value();
    }

    void require(int v, const Offer& o, std::vector<int>& frontier) {
      for (const auto& l : run.unit(v).links)
        if (o.sync.test(l.local) && choice[static_cast<std::size_t>(l.other)] < 0)
          frontier.push_back(l.other);
    }

    bool extend(std::vector<int> frontier) {
      while (!frontier.empty() && choice[static_cast<std::size_t>(frontier.back())] >= 0)
        frontier.pop_back();
      if (frontier.empty()) return data_ok();
      int v = frontier.back();
      frontier.pop_back();
      const auto& offers = snap(v).offers;
      for (std::size_t i = 0; i < offers.size(); ++i) {
        if (!compatible(v, offers[i])) continue;
        choice[static_cast<std::size_t>(v)] = static_cast<int>(i);
        auto next = frontier;
        require(v, offers[i], next);
        if (extend(std::move(next))) return true;
        choice[static_cast<std::size_t>(v)] = -1;
      }
      return false;
    }

    // Complete step starting from offer `i` of unit `u`, as (unit, offer).
    std::optional<std::vector<std::pair<int, int>>> from(int u, std::size_t i) {
      std::fill(choice.begin(), choice.end(), -1);
      choice[static_cast<std::size_t>(u)] = static_cast<int>(i);
      std::vector<int> frontier;
      require(u, snap(u).offers[i], frontier);
      if (!extend(std::move(frontier))) return std::nullopt;
      std::vector<std::pair<int, int>> out;
      for (std::size_t v = 0; v < choice.size(); ++v)
        if (choice[v] >= 0) out.emplace_back(static_cast<int>(v), choice[v]);
      return out;
    }
  };

  void protocol_thread(int u) {
    auto& self = unit(u);
    {
      std::unique_lock lk(coord_);
      cv_.wait(lk, [&] { return started_ || stop_; });
    }
    while (true) {
      uint64_t epoch;
      {
        std::lock_guard lk(coord_);
        if (stop_) return;
        epoch = epoch_;
      }
      Search search(*this);
      std::vector<std::vector<std::pair<int, int>>> candidates;
      const auto& own = search.snap(u).offers;
      for (std::size_t i = 0; i < own.size(); ++i)
        if (auto c = search.from(u, i)) candidates.push_back(std::move(*c));

      if (candidates.empty()) {
        std::unique_lock lk(coord_);
        if (stop_) return;
        if (epoch_ != epoch) continue;
        idle_[static_cast<std::size_t>(u)] = epoch;
        if (std::all_of(idle_.begin(), idle_.end(), [&](uint64_t e) { return e == epoch; })) {
          finish(RunStatus::Deadlock);
          return;
        }
        cv_.wait(lk, [&] { return stop_ || epoch_ != epoch; });
        idle_[static_cast<std::size_t>(u)] = kNotIdle;
        if (stop_) return;
        continue;
      }
      const auto& pick = candidates[self.rng() % candidates.size()];
      if (self.jitter() % 4 == 0) std::this_thread::yield();
      if (!commit(search, pick)) {
        std::lock_guard lk(coord_);
        if (stop_) return;
      }
    }
  }

  // Locks the involved units in ascending id order and applies the step if
  // none of them moved since its snapshot.
  bool commit(Search& search, const std::vector<std::pair<int, int>>& pick) {
    std::vector<std::unique_lock<std::mutex>> locks;
    for (const auto& [v, oi] : pick) locks.emplace_back(unit(v).m);
    for (const auto& [v, oi] : pick)
      if (unit(v).version != search.snap(v).version) return false;

    std::lock_guard lk(coord_);
    if (stop_) return false;

    std::vector<Atom> atoms;
    std::vector<uint32_t> ext;
    CommittedStep logged;
    std::size_t consumed = 0;
    std::vector<const Transition*> fired;
    for (const auto& [v, oi] : pick) {
      auto& st = unit(v);
      const auto& o = search.snap(v).offers[static_cast<std::size_t>(oi)];
      atoms.insert(atoms.end(), o.atoms.begin(), o.atoms.end());
      const auto& t = st.a->transitions()[o.transition];
      for (auto p : t.sync.members())
        if (st.eps[p].kind != Endpoint::Kind::Shared) ext.push_back(st.global[p]);
      logged.moves.emplace_back(v, o.transition);
      fired.push_back(&t);
    }
    std::sort(ext.begin(), ext.end());
    auto values = *first_assignment(ext, atoms, unit(0).a->domain());
    for (std::size_t i = 0; i < pick.size(); ++i) {
      auto& st = unit(pick[i].first);
      consumed += consume(*fired[i], st.eps);
      st.state = fired[i]->to;
      ++st.version;
      st.offers = collect_offers(*st.a, st.state, st.eps, st.global);
    }

    logged.external = !ext.empty();
    if (!ext.empty()) {
      TraceStep step;
      const auto& domain = unit(0).a->domain();
      for (std::size_t i = 0; i < ext.size(); ++i) {
        step.ports.push_back(ports_[ext[i]]);
        step.data[ports_[ext[i]]] = domain.value(values[i]);
      }
      result_.trace.push_back(std::move(step));
    }
    result_.log.push_back(std::move(logged));
    ++result_.steps;
    ++epoch_;
    remaining_ -= consumed;
    if (remaining_ == 0)
      finish(RunStatus::Completed);
    else if (result_.steps >= limit_)
      finish(RunStatus::StepLimit);
    cv_.notify_all();
    return true;
  }

  // Caller holds coord_.
  void finish(RunStatus s) {
    if (done_) return;
    done_ = true;
    stop_ = true;
    result_.status = s;
    cv_.notify_all();
  }

  std::string describe() {
    std::ostringstream os;
    os << "deadlock with " << remaining_ << " operations pending";
    for (std::size_t u = 0; u < units_.size(); ++u) {
      auto& st = unit(u);
      std::lock_guard lk(st.m);
      os << "\n  unit " << u << " state " << st.a->states()[st.state] << " offers [";
      for (std::size_t i = 0; i < st.offers.size(); ++i)
        os << (i ? " " : "") << "{" << st.a->label(st.a->transitions()[st.offers[i].transition], " ")
           << "}";
      os << "]";
    }
    return os.str();
  }

  const CompiledProtocol& cp_;
  StimulusScript script_;
  std::vector<std::string> ports_;
  std::vector<std::unique_ptr<UnitState>> units_;

  UnitState& unit(std::size_t u) { return *units_[u]; }
  UnitState& unit(int u) { return *units_[static_cast<std::size_t>(u)]; }

  std::mutex coord_;
  std::condition_variable cv_;
  uint64_t epoch_ = 0;
  std::vector<uint64_t> idle_;
  bool started_ = false;
  bool stop_ = false;
  bool done_ = false;
  std::size_t remaining_ = 0;
  std::size_t limit_ = 0;
  RunResult result_;
};

}  // namespace

RunResult run_regional(const CompiledProtocol& cp, const StimulusScript& script) {
  if (cp.units.empty()) throw Error("compiled protocol has no units");
  RegionalRun run(cp, script);
  return run.run();
}

bool accepts(const Automaton& big, const Trace& t) {
  std::set<uint32_t> current{big.initial()};
  for (const auto& step : t) {
    PortSet sync(big.ports().size());
    std::vector<Atom> pinned;
    for (const auto& p : step.ports) {
      auto i = big.port_index(p);
      if (!i) return false;
      sync.set(*i);
    }
    for (const auto& [p, v] : step.data) {
      auto i = big.port_index(p);
      auto lit = big.domain().index_of(v);
      if (!i || !lit || !sync.test(*i)) return false;
      pinned.push_back(Atom::pl(*i, *lit));
    }
    std::set<uint32_t> next;
    for (auto s : current)
      for (const auto& tr : big.outgoing(s)) {
        if (!(tr.sync == sync)) continue;
        std::vector<Atom> atoms = tr.guard;
        atoms.insert(atoms.end(), pinned.begin(), pinned.end());
        if (first_assignment({}, atoms, big.domain())) next.insert(tr.to);
      }
    if (next.empty()) return false;
    current = std::move(next);
  }
  return true;
}

bool log_is_atomic(const CompiledProtocol& cp, const std::vector<CommittedStep>& log) {
  std::vector<uint32_t> state;
  for (const auto& u : cp.units) state.push_back(u.automaton.initial());
  for (const auto& step : log) {
    std::map<int, const Transition*> fired;
    for (const auto& [u, ti] : step.moves) {
      if (u < 0 || static_cast<std::size_t>(u) >= cp.units.size()) return false;
      const auto& a = cp.units[static_cast<std::size_t>(u)].automaton;
      if (ti >= a.transitions().size()) return false;
      const auto& t = a.transitions()[ti];
      if (t.from != state[static_cast<std::size_t>(u)] || !fired.emplace(u, &t).second)
        return false;
    }
    // Both owners of a shared port fire it together or not at all.
    for (const auto& [port, owners] : cp.shared_ports) {
      auto fires = [&](int u) {
        auto it = fired.find(u);
        if (it == fired.end()) return false;
        const auto& a = cp.units[static_cast<std::size_t>(u)].automaton;
        return it->second->sync.test(*a.port_index(port));
      };
      if (fires(owners.first) != fires(owners.second)) return false;
    }
    for (const auto& [u, t] : fired) state[static_cast<std::size_t>(u)] = t->to;
  }
  return true;
}

BenchResult bench(const CompiledProtocol& cp, const StimulusScript& script, std::size_t reps) {
  BenchResult out;
  for (const auto& [p, c] : script.reads) out.items += c;
  for (std::size_t r = 0; r < reps; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    auto res = run_regional(cp, script);
    auto ns = std::chrono::duration<double, std::nano>(std::chrono::steady_clock::now() - t0);
    if (res.status == RunStatus::Deadlock) throw Error(res.diagnostic);
    out.ns_per_item.push_back(out.items ? ns.count() / static_cast<double>(out.items) : 0.0);
  }
  if (!out.ns_per_item.empty()) {
    auto sorted = out.ns_per_item;
    std::sort(sorted.begin(), sorted.end());
    auto n = sorted.size();
    out.median = n % 2 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
    auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
    out.p95 = sorted[std::max<std::size_t>(rank, 1) - 1];
  }
  return out;
}

std::string bench_csv_row(const BenchRow& r) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(1);
  os << r.connector << ',' << r.k << ',' << to_string(r.strategy) << ',' << r.items << ','
     << r.ns_per_item_median << ',' << r.ns_per_item_p95 << ',' << r.seed;
  return os.str();
}

}  // namespace reoc
