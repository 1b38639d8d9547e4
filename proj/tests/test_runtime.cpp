#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "reoc/runtime.hpp"

using namespace reoc;

namespace {

const Family kFamilies[] = {Family::Alternator, Family::AsyncMerger, Family::Sequencer,
                            Family::SyncChain};
const std::vector<std::string> kTags{"a", "b", "c", "d"};

Connector tagged(Family f, int k) { return gen_family({f, k, kTags}); }

// n writes per boundary source, reads split evenly over the sinks.
StimulusScript balanced(const Connector& c, std::size_t n, uint64_t seed) {
  StimulusScript s;
  s.seed = seed;
  std::vector<std::string> sources, sinks;
  for (const auto& nd : c.nodes) {
    if (nd.kind == NodeKind::BoundarySource) sources.push_back(nd.name);
    if (nd.kind == NodeKind::BoundarySink) sinks.push_back(nd.name);
  }
  for (std::size_t i = 0; i < sources.size(); ++i)
    for (std::size_t j = 0; j < n; ++j) s.writes[sources[i]].push_back(kTags[(i + j) % kTags.size()]);
  std::size_t per = sources.empty() ? n : n * sources.size() / sinks.size();
  for (const auto& z : sinks) s.reads[z] = per;
  return s;
}

// Every value read was written earlier, or held initially by a full buffer.
bool no_phantom_data(const Trace& t, const Connector& c) {
  std::set<std::string> supplied;
  for (const auto& ch : c.channels)
    if (ch.kind == ChannelKind::Fifo1Full) supplied.insert(ch.init);
  auto kind = [&](const std::string& port) {
    auto* n = c.node(port.substr(0, port.find('.')));
    return n ? n->kind : NodeKind::Internal;
  };
  for (const auto& step : t) {
    for (const auto& [p, v] : step.data)
      if (kind(p) == NodeKind::BoundarySource) supplied.insert(v);
    for (const auto& [p, v] : step.data)
      if (kind(p) == NodeKind::BoundarySink && !supplied.contains(v)) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("scripts") {
  TEST_CASE("script JSON round-trips") {
    StimulusScript s;
    s.writes["P1"] = {"a", "b"};
    s.reads["Z"] = 2;
    s.seed = 42;
    s.max_steps = 7;
    auto back = script_from_json(to_json(s));
    CHECK(back.writes == s.writes);
    CHECK(back.reads == s.reads);
    CHECK(back.seed == 42);
    CHECK(back.max_steps == 7);
    CHECK(back.total_operations() == 4);
    CHECK(back.step_limit() == 7);
    back.max_steps = 0;
    CHECK(back.step_limit() == 40);
  }

  TEST_CASE("malformed scripts are errors") {
    CHECK_THROWS_AS((void)script_from_json(nlohmann::json::array()), Error);
    CHECK_THROWS_AS((void)script_from_json(nlohmann::json::parse(R"({"reads":{"Z":-1}})")), Error);
    CHECK_THROWS_AS((void)script_from_json(nlohmann::json::parse(R"({"writes":{"P":[1]}})")), Error);
  }

  TEST_CASE("bare node names resolve to external ports") {
    auto c = tagged(Family::Alternator, 2);
    StimulusScript s;
    s.writes["P1"] = {"a"};
    s.reads["Z.ext"] = 1;
    auto r = resolve_script(s, c.external_ports(), c.data_domain());
    CHECK(r.writes.contains("P1.ext"));
    CHECK(r.reads.contains("Z.ext"));
  }

  TEST_CASE("resolution rejects unknown ports, foreign literals and mixed use") {
    auto c = tagged(Family::Alternator, 2);
    auto ports = c.external_ports();
    StimulusScript s;
    s.writes["Q"] = {"a"};
    CHECK_THROWS_AS((void)resolve_script(s, ports, c.data_domain()), UnknownPort);
    s.writes = {{"P1", {"zz"}}};
    CHECK_THROWS_AS((void)resolve_script(s, ports, c.data_domain()), DomainMismatch);
    s.writes = {{"P1", {"a"}}};
    s.reads = {{"P1.ext", 1}};
    CHECK_THROWS_AS((void)resolve_script(s, ports, c.data_domain()), Error);
  }
}

TEST_SUITE("traces") {
  TEST_CASE("harness lines parse into sorted steps") {
    auto s = parse_trace_line("P2.ext, P1.ext ;P1.ext=a,P2.ext=b");
    CHECK(s.ports == std::vector<std::string>{"P1.ext", "P2.ext"});
    CHECK(s.data == std::map<std::string, std::string>{{"P1.ext", "a"}, {"P2.ext", "b"}});
    CHECK(format_trace_line(s) == "P1.ext,P2.ext;P1.ext=a,P2.ext=b");
    CHECK(parse_trace_line(format_trace_line(s)) == s);
    CHECK(parse_trace_line("Z.ext").data.empty());
    CHECK(parse_trace_line("Z.ext;").data.empty());
  }

  TEST_CASE("malformed harness lines are errors") {
    for (const char* bad : {"A;B;C", ",A", "A,A", "A;A", "A;=1", "A;A=", "A;B=1", "A;A=1,A=2"})
      CHECK_THROWS_AS((void)parse_trace_line(bad), Error);
  }

  TEST_CASE("harness output skips blank lines") {
    auto t = parse_trace_lines("A;A=1\n\n  \nB;B=2\n");
    REQUIRE(t.size() == 2);
    CHECK(t[1].ports == std::vector<std::string>{"B"});
    CHECK(values_at(t, "A") == std::vector<std::string>{"1"});
    CHECK(parse_trace_lines("").empty());
  }

  TEST_CASE("trace JSON round-trips") {
    Trace t{{{"A", "B"}, {{"A", "x"}, {"B", "x"}}}, {{"C"}, {}}};
    CHECK(trace_from_json(to_json(t)) == t);
    CHECK_THROWS_AS((void)trace_from_json(nlohmann::json::parse("[{\"ports\":3}]")), Error);
  }
}

TEST_SUITE("reference run") {
  TEST_CASE("alternator(3) delivers its writers top to bottom") {
    auto c = tagged(Family::Alternator, 3);
    auto big = centralized_automaton(c, c.data_domain());
    StimulusScript s;
    s.writes = {{"P1", {"a", "a", "a"}}, {"P2", {"b", "b", "b"}}, {"P3", {"c", "c", "c"}}};
    s.reads = {{"Z", 9}};
    for (uint64_t seed : {0u, 1u, 99u}) {
      s.seed = seed;
      auto r = run_reference(big, s);
      CHECK(r.status == RunStatus::Completed);
      CHECK(values_at(r.trace, "Z.ext") ==
            std::vector<std::string>{"a", "b", "c", "a", "b", "c", "a", "b", "c"});
      CHECK(r.trace.size() == 9);
      CHECK(r.trace[0].ports ==
            std::vector<std::string>{"P1.ext", "P2.ext", "P3.ext", "Z.ext"});
    }
  }

  TEST_CASE("an empty script completes with an empty trace") {
    auto c = tagged(Family::Alternator, 3);
    auto r = run_reference(centralized_automaton(c, c.data_domain()), {});
    CHECK(r.status == RunStatus::Completed);
    CHECK(r.trace.empty());
    auto g = run_regional(compile(c, Strategy::Distributed, c.data_domain()), {});
    CHECK(g.status == RunStatus::Completed);
    CHECK(g.trace.empty());
  }

  TEST_CASE("asyncmerger(3) delivers every item in seed-dependent orders") {
    auto c = tagged(Family::AsyncMerger, 3);
    auto big = centralized_automaton(c, c.data_domain());
    StimulusScript s;
    s.writes = {{"P1", {"a"}}, {"P2", {"b"}}, {"P3", {"c"}}};
    s.reads = {{"Z", 3}};
    std::set<std::vector<std::string>> orders;
    for (uint64_t seed = 0; seed < 50; ++seed) {
      s.seed = seed;
      auto r = run_reference(big, s);
      REQUIRE(r.status == RunStatus::Completed);
      auto z = values_at(r.trace, "Z.ext");
      CHECK(std::multiset<std::string>(z.begin(), z.end()) ==
            std::multiset<std::string>{"a", "b", "c"});
      CHECK(no_phantom_data(r.trace, c));
      orders.insert(z);
    }
    CHECK(orders.size() >= 2);
  }

  TEST_CASE("the same seed gives the same run") {
    auto c = tagged(Family::AsyncMerger, 3);
    auto big = centralized_automaton(c, c.data_domain());
    auto s = balanced(c, 3, 5);
    CHECK(run_reference(big, s).trace == run_reference(big, s).trace);
  }

  TEST_CASE("unserviceable operations leave the run stuck") {
    auto c = tagged(Family::Alternator, 2);
    StimulusScript s;
    s.writes = {{"P1", {"a"}}};
    s.reads = {{"Z", 1}};
    auto r = run_reference(centralized_automaton(c, c.data_domain()), s);
    CHECK(r.status == RunStatus::Stuck);
    CHECK(r.trace.empty());
    CHECK_FALSE(r.diagnostic.empty());
  }

  TEST_CASE("the step limit stops a run early") {
    auto c = tagged(Family::Alternator, 3);
    auto s = balanced(c, 3, 0);
    s.max_steps = 2;
    auto r = run_reference(centralized_automaton(c, c.data_domain()), s);
    CHECK(r.status == RunStatus::StepLimit);
    CHECK(r.steps == 2);
    auto g = run_regional(compile(c, Strategy::Middleground, c.data_domain()), s);
    CHECK(g.status == RunStatus::StepLimit);
    CHECK(g.steps == 2);
  }

  TEST_CASE("automata with silent steps are refused") {
    auto a = AutomatonBuilder().port("a").state("q").initial("q").transition("q", {}, {}, "q").build();
    CHECK_THROWS_AS((void)run_reference(a, {}), Error);
  }
}

TEST_SUITE("acceptance") {
  TEST_CASE("out-of-order and unknown steps are rejected") {
    auto c = tagged(Family::Alternator, 3);
    auto big = centralized_automaton(c, c.data_domain());
    CHECK(accepts(big, {}));
    CHECK(accepts(big, parse_trace_lines("P1.ext,P2.ext,P3.ext,Z.ext;P1.ext=a,Z.ext=a\nZ.ext;Z.ext=b")));
    CHECK_FALSE(accepts(big, parse_trace_lines("P2.ext,Z.ext")));
    CHECK_FALSE(accepts(big, parse_trace_lines("Q.ext")));
    CHECK_FALSE(accepts(big, parse_trace_lines("P1.ext,P2.ext,P3.ext,Z.ext;P1.ext=a,Z.ext=b")));
    CHECK_FALSE(accepts(big, parse_trace_lines("P1.ext,P2.ext,P3.ext,Z.ext;Z.ext=zz")));
  }
}

TEST_SUITE("regional run") {
  TEST_CASE("a single unit reproduces the reference run") {
    for (auto f : kFamilies) {
      auto c = tagged(f, 3);
      auto cp = compile(c, Strategy::Centralized, c.data_domain());
      for (uint64_t seed = 0; seed < 10; ++seed) {
        auto s = balanced(c, 4, seed);
        auto ref = run_reference(cp.units[0].automaton, s);
        auto reg = run_regional(cp, s);
        CHECK(reg.status == ref.status);
        CHECK(reg.trace == ref.trace);
      }
    }
  }

  TEST_CASE("middleground alternator keeps the writer order") {
    auto c = tagged(Family::Alternator, 3);
    auto cp = compile(c, Strategy::Middleground, c.data_domain());
    StimulusScript s;
    s.writes = {{"P1", {"a", "a"}}, {"P2", {"b", "b"}}, {"P3", {"c", "c"}}};
    s.reads = {{"Z", 6}};
    for (uint64_t seed = 0; seed < 50; ++seed) {
      s.seed = seed;
      auto r = run_regional(cp, s);
      REQUIRE(r.status == RunStatus::Completed);
      CHECK(values_at(r.trace, "Z.ext") == std::vector<std::string>{"a", "b", "c", "a", "b", "c"});
    }
  }

  TEST_CASE("sequencer cycles through its sinks") {
    auto c = tagged(Family::Sequencer, 3);
    auto big = centralized_automaton(c, c.data_domain());
    auto s = balanced(c, 2, 3);
    for (auto st : kAllStrategies) {
      auto r = run_regional(compile(c, st, c.data_domain()), s);
      REQUIRE(r.status == RunStatus::Completed);
      CHECK(accepts(big, r.trace));
      REQUIRE(r.trace.size() == 6);
      for (std::size_t i = 0; i + 3 < r.trace.size(); ++i) CHECK(r.trace[i].ports == r.trace[i + 3].ports);
    }
  }

  TEST_CASE("every strategy produces sound, atomic runs") {
    for (auto f : kFamilies)
      for (int k = 2; k <= 3; ++k) {
        auto c = tagged(f, k);
        auto big = centralized_automaton(c, c.data_domain());
        for (auto st : kAllStrategies) {
          auto cp = compile(c, st, c.data_domain());
          for (uint64_t seed = 0; seed < 8; ++seed) {
            INFO(family_name(f), " k=", k, " ", to_string(st), " seed=", seed);
            auto r = run_regional(cp, balanced(c, 3, seed));
            CHECK(r.status == RunStatus::Completed);
            CHECK(accepts(big, r.trace));
            CHECK(log_is_atomic(cp, r.log));
            CHECK(no_phantom_data(r.trace, c));
          }
        }
      }
  }

  TEST_CASE("quiescence with pending operations is a deadlock") {
    auto c = tagged(Family::Alternator, 2);
    StimulusScript s;
    s.writes = {{"P1", {"a"}}};
    s.reads = {{"Z", 1}};
    for (auto st : kAllStrategies) {
      auto r = run_regional(compile(c, st, c.data_domain()), s);
      CHECK(r.status == RunStatus::Deadlock);
      CHECK(r.diagnostic.find("deadlock") != std::string::npos);
    }
  }

  TEST_CASE("broken logs are not atomic") {
    auto c = tagged(Family::Alternator, 2);
    auto cp = compile(c, Strategy::Distributed, c.data_domain());
    auto r = run_regional(cp, balanced(c, 1, 0));
    REQUIRE(r.status == RunStatus::Completed);
    REQUIRE(log_is_atomic(cp, r.log));
    auto cut = r.log;
    REQUIRE(cut.front().moves.size() > 1);
    cut.front().moves.pop_back();
    CHECK_FALSE(log_is_atomic(cp, cut));
    auto twice = r.log;
    twice.insert(twice.begin(), r.log.front());
    CHECK_FALSE(log_is_atomic(cp, twice));
  }
}

TEST_SUITE("bench") {
  TEST_CASE("zero repetitions give an empty result") {
    auto c = tagged(Family::Alternator, 2);
    auto b = bench(compile(c, Strategy::Mixed, c.data_domain()), balanced(c, 2, 0), 0);
    CHECK(b.ns_per_item.empty());
    CHECK(b.median == 0.0);
    CHECK(b.items == 4);
  }

  TEST_CASE("statistics come from the repetitions") {
    auto c = tagged(Family::Alternator, 2);
    auto b = bench(compile(c, Strategy::Mixed, c.data_domain()), balanced(c, 2, 0), 5);
    REQUIRE(b.ns_per_item.size() == 5);
    auto [lo, hi] = std::minmax_element(b.ns_per_item.begin(), b.ns_per_item.end());
    CHECK(b.median >= *lo);
    CHECK(b.median <= *hi);
    CHECK(b.p95 == *hi);
  }

  TEST_CASE("CSV rows follow the header") {
    BenchRow r{"alternator", 4, Strategy::Mixed, 40, 1234.56, 2000.0, 7};
    CHECK(bench_csv_row(r) == "alternator,4,mixed,40,1234.6,2000.0,7");
    CHECK(std::count(kBenchHeader.begin(), kBenchHeader.end(), ',') == 6);
  }
}
