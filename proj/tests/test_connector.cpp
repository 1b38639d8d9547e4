#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <functional>

#include "oracle.hpp"
#include "reoc/compile.hpp"
#include "reoc/connector.hpp"
#include "reoc/errors.hpp"
#include "reoc/regions.hpp"

using namespace reoc;

namespace {

std::vector<std::string> tags(int k) {
  std::vector<std::string> out;
  for (int i = 1; i <= k; ++i) out.push_back("P" + std::to_string(i));
  return out;
}

int count_kind(const Connector& c, ChannelKind k) {
  return static_cast<int>(std::count_if(c.channels.begin(), c.channels.end(),
                                        [&](const Channel& ch) { return ch.kind == k; }));
}

// Sequences of values seen at `sink` along every path of `steps` steps in
// which each producer Pi writes only its own tag.
std::set<std::vector<std::string>> sink_orders(const oracle::Lts& lts, const std::string& sink,
                                               int steps) {
  auto adj = oracle::adjacency(lts);
  std::set<std::vector<std::string>> out;
  std::vector<std::string> seen;
  std::function<void(int, int)> walk = [&](int s, int left) {
    if (left == 0) {
      out.insert(seen);
      return;
    }
    bool moved = false;
    for (const auto& [l, t] : adj[static_cast<std::size_t>(s)]) {
      bool own = std::all_of(l.begin(), l.end(), [](const auto& kv) {
        return kv.first[0] != 'P' || kv.first.substr(0, kv.first.find('.')) == kv.second;
      });
      if (!own) continue;
      moved = true;
      auto it = l.find(sink);
      if (it != l.end()) seen.push_back(it->second);
      walk(t, left - 1);
      if (it != l.end()) seen.pop_back();
    }
    if (!moved) out.insert(seen);
  };
  walk(lts.initial, steps);
  return out;
}

}  // namespace

TEST_SUITE("parse") {
  TEST_CASE("a two-line sync connector") {
    auto c = parse_connector(
        "connector s\nboundary_source A\nboundary_sink B\nsync c1 A -> B\n");
    CHECK(c.name == "s");
    CHECK(c.nodes.size() == 2);
    CHECK(c.channels.size() == 1);
    CHECK(c.channels[0].kind == ChannelKind::Sync);
    CHECK(c.external_ports() == std::vector<std::string>{"A.ext", "B.ext"});
    CHECK(c.data_domain().is_agnostic());
  }

  TEST_CASE("comments, lists and a domain line") {
    auto c = parse_connector(R"(# two producers
connector m   # trailing
boundary_source P1, P2
boundary_sink Z
node M
fifo1 F1 P1 -> M
fifo1 F2 P2 -> M
sync SZ M -> Z
domain a, b
)");
    CHECK(c.nodes.size() == 4);
    CHECK(c.data_domain() == DataDomain::of({"a", "b"}));
  }

  TEST_CASE("an undeclared node is a validation error naming it") {
    try {
      parse_connector("connector f\nboundary_source A\nboundary_sink B\nfifo1 f1 Q -> B\n");
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("Q") != std::string::npos);
    }
  }

  TEST_CASE("syntax errors carry line and column") {
    try {
      parse_connector("connector f\nboundary_source A\nsync c1 A => B\n");
      FAIL("expected a syntax error");
    } catch (const SyntaxError& e) {
      CHECK(e.line() == 3);
      CHECK(e.column() == 11);
    }
    CHECK_THROWS_AS(parse_connector("boundary_source A\n"), SyntaxError);
    CHECK_THROWS_AS(parse_connector("connector x\nfrobnicate a\n"), SyntaxError);
    CHECK_THROWS_AS(parse_connector("connector x\nboundary_source A,\n"), SyntaxError);
  }

  TEST_CASE("structural violations") {
    // Channel into a boundary source.
    CHECK_THROWS_AS(parse_connector("connector x\nboundary_source A, B\nsync c A -> B\n"),
                    ValidationError);
    // Channel out of a boundary sink.
    CHECK_THROWS_AS(parse_connector("connector x\nboundary_sink A, B\nsync c A -> B\n"),
                    ValidationError);
    // Disconnected.
    CHECK_THROWS_AS(parse_connector("connector x\nboundary_source A, C\nboundary_sink B, D\n"
                                    "sync c A -> B\nsync d C -> D\n"),
                    ValidationError);
    // Literal outside the domain.
    CHECK_THROWS_AS(parse_connector("connector x\nboundary_sink B\nnode R\n"
                                    "fifo1full f R -> R init z\nsync s R -> B\ndomain a\n"),
                    ValidationError);
    // Duplicate name.
    CHECK_THROWS_AS(parse_connector("connector x\nboundary_source A\nboundary_sink A\n"),
                    ValidationError);
  }

  TEST_CASE("every generated instance round-trips through its source text") {
    for (auto f : {Family::Alternator, Family::AsyncMerger, Family::Sequencer, Family::SyncChain})
      for (int k = f == Family::SyncChain ? 1 : 2; k <= 6; ++k) {
        auto c = gen_family({f, k, std::nullopt});
        CHECK(parse_connector(serialize(c)) == c);
        auto d = gen_family({f, k, tags(2)});
        CHECK(parse_connector(serialize(d)) == d);
      }
  }
}

TEST_SUITE("primitives") {
  TEST_CASE("channel automata") {
    auto c = parse_connector(R"(connector all
boundary_source A
boundary_sink B
node X, Y, W
sync s A -> X
syncdrain d X -- Y
fifo1 f X -> W
fifo1full g Y -> W init b
sync o W -> B
domain a, b
)");
    auto prims = primitive_automata(c, c.data_domain());
    auto get = [&](const std::string& owner) {
      return std::find_if(prims.begin(), prims.end(),
                          [&](const PrimitiveCA& p) { return p.owner == owner; })
          ->automaton;
    };
    auto s = get("s");
    CHECK(counts(s) == Counts{1, 1});
    CHECK(s.transitions()[0].guard == Guard{Atom::pp(0, 1)});
    auto d = get("d");
    CHECK(counts(d) == Counts{1, 1});
    CHECK(d.transitions()[0].guard.empty());
    auto f = get("f");
    CHECK(counts(f) == Counts{3, 4});
    CHECK(f.states()[f.initial()] == "empty");
    auto g = get("g");
    CHECK(counts(g) == Counts{3, 4});
    CHECK(g.states()[g.initial()] == "full(b)");
    CHECK(classify(f) == RegionKind::Asynchronous);
    CHECK(classify(s) == RegionKind::Synchronous);
  }

  TEST_CASE("data-agnostic FIFO1 has two states") {
    auto c = gen_family({Family::AsyncMerger, 2, std::nullopt});
    for (const auto& p : primitive_automata(c, c.data_domain()))
      if (p.owner == "F1") CHECK(p.automaton.states().size() == 2);
  }

  TEST_CASE("nodes merge inputs and replicate to outputs") {
    auto c = gen_family({Family::AsyncMerger, 3, std::nullopt});
    for (const auto& p : primitive_automata(c, c.data_domain())) {
      if (p.owner == "M") {
        CHECK(counts(p.automaton) == Counts{1, 3});
        for (const auto& t : p.automaton.transitions()) CHECK(t.sync.count() == 2);
      }
      if (p.owner == "P1") {
        CHECK(counts(p.automaton) == Counts{1, 1});
        CHECK(p.automaton.ports() == std::vector<std::string>{"F1.src", "P1.ext"});
      }
      if (p.owner == "Z") CHECK(p.automaton.ports() == std::vector<std::string>{"SZ.snk", "Z.ext"});
    }
    auto alt = gen_family({Family::Alternator, 3, std::nullopt});
    for (const auto& p : primitive_automata(alt, alt.data_domain()))
      if (p.owner == "P2") {
        // Input ext, outputs S2.src plus both drain ends touching P2.
        REQUIRE(p.automaton.transitions().size() == 1);
        CHECK(p.automaton.transitions()[0].sync.count() == 4);
      }
  }

  TEST_CASE("each channel end occurs in two automata and each external port in one") {
    for (auto f : {Family::Alternator, Family::AsyncMerger, Family::Sequencer, Family::SyncChain})
      for (int k = 2; k <= 5; ++k) {
        auto c = gen_family({f, k, std::nullopt});
        std::map<std::string, int> seen;
        for (const auto& p : primitive_automata(c, c.data_domain()))
          for (const auto& port : p.automaton.ports()) ++seen[port];
        auto ext = c.external_ports();
        for (const auto& [port, n] : seen) {
          bool external = std::find(ext.begin(), ext.end(), port) != ext.end();
          CHECK_MESSAGE(n == (external ? 1 : 2), port);
        }
      }
  }

  TEST_CASE("a sync channel between boundary nodes behaves as one sync") {
    auto c = gen_family({Family::SyncChain, 1, std::nullopt});
    auto prims = primitive_automata(c, c.data_domain());
    CHECK(prims.size() == 3);
    auto big = centralized_automaton(c, c.data_domain());
    auto one = AutomatonBuilder().port("A.ext").port("B.ext").state("q").initial("q")
                   .transition("q", {"A.ext", "B.ext"}, {}, "q").build();
    CHECK(bisimilar(big, one));
    auto full = oracle::full_product(prims);
    CHECK(oracle::bisimilar(oracle::hide(full, oracle::internal_ports(full, c.external_ports())),
                            oracle::expand(one)));
  }

  TEST_CASE("fifo1full literals must lie in the domain") {
    auto c = gen_family({Family::Sequencer, 3, std::vector<std::string>{"t"}});
    CHECK_THROWS_AS(primitive_automata(c, DataDomain::of({"u"})), DomainMismatch);
  }
}

TEST_SUITE("families") {
  TEST_CASE("alternator(3) structure") {
    auto c = gen_family({Family::Alternator, 3, std::nullopt});
    CHECK(c.name == "alternator_3");
    CHECK(count_kind(c, ChannelKind::Fifo1) == 2);
    CHECK(count_kind(c, ChannelKind::SyncDrain) == 2);
    CHECK(c.nodes.size() == 7);
    CHECK(c.external_ports() == std::vector<std::string>{"P1.ext", "P2.ext", "P3.ext", "Z.ext"});
    int buffers = 0;
    for (const auto& p : primitive_automata(c, c.data_domain()))
      if (p.is_channel && p.automaton.states().size() == 2) {
        ++buffers;
        for (const auto& t : p.automaton.transitions()) CHECK(t.sync.count() == 1);
      }
    CHECK(buffers == 2);
  }

  TEST_CASE("asyncmerger(3) has three buffers into one merge node") {
    auto c = gen_family({Family::AsyncMerger, 3, std::nullopt});
    CHECK(count_kind(c, ChannelKind::Fifo1) == 3);
    for (const auto& ch : c.channels)
      if (ch.kind == ChannelKind::Fifo1) CHECK(ch.snk == "M");
  }

  TEST_CASE("sequencer(3) carries one token") {
    auto c = gen_family({Family::Sequencer, 3, std::nullopt});
    CHECK(count_kind(c, ChannelKind::Fifo1Full) == 1);
    CHECK(count_kind(c, ChannelKind::Fifo1) == 2);
    CHECK(c.external_ports() == std::vector<std::string>{"B1.ext", "B2.ext", "B3.ext"});
  }

  TEST_CASE("sync_chain(1) is the primitive sync connector") {
    auto c = gen_family({Family::SyncChain, 1, std::nullopt});
    auto expected = parse_connector(
        "connector sync_chain_1\nboundary_source A\nboundary_sink B\nsync C1 A -> B\n");
    CHECK(c == expected);
  }

  TEST_CASE("sizes below the minimum are rejected") {
    CHECK_THROWS_AS(gen_family({Family::Alternator, 1, std::nullopt}), InvalidSize);
    CHECK_THROWS_AS(gen_family({Family::AsyncMerger, 1, std::nullopt}), InvalidSize);
    CHECK_THROWS_AS(gen_family({Family::Sequencer, 1, std::nullopt}), InvalidSize);
    CHECK_THROWS_AS(gen_family({Family::SyncChain, 0, std::nullopt}), InvalidSize);
    CHECK_NOTHROW(gen_family({Family::SyncChain, 1, std::nullopt}));
  }

  TEST_CASE("family names parse back") {
    for (auto f : {Family::Alternator, Family::AsyncMerger, Family::Sequencer, Family::SyncChain})
      CHECK(parse_family(family_name(f)) == f);
    CHECK_FALSE(parse_family("lossy"));
  }

  TEST_CASE("alternator(k) delivers producers top to bottom") {
    for (int k = 2; k <= 5; ++k) {
      auto c = gen_family({Family::Alternator, k, tags(k)});
      auto lts = oracle::expand(centralized_automaton(c, c.data_domain()));
      std::vector<std::string> cycle;
      for (int round = 0; round < 2; ++round)
        for (const auto& t : tags(k)) cycle.push_back(t);
      auto orders = sink_orders(lts, "Z.ext", 2 * k);
      REQUIRE(orders.size() == 1);
      CHECK(*orders.begin() == cycle);
    }
  }

  TEST_CASE("asyncmerger(k) delivers pending productions in any order") {
    for (int k = 2; k <= 3; ++k) {
      auto c = gen_family({Family::AsyncMerger, k, tags(k)});
      auto lts = oracle::expand(centralized_automaton(c, c.data_domain()));
      // Keep walks where each producer wrote at most once before k deliveries.
      auto orders = sink_orders(lts, "Z.ext", 2 * k);
      std::set<std::vector<std::string>> perms;
      auto t = tags(k);
      do {
        perms.insert(t);
      } while (std::next_permutation(t.begin(), t.end()));
      std::set<std::vector<std::string>> prefixes;
      for (const auto& o : orders)
        if (o.size() >= static_cast<std::size_t>(k))
          prefixes.insert(std::vector<std::string>(o.begin(), o.begin() + k));
      for (const auto& p : perms) CHECK(prefixes.contains(p));
    }
  }

  TEST_CASE("sync chains hide to a single sync") {
    auto one = centralized_automaton(gen_family({Family::SyncChain, 1, std::nullopt}), {});
    for (int n = 1; n <= 6; ++n) {
      auto c = gen_family({Family::SyncChain, n, std::nullopt});
      CHECK(bisimilar(centralized_automaton(c, c.data_domain()), one));
      auto d = gen_family({Family::SyncChain, n, tags(2)});
      auto dd = centralized_automaton(d, d.data_domain());
      auto ref = oracle::full_product(primitive_automata(d, d.data_domain()));
      CHECK(oracle::bisimilar(oracle::expand(dd),
                              oracle::hide(ref, oracle::internal_ports(ref, d.external_ports()))));
    }
  }
}
