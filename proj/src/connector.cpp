#include "reoc/connector.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "reoc/errors.hpp"

namespace reoc {

std::string src_port(const Channel& c) { return c.id + ".src"; }
std::string snk_port(const Channel& c) { return c.id + ".snk"; }
std::string external_port(std::string_view node) { return std::string(node) + ".ext"; }

DataDomain Connector::data_domain() const {
  return domain ? DataDomain::of(*domain) : DataDomain::agnostic();
}

const Node* Connector::node(std::string_view n) const {
  for (const auto& nd : nodes)
    if (nd.name == n) return &nd;
  return nullptr;
}

std::vector<std::string> Connector::external_ports() const {
  std::vector<std::string> out;
  for (const auto& n : nodes)
    if (n.kind != NodeKind::Internal) out.push_back(external_port(n.name));
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

const char* kind_keyword(ChannelKind k) {
  switch (k) {
    case ChannelKind::Sync: return "sync";
    case ChannelKind::SyncDrain: return "syncdrain";
    case ChannelKind::Fifo1: return "fifo1";
    case ChannelKind::Fifo1Full: return "fifo1full";
  }
  return "?";
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_';
  });
}

bool is_literal(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '*';
  });
}

// Data enters a node through the snk end of a directed channel and leaves
// through src ends; both syncdrain ends take data from their nodes.
bool enters(const Channel& c, std::string_view node) {
  return c.kind != ChannelKind::SyncDrain && c.snk == node;
}

}  // namespace

void validate(const Connector& c) {
  if (c.name.empty()) throw ValidationError("connector has no name");
  if (c.nodes.empty()) throw ValidationError("connector '" + c.name + "' declares no nodes");

  std::set<std::string> names;
  for (const auto& n : c.nodes)
    if (!names.insert(n.name).second) throw ValidationError("duplicate name '" + n.name + "'");
  for (const auto& ch : c.channels)
    if (!names.insert(ch.id).second) throw ValidationError("duplicate name '" + ch.id + "'");

  DataDomain dom;
  try {
    dom = c.data_domain();
  } catch (const Error& e) {
    throw ValidationError(e.what());
  }

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < c.nodes.size(); ++i) index[c.nodes[i].name] = i;
  std::vector<std::size_t> parent(c.nodes.size());
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  for (const auto& ch : c.channels) {
    for (const auto* end : {&ch.src, &ch.snk})
      if (!index.count(*end))
        throw ValidationError("dangling end: channel '" + ch.id + "' attaches to undeclared node '" +
                              *end + "'");
    for (const auto* end : {&ch.src, &ch.snk}) {
      const Node& nd = c.nodes[index[*end]];
      bool in = end == &ch.snk && enters(ch, *end);
      if (nd.kind == NodeKind::BoundarySource && in)
        throw ValidationError("boundary source '" + nd.name + "' receives data from channel '" +
                              ch.id + "'");
      if (nd.kind == NodeKind::BoundarySink && !in)
        throw ValidationError("boundary sink '" + nd.name + "' feeds channel '" + ch.id + "'");
    }
    if (ch.kind == ChannelKind::Fifo1Full && !dom.index_of(ch.init))
      throw ValidationError("channel '" + ch.id + "': unknown literal '" + ch.init + "'");
    parent[find(index[ch.src])] = find(index[ch.snk]);
  }
  for (std::size_t i = 1; i < c.nodes.size(); ++i)
    if (find(i) != find(0))
      throw ValidationError("connector graph is disconnected: '" + c.nodes[i].name +
                            "' is not connected to '" + c.nodes[0].name + "'");
}

// ---------------------------------------------------------------------------

namespace {

struct Token {
  std::string text;
  int column;
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    char ch = line[i];
    if (ch == '#') break;
    if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
      continue;
    }
    if (ch == ',') {
      out.push_back({",", static_cast<int>(i) + 1});
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) &&
           line[i] != ',' && line[i] != '#')
      ++i;
    out.push_back({std::string(line.substr(start, i - start)), static_cast<int>(start) + 1});
  }
  return out;
}

class LineParser {
public:
  LineParser(int line, std::vector<Token> toks) : line_(line), toks_(std::move(toks)) {}

  const Token& next(const char* what) {
    if (pos_ >= toks_.size()) {
      int col = toks_.empty() ? 1 : toks_.back().column + static_cast<int>(toks_.back().text.size());
      throw SyntaxError(line_, col, std::string("expected ") + what);
    }
    return toks_[pos_++];
  }
  std::string ident(const char* what) {
    const auto& t = next(what);
    if (!is_identifier(t.text))
      throw SyntaxError(line_, t.column, std::string("expected ") + what + ", got '" + t.text + "'");
    return t.text;
  }
  std::string literal() {
    const auto& t = next("literal");
    if (!is_literal(t.text))
      throw SyntaxError(line_, t.column, "invalid literal '" + t.text + "'");
    return t.text;
  }
  void expect(std::string_view word) {
    const auto& t = next(std::string(word).c_str());
    if (t.text != word)
      throw SyntaxError(line_, t.column,
                        "expected '" + std::string(word) + "', got '" + t.text + "'");
  }
  template <typename F>
  std::vector<std::string> list(F item) {
    std::vector<std::string> out{item()};
    while (pos_ < toks_.size()) {
      expect(",");
      out.push_back(item());
    }
    return out;
  }
  void end() {
    if (pos_ < toks_.size())
      throw SyntaxError(line_, toks_[pos_].column, "unexpected '" + toks_[pos_].text + "'");
  }

private:
  int line_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

Connector parse_connector(std::string_view text) {
  Connector c;
  bool have_header = false;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    start = end + 1;

    auto toks = tokenize(line);
    if (toks.empty()) continue;
    const std::string keyword = toks.front().text;
    const int kw_col = toks.front().column;
    LineParser p(line_no, std::move(toks));
    p.next("keyword");

    if (keyword == "connector") {
      if (have_header) throw SyntaxError(line_no, kw_col, "duplicate connector header");
      c.name = p.ident("connector name");
      have_header = true;
    } else if (!have_header) {
      throw SyntaxError(line_no, kw_col, "expected 'connector <name>' before declarations");
    } else if (keyword == "boundary_source" || keyword == "boundary_sink" || keyword == "node") {
      NodeKind kind = keyword == "node"            ? NodeKind::Internal
                      : keyword == "boundary_sink" ? NodeKind::BoundarySink
                                                   : NodeKind::BoundarySource;
      for (auto& n : p.list([&] { return p.ident("node name"); })) c.nodes.push_back({n, kind});
    } else if (keyword == "sync" || keyword == "fifo1" || keyword == "fifo1full" ||
               keyword == "syncdrain") {
      Channel ch;
      ch.kind = keyword == "sync"        ? ChannelKind::Sync
                : keyword == "fifo1"     ? ChannelKind::Fifo1
                : keyword == "fifo1full" ? ChannelKind::Fifo1Full
                                         : ChannelKind::SyncDrain;
      ch.id = p.ident("channel id");
      ch.src = p.ident("node name");
      p.expect(ch.kind == ChannelKind::SyncDrain ? "--" : "->");
      ch.snk = p.ident("node name");
      if (ch.kind == ChannelKind::Fifo1Full) {
        p.expect("init");
        ch.init = p.literal();
      }
      c.channels.push_back(std::move(ch));
    } else if (keyword == "domain") {
      if (c.domain) throw SyntaxError(line_no, kw_col, "duplicate domain declaration");
      c.domain = p.list([&] { return p.literal(); });
    } else {
      throw SyntaxError(line_no, kw_col, "unknown declaration '" + keyword + "'");
    }
    p.end();
    if (end == text.size()) break;
  }
  if (!have_header) throw SyntaxError(1, 1, "missing 'connector <name>' header");
  validate(c);
  return c;
}

std::string serialize(const Connector& c) {
  std::ostringstream os;
  os << "connector " << c.name << "\n";
  auto group = [&](NodeKind kind, const char* kw) {
    std::vector<std::string> names;
    for (const auto& n : c.nodes)
      if (n.kind == kind) names.push_back(n.name);
    if (names.empty()) return;
    os << kw;
    for (std::size_t i = 0; i < names.size(); ++i) os << (i ? ", " : " ") << names[i];
    os << "\n";
  };
  group(NodeKind::BoundarySource, "boundary_source");
  group(NodeKind::BoundarySink, "boundary_sink");
  group(NodeKind::Internal, "node");
  for (const auto& ch : c.channels) {
    os << kind_keyword(ch.kind) << " " << ch.id << " " << ch.src
       << (ch.kind == ChannelKind::SyncDrain ? " -- " : " -> ") << ch.snk;
    if (ch.kind == ChannelKind::Fifo1Full) os << " init " << ch.init;
    os << "\n";
  }
  if (c.domain) {
    os << "domain";
    for (std::size_t i = 0; i < c.domain->size(); ++i) os << (i ? ", " : " ") << (*c.domain)[i];
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------

namespace {

Automaton channel_automaton(const Channel& ch, const DataDomain& dom) {
  const std::string s = src_port(ch);
  const std::string k = snk_port(ch);
  AutomatonBuilder b(dom);
  b.port(s).port(k);
  switch (ch.kind) {
    case ChannelKind::Sync:
      b.state("q").transition("q", {s, k}, {NamedAtom::pp(s, k)}, "q");
      break;
    case ChannelKind::SyncDrain:
      b.state("q").transition("q", {s, k}, {}, "q");
      break;
    case ChannelKind::Fifo1:
    case ChannelKind::Fifo1Full: {
      b.state("empty");
      for (const auto& d : dom.values()) {
        const std::string full = "full(" + d + ")";
        b.state(full);
        b.transition("empty", {s}, {NamedAtom::pl(s, d)}, full);
        b.transition(full, {k}, {NamedAtom::pl(k, d)}, "empty");
      }
      if (ch.kind == ChannelKind::Fifo1Full) {
        if (!dom.index_of(ch.init))
          throw DomainMismatch("channel '" + ch.id + "': literal '" + ch.init +
                               "' not in data domain");
        b.initial("full(" + ch.init + ")");
      } else {
        b.initial("empty");
      }
      break;
    }
  }
  return b.build();
}

Automaton node_automaton(const Connector& c, const Node& n, const DataDomain& dom) {
  std::vector<std::string> in, out;
  for (const auto& ch : c.channels) {
    if (ch.src == n.name) out.push_back(src_port(ch));
    if (ch.snk == n.name) (enters(ch, n.name) ? in : out).push_back(snk_port(ch));
  }
  if (n.kind == NodeKind::BoundarySource) in.push_back(external_port(n.name));
  if (n.kind == NodeKind::BoundarySink) out.push_back(external_port(n.name));

  AutomatonBuilder b(dom);
  b.state("q");
  for (const auto& p : in) b.port(p);
  for (const auto& p : out) b.port(p);
  for (const auto& i : in) {
    std::vector<std::string> sync{i};
    std::vector<NamedAtom> guard;
    for (const auto& o : out) {
      sync.push_back(o);
      guard.push_back(NamedAtom::pp(i, o));
    }
    b.transition("q", std::move(sync), std::move(guard), "q");
  }
  return b.build();
}

}  // namespace

std::vector<PrimitiveCA> primitive_automata(const Connector& c, const DataDomain& domain) {
  std::vector<PrimitiveCA> out;
  out.reserve(c.channels.size() + c.nodes.size());
  for (const auto& ch : c.channels) out.push_back({ch.id, true, channel_automaton(ch, domain)});
  for (const auto& n : c.nodes) out.push_back({n.name, false, node_automaton(c, n, domain)});
  return out;
}

// ---------------------------------------------------------------------------

std::optional<Family> parse_family(std::string_view name) {
  if (name == "alternator") return Family::Alternator;
  if (name == "asyncmerger") return Family::AsyncMerger;
  if (name == "sequencer") return Family::Sequencer;
  if (name == "sync_chain") return Family::SyncChain;
  return std::nullopt;
}

std::string family_name(Family f) {
  switch (f) {
    case Family::Alternator: return "alternator";
    case Family::AsyncMerger: return "asyncmerger";
    case Family::Sequencer: return "sequencer";
    case Family::SyncChain: return "sync_chain";
  }
  return "?";
}

Connector gen_family(const FamilySpec& spec) {
  const int k = spec.size;
  const int min = spec.family == Family::SyncChain ? 1 : 2;
  if (k < min || k > kMaxFamilySize)
    throw InvalidSize(family_name(spec.family) + " size " + std::to_string(k) + " outside [" +
                      std::to_string(min) + ", " + std::to_string(kMaxFamilySize) + "]");

  Connector c;
  c.name = family_name(spec.family) + "_" + std::to_string(k);
  c.domain = spec.domain;
  auto num = [](const char* prefix, int i) { return prefix + std::to_string(i); };
  auto add = [&](ChannelKind kind, std::string id, std::string src, std::string snk) {
    c.channels.push_back({std::move(id), kind, std::move(src), std::move(snk), ""});
  };

  switch (spec.family) {
    case Family::Alternator: {
      for (int i = 1; i <= k; ++i) c.nodes.push_back({num("P", i), NodeKind::BoundarySource});
      c.nodes.push_back({"Z", NodeKind::BoundarySink});
      c.nodes.push_back({"M", NodeKind::Internal});
      for (int i = 1; i < k; ++i) c.nodes.push_back({num("N", i), NodeKind::Internal});
      auto chain = [&](int i) { return i == 0 ? std::string("M") : num("N", i); };
      for (int i = 1; i < k; ++i) add(ChannelKind::SyncDrain, num("D", i), num("P", i), num("P", i + 1));
      add(ChannelKind::Sync, "S1", "P1", "M");
      for (int i = 1; i < k; ++i) add(ChannelKind::Sync, num("S", i + 1), num("P", i + 1), chain(i));
      for (int i = 1; i < k; ++i) add(ChannelKind::Fifo1, num("F", i), chain(i), chain(i - 1));
      add(ChannelKind::Sync, "SZ", "M", "Z");
      break;
    }
    case Family::AsyncMerger: {
      for (int i = 1; i <= k; ++i) c.nodes.push_back({num("P", i), NodeKind::BoundarySource});
      c.nodes.push_back({"Z", NodeKind::BoundarySink});
      c.nodes.push_back({"M", NodeKind::Internal});
      for (int i = 1; i <= k; ++i) add(ChannelKind::Fifo1, num("F", i), num("P", i), "M");
      add(ChannelKind::Sync, "SZ", "M", "Z");
      break;
    }
    case Family::Sequencer: {
      for (int i = 1; i <= k; ++i) c.nodes.push_back({num("B", i), NodeKind::BoundarySink});
      for (int i = 1; i <= k; ++i) c.nodes.push_back({num("R", i), NodeKind::Internal});
      const std::string token = spec.domain ? spec.domain->front() : std::string(DataDomain::kAgnosticValue);
      for (int i = 1; i <= k; ++i) {
        Channel f{num("F", i), i == 1 ? ChannelKind::Fifo1Full : ChannelKind::Fifo1, num("R", i),
                  num("R", i % k + 1), i == 1 ? token : ""};
        c.channels.push_back(std::move(f));
      }
      for (int i = 1; i <= k; ++i) add(ChannelKind::Sync, num("S", i), num("R", i), num("B", i));
      break;
    }
    case Family::SyncChain: {
      c.nodes.push_back({"A", NodeKind::BoundarySource});
      c.nodes.push_back({"B", NodeKind::BoundarySink});
      for (int i = 1; i < k; ++i) c.nodes.push_back({num("X", i), NodeKind::Internal});
      for (int i = 1; i <= k; ++i)
        add(ChannelKind::Sync, num("C", i), i == 1 ? "A" : num("X", i - 1), i == k ? "B" : num("X", i));
      break;
    }
  }
  validate(c);
  return c;
}

}  // namespace reoc
