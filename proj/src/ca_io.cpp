#include "reoc/ca_io.hpp"

#include <sstream>

#include "reoc/errors.hpp"

namespace reoc {

nlohmann::ordered_json to_json(const Automaton& a) {
  nlohmann::ordered_json j;
  j["ports"] = a.ports();
  j["states"] = a.states();
  j["initial"] = a.states()[a.initial()];
  auto ts = nlohmann::ordered_json::array();
  for (const auto& t : a.transitions()) {
    nlohmann::ordered_json jt;
    jt["from"] = a.states()[t.from];
    jt["sync"] = a.port_names(t.sync);
    auto g = nlohmann::ordered_json::array();
    for (const auto& at : t.guard) {
      nlohmann::ordered_json ja;
      if (at.kind == Atom::Kind::PortPort) {
        ja["kind"] = "pp";
        ja["a"] = a.ports()[at.a];
        ja["b"] = a.ports()[at.b];
      } else {
        ja["kind"] = "pl";
        ja["a"] = a.ports()[at.a];
        ja["b"] = a.domain().value(at.b);
      }
      g.push_back(std::move(ja));
    }
    jt["guard"] = std::move(g);
    jt["to"] = a.states()[t.to];
    ts.push_back(std::move(jt));
  }
  j["transitions"] = std::move(ts);
  j["domain"] = a.domain().values();
  return j;
}

Automaton automaton_from_json(const nlohmann::json& j) {
  try {
    auto values = j.at("domain").get<std::vector<std::string>>();
    DataDomain dom = (values.size() == 1 && values[0] == DataDomain::kAgnosticValue)
                         ? DataDomain::agnostic()
                         : DataDomain::of(values);
    AutomatonBuilder b(dom);
    for (const auto& p : j.at("ports")) b.port(p.get<std::string>());
    for (const auto& s : j.at("states")) b.state(s.get<std::string>());
    b.initial(j.at("initial").get<std::string>());
    for (const auto& t : j.at("transitions")) {
      std::vector<NamedAtom> guard;
      for (const auto& ga : t.at("guard")) {
        auto kind = ga.at("kind").get<std::string>();
        if (kind == "pp")
          guard.push_back(NamedAtom::pp(ga.at("a"), ga.at("b")));
        else if (kind == "pl")
          guard.push_back(NamedAtom::pl(ga.at("a"), ga.at("b")));
        else
          throw Error("unknown guard kind '" + kind + "'");
      }
      b.transition(t.at("from"), t.at("sync").get<std::vector<std::string>>(), std::move(guard),
                   t.at("to"));
    }
    return b.build();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed CA JSON: ") + e.what());
  }
}

std::string to_dot(const Automaton& a, const std::string& graph_name) {
  std::ostringstream os;
  auto quote = [](const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out + "\"";
  };
  os << "digraph " << quote(graph_name) << " {\n";
  os << "  rankdir=LR;\n";
  os << "  __start [shape=point];\n";
  for (const auto& s : a.states()) os << "  " << quote(s) << " [shape=circle];\n";
  os << "  __start -> " << quote(a.states()[a.initial()]) << ";\n";
  for (const auto& t : a.transitions())
    os << "  " << quote(a.states()[t.from]) << " -> " << quote(a.states()[t.to])
       << " [label=" << quote("{" + a.label(t, " ") + "}") << "];\n";
  os << "}\n";
  return os.str();
}

}  // namespace reoc
