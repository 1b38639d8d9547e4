#pragma once

#include <string>

#include "json.hpp"
#include "reoc/automaton.hpp"

namespace reoc {

/// CA JSON: {ports, states, initial, transitions:[{from, sync, guard:[{kind,a,b}], to}], domain}.
nlohmann::ordered_json to_json(const Automaton& a);

/// Inverse of to_json. A domain of exactly ["*"] reads back as data-agnostic.
/// Throws Error on malformed documents.
Automaton automaton_from_json(const nlohmann::json& j);

/// Graphviz rendering: one node per state, edges labeled with sorted sync sets.
std::string to_dot(const Automaton& a, const std::string& graph_name = "ca");

}  // namespace reoc
