#include "reoc/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "reoc/ca_io.hpp"
#include "reoc/compile.hpp"
#include "reoc/connector.hpp"
#include "reoc/errors.hpp"
#include "reoc/regions.hpp"
#include "reoc/runtime.hpp"

namespace reoc {
namespace {

namespace fs = std::filesystem;

// Failure carrying an exit status.
struct Exit {
  int code;
  std::string message;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Exit{kExitInput, "cannot read " + path};
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Exit{kExitInput, "cannot write " + path.string()};
  out << text;
}

nlohmann::json read_json(const std::string& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Exit{kExitInput, path + ": " + e.what()};
  }
}

Connector load_connector(const std::string& path) { return parse_connector(read_file(path)); }

DataDomain domain_for(const Connector& c, const std::vector<std::string>& override_values) {
  if (override_values.empty()) return c.data_domain();
  return DataDomain::of(override_values);
}

int size_of(const std::string& connector_name) {
  auto us = connector_name.rfind('_');
  if (us == std::string::npos) return 0;
  try {
    std::size_t used = 0;
    int k = std::stoi(connector_name.substr(us + 1), &used);
    return used == connector_name.size() - us - 1 ? k : 0;
  } catch (const std::exception&) {
    return 0;
  }
}

Strategy strategy_from(const std::string& name) {
  auto s = parse_strategy(name);
  if (!s) throw Exit{kExitUsage, "unknown strategy " + name};
  return *s;
}

std::pair<int, int> region_counts(const Connector& c, Strategy s, const DataDomain& d) {
  auto prims = primitive_automata(c, d);
  if (s == Strategy::Centralized) return {0, 1};
  if (s == Strategy::Distributed) {
    int m1 = 0;
    for (const auto& p : prims)
      if (classify(p) == RegionKind::Asynchronous) ++m1;
    return {m1, static_cast<int>(prims.size()) - m1};
  }
  auto pt = split(prims, c.external_ports());
  if (s == Strategy::Mixed) pt = merge_mixed(pt, prims, c.external_ports());
  return {pt.m1, pt.m2};
}

std::string fixed3(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << v;
  return os.str();
}

struct StatsLine {
  std::string connector;
  int k = 0;
  Strategy strategy = Strategy::Centralized;
  std::size_t units = 0;
  int m1 = 0;
  int m2 = 0;
  std::size_t max_states = 0;
  std::size_t max_transitions = 0;
  std::size_t total_states = 0;
  std::size_t total_transitions = 0;
  double compile_ms = 0.0;
  std::size_t budget = 0;
  std::string outcome;
};

std::string csv(const StatsLine& l) {
  std::ostringstream os;
  os << l.connector << ',' << l.k << ',' << to_string(l.strategy) << ',' << l.units << ',' << l.m1
     << ',' << l.m2 << ',' << l.max_states << ',' << l.max_transitions << ',' << l.total_states
     << ',' << l.total_transitions << ',' << fixed3(l.compile_ms) << ',' << l.budget << ','
     << l.outcome;
  return os.str();
}

std::string fold_log_text(const std::vector<FoldStep>& log) {
  std::ostringstream os;
  for (const auto& f : log)
    os << "unit " << f.unit << " step " << f.step << " operand " << f.operand << " product "
       << f.product_states << "/" << f.product_transitions << " kept " << f.states << "/"
       << f.transitions << "\n";
  return os.str();
}

// Compiles, or returns the stats line of a budget failure in `failed`.
std::optional<CompiledProtocol> compile_for_stats(const Connector& c, Strategy s,
                                                  const DataDomain& d, std::size_t budget,
                                                  bool deterministic, StatsLine& line,
                                                  std::optional<BudgetExceeded>& failed) {
  line.connector = c.name;
  line.k = size_of(c.name);
  line.strategy = s;
  line.budget = budget;
  try {
    CompileOptions opts;
    opts.budget = budget;
    auto cp = compile(c, s, d, opts);
    line.units = cp.units.size();
    line.m1 = cp.stats.m1;
    line.m2 = cp.stats.m2;
    line.max_states = cp.stats.max_states;
    line.max_transitions = cp.stats.max_transitions;
    line.total_states = cp.stats.total_states;
    line.total_transitions = cp.stats.total_transitions;
    line.compile_ms = deterministic ? 0.0 : cp.stats.wall_ms;
    line.outcome = "ok";
    return cp;
  } catch (const BudgetExceeded& e) {
    std::tie(line.m1, line.m2) = region_counts(c, s, d);
    line.max_transitions = e.size();
    line.outcome = "budget_exceeded";
    failed.emplace(e);
    return std::nullopt;
  }
}

nlohmann::ordered_json protocol_json(const CompiledProtocol& cp) {
  nlohmann::ordered_json j;
  j["strategy"] = to_string(cp.strategy);
  j["external_ports"] = cp.external_ports;
  auto shared = nlohmann::ordered_json::object();
  for (const auto& [p, us] : cp.shared_ports) shared[p] = {us.first, us.second};
  j["shared_ports"] = shared;
  auto units = nlohmann::ordered_json::array();
  for (const auto& u : cp.units)
    units.push_back({{"id", u.id}, {"role", u.role}, {"members", u.members},
                     {"ca", to_json(u.automaton)}});
  j["units"] = units;
  return j;
}

// A .reoc source compiles centrally; JSON is a CA or a one-unit protocol.
Automaton load_behaviour(const std::string& path, const std::vector<std::string>& domain,
                         std::size_t budget) {
  auto text = read_file(path);
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw Exit{kExitInput, path + ": " + e.what()};
    }
    if (j.contains("units")) {
      if (j["units"].size() != 1) throw Exit{kExitInput, path + ": expected exactly one unit"};
      return automaton_from_json(j["units"][0]["ca"]);
    }
    return automaton_from_json(j);
  }
  auto c = parse_connector(text);
  CompileOptions opts;
  opts.budget = budget;
  return centralized_automaton(c, domain_for(c, domain), opts);
}

std::vector<std::string> external_of(const Automaton& a) {
  std::vector<std::string> out = a.ports();
  std::sort(out.begin(), out.end());
  return out;
}

Trace load_trace(const std::string& path) {
  auto text = read_file(path);
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    try {
      return trace_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
      throw Exit{kExitInput, path + ": " + e.what()};
    }
  }
  return parse_trace_lines(text);
}

std::string trace_text(const Trace& t, const std::string& format) {
  if (format == "lines") {
    std::string out;
    for (const auto& s : t) out += format_trace_line(s) + "\n";
    return out;
  }
  return to_json(t).dump(2) + "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reo connector compiler and protocol runtime", "reoc"};
  app.require_subcommand(1);

  std::vector<std::string> domain;
  std::size_t budget = kDefaultBudget;
  bool deterministic = false;

  auto* gen = app.add_subcommand("gen", "Generate a connector source for a family instance");
  std::string family;
  int k = 0;
  std::string output;
  gen->add_option("--family", family, "alternator, asyncmerger, sequencer or sync_chain")
      ->required();
  gen->add_option("-k", k, "Family size")->required();
  gen->add_option("-o,--output", output, "Output file (default stdout)");
  gen->add_option("--domain", domain, "Data literals, comma separated")->delimiter(',');

  auto* build = app.add_subcommand("build", "Compile a connector");
  std::string file;
  std::string strategy_name = "centralized";
  std::vector<std::string> emit;
  build->add_option("file", file, "Connector source")->required();
  build->add_option("--strategy", strategy_name, "centralized, distributed, middleground, mixed");
  build->add_option("--budget", budget, "Transition budget")->check(CLI::PositiveNumber);
  build->add_option("--emit", emit, "stats, ca-json, regions, dot or c")
      ->delimiter(',')
      ->check(CLI::IsMember({"stats", "ca-json", "regions", "dot", "c"}));
  build->add_option("-o,--output", output, "Output directory (default stdout)");
  build->add_option("--domain", domain, "Override the data domain")->delimiter(',');
  build->add_flag("--deterministic", deterministic, "Report compile_ms as 0");

  auto* equiv = app.add_subcommand("equiv", "Check two connectors for bisimilarity");
  std::string file_b;
  equiv->add_option("a", file, "Connector source or CA JSON")->required();
  equiv->add_option("b", file_b, "Connector source or CA JSON")->required();
  equiv->add_option("--budget", budget, "Transition budget")->check(CLI::PositiveNumber);
  equiv->add_option("--domain", domain, "Override the data domain")->delimiter(',');

  auto* run = app.add_subcommand("run", "Execute a connector on a stimulus script");
  std::string script_path;
  std::string check_path;
  std::string format = "json";
  bool validate_flag = false;
  bool reference = false;
  std::optional<uint64_t> seed;
  run->add_option("file", file, "Connector source")->required();
  run->add_option("--strategy", strategy_name, "Compilation strategy");
  run->add_option("--script", script_path, "Stimulus script JSON");
  run->add_option("--check-trace", check_path,
                  "Validate a recorded trace (JSON or PORTS;DATA lines) instead of running");
  run->add_flag("--validate", validate_flag, "Check the trace against the centralized CA");
  run->add_flag("--reference", reference, "Use the sequential interpreter on the centralized CA");
  run->add_option("--seed", seed, "Override the script seed");
  run->add_option("--format", format, "json or lines")->check(CLI::IsMember({"json", "lines"}));
  run->add_option("--budget", budget, "Transition budget")->check(CLI::PositiveNumber);
  run->add_option("--domain", domain, "Override the data domain")->delimiter(',');

  auto* bench_cmd = app.add_subcommand("bench", "Measure per-item latency");
  std::size_t reps = 10;
  bench_cmd->add_option("file", file, "Connector source")->required();
  bench_cmd->add_option("--strategy", strategy_name, "Compilation strategy");
  bench_cmd->add_option("--script", script_path, "Stimulus script JSON")->required();
  bench_cmd->add_option("--reps", reps, "Repetitions");
  bench_cmd->add_option("-o,--output", output, "Output CSV (default stdout)");
  bench_cmd->add_option("--budget", budget, "Transition budget")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--domain", domain, "Override the data domain")->delimiter(',');

  auto* stats = app.add_subcommand("stats", "Compile a family over a size range and write CSV");
  int k_from = 0;
  int k_to = 0;
  stats->add_option("--family", family, "Family")->required();
  stats->add_option("--k-from", k_from, "First size")->required();
  stats->add_option("--k-to", k_to, "Last size")->required();
  stats->add_option("--strategy", strategy_name, "Compilation strategy");
  stats->add_option("--budget", budget, "Transition budget")->check(CLI::PositiveNumber);
  stats->add_option("-o,--output", output, "Output CSV (default stdout)");
  stats->add_flag("--deterministic", deterministic, "Report compile_ms as 0");

  auto* scan = app.add_subcommand("scan", "Search the full product for composed buffer moves");
  scan->add_option("file", file, "Connector source with buffers F1..Fn")->required();
  scan->add_option("--budget", budget, "Transition budget")->check(CLI::PositiveNumber);

  std::vector<std::string> argv_store{"reoc"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) {
      auto f = parse_family(family);
      if (!f) throw Exit{kExitUsage, "unknown family " + family};
      FamilySpec spec{*f, k, std::nullopt};
      if (!domain.empty()) spec.domain = domain;
      auto text = serialize(gen_family(spec));
      if (output.empty())
        out << text;
      else
        write_file(output, text);
      return kExitOk;
    }

    if (build->parsed()) {
      auto s = strategy_from(strategy_name);
      if (emit.empty()) emit.push_back("stats");
      if (std::find(emit.begin(), emit.end(), "c") != emit.end())
        throw Exit{kExitUsage, "C emission is provided by a separate code generator"};
      auto c = load_connector(file);
      auto d = domain_for(c, domain);
      StatsLine line;
      std::optional<BudgetExceeded> failed;
      auto cp = compile_for_stats(c, s, d, budget, deterministic, line, failed);
      auto put = [&](const std::string& name, const std::string& text) {
        if (output.empty())
          out << text;
        else
          write_file(fs::path(output) / name, text);
      };
      if (std::find(emit.begin(), emit.end(), "stats") != emit.end())
        put("stats.csv", std::string(kStatsHeader) + "\n" + csv(line) + "\n");
      if (failed) {
        err << failed->what() << "\n" << fold_log_text(failed->log());
        return kExitBudget;
      }
      for (const auto& e : emit) {
        if (e == "ca-json") {
          put("protocol.json", protocol_json(*cp).dump(2) + "\n");
        } else if (e == "regions") {
          auto prims = primitive_automata(c, d);
          auto pt = split(prims, c.external_ports());
          if (s == Strategy::Mixed) pt = merge_mixed(pt, prims, c.external_ports());
          put("regions.json", to_json(pt, prims).dump(2) + "\n");
        } else if (e == "dot") {
          std::string text;
          for (const auto& u : cp->units)
            text += to_dot(u.automaton, "unit" + std::to_string(u.id));
          put("units.dot", text);
        }
      }
      return kExitOk;
    }

    if (equiv->parsed()) {
      auto a = load_behaviour(file, domain, budget);
      auto b = load_behaviour(file_b, domain, budget);
      auto pa = external_of(a);
      auto pb = external_of(b);
      if (pa.size() != pb.size()) {
        out << "not equivalent: " << pa.size() << " vs " << pb.size() << " external ports\n";
        return kExitMismatch;
      }
      std::map<std::string, std::string> names;
      for (std::size_t i = 0; i < pb.size(); ++i) names[pb[i]] = "__p" + std::to_string(i);
      std::map<std::string, std::string> names_a;
      for (std::size_t i = 0; i < pa.size(); ++i) names_a[pa[i]] = "__p" + std::to_string(i);
      bool same = bisimilar(rename_ports(a, names_a), rename_ports(b, names));
      out << (same ? "equivalent" : "not equivalent") << "\n";
      return same ? kExitOk : kExitMismatch;
    }

    if (run->parsed()) {
      auto s = strategy_from(strategy_name);
      auto c = load_connector(file);
      auto d = domain_for(c, domain);
      CompileOptions opts;
      opts.budget = budget;
      if (!check_path.empty()) {
        auto trace = load_trace(check_path);
        bool ok = accepts(centralized_automaton(c, d, opts), trace);
        out << (ok ? "accepted" : "rejected") << "\n";
        return ok ? kExitOk : kExitMismatch;
      }
      if (script_path.empty()) throw Exit{kExitUsage, "run needs --script or --check-trace"};
      auto script = script_from_json(read_json(script_path));
      if (seed) script.seed = *seed;
      RunResult result;
      if (reference)
        result = run_reference(centralized_automaton(c, d, opts), script);
      else
        result = run_regional(compile(c, s, d, opts), script);
      out << trace_text(result.trace, format);
      if (result.status != RunStatus::Completed) {
        err << to_string(result.status) << ": " << result.diagnostic << "\n";
        return kExitRuntime;
      }
      if (validate_flag && !accepts(centralized_automaton(c, d, opts), result.trace)) {
        err << "trace rejected by the centralized automaton\n";
        return kExitMismatch;
      }
      return kExitOk;
    }

    if (bench_cmd->parsed()) {
      auto s = strategy_from(strategy_name);
      auto c = load_connector(file);
      auto d = domain_for(c, domain);
      auto script = script_from_json(read_json(script_path));
      CompileOptions opts;
      opts.budget = budget;
      auto cp = compile(c, s, d, opts);
      auto res = bench(cp, script, reps);
      std::string text = std::string(kBenchHeader) + "\n";
      if (!res.ns_per_item.empty())
        text += bench_csv_row({c.name, size_of(c.name), s, res.items, res.median, res.p95,
                               script.seed}) +
                "\n";
      if (output.empty())
        out << text;
      else
        write_file(output, text);
      return kExitOk;
    }

    if (stats->parsed()) {
      auto s = strategy_from(strategy_name);
      auto f = parse_family(family);
      if (!f) throw Exit{kExitUsage, "unknown family " + family};
      if (k_to < k_from) throw Exit{kExitUsage, "--k-to is below --k-from"};
      std::string text = std::string(kStatsHeader) + "\n";
      for (int kk = k_from; kk <= k_to; ++kk) {
        auto c = gen_family({*f, kk, std::nullopt});
        StatsLine line;
        std::optional<BudgetExceeded> failed;
        compile_for_stats(c, s, c.data_domain(), budget, deterministic, line, failed);
        text += csv(line) + "\n";
      }
      if (output.empty())
        out << text;
      else
        write_file(output, text);
      return kExitOk;
    }

    if (scan->parsed()) {
      auto c = load_connector(file);
      auto report = disabled_transition_scan(c, c.data_domain(), budget);
      out << to_json(report).dump(2) << "\n";
      return report.any_move_found() ? kExitMismatch : kExitOk;
    }
  } catch (const Exit& e) {
    err << e.message << "\n";
    return e.code;
  } catch (const BudgetExceeded& e) {
    err << e.what() << "\n" << fold_log_text(e.log());
    return kExitBudget;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    err << e.what() << "\n";
    return kExitInput;
  }
  return kExitUsage;
}

}  // namespace reoc
