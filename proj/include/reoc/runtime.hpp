#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "reoc/automaton.hpp"
#include "reoc/compile.hpp"

namespace reoc {

/// Operations the computation threads perform at the boundary.
struct StimulusScript {
  std::map<std::string, std::vector<std::string>> writes;
  std::map<std::string, std::size_t> reads;
  uint64_t seed = 0;
  /// 0 selects the default of 10 x total operations.
  std::size_t max_steps = 0;

  [[nodiscard]] std::size_t total_operations() const;
  [[nodiscard]] std::size_t step_limit() const;
};

/// Parses `{writes:{port:[lit]}, reads:{port:n}, seed, max_steps}`.
StimulusScript script_from_json(const nlohmann::json& j);
nlohmann::json to_json(const StimulusScript& s);

/// Maps script ports onto `ports`, accepting bare node names for `<node>.ext`,
/// and checks literals against `domain`. Throws UnknownPort, DomainMismatch.
StimulusScript resolve_script(const StimulusScript& s, const std::vector<std::string>& ports,
                              const DataDomain& domain);

struct TraceStep {
  std::vector<std::string> ports;  // sorted
  std::map<std::string, std::string> data;
  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};
using Trace = std::vector<TraceStep>;

nlohmann::json to_json(const Trace& t);
Trace trace_from_json(const nlohmann::json& j);

/// One line `P1,P2;p1=v1,p2=v2`. Throws Error on malformed input.
TraceStep parse_trace_line(std::string_view line);
std::string format_trace_line(const TraceStep& s);
/// Whole harness output; blank lines are skipped.
Trace parse_trace_lines(std::string_view text);

/// Data values observed at `port`, in trace order.
std::vector<std::string> values_at(const Trace& t, const std::string& port);

enum class RunStatus { Completed, Stuck, StepLimit, Deadlock };
std::string to_string(RunStatus s);

/// One committed step of a regional run: the participating units and the
/// index of the transition each fired in its own automaton.
struct CommittedStep {
  std::vector<std::pair<int, std::size_t>> moves;
  bool external = false;
};

struct RunResult {
  Trace trace;
  RunStatus status = RunStatus::Completed;
  std::string diagnostic;
  std::size_t steps = 0;
  std::vector<CommittedStep> log;
};

/// Sequential interpreter over one automaton without silent transitions.
/// Among enabled transitions ordered by (sync, target) it picks index
/// mt19937_64(seed)() % n.
RunResult run_reference(const Automaton& big, const StimulusScript& script);

/// One protocol thread per unit, synchronizing through offers on shared
/// ports. A single unit reproduces run_reference under the same seed.
RunResult run_regional(const CompiledProtocol& cp, const StimulusScript& script);

/// True iff `t` is a prefix of some run of `big`.
bool accepts(const Automaton& big, const Trace& t);

/// True iff every unit's projection of the log is a path from its initial state.
bool log_is_atomic(const CompiledProtocol& cp, const std::vector<CommittedStep>& log);

struct BenchRow {
  std::string connector;
  int k = 0;
  Strategy strategy = Strategy::Centralized;
  std::size_t items = 0;
  double ns_per_item_median = 0.0;
  double ns_per_item_p95 = 0.0;
  uint64_t seed = 0;
};

struct BenchResult {
  std::vector<double> ns_per_item;  // one per repetition
  std::size_t items = 0;
  double median = 0.0;
  double p95 = 0.0;
};

/// Repeats run_regional; items are the reads performed per run.
BenchResult bench(const CompiledProtocol& cp, const StimulusScript& script, std::size_t reps);

inline constexpr std::string_view kBenchHeader =
    "connector,k,strategy,items,ns_per_item_median,ns_per_item_p95,seed";
std::string bench_csv_row(const BenchRow& r);

}  // namespace reoc
