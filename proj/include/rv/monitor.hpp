#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rv/formula_ops.hpp"
#include "rv/instrument.hpp"
#include "rv/oracle.hpp"
#include "rv/runtime.hpp"

namespace rv {

struct SynthesisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Monitor outcome. A violation is final for the branch that raised it;
/// sync means the event carried a fresh nonce, i.e. the offending actor is
/// still blocked at flag time. index is empty for violations present before
/// any event was consumed.
struct Verdict {
  std::optional<std::uint64_t> index;
  bool sync = false;
  Substitution witness;
  EventInstance event;  // meaningful when index is set
};

/// Verdict-log line: `violation <event-index> <sync|async> <witness>`.
std::string to_string(const Verdict& v);

/// One waiting necessity: the submonitor's state between events.
struct Obligation {
  bool sync = false;          // synchronous necessity
  ActionPattern pattern;      // enclosing bindings already substituted
  FormulaPtr continuation;
  std::map<std::string, FormulaPtr> env;  // recursion environment (copied on fork)
  Substitution accumulated;   // witness bindings so far
};

/// Static compilation result: initial submonitors plus the per-pattern
/// sync table the instrumentation layer consumes.
struct Blueprint {
  FormulaPtr marked;
  std::vector<Obligation> initial;
  std::vector<Substitution> start_violation_witnesses;  // ff before any event
  std::vector<PatternMode> pattern_modes;
};

/// Compiles a well-formed, alpha-renamed, sff-marked formula. An unmarked
/// sff is a synthesis error (run mark_synchronous first).
Blueprint synthesize(const FormulaPtr& marked, const PredicateTable& preds);

/// One Fig-5-style loop iteration, as a pure function.
struct StepResult {
  enum class Kind {
    Skip,       // event irrelevant to this necessity (kind/subject mismatch)
    Satisfied,  // relevant event failed the pattern: trivially satisfied
    Advanced,   // pattern matched; successors carry the residual branches
  };
  Kind kind = Kind::Skip;
  std::vector<Obligation> successors;
  std::vector<Verdict> verdicts;
};
StepResult submonitor_step(const Obligation& state, const EventMessage& msg,
                           const PredicateTable& preds);

struct AckRecord {
  enum class Action { Null, Acked, Withheld };
  std::uint64_t event_seq = 0;
  Nonce nonce;
  Action action = Action::Null;
  friend bool operator==(const AckRecord&, const AckRecord&) = default;
};

struct NetworkShared;

/// Handle on a live monitor network. The router actor is the event entry
/// point; submonitors are independent actors that never message each other.
class MonitorNetwork {
 public:
  ActorRef sink() const { return router_; }
  std::size_t live_submonitors() const;
  std::vector<Verdict> verdicts() const;
  std::vector<AckRecord> ack_log() const;
  std::uint64_t events_handled() const;
  /// Blocks until at least n verdicts exist (threaded runtimes).
  bool wait_verdicts(std::size_t n, std::uint64_t timeout_ms) const;

 private:
  friend MonitorNetwork start_network(Runtime&, const Blueprint&, std::string);
  ActorRef router_;
  std::shared_ptr<NetworkShared> shared_;
};

/// Spawns the router and the blueprint's initial submonitors on rt.
/// verdict_path, when nonempty, appends one line per verdict.
MonitorNetwork start_network(Runtime& rt, const Blueprint& bp, std::string verdict_path = "");

/// Drives a trace through a fresh deterministic runtime: a feeder actor
/// plays the instrumented system, blocking on fresh nonces exactly as the
/// real instrumentation would.
struct NetworkRunResult {
  std::vector<Verdict> verdicts;
  std::vector<AckRecord> acks;
  std::size_t live_submonitors = 0;
  bool source_blocked = false;  // a withheld ack left the feeder blocked
  std::size_t events_delivered = 0;
};
NetworkRunResult run_monitor_network(const Blueprint& bp, const Trace& trace,
                                     InstrumentationMode mode, const PredicateTable& preds);

}  // namespace rv
