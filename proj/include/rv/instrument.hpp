#pragma once

#include <vector>

#include "rv/formula_ops.hpp"
#include "rv/runtime.hpp"
#include "rv/wire.hpp"

namespace rv {

/// How monitored events are reported to the monitor network.
enum class InstrumentationMode { Async, Sync, Hybrid };

const char* to_string(InstrumentationMode m);

/// Static pattern test with every variable treated as a wildcard: the widest
/// set of events a necessity might consume at runtime.
bool could_match(const ActionPattern& pattern, const EventInstance& event);

/// Per-pattern sync/async table computed once from the marked formula.
/// An event is reported iff some monitored pattern could match it; it is
/// reported synchronously iff the mode is Sync, or the mode is Hybrid and
/// some matching pattern sits under a synchronous necessity.
class ModeTable {
 public:
  ModeTable(std::vector<PatternMode> patterns, InstrumentationMode mode)
      : patterns_(std::move(patterns)), mode_(mode) {}

  HookDecision decide(const EventInstance& e) const;
  InstrumentationMode mode() const { return mode_; }
  const std::vector<PatternMode>& patterns() const { return patterns_; }

 private:
  std::vector<PatternMode> patterns_;
  InstrumentationMode mode_;
};

/// Registers the interposition hook for a marked formula: every traced
/// actor's send/receive/call/return events that may match a monitored
/// pattern are reported to `sink` with a nonce chosen per the mode.
/// Returns the hook id.
std::size_t instrument(Runtime& rt, const FormulaPtr& marked, InstrumentationMode mode,
                       ActorRef sink);

/// Monitor-side acknowledgement: exactly one ack per fresh nonce. The
/// `acked` table catches double acks (a monitor bug) in debug builds.
void send_ack(Runtime& rt, ActorRef system, const Nonce& n,
              std::set<std::pair<std::uint64_t, std::uint64_t>>* acked = nullptr);

}  // namespace rv
