#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rv/formula.hpp"
#include "rv/formula_ops.hpp"
#include "rv/match.hpp"
#include "rv/substitution.hpp"

namespace rv {

/// Explicit finite labelled transition system over tau and event-shaped
/// labels. Ground truth for validating the runtime monitors at desk scale.
class FiniteLTS {
 public:
  using State = std::size_t;

  State add_state(std::string id);
  State state(const std::string& id) const;  // throws if unknown
  bool has_state(const std::string& id) const;
  std::size_t num_states() const { return ids_.size(); }
  const std::string& id_of(State s) const { return ids_[s]; }

  void add_tau(State from, State to);
  void add_edge(State from, EventInstance label, State to);

  struct Edge {
    State from;
    bool tau;
    EventInstance label;
    State to;
  };
  const std::vector<Edge>& edges() const { return edges_; }

 private:
  std::vector<std::string> ids_;
  std::map<std::string, State> index_;
  std::vector<Edge> edges_;
};

/// Line-based format: `state <id>` and `edge <from> <label-or-tau> <to>`,
/// labels in the trace-event syntax. States are auto-created on first use.
FiniteLTS load_lts(const std::string& text);

using StateSet = std::set<FiniteLTS::State>;
using Trace = std::vector<EventInstance>;

/// Weak transition: tau-closure, one labelled step matching `a` exactly
/// (structural equality), tau-closure again.
StateSet weak_step(const FiniteLTS& lts, FiniteLTS::State from, const EventInstance& a);

/// tau-closure of a single state.
StateSet tau_closure(const FiniteLTS& lts, FiniteLTS::State from);

struct DenoteStats {
  int max_gfp_iterations = 0;
};

/// Denotational semantics over the LTS. sff denotes like ff; the
/// synchronous necessity denotes like the plain one. Fixpoints are computed
/// by downward iteration from the full state set.
StateSet denote(const FormulaPtr& f, const FiniteLTS& lts,
                const std::map<std::string, StateSet>& env, const PredicateTable& preds,
                DenoteStats* stats = nullptr);

bool satisfies(const FiniteLTS& lts, FiniteLTS::State p, const FormulaPtr& f,
               const PredicateTable& preds);

/// Trace-level violation oracle: unfolds the formula along the trace.
/// Returns the earliest event index at which some branch reduces to ff.
/// An event is offered to every live branch: branches whose necessity has a
/// different kind or a mismatching subject ignore it; a matching kind and
/// subject with a failing payload satisfies the branch trivially.
struct Rejection {
  std::size_t index = 0;
  bool sync = false;  // the violating branch was consumed by a synchronous necessity
  Substitution witness;
};
std::optional<Rejection> rejects_trace(const FormulaPtr& f, const Trace& t,
                                       const PredicateTable& preds);

/// Trace file helpers (one event per line, `#` comments).
Trace load_trace_file(const std::string& path);
FiniteLTS load_lts_file(const std::string& path);

}  // namespace rv
