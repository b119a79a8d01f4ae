#pragma once

#include <optional>
#include <stdexcept>

#include "rv/substitution.hpp"
#include "rv/term.hpp"

namespace rv {

/// Raised on nonlinear patterns (a variable bound twice within one pattern);
/// the well-formedness pass rejects these before matching ever runs.
struct MatchError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Structural one-way match of an open term against a closed value. Binds
/// each variable exactly once into `out`; wildcards bind nothing. Returns
/// false on any mismatch (out may then hold partial bindings).
bool match_term(const Term& pattern, const Value& value, Substitution& out);

/// match(alpha, beta): the unique substitution with pattern sigma == event,
/// or nullopt when kinds, subjects, names, arities or literals mismatch.
std::optional<Substitution> match(const ActionPattern& pattern, const EventInstance& event);

/// Subscription test used by monitors and the trace oracle: an event is
/// relevant to a necessity when the kinds agree and the subject term matches
/// the event subject. Irrelevant events leave the necessity untouched;
/// relevant events that fail the full match satisfy it trivially.
bool subject_matches(const ActionPattern& pattern, const EventInstance& event);

}  // namespace rv
