#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rv/formula.hpp"
#include "rv/substitution.hpp"

namespace rv {

/// Names the first offending variable of an ill-formed formula.
struct Diagnostic {
  std::string message;
  std::string var;
};

/// Well-formed iff every term variable in a guard is bound by an enclosing
/// necessity pattern, every formula variable is bound by a max and guarded
/// (occurs under a necessity), and no pattern binds the same new variable
/// twice (nonlinear patterns are rejected, not unified).
std::optional<Diagnostic> check_well_formed(const Formula& f);

/// Replaces free occurrences of dom(s) throughout patterns and guards.
/// Expects an alpha-renamed formula, so binder capture cannot occur.
FormulaPtr apply_substitution(const FormulaPtr& f, const Substitution& s);

/// Renames binders so that all of them (max variables and fresh pattern
/// variables) introduce distinct names. Variable occurrences that refer to an
/// enclosing binder — including re-uses inside deeper patterns, which act as
/// match constraints — are renamed consistently with their binder.
FormulaPtr alpha_rename(const FormulaPtr& f);

/// Equality up to renaming of bound variables (term and formula binders).
bool alpha_equal(const FormulaPtr& a, const FormulaPtr& b);

/// Pre-processing pass for hybrid instrumentation: an sff reachable from a
/// necessity through conjunctions, guards and fixpoints only (never through
/// another necessity) turns that necessity synchronous and becomes ff.
/// Explicit synchronous necessities are preserved; the output contains no
/// sff node and the pass is idempotent.
FormulaPtr mark_synchronous(const FormulaPtr& f);

/// One entry per necessity in the marked formula, in traversal order.
struct PatternMode {
  ActionPattern pattern;
  bool sync = false;
};
std::vector<PatternMode> collect_pattern_modes(const Formula& f);

/// True when the formula contains an SFF node anywhere.
bool contains_sff(const Formula& f);

/// All predicate name/arity pairs used in guards anywhere in the formula.
std::vector<std::pair<std::string, std::size_t>> used_predicates(const Formula& f);

}  // namespace rv
