#pragma once

#include <memory>
#include <string>

#include "rv/boolexpr.hpp"
#include "rv/term.hpp"

namespace rv {

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// AST of the safety logic: ff, sff, conjunction, (synchronous) necessity,
/// maximal fixpoint, boolean guard and formula variable. Nodes are immutable
/// and shared; all operations build new trees.
class Formula {
 public:
  enum class Kind { FF, SFF, And, Nec, SyncNec, Max, Guard, Var };

  Kind kind = Kind::FF;

  FormulaPtr left;    // And lhs
  FormulaPtr body;    // And rhs; Nec/SyncNec/Max/Guard body
  ActionPattern pattern;  // Nec/SyncNec
  BoolPtr cond;       // Guard
  std::string var;    // Max binder / Var name

  static FormulaPtr ff();
  static FormulaPtr sff();
  static FormulaPtr conj(FormulaPtr l, FormulaPtr r);
  static FormulaPtr nec(ActionPattern p, FormulaPtr body);
  static FormulaPtr sync_nec(ActionPattern p, FormulaPtr body);
  static FormulaPtr max(std::string var, FormulaPtr body);
  static FormulaPtr guard(BoolPtr cond, FormulaPtr body);
  static FormulaPtr fvar(std::string name);

  bool is_necessity() const { return kind == Kind::Nec || kind == Kind::SyncNec; }
};

/// Structural equality (names compared verbatim; see alpha_equal for
/// comparison up to renaming of binders).
bool equal(const Formula& a, const Formula& b);

}  // namespace rv
