#pragma once

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rv/substitution.hpp"
#include "rv/term.hpp"

namespace rv {

/// Raised when evaluation hits an unclosed variable, a missing predicate or
/// arithmetic on non-integers. Signals a synthesis bug, not a user error.
struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Named decidable predicates (isMalicious and friends), keyed by name/arity.
class PredicateTable {
 public:
  using Fn = std::function<bool(std::span<const Value>)>;

  void add(std::string name, std::size_t arity, Fn fn) {
    table_[{std::move(name), arity}] = std::move(fn);
  }
  bool contains(const std::string& name, std::size_t arity) const {
    return table_.count({name, arity}) != 0;
  }
  bool apply(const std::string& name, std::span<const Value> args) const;

 private:
  std::map<std::pair<std::string, std::size_t>, Fn> table_;
};

class Arith;
using ArithPtr = std::shared_ptr<const Arith>;

/// Arithmetic over terms: a term leaf or +, -, * of two subexpressions.
class Arith {
 public:
  enum class Op { Leaf, Add, Sub, Mul };

  static ArithPtr leaf(Term t);
  static ArithPtr node(Op op, ArithPtr l, ArithPtr r);

  Op op = Op::Leaf;
  Term term;  // Leaf only
  ArithPtr lhs, rhs;
};

class BoolExpr;
using BoolPtr = std::shared_ptr<const BoolExpr>;

/// Boolean guard grammar: comparisons over arithmetic terms, and/or/not,
/// literals and predicate applications.
class BoolExpr {
 public:
  enum class Kind { Lit, Cmp, And, Or, Not, Pred };
  enum class CmpOp { Eq, Ne, Lt, Gt, Le, Ge };

  static BoolPtr lit(bool b);
  static BoolPtr cmp(CmpOp op, ArithPtr l, ArithPtr r);
  static BoolPtr conj(BoolPtr l, BoolPtr r);
  static BoolPtr disj(BoolPtr l, BoolPtr r);
  static BoolPtr negate(BoolPtr e);
  static BoolPtr pred(std::string name, std::vector<Term> args);

  Kind kind = Kind::Lit;
  bool literal = false;
  CmpOp cmp_op = CmpOp::Eq;
  ArithPtr a_lhs, a_rhs;
  BoolPtr lhs, rhs;
  std::string pred_name;
  std::vector<Term> pred_args;
};

/// Closes the term under s and evaluates. Comparisons other than =, != use
/// the total value order; arithmetic requires integers.
Value eval_arith(const Arith& a, const Substitution& s);

bool eval_bool(const BoolExpr& b, const Substitution& s, const PredicateTable& preds);

/// Variable occurrences, left to right (for well-formedness checks).
void collect_vars(const Arith& a, std::vector<std::string>& out);
void collect_vars(const BoolExpr& b, std::vector<std::string>& out);

/// Structural substitution into guards (free occurrences only; guards bind
/// nothing themselves).
ArithPtr apply_arith(const ArithPtr& a, const Substitution& s);
BoolPtr apply_bool(const BoolPtr& b, const Substitution& s);

/// All predicate name/arity pairs used by the expression.
void collect_preds(const BoolExpr& b,
                   std::vector<std::pair<std::string, std::size_t>>& out);

std::string to_string(const Arith& a);
std::string to_string(const BoolExpr& b);

bool equal(const Arith& a, const Arith& b);
bool equal(const BoolExpr& a, const BoolExpr& b);

}  // namespace rv
