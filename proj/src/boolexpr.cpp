#include "rv/boolexpr.hpp"

namespace rv {

bool PredicateTable::apply(const std::string& name, std::span<const Value> args) const {
  auto it = table_.find({name, args.size()});
  if (it == table_.end())
    throw EvalError("unregistered predicate " + name + "/" + std::to_string(args.size()));
  return it->second(args);
}

ArithPtr Arith::leaf(Term t) {
  auto a = std::make_shared<Arith>();
  a->op = Op::Leaf;
  a->term = std::move(t);
  return a;
}

ArithPtr Arith::node(Op op, ArithPtr l, ArithPtr r) {
  auto a = std::make_shared<Arith>();
  a->op = op;
  a->lhs = std::move(l);
  a->rhs = std::move(r);
  return a;
}

BoolPtr BoolExpr::lit(bool b) {
  auto e = std::make_shared<BoolExpr>();
  e->kind = Kind::Lit;
  e->literal = b;
  return e;
}

BoolPtr BoolExpr::cmp(CmpOp op, ArithPtr l, ArithPtr r) {
  auto e = std::make_shared<BoolExpr>();
  e->kind = Kind::Cmp;
  e->cmp_op = op;
  e->a_lhs = std::move(l);
  e->a_rhs = std::move(r);
  return e;
}

BoolPtr BoolExpr::conj(BoolPtr l, BoolPtr r) {
  auto e = std::make_shared<BoolExpr>();
  e->kind = Kind::And;
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  return e;
}

BoolPtr BoolExpr::disj(BoolPtr l, BoolPtr r) {
  auto e = std::make_shared<BoolExpr>();
  e->kind = Kind::Or;
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  return e;
}

BoolPtr BoolExpr::negate(BoolPtr inner) {
  auto e = std::make_shared<BoolExpr>();
  e->kind = Kind::Not;
  e->lhs = std::move(inner);
  return e;
}

BoolPtr BoolExpr::pred(std::string name, std::vector<Term> args) {
  auto e = std::make_shared<BoolExpr>();
  e->kind = Kind::Pred;
  e->pred_name = std::move(name);
  e->pred_args = std::move(args);
  return e;
}

namespace {

Value close_term(const Term& t, const Substitution& s) {
  if (t.is_value()) return t.as_value();
  if (t.is_var()) {
    if (const Value* v = s.lookup(t.var_name())) return *v;
    throw EvalError("unclosed variable " + t.var_name() + " in guard");
  }
  if (t.is_wildcard()) throw EvalError("wildcard in guard expression");
  Tuple out;
  for (const Term& e : t.as_tuple()) out.push_back(close_term(e, s));
  return Value(std::move(out));
}

}  // namespace

Value eval_arith(const Arith& a, const Substitution& s) {
  if (a.op == Arith::Op::Leaf) return close_term(a.term, s);
  Value l = eval_arith(*a.lhs, s);
  Value r = eval_arith(*a.rhs, s);
  if (!l.is_int() || !r.is_int()) throw EvalError("arithmetic on non-integer values");
  switch (a.op) {
    case Arith::Op::Add: return Value(l.as_int() + r.as_int());
    case Arith::Op::Sub: return Value(l.as_int() - r.as_int());
    case Arith::Op::Mul: return Value(l.as_int() * r.as_int());
    default: return l;
  }
}

bool eval_bool(const BoolExpr& b, const Substitution& s, const PredicateTable& preds) {
  switch (b.kind) {
    case BoolExpr::Kind::Lit:
      return b.literal;
    case BoolExpr::Kind::Cmp: {
      Value l = eval_arith(*b.a_lhs, s);
      Value r = eval_arith(*b.a_rhs, s);
      int c = compare_values(l, r);
      switch (b.cmp_op) {
        case BoolExpr::CmpOp::Eq: return l == r;
        case BoolExpr::CmpOp::Ne: return !(l == r);
        case BoolExpr::CmpOp::Lt: return c < 0;
        case BoolExpr::CmpOp::Gt: return c > 0;
        case BoolExpr::CmpOp::Le: return c <= 0;
        case BoolExpr::CmpOp::Ge: return c >= 0;
      }
      return false;
    }
    case BoolExpr::Kind::And:
      return eval_bool(*b.lhs, s, preds) && eval_bool(*b.rhs, s, preds);
    case BoolExpr::Kind::Or:
      return eval_bool(*b.lhs, s, preds) || eval_bool(*b.rhs, s, preds);
    case BoolExpr::Kind::Not:
      return !eval_bool(*b.lhs, s, preds);
    case BoolExpr::Kind::Pred: {
      std::vector<Value> args;
      args.reserve(b.pred_args.size());
      for (const Term& t : b.pred_args) args.push_back(close_term(t, s));
      return preds.apply(b.pred_name, args);
    }
  }
  return false;
}

void collect_vars(const Arith& a, std::vector<std::string>& out) {
  if (a.op == Arith::Op::Leaf) {
    collect_vars(a.term, out);
  } else {
    collect_vars(*a.lhs, out);
    collect_vars(*a.rhs, out);
  }
}

void collect_vars(const BoolExpr& b, std::vector<std::string>& out) {
  switch (b.kind) {
    case BoolExpr::Kind::Lit: break;
    case BoolExpr::Kind::Cmp:
      collect_vars(*b.a_lhs, out);
      collect_vars(*b.a_rhs, out);
      break;
    case BoolExpr::Kind::And:
    case BoolExpr::Kind::Or:
      collect_vars(*b.lhs, out);
      collect_vars(*b.rhs, out);
      break;
    case BoolExpr::Kind::Not:
      collect_vars(*b.lhs, out);
      break;
    case BoolExpr::Kind::Pred:
      for (const Term& t : b.pred_args) collect_vars(t, out);
      break;
  }
}

ArithPtr apply_arith(const ArithPtr& a, const Substitution& s) {
  if (a->op == Arith::Op::Leaf) return Arith::leaf(apply_term(a->term, s));
  return Arith::node(a->op, apply_arith(a->lhs, s), apply_arith(a->rhs, s));
}

BoolPtr apply_bool(const BoolPtr& b, const Substitution& s) {
  switch (b->kind) {
    case BoolExpr::Kind::Lit:
      return b;
    case BoolExpr::Kind::Cmp:
      return BoolExpr::cmp(b->cmp_op, apply_arith(b->a_lhs, s), apply_arith(b->a_rhs, s));
    case BoolExpr::Kind::And:
      return BoolExpr::conj(apply_bool(b->lhs, s), apply_bool(b->rhs, s));
    case BoolExpr::Kind::Or:
      return BoolExpr::disj(apply_bool(b->lhs, s), apply_bool(b->rhs, s));
    case BoolExpr::Kind::Not:
      return BoolExpr::negate(apply_bool(b->lhs, s));
    case BoolExpr::Kind::Pred: {
      std::vector<Term> args;
      args.reserve(b->pred_args.size());
      for (const Term& t : b->pred_args) args.push_back(apply_term(t, s));
      return BoolExpr::pred(b->pred_name, std::move(args));
    }
  }
  return b;
}

void collect_preds(const BoolExpr& b,
                   std::vector<std::pair<std::string, std::size_t>>& out) {
  switch (b.kind) {
    case BoolExpr::Kind::Pred:
      out.emplace_back(b.pred_name, b.pred_args.size());
      break;
    case BoolExpr::Kind::And:
    case BoolExpr::Kind::Or:
      collect_preds(*b.lhs, out);
      collect_preds(*b.rhs, out);
      break;
    case BoolExpr::Kind::Not:
      collect_preds(*b.lhs, out);
      break;
    default:
      break;
  }
}

std::string to_string(const Arith& a) {
  switch (a.op) {
    case Arith::Op::Leaf: return to_string(a.term);
    case Arith::Op::Add: return "(" + to_string(*a.lhs) + " + " + to_string(*a.rhs) + ")";
    case Arith::Op::Sub: return "(" + to_string(*a.lhs) + " - " + to_string(*a.rhs) + ")";
    case Arith::Op::Mul: return "(" + to_string(*a.lhs) + " * " + to_string(*a.rhs) + ")";
  }
  return "?";
}

std::string to_string(const BoolExpr& b) {
  switch (b.kind) {
    case BoolExpr::Kind::Lit:
      return b.literal ? "true" : "false";
    case BoolExpr::Kind::Cmp: {
      const char* op = "=";
      switch (b.cmp_op) {
        case BoolExpr::CmpOp::Eq: op = "="; break;
        case BoolExpr::CmpOp::Ne: op = "!="; break;
        case BoolExpr::CmpOp::Lt: op = "<"; break;
        case BoolExpr::CmpOp::Gt: op = ">"; break;
        case BoolExpr::CmpOp::Le: op = "<="; break;
        case BoolExpr::CmpOp::Ge: op = ">="; break;
      }
      return to_string(*b.a_lhs) + " " + op + " " + to_string(*b.a_rhs);
    }
    case BoolExpr::Kind::And:
      return "(" + to_string(*b.lhs) + " and " + to_string(*b.rhs) + ")";
    case BoolExpr::Kind::Or:
      return "(" + to_string(*b.lhs) + " or " + to_string(*b.rhs) + ")";
    case BoolExpr::Kind::Not:
      return "not (" + to_string(*b.lhs) + ")";
    case BoolExpr::Kind::Pred: {
      std::string out = b.pred_name + "(";
      for (std::size_t i = 0; i < b.pred_args.size(); ++i) {
        if (i) out += ", ";
        out += to_string(b.pred_args[i]);
      }
      return out + ")";
    }
  }
  return "?";
}

bool equal(const Arith& a, const Arith& b) {
  if (a.op != b.op) return false;
  if (a.op == Arith::Op::Leaf) return a.term == b.term;
  return equal(*a.lhs, *b.lhs) && equal(*a.rhs, *b.rhs);
}

bool equal(const BoolExpr& a, const BoolExpr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case BoolExpr::Kind::Lit: return a.literal == b.literal;
    case BoolExpr::Kind::Cmp:
      return a.cmp_op == b.cmp_op && equal(*a.a_lhs, *b.a_lhs) && equal(*a.a_rhs, *b.a_rhs);
    case BoolExpr::Kind::And:
    case BoolExpr::Kind::Or:
      return equal(*a.lhs, *b.lhs) && equal(*a.rhs, *b.rhs);
    case BoolExpr::Kind::Not:
      return equal(*a.lhs, *b.lhs);
    case BoolExpr::Kind::Pred:
      return a.pred_name == b.pred_name && a.pred_args == b.pred_args;
  }
  return false;
}

}  // namespace rv
