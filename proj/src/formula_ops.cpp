#include "rv/formula_ops.hpp"

#include <map>
#include <set>

namespace rv {

namespace {

// --- well-formedness ---------------------------------------------------

struct WfState {
  std::set<std::string> bound_terms;
  // formula var -> has a necessity been crossed since its binder?
  std::map<std::string, bool> fvars;
  std::optional<Diagnostic> diag;
};

void wf_check_guard_vars(const BoolExpr& b, WfState& st) {
  std::vector<std::string> vars;
  collect_vars(b, vars);
  for (const std::string& v : vars) {
    if (!st.bound_terms.count(v)) {
      st.diag = Diagnostic{"unbound term variable " + v, v};
      return;
    }
  }
}

void wf_walk(const Formula& f, WfState st_in, std::optional<Diagnostic>& diag);

void wf_necessity(const Formula& f, WfState st, std::optional<Diagnostic>& diag) {
  std::vector<std::string> vars;
  collect_vars(f.pattern, vars);
  std::set<std::string> fresh;
  for (const std::string& v : vars) {
    if (st.bound_terms.count(v)) continue;  // reference to an outer binder
    if (!fresh.insert(v).second) {
      diag = Diagnostic{"nonlinear pattern: variable " + v + " bound twice", v};
      return;
    }
  }
  for (const std::string& v : fresh) st.bound_terms.insert(v);
  for (auto& [_, crossed] : st.fvars) crossed = true;
  wf_walk(*f.body, std::move(st), diag);
}

void wf_walk(const Formula& f, WfState st, std::optional<Diagnostic>& diag) {
  if (diag) return;
  switch (f.kind) {
    case Formula::Kind::FF:
    case Formula::Kind::SFF:
      return;
    case Formula::Kind::And:
      wf_walk(*f.left, st, diag);
      wf_walk(*f.body, std::move(st), diag);
      return;
    case Formula::Kind::Nec:
    case Formula::Kind::SyncNec:
      wf_necessity(f, std::move(st), diag);
      return;
    case Formula::Kind::Max:
      st.fvars[f.var] = false;
      wf_walk(*f.body, std::move(st), diag);
      return;
    case Formula::Kind::Guard: {
      wf_check_guard_vars(*f.cond, st);
      if (st.diag) {
        diag = st.diag;
        return;
      }
      wf_walk(*f.body, std::move(st), diag);
      return;
    }
    case Formula::Kind::Var: {
      auto it = st.fvars.find(f.var);
      if (it == st.fvars.end())
        diag = Diagnostic{"unbound formula variable " + f.var, f.var};
      else if (!it->second)
        diag = Diagnostic{"unguarded formula variable " + f.var, f.var};
      return;
    }
  }
}

// --- substitution ------------------------------------------------------

ActionPattern apply_pattern(const ActionPattern& p, const Substitution& s) {
  ActionPattern out = p;
  out.subject = apply_term(p.subject, s);
  switch (p.kind) {
    case ActionKind::Output:
    case ActionKind::Input:
      out.payload = apply_term(p.payload, s);
      break;
    case ActionKind::Call:
      for (std::size_t i = 0; i < p.args.size(); ++i) out.args[i] = apply_term(p.args[i], s);
      break;
    case ActionKind::Return:
      out.ret_value = apply_term(p.ret_value, s);
      break;
  }
  return out;
}

// --- alpha renaming ----------------------------------------------------

struct RenameState {
  std::set<std::string>* used;     // every name ever seen or generated
  std::set<std::string>* taken;    // binder names already assigned
  std::map<std::string, std::string> term_map;  // in-scope term renames
  std::map<std::string, std::string> fvar_map;  // in-scope formula renames
};

std::string fresh_name(const std::string& base, RenameState& st) {
  if (!st.taken->count(base) ) {
    st.taken->insert(base);
    st.used->insert(base);
    return base;
  }
  for (int i = 1;; ++i) {
    std::string cand = base + std::to_string(i);
    if (!st.used->count(cand) && !st.taken->count(cand)) {
      st.taken->insert(cand);
      st.used->insert(cand);
      return cand;
    }
  }
}

Term rename_term(const Term& t, RenameState& st, bool binding_position) {
  if (t.is_var()) {
    auto it = st.term_map.find(t.var_name());
    if (it != st.term_map.end()) return Term::var(it->second);
    if (!binding_position) return t;  // free occurrence, left alone
    std::string n = fresh_name(t.var_name(), st);
    st.term_map[t.var_name()] = n;
    return Term::var(n);
  }
  if (t.is_tuple()) {
    Term::TupleT out;
    out.reserve(t.as_tuple().size());
    for (const Term& e : t.as_tuple()) out.push_back(rename_term(e, st, binding_position));
    return Term::tuple(std::move(out));
  }
  return t;
}

ActionPattern rename_pattern(const ActionPattern& p, RenameState& st) {
  ActionPattern out = p;
  out.subject = rename_term(p.subject, st, true);
  switch (p.kind) {
    case ActionKind::Output:
    case ActionKind::Input:
      out.payload = rename_term(p.payload, st, true);
      break;
    case ActionKind::Call:
      for (std::size_t i = 0; i < p.args.size(); ++i)
        out.args[i] = rename_term(p.args[i], st, true);
      break;
    case ActionKind::Return:
      out.ret_value = rename_term(p.ret_value, st, true);
      break;
  }
  return out;
}

ArithPtr rename_arith(const ArithPtr& a, RenameState& st) {
  if (a->op == Arith::Op::Leaf) return Arith::leaf(rename_term(a->term, st, false));
  return Arith::node(a->op, rename_arith(a->lhs, st), rename_arith(a->rhs, st));
}

BoolPtr rename_bool(const BoolPtr& b, RenameState& st) {
  switch (b->kind) {
    case BoolExpr::Kind::Lit:
      return b;
    case BoolExpr::Kind::Cmp:
      return BoolExpr::cmp(b->cmp_op, rename_arith(b->a_lhs, st), rename_arith(b->a_rhs, st));
    case BoolExpr::Kind::And:
      return BoolExpr::conj(rename_bool(b->lhs, st), rename_bool(b->rhs, st));
    case BoolExpr::Kind::Or:
      return BoolExpr::disj(rename_bool(b->lhs, st), rename_bool(b->rhs, st));
    case BoolExpr::Kind::Not:
      return BoolExpr::negate(rename_bool(b->lhs, st));
    case BoolExpr::Kind::Pred: {
      std::vector<Term> args;
      args.reserve(b->pred_args.size());
      for (const Term& t : b->pred_args) args.push_back(rename_term(t, st, false));
      return BoolExpr::pred(b->pred_name, std::move(args));
    }
  }
  return b;
}

FormulaPtr rename_walk(const FormulaPtr& f, RenameState st) {
  switch (f->kind) {
    case Formula::Kind::FF:
    case Formula::Kind::SFF:
      return f;
    case Formula::Kind::And:
      return Formula::conj(rename_walk(f->left, st), rename_walk(f->body, st));
    case Formula::Kind::Nec:
    case Formula::Kind::SyncNec: {
      ActionPattern p = rename_pattern(f->pattern, st);
      FormulaPtr body = rename_walk(f->body, st);
      return f->kind == Formula::Kind::Nec ? Formula::nec(std::move(p), std::move(body))
                                           : Formula::sync_nec(std::move(p), std::move(body));
    }
    case Formula::Kind::Max: {
      std::string n = fresh_name(f->var, st);
      st.fvar_map[f->var] = n;
      return Formula::max(n, rename_walk(f->body, st));
    }
    case Formula::Kind::Guard:
      return Formula::guard(rename_bool(f->cond, st), rename_walk(f->body, st));
    case Formula::Kind::Var: {
      auto it = st.fvar_map.find(f->var);
      return it == st.fvar_map.end() ? f : Formula::fvar(it->second);
    }
  }
  return f;
}

void collect_all_names(const Formula& f, std::set<std::string>& out) {
  switch (f.kind) {
    case Formula::Kind::FF:
    case Formula::Kind::SFF:
      return;
    case Formula::Kind::And:
      collect_all_names(*f.left, out);
      collect_all_names(*f.body, out);
      return;
    case Formula::Kind::Nec:
    case Formula::Kind::SyncNec: {
      std::vector<std::string> vs;
      collect_vars(f.pattern, vs);
      out.insert(vs.begin(), vs.end());
      collect_all_names(*f.body, out);
      return;
    }
    case Formula::Kind::Max:
      out.insert(f.var);
      collect_all_names(*f.body, out);
      return;
    case Formula::Kind::Guard: {
      std::vector<std::string> vs;
      collect_vars(*f.cond, vs);
      out.insert(vs.begin(), vs.end());
      collect_all_names(*f.body, out);
      return;
    }
    case Formula::Kind::Var:
      out.insert(f.var);
      return;
  }
}

// --- alpha equality ----------------------------------------------------

struct EqState {
  std::map<std::string, std::string> term_ab;  // binder names, a -> b
  std::map<std::string, std::string> fvar_ab;
  std::set<std::string> bound_a, bound_b;
};

bool eq_term(const Term& a, const Term& b, EqState& st) {
  if (a.is_wildcard() || b.is_wildcard()) return a.is_wildcard() && b.is_wildcard();
  if (a.is_var() != b.is_var()) return false;
  if (a.is_var()) {
    bool ba = st.bound_a.count(a.var_name());
    bool bb = st.bound_b.count(b.var_name());
    if (ba != bb) return false;
    if (ba) {
      auto it = st.term_ab.find(a.var_name());
      return it != st.term_ab.end() && it->second == b.var_name();
    }
    return a.var_name() == b.var_name();  // both free
  }
  if (a.is_tuple() != b.is_tuple()) return false;
  if (a.is_tuple()) {
    const auto& ta = a.as_tuple();
    const auto& tb = b.as_tuple();
    if (ta.size() != tb.size()) return false;
    for (std::size_t i = 0; i < ta.size(); ++i)
      if (!eq_term(ta[i], tb[i], st)) return false;
    return true;
  }
  return a.as_value() == b.as_value();
}

// Pattern comparison also introduces the fresh binders of both sides.
bool eq_pattern_bind(const Term& a, const Term& b, EqState& st) {
  if (a.is_var() && b.is_var()) {
    bool ba = st.bound_a.count(a.var_name());
    bool bb = st.bound_b.count(b.var_name());
    if (ba != bb) return false;
    if (!ba) {  // fresh binder on both sides
      st.term_ab[a.var_name()] = b.var_name();
      st.bound_a.insert(a.var_name());
      st.bound_b.insert(b.var_name());
      return true;
    }
    auto it = st.term_ab.find(a.var_name());
    return it != st.term_ab.end() && it->second == b.var_name();
  }
  if (a.is_var() || b.is_var()) return false;
  if (a.is_tuple() && b.is_tuple()) {
    const auto& ta = a.as_tuple();
    const auto& tb = b.as_tuple();
    if (ta.size() != tb.size()) return false;
    for (std::size_t i = 0; i < ta.size(); ++i)
      if (!eq_pattern_bind(ta[i], tb[i], st)) return false;
    return true;
  }
  return eq_term(a, b, st);
}

bool eq_pattern(const ActionPattern& a, const ActionPattern& b, EqState& st) {
  if (a.kind != b.kind) return false;
  if (!eq_pattern_bind(a.subject, b.subject, st)) return false;
  switch (a.kind) {
    case ActionKind::Output:
    case ActionKind::Input:
      return eq_pattern_bind(a.payload, b.payload, st);
    case ActionKind::Call:
      if (a.module != b.module || a.function != b.function || a.args.size() != b.args.size())
        return false;
      for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!eq_pattern_bind(a.args[i], b.args[i], st)) return false;
      return true;
    case ActionKind::Return:
      return a.module == b.module && a.function == b.function && a.arity == b.arity &&
             eq_pattern_bind(a.ret_value, b.ret_value, st);
  }
  return false;
}

bool eq_arith(const Arith& a, const Arith& b, EqState& st) {
  if (a.op != b.op) return false;
  if (a.op == Arith::Op::Leaf) return eq_term(a.term, b.term, st);
  return eq_arith(*a.lhs, *b.lhs, st) && eq_arith(*a.rhs, *b.rhs, st);
}

bool eq_bool(const BoolExpr& a, const BoolExpr& b, EqState& st) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case BoolExpr::Kind::Lit: return a.literal == b.literal;
    case BoolExpr::Kind::Cmp:
      return a.cmp_op == b.cmp_op && eq_arith(*a.a_lhs, *b.a_lhs, st) &&
             eq_arith(*a.a_rhs, *b.a_rhs, st);
    case BoolExpr::Kind::And:
    case BoolExpr::Kind::Or:
      return eq_bool(*a.lhs, *b.lhs, st) && eq_bool(*a.rhs, *b.rhs, st);
    case BoolExpr::Kind::Not:
      return eq_bool(*a.lhs, *b.lhs, st);
    case BoolExpr::Kind::Pred: {
      if (a.pred_name != b.pred_name || a.pred_args.size() != b.pred_args.size()) return false;
      for (std::size_t i = 0; i < a.pred_args.size(); ++i)
        if (!eq_term(a.pred_args[i], b.pred_args[i], st)) return false;
      return true;
    }
  }
  return false;
}

bool eq_walk(const Formula& a, const Formula& b, EqState st) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Formula::Kind::FF:
    case Formula::Kind::SFF:
      return true;
    case Formula::Kind::And:
      return eq_walk(*a.left, *b.left, st) && eq_walk(*a.body, *b.body, st);
    case Formula::Kind::Nec:
    case Formula::Kind::SyncNec:
      if (!eq_pattern(a.pattern, b.pattern, st)) return false;
      return eq_walk(*a.body, *b.body, std::move(st));
    case Formula::Kind::Max:
      st.fvar_ab[a.var] = b.var;
      return eq_walk(*a.body, *b.body, std::move(st));
    case Formula::Kind::Guard:
      if (!eq_bool(*a.cond, *b.cond, st)) return false;
      return eq_walk(*a.body, *b.body, std::move(st));
    case Formula::Kind::Var: {
      auto it = st.fvar_ab.find(a.var);
      if (it != st.fvar_ab.end()) return it->second == b.var;
      return a.var == b.var;
    }
  }
  return false;
}

// --- synchronous marking -----------------------------------------------

// Replaces every sff reachable through And/Guard/Max (but not through
// another necessity) by ff. Sets `found` when at least one was replaced.
FormulaPtr strip_reachable_sff(const FormulaPtr& f, bool& found) {
  switch (f->kind) {
    case Formula::Kind::SFF:
      found = true;
      return Formula::ff();
    case Formula::Kind::And: {
      FormulaPtr l = strip_reachable_sff(f->left, found);
      FormulaPtr r = strip_reachable_sff(f->body, found);
      return Formula::conj(std::move(l), std::move(r));
    }
    case Formula::Kind::Guard:
      return Formula::guard(f->cond, strip_reachable_sff(f->body, found));
    case Formula::Kind::Max:
      return Formula::max(f->var, strip_reachable_sff(f->body, found));
    default:
      return f;
  }
}

FormulaPtr mark_walk(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::FF:
    case Formula::Kind::Var:
      return f;
    case Formula::Kind::SFF:
      // No necessity precedes this violation; there is no event to block on,
      // so the annotation degenerates to a plain ff.
      return Formula::ff();
    case Formula::Kind::And:
      return Formula::conj(mark_walk(f->left), mark_walk(f->body));
    case Formula::Kind::Guard:
      return Formula::guard(f->cond, mark_walk(f->body));
    case Formula::Kind::Max:
      return Formula::max(f->var, mark_walk(f->body));
    case Formula::Kind::Nec: {
      bool found = false;
      FormulaPtr stripped = strip_reachable_sff(f->body, found);
      if (found) return Formula::sync_nec(f->pattern, mark_walk(stripped));
      return Formula::nec(f->pattern, mark_walk(f->body));
    }
    case Formula::Kind::SyncNec: {
      bool found = false;
      FormulaPtr stripped = strip_reachable_sff(f->body, found);
      return Formula::sync_nec(f->pattern, mark_walk(stripped));
    }
  }
  return f;
}

}  // namespace

std::optional<Diagnostic> check_well_formed(const Formula& f) {
  std::optional<Diagnostic> diag;
  wf_walk(f, WfState{}, diag);
  return diag;
}

FormulaPtr apply_substitution(const FormulaPtr& f, const Substitution& s) {
  if (s.empty()) return f;
  switch (f->kind) {
    case Formula::Kind::FF:
    case Formula::Kind::SFF:
    case Formula::Kind::Var:
      return f;
    case Formula::Kind::And:
      return Formula::conj(apply_substitution(f->left, s), apply_substitution(f->body, s));
    case Formula::Kind::Nec:
      return Formula::nec(apply_pattern(f->pattern, s), apply_substitution(f->body, s));
    case Formula::Kind::SyncNec:
      return Formula::sync_nec(apply_pattern(f->pattern, s), apply_substitution(f->body, s));
    case Formula::Kind::Max:
      return Formula::max(f->var, apply_substitution(f->body, s));
    case Formula::Kind::Guard:
      return Formula::guard(apply_bool(f->cond, s), apply_substitution(f->body, s));
  }
  return f;
}

FormulaPtr alpha_rename(const FormulaPtr& f) {
  std::set<std::string> used;
  collect_all_names(*f, used);
  std::set<std::string> taken;
  RenameState st;
  st.used = &used;
  st.taken = &taken;
  return rename_walk(f, std::move(st));
}

bool alpha_equal(const FormulaPtr& a, const FormulaPtr& b) {
  return eq_walk(*a, *b, EqState{});
}

FormulaPtr mark_synchronous(const FormulaPtr& f) { return mark_walk(f); }

std::vector<PatternMode> collect_pattern_modes(const Formula& f) {
  std::vector<PatternMode> out;
  switch (f.kind) {
    case Formula::Kind::FF:
    case Formula::Kind::SFF:
    case Formula::Kind::Var:
      return out;
    case Formula::Kind::And: {
      out = collect_pattern_modes(*f.left);
      auto rhs = collect_pattern_modes(*f.body);
      out.insert(out.end(), rhs.begin(), rhs.end());
      return out;
    }
    case Formula::Kind::Nec:
    case Formula::Kind::SyncNec: {
      out.push_back({f.pattern, f.kind == Formula::Kind::SyncNec});
      auto rest = collect_pattern_modes(*f.body);
      out.insert(out.end(), rest.begin(), rest.end());
      return out;
    }
    case Formula::Kind::Max:
    case Formula::Kind::Guard:
      return collect_pattern_modes(*f.body);
  }
  return out;
}

bool contains_sff(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::SFF:
      return true;
    case Formula::Kind::And:
      return contains_sff(*f.left) || contains_sff(*f.body);
    case Formula::Kind::Nec:
    case Formula::Kind::SyncNec:
    case Formula::Kind::Max:
    case Formula::Kind::Guard:
      return contains_sff(*f.body);
    default:
      return false;
  }
}

std::vector<std::pair<std::string, std::size_t>> used_predicates(const Formula& f) {
  std::vector<std::pair<std::string, std::size_t>> out;
  switch (f.kind) {
    case Formula::Kind::And: {
      out = used_predicates(*f.left);
      auto rhs = used_predicates(*f.body);
      out.insert(out.end(), rhs.begin(), rhs.end());
      return out;
    }
    case Formula::Kind::Guard: {
      collect_preds(*f.cond, out);
      auto rest = used_predicates(*f.body);
      out.insert(out.end(), rest.begin(), rest.end());
      return out;
    }
    case Formula::Kind::Nec:
    case Formula::Kind::SyncNec:
    case Formula::Kind::Max:
      return used_predicates(*f.body);
    default:
      return out;
  }
}

}  // namespace rv
