#include "rv/formula.hpp"

namespace rv {

namespace {
FormulaPtr make(Formula::Kind k) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  return f;
}
}  // namespace

FormulaPtr Formula::ff() { return make(Kind::FF); }

FormulaPtr Formula::sff() { return make(Kind::SFF); }

FormulaPtr Formula::conj(FormulaPtr l, FormulaPtr r) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::And;
  f->left = std::move(l);
  f->body = std::move(r);
  return f;
}

FormulaPtr Formula::nec(ActionPattern p, FormulaPtr body) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Nec;
  f->pattern = std::move(p);
  f->body = std::move(body);
  return f;
}

FormulaPtr Formula::sync_nec(ActionPattern p, FormulaPtr body) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::SyncNec;
  f->pattern = std::move(p);
  f->body = std::move(body);
  return f;
}

FormulaPtr Formula::max(std::string var, FormulaPtr body) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Max;
  f->var = std::move(var);
  f->body = std::move(body);
  return f;
}

FormulaPtr Formula::guard(BoolPtr cond, FormulaPtr body) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Guard;
  f->cond = std::move(cond);
  f->body = std::move(body);
  return f;
}

FormulaPtr Formula::fvar(std::string name) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Var;
  f->var = std::move(name);
  return f;
}

bool equal(const Formula& a, const Formula& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Formula::Kind::FF:
    case Formula::Kind::SFF:
      return true;
    case Formula::Kind::And:
      return equal(*a.left, *b.left) && equal(*a.body, *b.body);
    case Formula::Kind::Nec:
    case Formula::Kind::SyncNec:
      return a.pattern == b.pattern && equal(*a.body, *b.body);
    case Formula::Kind::Max:
      return a.var == b.var && equal(*a.body, *b.body);
    case Formula::Kind::Guard:
      return equal(*a.cond, *b.cond) && equal(*a.body, *b.body);
    case Formula::Kind::Var:
      return a.var == b.var;
  }
  return false;
}

}  // namespace rv
