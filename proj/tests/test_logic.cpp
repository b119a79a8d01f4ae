#include <doctest.h>

#include "rv/formula_ops.hpp"
#include "rv/match.hpp"
#include "rv/parser.hpp"

using namespace rv;

namespace {

// server ! {x, ack, y} — the open output pattern of the worked match cases.
ActionPattern open_server_out() {
  return ActionPattern::output(
      Term::atom("server"),
      Term::tuple({Term::var("x"), Term::atom("ack"), Term::var("y")}));
}

EventInstance server_out_5_joe() {
  return EventInstance::output(
      Value::atom("server"),
      Value::tuple({Value(5), Value::atom("ack"), Value::atom("joe")}));
}

}  // namespace

TEST_CASE("match binds variables positionally") {
  auto s = match(open_server_out(), server_out_5_joe());
  REQUIRE(s.has_value());
  CHECK(s->size() == 2);
  CHECK(*s->lookup("x") == Value(5));
  CHECK(*s->lookup("y") == Value::atom("joe"));
}

TEST_CASE("match of two identical closed actions is the empty substitution") {
  ActionPattern closed = ActionPattern::output(
      Term::atom("server"),
      Term::tuple({Term::lit(Value(5)), Term::atom("ack"), Term::atom("joe")}));
  auto s = match(closed, server_out_5_joe());
  REQUIRE(s.has_value());
  CHECK(s->empty());
}

TEST_CASE("match fails on mismatching destinations") {
  ActionPattern p = ActionPattern::output(
      Term::atom("client"),
      Term::tuple({Term::var("x"), Term::atom("ack"), Term::var("y")}));
  CHECK(!match(p, server_out_5_joe()).has_value());
}

TEST_CASE("match fails across action kinds") {
  ActionPattern p = ActionPattern::input(
      Term::atom("server"),
      Term::tuple({Term::var("x"), Term::atom("ack"), Term::var("y")}));
  CHECK(!match(p, server_out_5_joe()).has_value());
}

TEST_CASE("wildcards match anything and bind nothing") {
  ActionPattern p = ActionPattern::output(
      Term::atom("server"),
      Term::tuple({Term::wildcard(), Term::wildcard(), Term::wildcard()}));
  auto s = match(p, server_out_5_joe());
  REQUIRE(s.has_value());
  CHECK(s->empty());
}

TEST_CASE("nonlinear patterns are rejected by match") {
  ActionPattern p = ActionPattern::output(
      Term::atom("server"), Term::tuple({Term::var("x"), Term::var("x")}));
  EventInstance e = EventInstance::output(Value::atom("server"),
                                          Value::tuple({Value(1), Value(1)}));
  CHECK_THROWS_AS(match(p, e), MatchError);
}

TEST_CASE("match round trip: applying the substitution closes the pattern") {
  auto s = match(open_server_out(), server_out_5_joe());
  REQUIRE(s.has_value());
  Term closed = apply_term(Term::tuple({Term::var("x"), Term::atom("ack"), Term::var("y")}), *s);
  REQUIRE(closed.is_value());
  CHECK(closed.as_value() == server_out_5_joe().payload);
}

TEST_CASE("apply_substitution rewrites guards and patterns, not binders") {
  // if x = 5 then ff, under {x -> 5}
  FormulaPtr f = Formula::guard(
      BoolExpr::cmp(BoolExpr::CmpOp::Eq, Arith::leaf(Term::var("x")),
                    Arith::leaf(Term::lit(Value(5)))),
      Formula::ff());
  Substitution s;
  s.bind("x", Value(5));
  FormulaPtr g = apply_substitution(f, s);
  PredicateTable preds;
  CHECK(eval_bool(*g->cond, Substitution{}, preds));

  SUBCASE("identity on empty substitution") {
    CHECK(apply_substitution(f, Substitution{}).get() == f.get());
  }
}

TEST_CASE("apply_substitution reaches into necessity patterns") {
  // [y ! z] X under {y -> pid(7)} becomes [pid(7) ! z] X
  FormulaPtr f = Formula::nec(ActionPattern::output(Term::var("y"), Term::var("z")),
                              Formula::fvar("X"));
  Substitution s;
  s.bind("y", Value(Pid{7}));
  FormulaPtr g = apply_substitution(f, s);
  CHECK(g->pattern.subject == Term::lit(Value(Pid{7})));
  CHECK(g->pattern.payload == Term::var("z"));
  CHECK(g->body->var == "X");
}

TEST_CASE("well-formedness: guarded recursion is accepted") {
  FormulaPtr f = parse_formula_unchecked("max X. [a ! 1] X");
  CHECK(!check_well_formed(*f).has_value());
}

TEST_CASE("well-formedness: unguarded fixpoint variable") {
  FormulaPtr f = parse_formula_unchecked("max X. X");
  auto d = check_well_formed(*f);
  REQUIRE(d.has_value());
  CHECK(d->var == "X");
  CHECK(d->message.find("unguarded") != std::string::npos);
}

TEST_CASE("well-formedness: free term variable in guard") {
  FormulaPtr f = parse_formula_unchecked("[srv ! X] if Y > 0 then ff");
  auto d = check_well_formed(*f);
  REQUIRE(d.has_value());
  CHECK(d->var == "Y");
  CHECK(d->message.find("unbound") != std::string::npos);
}

TEST_CASE("well-formedness: unbound formula variable") {
  FormulaPtr f = parse_formula_unchecked("[a ! 1] X");
  auto d = check_well_formed(*f);
  REQUIRE(d.has_value());
  CHECK(d->var == "X");
}

TEST_CASE("well-formedness: nonlinear pattern rejected") {
  FormulaPtr f = parse_formula_unchecked("[a ! {X, X}] ff");
  auto d = check_well_formed(*f);
  REQUIRE(d.has_value());
  CHECK(d->message.find("nonlinear") != std::string::npos);
}

TEST_CASE("well-formedness: re-use of a bound variable as constraint is fine") {
  FormulaPtr f = parse_formula_unchecked("[a ? X] [b ! X] ff");
  CHECK(!check_well_formed(*f).has_value());
}

TEST_CASE("alpha renaming distinguishes parallel binders") {
  FormulaPtr f = parse_formula_unchecked("[a ! X] ff & [b ! X] ff");
  FormulaPtr g = alpha_rename(f);
  CHECK(alpha_equal(f, g));
  // the two binders must now carry different names
  CHECK(g->left->pattern.payload.var_name() != g->body->pattern.payload.var_name());
}

TEST_CASE("alpha renaming keeps distinct binders unchanged") {
  FormulaPtr f = parse_formula_unchecked("max X. [a ! V] [b ! W] X");
  FormulaPtr g = alpha_rename(f);
  CHECK(equal(*f, *g));
}

TEST_CASE("alpha renaming separates nested fixpoint binders of the same name") {
  FormulaPtr f = parse_formula_unchecked("max X. [a ! 1] max X. [b ! 2] X");
  FormulaPtr g = alpha_rename(f);
  CHECK(alpha_equal(f, g));
  CHECK(g->var != g->body->body->var);  // outer max vs inner max
}

TEST_CASE("alpha renaming keeps constraint occurrences tied to their binder") {
  FormulaPtr f = parse_formula_unchecked("([a ? X] [b ! X] ff) & ([c ? X] ff)");
  FormulaPtr g = alpha_rename(f);
  CHECK(alpha_equal(f, g));
  // left branch: the reuse in [b ! X] must follow the renamed left binder
  const Formula& lhs = *g->left;
  CHECK(lhs.pattern.payload.var_name() == lhs.body->pattern.payload.var_name());
  CHECK(lhs.pattern.payload.var_name() != g->body->pattern.payload.var_name());
}

TEST_CASE("eval_bool computes arithmetic comparisons") {
  PredicateTable preds;
  FormulaPtr f = parse_formula_unchecked("[a ? Z] [a ? X] if Z = X+1 then ff");
  const BoolExpr& b = *f->body->body->cond;
  Substitution s1;
  s1.bind("Z", Value(6));
  s1.bind("X", Value(5));
  CHECK(eval_bool(b, s1, preds));
  Substitution s2;
  s2.bind("Z", Value(7));
  s2.bind("X", Value(5));
  CHECK(!eval_bool(b, s2, preds));
}

TEST_CASE("eval_bool delegates predicate applications to the table") {
  PredicateTable preds;
  preds.add("isMalicious", 2, [](std::span<const Value> args) {
    for (const Value& v : args)
      if (v.is_string() && v.as_string().find("../") != std::string::npos) return true;
    return false;
  });
  Substitution s;
  s.bind("H1", Value(std::string("Host: ok")));
  s.bind("H2", Value(std::string("Agent: fine")));
  auto b = BoolExpr::pred("isMalicious", {Term::var("H1"), Term::var("H2")});
  CHECK(!eval_bool(*b, s, preds));

  SUBCASE("unclosed variable raises an evaluation error") {
    Substitution partial;
    partial.bind("H1", Value(std::string("x")));
    CHECK_THROWS_AS(eval_bool(*b, partial, preds), EvalError);
  }
  SUBCASE("unregistered predicate raises an evaluation error") {
    auto bad = BoolExpr::pred("nope", {Term::var("H1")});
    CHECK_THROWS_AS(eval_bool(*bad, s, preds), EvalError);
  }
}

TEST_CASE("mark_synchronous rewrites [a] sff to [| a |] ff") {
  FormulaPtr f = parse_formula("[a ! 1] sff");
  FormulaPtr m = mark_synchronous(f);
  CHECK(m->kind == Formula::Kind::SyncNec);
  CHECK(m->body->kind == Formula::Kind::FF);
  CHECK(!contains_sff(*m));
}

TEST_CASE("mark_synchronous reaches sff through conjunctions and guards") {
  FormulaPtr f = parse_formula("max X. [a ? V] ((if V = 1 then X) & (if V = 2 then sff))");
  FormulaPtr m = mark_synchronous(f);
  const Formula& nec = *m->body;
  CHECK(nec.kind == Formula::Kind::SyncNec);
  CHECK(!contains_sff(*m));
  // the other guard branch is untouched
  CHECK(nec.body->left->body->kind == Formula::Kind::Var);
}

TEST_CASE("mark_synchronous does not look through inner necessities") {
  FormulaPtr f = parse_formula("[a ! 1] [b ! 2] sff");
  FormulaPtr m = mark_synchronous(f);
  CHECK(m->kind == Formula::Kind::Nec);          // outer stays asynchronous
  CHECK(m->body->kind == Formula::Kind::SyncNec);  // inner synchronises
}

TEST_CASE("mark_synchronous is the identity on sff-free formulas") {
  FormulaPtr f = parse_formula("max X. [a ! 1] (X & if 1 = 2 then ff)");
  FormulaPtr m = mark_synchronous(f);
  CHECK(equal(*f, *m));
}

TEST_CASE("mark_synchronous is idempotent and leaves no sff behind") {
  const char* texts[] = {
      "[a ! 1] sff",
      "max X. [a ? V] ((if V = 1 then X) & (if V = 2 then sff))",
      "[| b ? W |] sff",
      "[a ! 1] (sff & [b ! 2] sff)",
      "max X. [a ! 1] max Y. (sff & [b ! 2] Y) & [c ! 3] X",
  };
  for (const char* t : texts) {
    CAPTURE(t);
    FormulaPtr m = mark_synchronous(parse_formula(t));
    CHECK(!contains_sff(*m));
    CHECK(equal(*m, *mark_synchronous(m)));
  }
}

TEST_CASE("collect_pattern_modes lists necessities with their sync flag") {
  FormulaPtr m = mark_synchronous(parse_formula("[a ! 1] sff & [b ! 2] ff"));
  auto modes = collect_pattern_modes(*m);
  REQUIRE(modes.size() == 2);
  CHECK(modes[0].sync);
  CHECK(!modes[1].sync);
}
