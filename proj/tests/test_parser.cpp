#include <doctest.h>

#include "rv/formula_ops.hpp"
#include "rv/parser.hpp"

#include "generators.hpp"

using namespace rv;

TEST_CASE("parse leaf formulas") {
  CHECK(parse_formula("ff")->kind == Formula::Kind::FF);
  CHECK(parse_formula("sff")->kind == Formula::Kind::SFF);
}

TEST_CASE("parse the succ-server request/response property") {
  const char* text =
      "max X. [server ? {succ, X1, Y}] [Y ! Z] "
      "((if Z = X1+1 then X) & (if Z != X1+1 then ff))";
  FormulaPtr f = parse_formula(text);
  REQUIRE(f->kind == Formula::Kind::Max);
  const Formula& outer = *f->body;
  REQUIRE(outer.kind == Formula::Kind::Nec);
  CHECK(outer.pattern.kind == ActionKind::Input);
  CHECK(outer.pattern.subject == Term::atom("server"));
  const Formula& inner = *outer.body;
  REQUIRE(inner.kind == Formula::Kind::Nec);
  CHECK(inner.pattern.kind == ActionKind::Output);
  CHECK(inner.pattern.subject == Term::var("Y"));  // constraint on the bound client
  const Formula& conj = *inner.body;
  REQUIRE(conj.kind == Formula::Kind::And);
  CHECK(conj.left->kind == Formula::Kind::Guard);
  CHECK(conj.left->body->kind == Formula::Kind::Var);
  CHECK(conj.body->body->kind == Formula::Kind::FF);
}

TEST_CASE("parse rejects ill-formed formulas") {
  CHECK_THROWS_AS(parse_formula("max X. X"), ParseError);
  CHECK_THROWS_AS(parse_formula("[a ! 1] Y"), ParseError);
}

TEST_CASE("parse reports positions inside the input") {
  try {
    parse_formula("[a ! ] ff");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 1);
    CHECK(e.col >= 1);
    CHECK(e.col <= 10);
  }
}

TEST_CASE("necessity binds tighter than conjunction") {
  FormulaPtr f = parse_formula("[a ! 1] ff & [b ! 2] ff");
  REQUIRE(f->kind == Formula::Kind::And);
  CHECK(f->left->kind == Formula::Kind::Nec);
  CHECK(f->body->kind == Formula::Kind::Nec);
}

TEST_CASE("max scopes to the end of the expression") {
  FormulaPtr f = parse_formula("max X. [a ! 1] X & [b ! 2] X");
  REQUIRE(f->kind == Formula::Kind::Max);
  CHECK(f->body->kind == Formula::Kind::And);
}

TEST_CASE("and(f, g) function form parses") {
  FormulaPtr f = parse_formula("and([a ! 1] ff, [b ! 2] ff)");
  CHECK(f->kind == Formula::Kind::And);
}

TEST_CASE("call and return pattern syntax") {
  FormulaPtr f = parse_formula(
      "[call H yaws:do_recv(S, N, T)] [ret H yaws:do_recv/3 = {ok, V}] ff");
  CHECK(f->pattern.kind == ActionKind::Call);
  CHECK(f->pattern.module == "yaws");
  CHECK(f->pattern.function == "do_recv");
  CHECK(f->pattern.args.size() == 3);
  const Formula& inner = *f->body;
  CHECK(inner.pattern.kind == ActionKind::Return);
  CHECK(inner.pattern.arity == 3);
}

TEST_CASE("quoted atoms, strings, pids and comments") {
  FormulaPtr f = parse_formula(
      "# a comment line\n"
      "[h ! {'GET', \"a \\\"quoted\\\" string\", pid(9)}] ff  # trailing\n");
  const auto& payload = f->pattern.payload.as_tuple();
  CHECK(payload[0] == Term::atom("GET"));
  CHECK(payload[1].as_value().as_string() == "a \"quoted\" string");
  CHECK(payload[2].as_value().as_pid() == Pid{9});
}

TEST_CASE("pretty prints canonical leaves") {
  CHECK(pretty(*Formula::ff()) == "ff");
  CHECK(pretty(*Formula::sync_nec(
            ActionPattern::output(Term::atom("a"), Term::lit(Value(1))),
            Formula::ff())) == "[| a ! 1 |] ff");
}

TEST_CASE("pretty/parse round trip on hand-picked formulas") {
  const char* texts[] = {
      "ff",
      "max X. [server ? {succ, X1, Y}] [Y ! Z] "
      "((if Z = X1+1 then X) & (if Z != X1+1 then ff))",
      "[| a ! {1, \"s\"} |] (ff & sff)",
      "max X. ([a ! 1] X & [b ? _] ff)",
      "[a ! 1] max Y. [b ! 2] Y",
      "if not (1 = 2) and 3 < 4 then [a ! 1] ff",
      "if isMalicious(H) or 2 >= 1 * 3 then ff & ff",
  };
  for (const char* t : texts) {
    CAPTURE(t);
    FormulaPtr once = parse_formula_unchecked(t);
    FormulaPtr again = parse_formula_unchecked(pretty(*once));
    CHECK(alpha_equal(once, again));
  }
}

TEST_CASE("pretty/parse round trip on 1000 generated formulas") {
  testgen::Rng rng(0xC0FFEE);
  for (int i = 0; i < 1000; ++i) {
    FormulaPtr f = testgen::random_formula(rng, 6);
    FormulaPtr back = parse_formula(pretty(*f));
    CAPTURE(pretty(*f));
    REQUIRE(alpha_equal(f, back));
  }
}

TEST_CASE("parse rejects corrupted inputs with in-bounds positions") {
  testgen::Rng rng(0xBAD5EED);
  int rejected = 0;
  for (int i = 0; i < 300; ++i) {
    std::string text = pretty(*testgen::random_formula(rng, 4));
    // corrupt: drop, duplicate or swap a character
    if (text.empty()) continue;
    std::size_t at = rng.below(text.size());
    switch (rng.below(3)) {
      case 0: text.erase(at, 1); break;
      case 1: text.insert(at, 1, '}'); break;
      default: text[at] = '?'; break;
    }
    try {
      parse_formula(text);
    } catch (const ParseError& e) {
      ++rejected;
      CHECK(e.line >= 1);
      CHECK(e.col >= 1);
      std::size_t lines = 1 + std::count(text.begin(), text.end(), '\n');
      CHECK(static_cast<std::size_t>(e.line) <= lines + 1);
    }
  }
  CHECK(rejected > 100);  // most corruptions must be caught
}

TEST_CASE("trace lines parse to closed events") {
  EventInstance snd = parse_event_line("snd server {5, ack, joe}");
  CHECK(snd.kind == ActionKind::Output);
  CHECK(snd.subject == Value::atom("server"));

  EventInstance ret = parse_event_line("ret pid(3) yaws:do_recv/3 {ok, http_eoh}");
  CHECK(ret.kind == ActionKind::Return);
  CHECK(ret.arity == 3);
  CHECK(ret.subject == Value(Pid{3}));

  CHECK_THROWS_AS(parse_event_line("snd server {X}"), ParseError);
}

TEST_CASE("trace files stamp sequence indexes in order") {
  auto t = parse_trace("# demo\nsnd a 1\n\nrcv b 2\n");
  REQUIRE(t.size() == 2);
  CHECK(t[0].seq == 0);
  CHECK(t[1].seq == 1);
}

TEST_CASE("event text round trips through the trace syntax") {
  testgen::Rng rng(0x7777);
  for (int i = 0; i < 200; ++i) {
    EventInstance e = testgen::random_event(rng);
    EventInstance back = parse_event_line(to_string(e));
    CAPTURE(to_string(e));
    CHECK(back == e);
  }
}
