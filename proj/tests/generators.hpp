#pragma once

// Random well-formed formulas, events and traces for the property suites.
// All generators are deterministic given the seed.

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "rv/formula.hpp"
#include "rv/formula_ops.hpp"
#include "rv/term.hpp"

namespace testgen {

struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(seed) {}

  std::size_t below(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng);
  }
  int int_in(int lo, int hi) { return static_cast<int>(lo + below(hi - lo + 1)); }
  bool chance(double p) { return std::uniform_real_distribution<>(0, 1)(eng) < p; }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }
};

// ---------------------------------------------------------------------
// Syntax-coverage generator (round-trip tests): every construct, fresh and
// reused variables, all four action kinds.
// ---------------------------------------------------------------------

struct GenCtx {
  std::vector<std::string> term_vars;   // bound, usable as references
  std::vector<std::string> fvars;       // bound formula variables
  std::vector<std::string> guarded;     // subset usable at this point
  int next_var = 0;
  int next_fvar = 0;

  std::string fresh_term_var() { return "V" + std::to_string(next_var++); }
  std::string fresh_fvar() { return "X" + std::to_string(next_fvar++); }
};

inline rv::Term make_tuple_term(std::vector<rv::Term> elems) {
  bool closed = std::all_of(elems.begin(), elems.end(),
                            [](const rv::Term& t) { return t.is_value(); });
  if (closed) {
    rv::Tuple vs;
    for (const rv::Term& t : elems) vs.push_back(t.as_value());
    return rv::Term::lit(rv::Value(std::move(vs)));
  }
  return rv::Term::tuple(std::move(elems));
}

inline rv::Value random_value(Rng& rng, int depth = 1) {
  switch (rng.below(depth > 0 ? 5 : 4)) {
    case 0: return rv::Value(rng.int_in(0, 9));
    case 1: return rv::Value::atom(std::string(1, static_cast<char>('a' + rng.below(4))));
    case 2: return rv::Value(std::string("s") + std::to_string(rng.below(3)));
    case 3: return rv::Value(rv::Pid{rng.below(5)});
    default: {
      rv::Tuple t;
      std::size_t n = rng.below(3);
      for (std::size_t i = 0; i < n; ++i) t.push_back(random_value(rng, depth - 1));
      return rv::Value(std::move(t));
    }
  }
}

// `refs` is the set of variables bound by enclosing patterns, snapshotted at
// pattern entry so a fresh binder of this pattern is never re-picked (that
// would make the pattern nonlinear).
inline rv::Term random_pattern_term(Rng& rng, GenCtx& ctx,
                                    const std::vector<std::string>& refs, int depth) {
  switch (rng.below(depth > 0 ? 6 : 5)) {
    case 0: return rv::Term::lit(random_value(rng, 0));
    case 1: return rv::Term::wildcard();
    case 2: {
      std::string v = ctx.fresh_term_var();
      ctx.term_vars.push_back(v);
      return rv::Term::var(v);
    }
    case 3:
      if (!refs.empty()) return rv::Term::var(rng.pick(refs));
      return rv::Term::lit(rv::Value(rng.int_in(0, 3)));
    case 4: return rv::Term::atom(std::string(1, static_cast<char>('a' + rng.below(3))));
    default: {
      std::vector<rv::Term> elems;
      std::size_t n = 1 + rng.below(3);
      for (std::size_t i = 0; i < n; ++i)
        elems.push_back(random_pattern_term(rng, ctx, refs, depth - 1));
      return make_tuple_term(std::move(elems));
    }
  }
}

inline rv::ActionPattern random_pattern(Rng& rng, GenCtx& ctx) {
  const std::vector<std::string> refs = ctx.term_vars;
  rv::Term subj = rng.chance(0.7)
                      ? rv::Term::atom(std::string(1, static_cast<char>('a' + rng.below(3))))
                      : random_pattern_term(rng, ctx, refs, 0);
  switch (rng.below(4)) {
    case 0:
      return rv::ActionPattern::output(std::move(subj), random_pattern_term(rng, ctx, refs, 2));
    case 1:
      return rv::ActionPattern::input(std::move(subj), random_pattern_term(rng, ctx, refs, 2));
    case 2: {
      std::vector<rv::Term> args;
      std::size_t n = rng.below(3);
      for (std::size_t i = 0; i < n; ++i)
        args.push_back(random_pattern_term(rng, ctx, refs, 1));
      return rv::ActionPattern::call(std::move(subj), "m", "f", std::move(args));
    }
    default:
      return rv::ActionPattern::ret(std::move(subj), "m", "f", rng.below(4),
                                    random_pattern_term(rng, ctx, refs, 1));
  }
}

inline rv::ArithPtr random_arith(Rng& rng, GenCtx& ctx, int depth) {
  if (depth <= 0 || rng.chance(0.5)) {
    if (!ctx.term_vars.empty() && rng.chance(0.5))
      return rv::Arith::leaf(rv::Term::var(rng.pick(ctx.term_vars)));
    return rv::Arith::leaf(rv::Term::lit(rv::Value(rng.int_in(0, 5))));
  }
  auto op = static_cast<rv::Arith::Op>(1 + rng.below(3));
  return rv::Arith::node(op, random_arith(rng, ctx, depth - 1), random_arith(rng, ctx, depth - 1));
}

inline rv::BoolPtr random_bool(Rng& rng, GenCtx& ctx, int depth) {
  if (depth <= 0 || rng.chance(0.4)) {
    if (rng.chance(0.15)) return rv::BoolExpr::lit(rng.chance(0.5));
    auto op = static_cast<rv::BoolExpr::CmpOp>(rng.below(6));
    return rv::BoolExpr::cmp(op, random_arith(rng, ctx, 1), random_arith(rng, ctx, 1));
  }
  switch (rng.below(3)) {
    case 0:
      return rv::BoolExpr::conj(random_bool(rng, ctx, depth - 1), random_bool(rng, ctx, depth - 1));
    case 1:
      return rv::BoolExpr::disj(random_bool(rng, ctx, depth - 1), random_bool(rng, ctx, depth - 1));
    default:
      return rv::BoolExpr::negate(random_bool(rng, ctx, depth - 1));
  }
}

inline rv::FormulaPtr random_formula_walk(Rng& rng, GenCtx ctx, int depth) {
  if (depth <= 0) {
    if (!ctx.guarded.empty() && rng.chance(0.4)) return rv::Formula::fvar(rng.pick(ctx.guarded));
    return rng.chance(0.8) ? rv::Formula::ff() : rv::Formula::sff();
  }
  switch (rng.below(6)) {
    case 0:
    case 1: {  // necessity (weighted up: the workhorse construct)
      rv::ActionPattern p = random_pattern(rng, ctx);
      GenCtx inner = ctx;
      inner.guarded = inner.fvars;
      bool sync = rng.chance(0.2);
      rv::FormulaPtr body = random_formula_walk(rng, std::move(inner), depth - 1);
      return sync ? rv::Formula::sync_nec(std::move(p), std::move(body))
                  : rv::Formula::nec(std::move(p), std::move(body));
    }
    case 2:
      return rv::Formula::conj(random_formula_walk(rng, ctx, depth - 1),
                               random_formula_walk(rng, ctx, depth - 1));
    case 3: {
      std::string x = ctx.fresh_fvar();
      GenCtx inner = ctx;
      inner.fvars.push_back(x);
      return rv::Formula::max(x, random_formula_walk(rng, std::move(inner), depth - 1));
    }
    case 4:
      return rv::Formula::guard(random_bool(rng, ctx, 2),
                                random_formula_walk(rng, ctx, depth - 1));
    default:
      return random_formula_walk(rng, ctx, 0);
  }
}

/// Well-formed formula covering the whole grammar; depth bounds the AST.
inline rv::FormulaPtr random_formula(Rng& rng, int depth) {
  return rv::alpha_rename(random_formula_walk(rng, GenCtx{}, depth));
}

// ---------------------------------------------------------------------
// Agreement-oriented generator: a small fixed action alphabet so that
// random traces actually advance the monitors.
// ---------------------------------------------------------------------

// Action alphabet: snd a, rcv a, snd b. Payloads are small integers.
inline rv::EventInstance random_alphabet_event(Rng& rng, int value_range = 3) {
  rv::Value payload(rng.int_in(0, value_range - 1));
  switch (rng.below(3)) {
    case 0: return rv::EventInstance::output(rv::Value::atom("a"), payload);
    case 1: return rv::EventInstance::input(rv::Value::atom("a"), payload);
    default: return rv::EventInstance::output(rv::Value::atom("b"), payload);
  }
}

struct PropCtx {
  std::vector<std::string> int_vars;  // bound from payload positions
  std::vector<std::string> fvars;
  std::vector<std::string> guarded;
  int next_var = 0;
  int next_fvar = 0;
};

inline rv::ActionPattern random_alphabet_pattern(Rng& rng, PropCtx& ctx) {
  rv::Term payload;
  switch (rng.below(4)) {
    case 0: payload = rv::Term::lit(rv::Value(rng.int_in(0, 2))); break;
    case 1: payload = rv::Term::wildcard(); break;
    case 2:
      // constraint: re-match against a value bound by an earlier necessity
      if (!ctx.int_vars.empty()) {
        payload = rv::Term::var(rng.pick(ctx.int_vars));
        break;
      }
      [[fallthrough]];
    default: {
      std::string v = "P" + std::to_string(ctx.next_var++);
      ctx.int_vars.push_back(v);
      payload = rv::Term::var(v);
      break;
    }
  }
  switch (rng.below(3)) {
    case 0: return rv::ActionPattern::output(rv::Term::atom("a"), std::move(payload));
    case 1: return rv::ActionPattern::input(rv::Term::atom("a"), std::move(payload));
    default: return rv::ActionPattern::output(rv::Term::atom("b"), std::move(payload));
  }
}

inline rv::BoolPtr random_int_guard(Rng& rng, PropCtx& ctx) {
  auto leaf = [&]() -> rv::ArithPtr {
    if (!ctx.int_vars.empty() && rng.chance(0.6))
      return rv::Arith::leaf(rv::Term::var(rng.pick(ctx.int_vars)));
    return rv::Arith::leaf(rv::Term::lit(rv::Value(rng.int_in(0, 2))));
  };
  auto op = static_cast<rv::BoolExpr::CmpOp>(rng.below(6));
  rv::ArithPtr lhs = leaf();
  rv::ArithPtr rhs = rng.chance(0.3)
                         ? rv::Arith::node(rv::Arith::Op::Add, leaf(),
                                           rv::Arith::leaf(rv::Term::lit(rv::Value(1))))
                         : leaf();
  return rv::BoolExpr::cmp(op, std::move(lhs), std::move(rhs));
}

// Bodies may violate (ff/sff), recurse, guard or fork; violations always sit
// under at least one necessity.
inline rv::FormulaPtr random_property_body(Rng& rng, PropCtx ctx, int depth);

inline rv::FormulaPtr random_property_top(Rng& rng, PropCtx ctx, int depth) {
  if (depth <= 1 || rng.chance(0.5)) {
    rv::ActionPattern p = random_alphabet_pattern(rng, ctx);
    PropCtx inner = ctx;
    inner.guarded = inner.fvars;
    bool sync = rng.chance(0.25);
    rv::FormulaPtr body = random_property_body(rng, std::move(inner), depth - 1);
    return sync ? rv::Formula::sync_nec(std::move(p), std::move(body))
                : rv::Formula::nec(std::move(p), std::move(body));
  }
  switch (rng.below(3)) {
    case 0:
      return rv::Formula::conj(random_property_top(rng, ctx, depth - 1),
                               random_property_top(rng, ctx, depth - 1));
    case 1: {
      std::string x = "X" + std::to_string(ctx.next_fvar++);
      PropCtx inner = ctx;
      inner.fvars.push_back(x);
      return rv::Formula::max(x, random_property_top(rng, std::move(inner), depth - 1));
    }
    default:
      return rv::Formula::guard(random_int_guard(rng, ctx),
                                random_property_top(rng, ctx, depth - 1));
  }
}

inline rv::FormulaPtr random_property_body(Rng& rng, PropCtx ctx, int depth) {
  if (depth <= 0) {
    double roll = std::uniform_real_distribution<>(0, 1)(rng.eng);
    if (roll < 0.45) return rv::Formula::ff();
    if (roll < 0.6) return rv::Formula::sff();
    if (!ctx.guarded.empty()) return rv::Formula::fvar(rng.pick(ctx.guarded));
    return rv::Formula::ff();
  }
  switch (rng.below(6)) {
    case 0: return rv::Formula::ff();
    case 1:
      return rv::Formula::conj(random_property_body(rng, ctx, depth - 1),
                               random_property_body(rng, ctx, depth - 1));
    case 2:
      return rv::Formula::guard(random_int_guard(rng, ctx),
                                random_property_body(rng, ctx, depth - 1));
    case 3:
      if (!ctx.guarded.empty()) return rv::Formula::fvar(rng.pick(ctx.guarded));
      [[fallthrough]];
    default:
      return random_property_top(rng, ctx, depth);
  }
}

/// Random alpha-renamed sff-marked property over the 3-action alphabet.
inline rv::FormulaPtr random_marked_property(Rng& rng, int depth) {
  rv::FormulaPtr f = rv::alpha_rename(random_property_top(rng, PropCtx{}, depth));
  return rv::mark_synchronous(f);
}

/// Mixes pattern-derived events (so necessities actually fire) with noise.
inline std::vector<rv::EventInstance> random_trace_for(Rng& rng, const rv::Formula& f,
                                                       std::size_t len) {
  std::vector<rv::PatternMode> pats = rv::collect_pattern_modes(f);
  std::vector<rv::EventInstance> out;
  for (std::size_t i = 0; i < len; ++i) {
    rv::EventInstance e;
    if (!pats.empty() && rng.chance(0.75)) {
      const rv::ActionPattern& p = rng.pick(pats).pattern;
      rv::Value payload(rng.int_in(0, 2));
      rv::Value subj = p.subject.is_value() ? p.subject.as_value()
                                            : rv::Value::atom(rng.chance(0.5) ? "a" : "b");
      if ((p.kind == rv::ActionKind::Output || p.kind == rv::ActionKind::Input) &&
          p.payload.is_value())
        payload = p.payload.as_value();
      e = p.kind == rv::ActionKind::Input ? rv::EventInstance::input(subj, payload)
                                          : rv::EventInstance::output(subj, payload);
    } else {
      e = random_alphabet_event(rng);
    }
    e.seq = i;
    out.push_back(std::move(e));
  }
  return out;
}

/// Fully random event over the wider value domain (round-trip tests).
inline rv::EventInstance random_event(Rng& rng) {
  switch (rng.below(4)) {
    case 0: return rv::EventInstance::output(random_value(rng), random_value(rng));
    case 1: return rv::EventInstance::input(random_value(rng), random_value(rng));
    case 2: {
      std::vector<rv::Value> args;
      std::size_t n = rng.below(3);
      for (std::size_t i = 0; i < n; ++i) args.push_back(random_value(rng));
      return rv::EventInstance::call(random_value(rng), "m", "f", std::move(args));
    }
    default:
      return rv::EventInstance::ret(random_value(rng), "m", "f", rng.below(4),
                                    random_value(rng));
  }
}

}  // namespace testgen
