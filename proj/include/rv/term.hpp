#pragma once

#include <cstddef>
#include <functional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "rv/value.hpp"

namespace rv {

/// Open counterpart of Value: literals, term variables, wildcards and
/// tuples of terms. Wildcards match anything and bind nothing.
class Term {
 public:
  struct Var {
    std::string name;
    friend bool operator==(const Var&, const Var&) = default;
  };
  struct Wildcard {
    friend bool operator==(Wildcard, Wildcard) { return true; }
  };
  using TupleT = std::vector<Term>;
  using Rep = std::variant<Value, Var, Wildcard, TupleT>;

  Term() : rep_(Value{}) {}
  Term(Value v) : rep_(std::move(v)) {}
  Term(Var v) : rep_(std::move(v)) {}
  Term(Wildcard w) : rep_(w) {}
  Term(TupleT t) : rep_(std::move(t)) {}

  static Term var(std::string name) { return Term(Var{std::move(name)}); }
  static Term wildcard() { return Term(Wildcard{}); }
  static Term lit(Value v) { return Term(std::move(v)); }
  static Term atom(std::string name) { return Term(Value::atom(std::move(name))); }
  static Term tuple(TupleT elems) { return Term(std::move(elems)); }

  bool is_value() const { return std::holds_alternative<Value>(rep_); }
  bool is_var() const { return std::holds_alternative<Var>(rep_); }
  bool is_wildcard() const { return std::holds_alternative<Wildcard>(rep_); }
  bool is_tuple() const { return std::holds_alternative<TupleT>(rep_); }

  const Value& as_value() const { return std::get<Value>(rep_); }
  const std::string& var_name() const { return std::get<Var>(rep_).name; }
  const TupleT& as_tuple() const { return std::get<TupleT>(rep_); }

  friend bool operator==(const Term& a, const Term& b) { return a.rep_ == b.rep_; }

 private:
  Rep rep_;
};

/// Appends the names of all variables occurring in t, in left-to-right order
/// (duplicates preserved so callers can detect nonlinear patterns).
void collect_vars(const Term& t, std::vector<std::string>& out);

std::string to_string(const Term& t);

enum class ActionKind { Output, Input, Call, Return };

const char* kind_keyword(ActionKind k);  // snd / rcv / call / ret

/// Possibly-open action: what necessity formulas quantify over.
/// subject is the destination for outputs, the receiver for inputs and the
/// executing process for calls/returns.
struct ActionPattern {
  ActionKind kind = ActionKind::Output;
  Term subject;

  // Output/Input payload.
  Term payload;

  // Call/Return payload: module:function plus args (call) or arity and
  // return value (return).
  std::string module;
  std::string function;
  std::vector<Term> args;   // call only
  std::size_t arity = 0;    // return only (calls use args.size())
  Term ret_value;           // return only

  static ActionPattern output(Term subject, Term payload);
  static ActionPattern input(Term subject, Term payload);
  static ActionPattern call(Term subject, std::string mod, std::string fn,
                            std::vector<Term> args);
  static ActionPattern ret(Term subject, std::string mod, std::string fn,
                           std::size_t arity, Term value);

  friend bool operator==(const ActionPattern&, const ActionPattern&) = default;
};

void collect_vars(const ActionPattern& p, std::vector<std::string>& out);

std::string to_string(const ActionPattern& p);

/// Closed runtime event. Same shape as ActionPattern but with values
/// everywhere, plus the emitting actor and its per-actor sequence index.
struct EventInstance {
  ActionKind kind = ActionKind::Output;
  Value subject;

  Value payload;  // output/input

  std::string module;
  std::string function;
  std::vector<Value> args;  // call
  std::size_t arity = 0;    // return
  Value ret_value;          // return

  Pid emitter;
  std::uint64_t seq = 0;

  static EventInstance output(Value subject, Value payload);
  static EventInstance input(Value subject, Value payload);
  static EventInstance call(Value subject, std::string mod, std::string fn,
                            std::vector<Value> args);
  static EventInstance ret(Value subject, std::string mod, std::string fn,
                           std::size_t arity, Value value);

  friend bool operator==(const EventInstance& a, const EventInstance& b) {
    return a.kind == b.kind && a.subject == b.subject && a.payload == b.payload &&
           a.module == b.module && a.function == b.function && a.args == b.args &&
           a.arity == b.arity && a.ret_value == b.ret_value;
  }
};

/// Trace-file line form: `snd <subj> <term>`, `call <subj> m:f(<terms>)`, ...
std::string to_string(const EventInstance& e);

}  // namespace rv
