#include "rv/match.hpp"

namespace rv {

bool match_term(const Term& pattern, const Value& value, Substitution& out) {
  if (pattern.is_wildcard()) return true;
  if (pattern.is_var()) {
    if (!out.bind(pattern.var_name(), value))
      throw MatchError("nonlinear pattern: variable " + pattern.var_name() +
                       " bound twice in one pattern");
    return true;
  }
  if (pattern.is_value()) return pattern.as_value() == value;
  // Tuple of terms against a tuple value, elementwise.
  if (!value.is_tuple()) return false;
  const auto& pt = pattern.as_tuple();
  const Tuple& vt = value.as_tuple();
  if (pt.size() != vt.size()) return false;
  for (std::size_t i = 0; i < pt.size(); ++i)
    if (!match_term(pt[i], vt[i], out)) return false;
  return true;
}

std::optional<Substitution> match(const ActionPattern& pattern, const EventInstance& event) {
  if (pattern.kind != event.kind) return std::nullopt;
  Substitution s;
  if (!match_term(pattern.subject, event.subject, s)) return std::nullopt;
  switch (pattern.kind) {
    case ActionKind::Output:
    case ActionKind::Input:
      if (!match_term(pattern.payload, event.payload, s)) return std::nullopt;
      break;
    case ActionKind::Call:
      if (pattern.module != event.module || pattern.function != event.function ||
          pattern.args.size() != event.args.size())
        return std::nullopt;
      for (std::size_t i = 0; i < pattern.args.size(); ++i)
        if (!match_term(pattern.args[i], event.args[i], s)) return std::nullopt;
      break;
    case ActionKind::Return:
      if (pattern.module != event.module || pattern.function != event.function ||
          pattern.arity != event.arity)
        return std::nullopt;
      if (!match_term(pattern.ret_value, event.ret_value, s)) return std::nullopt;
      break;
  }
  return s;
}

bool subject_matches(const ActionPattern& pattern, const EventInstance& event) {
  if (pattern.kind != event.kind) return false;
  Substitution scratch;
  return match_term(pattern.subject, event.subject, scratch);
}

Term apply_term(const Term& t, const Substitution& s) {
  if (t.is_var()) {
    if (const Value* v = s.lookup(t.var_name())) return Term::lit(*v);
    return t;
  }
  if (t.is_tuple()) {
    Term::TupleT out;
    out.reserve(t.as_tuple().size());
    bool all_closed = true;
    for (const Term& e : t.as_tuple()) {
      out.push_back(apply_term(e, s));
      all_closed = all_closed && out.back().is_value();
    }
    if (all_closed) {
      Tuple vs;
      vs.reserve(out.size());
      for (const Term& e : out) vs.push_back(e.as_value());
      return Term::lit(Value(std::move(vs)));
    }
    return Term::tuple(std::move(out));
  }
  return t;
}

std::string to_string(const Substitution& s) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : s.map()) {
    if (!first) out += ", ";
    first = false;
    out += k + " -> " + to_string(v);
  }
  return out + "}";
}

}  // namespace rv
