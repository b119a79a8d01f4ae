#include "rv/term.hpp"

namespace rv {

void collect_vars(const Term& t, std::vector<std::string>& out) {
  if (t.is_var()) {
    out.push_back(t.var_name());
  } else if (t.is_tuple()) {
    for (const Term& e : t.as_tuple()) collect_vars(e, out);
  }
}

std::string to_string(const Term& t) {
  if (t.is_value()) return to_string(t.as_value());
  if (t.is_var()) return t.var_name();
  if (t.is_wildcard()) return "_";
  std::string out = "{";
  const auto& es = t.as_tuple();
  for (std::size_t i = 0; i < es.size(); ++i) {
    if (i) out += ", ";
    out += to_string(es[i]);
  }
  return out + "}";
}

const char* kind_keyword(ActionKind k) {
  switch (k) {
    case ActionKind::Output: return "snd";
    case ActionKind::Input: return "rcv";
    case ActionKind::Call: return "call";
    case ActionKind::Return: return "ret";
  }
  return "?";
}

ActionPattern ActionPattern::output(Term subject, Term payload) {
  ActionPattern p;
  p.kind = ActionKind::Output;
  p.subject = std::move(subject);
  p.payload = std::move(payload);
  return p;
}

ActionPattern ActionPattern::input(Term subject, Term payload) {
  ActionPattern p = output(std::move(subject), std::move(payload));
  p.kind = ActionKind::Input;
  return p;
}

ActionPattern ActionPattern::call(Term subject, std::string mod, std::string fn,
                                  std::vector<Term> args) {
  ActionPattern p;
  p.kind = ActionKind::Call;
  p.subject = std::move(subject);
  p.module = std::move(mod);
  p.function = std::move(fn);
  p.args = std::move(args);
  return p;
}

ActionPattern ActionPattern::ret(Term subject, std::string mod, std::string fn,
                                 std::size_t arity, Term value) {
  ActionPattern p;
  p.kind = ActionKind::Return;
  p.subject = std::move(subject);
  p.module = std::move(mod);
  p.function = std::move(fn);
  p.arity = arity;
  p.ret_value = std::move(value);
  return p;
}

void collect_vars(const ActionPattern& p, std::vector<std::string>& out) {
  collect_vars(p.subject, out);
  switch (p.kind) {
    case ActionKind::Output:
    case ActionKind::Input:
      collect_vars(p.payload, out);
      break;
    case ActionKind::Call:
      for (const Term& a : p.args) collect_vars(a, out);
      break;
    case ActionKind::Return:
      collect_vars(p.ret_value, out);
      break;
  }
}

std::string to_string(const ActionPattern& p) {
  switch (p.kind) {
    case ActionKind::Output:
      return to_string(p.subject) + " ! " + to_string(p.payload);
    case ActionKind::Input:
      return to_string(p.subject) + " ? " + to_string(p.payload);
    case ActionKind::Call: {
      std::string out = "call " + to_string(p.subject) + " " + p.module + ":" + p.function + "(";
      for (std::size_t i = 0; i < p.args.size(); ++i) {
        if (i) out += ", ";
        out += to_string(p.args[i]);
      }
      return out + ")";
    }
    case ActionKind::Return:
      return "ret " + to_string(p.subject) + " " + p.module + ":" + p.function + "/" +
             std::to_string(p.arity) + " = " + to_string(p.ret_value);
  }
  return "?";
}

EventInstance EventInstance::output(Value subject, Value payload) {
  EventInstance e;
  e.kind = ActionKind::Output;
  e.subject = std::move(subject);
  e.payload = std::move(payload);
  return e;
}

EventInstance EventInstance::input(Value subject, Value payload) {
  EventInstance e = output(std::move(subject), std::move(payload));
  e.kind = ActionKind::Input;
  return e;
}

EventInstance EventInstance::call(Value subject, std::string mod, std::string fn,
                                  std::vector<Value> args) {
  EventInstance e;
  e.kind = ActionKind::Call;
  e.subject = std::move(subject);
  e.module = std::move(mod);
  e.function = std::move(fn);
  e.args = std::move(args);
  return e;
}

EventInstance EventInstance::ret(Value subject, std::string mod, std::string fn,
                                 std::size_t arity, Value value) {
  EventInstance e;
  e.kind = ActionKind::Return;
  e.subject = std::move(subject);
  e.module = std::move(mod);
  e.function = std::move(fn);
  e.arity = arity;
  e.ret_value = std::move(value);
  return e;
}

std::string to_string(const EventInstance& e) {
  switch (e.kind) {
    case ActionKind::Output:
      return std::string("snd ") + to_string(e.subject) + " " + to_string(e.payload);
    case ActionKind::Input:
      return std::string("rcv ") + to_string(e.subject) + " " + to_string(e.payload);
    case ActionKind::Call: {
      std::string out = "call " + to_string(e.subject) + " " + e.module + ":" + e.function + "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        out += to_string(e.args[i]);
      }
      return out + ")";
    }
    case ActionKind::Return:
      return "ret " + to_string(e.subject) + " " + e.module + ":" + e.function + "/" +
             std::to_string(e.arity) + " " + to_string(e.ret_value);
  }
  return "?";
}

}  // namespace rv
