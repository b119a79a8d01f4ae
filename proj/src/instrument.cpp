#include "rv/instrument.hpp"

#include <cassert>

namespace rv {

// ---------------------------------------------------------------------
// Wire shapes
// ---------------------------------------------------------------------

namespace {
const char* kAckTag = "$ack";
const char* kEventTag = "$event";
const char* kInitTag = "$init";
const char* kInitAckTag = "$init_ack";
const char* kNullTag = "$null";
const char* kNonceTag = "$nonce";

Value kind_atom(ActionKind k) { return Value::atom(kind_keyword(k)); }

std::optional<ActionKind> atom_kind(const Value& v) {
  if (!v.is_atom()) return std::nullopt;
  const std::string& n = v.as_atom().name;
  if (n == "snd") return ActionKind::Output;
  if (n == "rcv") return ActionKind::Input;
  if (n == "call") return ActionKind::Call;
  if (n == "ret") return ActionKind::Return;
  return std::nullopt;
}
}  // namespace

Value encode_nonce(const Nonce& n) {
  if (n.null) return Value::atom(kNullTag);
  return Value::tuple({Value::atom(kNonceTag), Value(n.pid), Value(static_cast<std::int64_t>(n.counter))});
}

std::optional<Nonce> decode_nonce(const Value& v) {
  if (v.is_atom() && v.as_atom().name == kNullTag) return Nonce::null_nonce();
  if (!v.is_tuple()) return std::nullopt;
  const Tuple& t = v.as_tuple();
  if (t.size() != 3 || !t[0].is_atom() || t[0].as_atom().name != kNonceTag) return std::nullopt;
  if (!t[1].is_pid() || !t[2].is_int()) return std::nullopt;
  return Nonce::fresh(t[1].as_pid(), static_cast<std::uint64_t>(t[2].as_int()));
}

Value encode_event_message(const EventInstance& e, const Nonce& n) {
  Tuple payload;
  switch (e.kind) {
    case ActionKind::Output:
    case ActionKind::Input:
      payload.push_back(e.payload);
      break;
    case ActionKind::Call: {
      Tuple args(e.args.begin(), e.args.end());
      payload.push_back(Value::tuple(
          {Value::atom(e.module), Value::atom(e.function), Value(std::move(args))}));
      break;
    }
    case ActionKind::Return:
      payload.push_back(Value::tuple({Value::atom(e.module), Value::atom(e.function),
                                      Value(static_cast<std::int64_t>(e.arity)), e.ret_value}));
      break;
  }
  return Value::tuple({Value::atom(kEventTag), kind_atom(e.kind), e.subject,
                       std::move(payload[0]), Value(e.emitter),
                       Value(static_cast<std::int64_t>(e.seq)), encode_nonce(n)});
}

std::optional<EventMessage> decode_event_message(const Value& v) {
  if (!v.is_tuple()) return std::nullopt;
  const Tuple& t = v.as_tuple();
  if (t.size() != 7 || !t[0].is_atom() || t[0].as_atom().name != kEventTag) return std::nullopt;
  auto kind = atom_kind(t[1]);
  auto nonce = decode_nonce(t[6]);
  if (!kind || !nonce || !t[4].is_pid() || !t[5].is_int()) return std::nullopt;

  EventMessage out;
  out.nonce = *nonce;
  EventInstance& e = out.event;
  e.kind = *kind;
  e.subject = t[2];
  e.emitter = t[4].as_pid();
  e.seq = static_cast<std::uint64_t>(t[5].as_int());
  switch (*kind) {
    case ActionKind::Output:
    case ActionKind::Input:
      e.payload = t[3];
      break;
    case ActionKind::Call: {
      if (!t[3].is_tuple() || t[3].as_tuple().size() != 3) return std::nullopt;
      const Tuple& c = t[3].as_tuple();
      if (!c[0].is_atom() || !c[1].is_atom() || !c[2].is_tuple()) return std::nullopt;
      e.module = c[0].as_atom().name;
      e.function = c[1].as_atom().name;
      e.args = c[2].as_tuple();
      break;
    }
    case ActionKind::Return: {
      if (!t[3].is_tuple() || t[3].as_tuple().size() != 4) return std::nullopt;
      const Tuple& r = t[3].as_tuple();
      if (!r[0].is_atom() || !r[1].is_atom() || !r[2].is_int()) return std::nullopt;
      e.module = r[0].as_atom().name;
      e.function = r[1].as_atom().name;
      e.arity = static_cast<std::size_t>(r[2].as_int());
      e.ret_value = r[3];
      break;
    }
  }
  return out;
}

Value encode_ack(const Nonce& n) {
  return Value::tuple({Value::atom(kAckTag), encode_nonce(n)});
}

Term ack_pattern(const Nonce& n) {
  return Term::lit(encode_ack(n));  // fully closed: matches exactly this nonce
}

std::optional<Nonce> decode_ack(const Value& v) {
  if (!v.is_tuple()) return std::nullopt;
  const Tuple& t = v.as_tuple();
  if (t.size() != 2 || !t[0].is_atom() || t[0].as_atom().name != kAckTag) return std::nullopt;
  return decode_nonce(t[1]);
}

Value encode_init(Pid system_pid) {
  return Value::tuple({Value::atom(kInitTag), Value(system_pid)});
}

Value encode_init_ack(Pid system_pid) {
  return Value::tuple({Value::atom(kInitAckTag), Value(system_pid)});
}

Term init_ack_pattern(Pid system_pid) { return Term::lit(encode_init_ack(system_pid)); }

std::optional<Pid> decode_init(const Value& v) {
  if (!v.is_tuple()) return std::nullopt;
  const Tuple& t = v.as_tuple();
  if (t.size() != 2 || !t[0].is_atom() || t[0].as_atom().name != kInitTag) return std::nullopt;
  if (!t[1].is_pid()) return std::nullopt;
  return t[1].as_pid();
}

// ---------------------------------------------------------------------
// Mode resolution
// ---------------------------------------------------------------------

const char* to_string(InstrumentationMode m) {
  switch (m) {
    case InstrumentationMode::Async: return "async";
    case InstrumentationMode::Sync: return "sync";
    case InstrumentationMode::Hybrid: return "hybrid";
  }
  return "?";
}

namespace {
bool could_match_term(const Term& p, const Value& v) {
  if (p.is_var() || p.is_wildcard()) return true;
  if (p.is_value()) return p.as_value() == v;
  if (!v.is_tuple()) return false;
  const auto& pt = p.as_tuple();
  const Tuple& vt = v.as_tuple();
  if (pt.size() != vt.size()) return false;
  for (std::size_t i = 0; i < pt.size(); ++i)
    if (!could_match_term(pt[i], vt[i])) return false;
  return true;
}
}  // namespace

bool could_match(const ActionPattern& p, const EventInstance& e) {
  if (p.kind != e.kind) return false;
  if (!could_match_term(p.subject, e.subject)) return false;
  switch (p.kind) {
    case ActionKind::Output:
    case ActionKind::Input:
      return could_match_term(p.payload, e.payload);
    case ActionKind::Call:
      if (p.module != e.module || p.function != e.function || p.args.size() != e.args.size())
        return false;
      for (std::size_t i = 0; i < p.args.size(); ++i)
        if (!could_match_term(p.args[i], e.args[i])) return false;
      return true;
    case ActionKind::Return:
      return p.module == e.module && p.function == e.function && p.arity == e.arity &&
             could_match_term(p.ret_value, e.ret_value);
  }
  return false;
}

HookDecision ModeTable::decide(const EventInstance& e) const {
  bool report = false;
  bool sync_pattern = false;
  for (const PatternMode& pm : patterns_) {
    if (!could_match(pm.pattern, e)) continue;
    report = true;
    if (pm.sync) sync_pattern = true;
  }
  if (!report) return {false, false};
  switch (mode_) {
    case InstrumentationMode::Async: return {true, false};
    case InstrumentationMode::Sync: return {true, true};
    case InstrumentationMode::Hybrid: return {true, sync_pattern};
  }
  return {true, false};
}

std::size_t instrument(Runtime& rt, const FormulaPtr& marked, InstrumentationMode mode,
                       ActorRef sink) {
  auto table = std::make_shared<ModeTable>(collect_pattern_modes(*marked), mode);
  HookRegistration reg;
  for (const PatternMode& pm : table->patterns()) reg.kinds.insert(pm.pattern.kind);
  reg.decide = [table](const EventInstance& e) { return table->decide(e); };
  reg.sink = sink;
  reg.sync_start_gate = mode == InstrumentationMode::Sync;
  return rt.add_hook(std::move(reg));
}

void send_ack(Runtime& rt, ActorRef system, const Nonce& n,
              std::set<std::pair<std::uint64_t, std::uint64_t>>* acked) {
  assert(!n.null && "acks are never sent for null nonces");
  if (acked) {
    bool fresh = acked->insert({n.pid.id, n.counter}).second;
    assert(fresh && "double ack for the same nonce");
    (void)fresh;
  }
  rt.post(system, encode_ack(n));
}

}  // namespace rv
