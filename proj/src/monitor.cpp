#include "rv/monitor.hpp"

#include <cassert>
#include <condition_variable>
#include <fstream>
#include <mutex>

namespace rv {

std::string to_string(const Verdict& v) {
  std::string idx = v.index ? std::to_string(*v.index) : "start";
  return "violation " + idx + (v.sync ? " sync " : " async ") + to_string(v.witness);
}

// ---------------------------------------------------------------------
// Synthesis: expansion of non-necessity structure into obligations
// ---------------------------------------------------------------------

namespace {

using Env = std::map<std::string, FormulaPtr>;

struct ExpandOut {
  std::vector<Obligation> obligations;
  std::vector<Substitution> violations;  // one per ff leaf reached
};

void expand_formula(const FormulaPtr& f, Env env, const Substitution& acc,
                    const PredicateTable& preds, ExpandOut& out) {
  switch (f->kind) {
    case Formula::Kind::FF:
    case Formula::Kind::SFF:  // defensive: marking removes these
      out.violations.push_back(acc);
      return;
    case Formula::Kind::And:
      expand_formula(f->left, env, acc, preds, out);
      expand_formula(f->body, std::move(env), acc, preds, out);
      return;
    case Formula::Kind::Nec:
    case Formula::Kind::SyncNec:
      out.obligations.push_back(Obligation{f->kind == Formula::Kind::SyncNec, f->pattern,
                                           f->body, std::move(env), acc});
      return;
    case Formula::Kind::Max:
      env[f->var] = f;
      expand_formula(f->body, std::move(env), acc, preds, out);
      return;
    case Formula::Kind::Guard:
      if (eval_bool(*f->cond, Substitution{}, preds))
        expand_formula(f->body, std::move(env), acc, preds, out);
      return;
    case Formula::Kind::Var: {
      auto it = env.find(f->var);
      if (it == env.end())
        throw SynthesisError("unbound formula variable " + f->var + " during expansion");
      FormulaPtr binder = it->second;
      expand_formula(binder->body, std::move(env), acc, preds, out);
      return;
    }
  }
}

}  // namespace

Blueprint synthesize(const FormulaPtr& marked, const PredicateTable& preds) {
  if (auto diag = check_well_formed(*marked))
    throw SynthesisError("ill-formed formula: " + diag->message);
  if (contains_sff(*marked))
    throw SynthesisError("unmarked sff in formula: run the synchronous-marking pass first");
  Blueprint bp;
  bp.marked = marked;
  bp.pattern_modes = collect_pattern_modes(*marked);
  ExpandOut out;
  expand_formula(marked, Env{}, Substitution{}, preds, out);
  bp.initial = std::move(out.obligations);
  bp.start_violation_witnesses = std::move(out.violations);
  return bp;
}

StepResult submonitor_step(const Obligation& state, const EventMessage& msg,
                           const PredicateTable& preds) {
  StepResult r;
  if (!subject_matches(state.pattern, msg.event)) {
    r.kind = StepResult::Kind::Skip;
    return r;
  }
  auto sigma = match(state.pattern, msg.event);
  if (!sigma) {
    r.kind = StepResult::Kind::Satisfied;
    return r;
  }
  Substitution acc = state.accumulated.merged(*sigma);
  ExpandOut out;
  expand_formula(apply_substitution(state.continuation, *sigma), state.env, acc, preds, out);
  r.kind = StepResult::Kind::Advanced;
  r.successors = std::move(out.obligations);
  for (Substitution& w : out.violations) {
    Verdict v;
    v.index = msg.event.seq;
    v.sync = !msg.nonce.null;
    v.witness = std::move(w);
    v.event = msg.event;
    r.verdicts.push_back(std::move(v));
  }
  return r;
}

// ---------------------------------------------------------------------
// Live network: router + submonitor actors
// ---------------------------------------------------------------------

struct NetworkShared {
  mutable std::mutex mu;
  mutable std::condition_variable cv;
  std::vector<Verdict> verdicts;
  std::vector<AckRecord> acks;
  std::atomic<std::size_t> census{0};
  std::atomic<std::uint64_t> events{0};
  std::ofstream verdict_file;
  std::set<std::pair<std::uint64_t, std::uint64_t>> acked_nonces;  // double-ack guard

  void push_verdict(Verdict v) {
    std::unique_lock lk(mu);
    if (verdict_file.is_open()) verdict_file << to_string(v) << "\n" << std::flush;
    verdicts.push_back(std::move(v));
    cv.notify_all();
  }
  void push_ack(AckRecord a) {
    std::unique_lock lk(mu);
    acks.push_back(a);
  }
};

namespace {

// Internal protocol atoms. The step message wraps the original event
// message; done replies carry spawned children and violation witnesses.
const char* kStepTag = "$step";
const char* kDoneTag = "$done";
const char* kContAtom = "$cont";
const char* kStopAtom = "$stop";

Term tagged_pattern(const char* tag, std::size_t wilds) {
  Term::TupleT parts{Term::atom(tag)};
  for (std::size_t i = 0; i < wilds; ++i) parts.push_back(Term::wildcard());
  return Term::tuple(std::move(parts));
}

Term done_pattern(std::int64_t eid) {
  Term::TupleT parts{Term::atom(kDoneTag), Term::lit(Value(eid))};
  for (int i = 0; i < 4; ++i) parts.push_back(Term::wildcard());
  return Term::tuple(std::move(parts));
}

Value encode_witness(const Substitution& s) {
  Tuple pairs;
  for (const auto& [k, v] : s.map()) pairs.push_back(Value::tuple({Value::atom(k), v}));
  return Value(std::move(pairs));
}

Substitution decode_witness(const Value& v) {
  Substitution s;
  for (const Value& pair : v.as_tuple())
    s.bind(pair.as_tuple()[0].as_atom().name, pair.as_tuple()[1]);
  return s;
}

struct SubmonitorSpawner;

// Submonitor actor: consumes step messages, runs the pure step function,
// spawns children for forked branches and reports back to the router.
Behavior submonitor_behavior(std::shared_ptr<NetworkShared> shared, ActorRef router,
                             Obligation ob);

ActorRef spawn_child_monitor(Runtime& rt, std::shared_ptr<NetworkShared> shared,
                             ActorRef router, Obligation ob) {
  return rt.spawn(submonitor_behavior(shared, router, std::move(ob)),
                  SpawnOptions{std::nullopt, /*traced=*/false});
}

Behavior submonitor_behavior(std::shared_ptr<NetworkShared> shared, ActorRef router,
                             Obligation ob) {
  return [shared, router, ob](Context& ctx) mutable -> Task<void> {
    const Term step_pat = tagged_pattern(kStepTag, 2);
    while (true) {
      ReceiveResult r = co_await ctx.receive_match(step_pat);
      const Tuple& t = r.message.as_tuple();
      std::int64_t eid = t[1].as_int();
      auto em = decode_event_message(t[2]);
      assert(em);

      StepResult res = submonitor_step(ob, *em, ctx.runtime().preds());

      bool stop = false;
      Tuple children;
      Tuple witnesses;
      switch (res.kind) {
        case StepResult::Kind::Skip:
          break;
        case StepResult::Kind::Satisfied:
          stop = true;
          break;
        case StepResult::Kind::Advanced: {
          // The structurally last branch continues here; the rest (for
          // property shapes like `X & ...` the re-instantiated listener)
          // are spawned as fresh siblings fed the same stream.
          for (std::size_t i = 0; i + 1 < res.successors.size(); ++i) {
            ActorRef child = spawn_child_monitor(ctx.runtime(), shared, router,
                                                 std::move(res.successors[i]));
            children.push_back(Value(child.pid));
          }
          for (const Verdict& v : res.verdicts) {
            shared->push_verdict(v);
            witnesses.push_back(encode_witness(v.witness));
          }
          if (res.successors.empty())
            stop = true;
          else
            ob = std::move(res.successors.back());
          break;
        }
      }
      Value done = vtuple(Value::atom(kDoneTag), Value(eid), Value(ctx.pid()),
                          Value::atom(stop ? kStopAtom : kContAtom),
                          Value(std::move(children)), Value(std::move(witnesses)));
      co_await ctx.send(router, std::move(done));
      if (stop) co_return;
    }
  };
}

Behavior router_behavior(std::shared_ptr<NetworkShared> shared, std::vector<Obligation> initial) {
  return [shared, initial = std::move(initial)](Context& ctx) -> Task<void> {
    Runtime& rt = ctx.runtime();
    std::vector<Pid> live;
    for (const Obligation& ob : initial)
      live.push_back(spawn_child_monitor(rt, shared, ctx.self(), ob).pid);
    shared->census = live.size();

    const Term ev_pat = tagged_pattern("$event", 6);
    const Term init_pat = tagged_pattern("$init", 1);
    std::int64_t eid = 0;

    while (true) {
      ReceiveResult r = co_await ctx.receive(
          clauses(ReceiveClause{ev_pat, nullptr}, ReceiveClause{init_pat, nullptr}));
      if (r.clause == 1) {  // start gate: acknowledge immediately
        Pid sys = *decode_init(r.message);
        co_await ctx.send(ActorRef{sys}, encode_init_ack(sys));
        continue;
      }
      auto em = decode_event_message(r.message);
      assert(em);
      std::int64_t this_eid = eid++;
      shared->events = static_cast<std::uint64_t>(eid);

      bool violated = false;
      if (!live.empty()) {
        Value step_msg = vtuple(Value::atom(kStepTag), Value(this_eid), r.message);
        for (Pid m : live) co_await ctx.send(ActorRef{m}, step_msg);
        // Collect one reply per live submonitor before releasing the ack or
        // dispatching the next event: children spawned while handling event
        // k must see event k+1, and a synchronous violation must withhold.
        std::vector<Pid> next_live = live;
        Term done_pat = done_pattern(this_eid);
        for (std::size_t got = 0; got < live.size(); ++got) {
          ReceiveResult d = co_await ctx.receive_match(done_pat);
          const Tuple& dt = d.message.as_tuple();
          Pid from = dt[2].as_pid();
          bool stop = dt[3].as_atom().name == kStopAtom;
          for (const Value& c : dt[4].as_tuple()) next_live.push_back(c.as_pid());
          if (!dt[5].as_tuple().empty()) violated = true;
          if (stop) std::erase(next_live, from);
        }
        live = std::move(next_live);
        shared->census = live.size();
      }

      if (!em->nonce.null) {
        if (violated) {
          shared->push_ack(AckRecord{em->event.seq, em->nonce, AckRecord::Action::Withheld});
        } else {
          {
            std::unique_lock lk(shared->mu);
            bool fresh =
                shared->acked_nonces.insert({em->nonce.pid.id, em->nonce.counter}).second;
            assert(fresh && "double ack for one nonce");
            (void)fresh;
          }
          co_await ctx.send(ActorRef{em->event.emitter}, encode_ack(em->nonce));
          shared->push_ack(AckRecord{em->event.seq, em->nonce, AckRecord::Action::Acked});
        }
      } else {
        shared->push_ack(AckRecord{em->event.seq, em->nonce, AckRecord::Action::Null});
      }
    }
  };
}

}  // namespace

std::size_t MonitorNetwork::live_submonitors() const { return shared_->census; }

std::vector<Verdict> MonitorNetwork::verdicts() const {
  std::unique_lock lk(shared_->mu);
  return shared_->verdicts;
}

std::vector<AckRecord> MonitorNetwork::ack_log() const {
  std::unique_lock lk(shared_->mu);
  return shared_->acks;
}

std::uint64_t MonitorNetwork::events_handled() const { return shared_->events; }

bool MonitorNetwork::wait_verdicts(std::size_t n, std::uint64_t timeout_ms) const {
  using namespace std::chrono;
  std::unique_lock lk(shared_->mu);
  return shared_->cv.wait_for(lk, milliseconds(timeout_ms),
                              [&] { return shared_->verdicts.size() >= n; });
}

MonitorNetwork start_network(Runtime& rt, const Blueprint& bp, std::string verdict_path) {
  auto shared = std::make_shared<NetworkShared>();
  if (!verdict_path.empty()) shared->verdict_file.open(verdict_path, std::ios::app);
  for (const Substitution& w : bp.start_violation_witnesses) {
    Verdict v;
    v.sync = false;
    v.witness = w;
    shared->push_verdict(std::move(v));
  }
  MonitorNetwork net;
  net.shared_ = shared;
  net.router_ = rt.spawn(router_behavior(shared, bp.initial),
                         SpawnOptions{std::nullopt, /*traced=*/false});
  return net;
}

NetworkRunResult run_monitor_network(const Blueprint& bp, const Trace& trace,
                                     InstrumentationMode mode, const PredicateTable& preds) {
  RuntimeConfig cfg;
  cfg.mode = SchedMode::Deterministic;
  cfg.preds = preds;
  Runtime rt(std::move(cfg));
  MonitorNetwork net = start_network(rt, bp);

  ModeTable table(bp.pattern_modes, mode);
  auto delivered = std::make_shared<std::size_t>(0);
  auto blocked = std::make_shared<bool>(false);
  ActorRef router = net.sink();

  rt.spawn(
      [&bp, &trace, mode, table, delivered, blocked, router](Context& ctx) -> Task<void> {
        for (std::size_t i = 0; i < trace.size(); ++i) {
          EventInstance e = trace[i];
          e.seq = i;
          e.emitter = ctx.pid();
          bool sync_evt = mode == InstrumentationMode::Sync ||
                          (mode == InstrumentationMode::Hybrid && table.decide(e).sync);
          Nonce n = sync_evt ? ctx.fresh_nonce() : Nonce::null_nonce();
          co_await ctx.send(router, encode_event_message(e, n));
          ++*delivered;
          if (sync_evt) {
            *blocked = true;
            co_await ctx.receive_match(ack_pattern(n));
            *blocked = false;
          }
        }
      },
      SpawnOptions{std::nullopt, /*traced=*/false});

  rt.run_until_idle();

  NetworkRunResult out;
  out.verdicts = net.verdicts();
  out.acks = net.ack_log();
  out.live_submonitors = net.live_submonitors();
  out.source_blocked = *blocked;
  out.events_delivered = *delivered;
  return out;
}

}  // namespace rv
