#include "rv/runtime.hpp"

#include <cassert>
#include <chrono>

#include "rv/match.hpp"

namespace rv {

// ---------------------------------------------------------------------
// Actor
// ---------------------------------------------------------------------

struct Actor {
  enum class St { Ready, Running, Waiting, Sleeping, Done };

  Pid pid;
  Runtime* rt = nullptr;
  Context ctx;
  Behavior behavior;

  St state = St::Ready;
  std::deque<Value> mailbox;
  const std::vector<ReceiveClause>* wait_clauses = nullptr;
  std::optional<ReceiveResult> pending_receive;
  std::coroutine_handle<> resume_point;
  ActorBody body{};

  std::uint64_t seq = 0;
  std::uint64_t nonce_counter = 0;
  bool traced = true;
  bool sent_init = false;
  std::exception_ptr error;
};

struct ActorBody::promise_type {
  Actor* actor = nullptr;

  ActorBody get_return_object() {
    return ActorBody{std::coroutine_handle<promise_type>::from_promise(*this)};
  }
  std::suspend_always initial_suspend() noexcept { return {}; }

  struct Final {
    bool await_ready() noexcept { return false; }
    std::coroutine_handle<> await_suspend(std::coroutine_handle<promise_type> h) noexcept {
      Actor* a = h.promise().actor;
      a->rt->on_actor_done(a);
      return std::noop_coroutine();
    }
    void await_resume() noexcept {}
  };
  Final final_suspend() noexcept { return {}; }
  void return_void() {}
  void unhandled_exception() { actor->error = std::current_exception(); }
};

namespace {
ActorBody actor_body_run(Actor* a) { co_await a->behavior(a->ctx); }

// First matching (message, clause) pair: outer loop over messages in arrival
// order, inner loop over clauses.
std::optional<ReceiveResult> scan_mailbox(Actor* a, const std::vector<ReceiveClause>& clauses,
                                          const PredicateTable& preds) {
  for (std::size_t mi = 0; mi < a->mailbox.size(); ++mi) {
    for (std::size_t ci = 0; ci < clauses.size(); ++ci) {
      Substitution s;
      if (!match_term(clauses[ci].pattern, a->mailbox[mi], s)) continue;
      if (clauses[ci].guard && !eval_bool(*clauses[ci].guard, s, preds)) continue;
      ReceiveResult r{ci, std::move(s), std::move(a->mailbox[mi])};
      a->mailbox.erase(a->mailbox.begin() + static_cast<std::ptrdiff_t>(mi));
      return r;
    }
  }
  return std::nullopt;
}

std::optional<ReceiveResult> match_single(const Value& msg,
                                          const std::vector<ReceiveClause>& clauses,
                                          const PredicateTable& preds) {
  for (std::size_t ci = 0; ci < clauses.size(); ++ci) {
    Substitution s;
    if (!match_term(clauses[ci].pattern, msg, s)) continue;
    if (clauses[ci].guard && !eval_bool(*clauses[ci].guard, s, preds)) continue;
    return ReceiveResult{ci, std::move(s), msg};
  }
  return std::nullopt;
}
}  // namespace

// ---------------------------------------------------------------------
// Awaiters
// ---------------------------------------------------------------------

struct ReceiveAwaiter {
  Actor* a;
  std::vector<ReceiveClause> clauses;
  std::optional<ReceiveResult> immediate;

  bool await_ready() const noexcept { return false; }

  bool await_suspend(std::coroutine_handle<> h) {
    Runtime* rt = a->rt;
    std::unique_lock lk(rt->mu_);
    if (auto r = scan_mailbox(a, clauses, rt->cfg_.preds)) {
      immediate = std::move(r);
      a->state = Actor::St::Running;
      return false;  // resume straight away
    }
    a->wait_clauses = &clauses;
    a->resume_point = h;
    a->state = Actor::St::Waiting;
    return true;
  }

  ReceiveResult await_resume() {
    if (immediate) return std::move(*immediate);
    ReceiveResult r = std::move(*a->pending_receive);
    a->pending_receive.reset();
    return r;
  }
};

struct SleepAwaiter {
  Actor* a;
  std::uint64_t us;

  bool await_ready() const noexcept { return us == 0; }

  void await_suspend(std::coroutine_handle<> h) {
    Runtime* rt = a->rt;
    std::unique_lock lk(rt->mu_);
    std::uint64_t deadline;
    {
      // deterministic mode uses the virtual clock, threaded the steady clock
      deadline = rt->now_us() + us;
    }
    a->resume_point = h;
    a->state = Actor::St::Sleeping;
    rt->timers_.push(Runtime::Timer{deadline, rt->timer_order_++, a});
    rt->cv_.notify_all();  // workers must re-evaluate their wait deadline
  }

  void await_resume() const noexcept {}
};

// ---------------------------------------------------------------------
// Runtime
// ---------------------------------------------------------------------

Runtime::Runtime(RuntimeConfig cfg) : cfg_(std::move(cfg)) {}

Runtime::~Runtime() {
  stop();
  for (auto& [_, a] : actors_) {
    if (a->body.handle) a->body.handle.destroy();
  }
}

ActorRef Runtime::spawn(Behavior behavior, SpawnOptions opts) {
  auto a = std::make_unique<Actor>();
  a->rt = this;
  a->behavior = std::move(behavior);
  a->traced = opts.traced;
  a->ctx.rt_ = this;
  a->ctx.actor_ = a.get();
  a->body = actor_body_run(a.get());
  a->body.handle.promise().actor = a.get();
  a->resume_point = a->body.handle;

  Actor* ap = a.get();
  std::unique_lock lk(mu_);
  Pid pid{next_pid_++};
  ap->pid = pid;
  actors_.emplace(pid.id, std::move(a));
  if (opts.name) {
    names_[*opts.name] = pid;
    rev_names_[pid.id] = *opts.name;
  }
  enqueue_ready_locked(ap);
  return ActorRef{pid};
}

void Runtime::post(ActorRef to, Value msg) { raw_send(Pid{0}, to, std::move(msg)); }

void Runtime::register_name(const std::string& name, ActorRef ref) {
  std::unique_lock lk(mu_);
  names_[name] = ref.pid;
  rev_names_[ref.pid.id] = name;
}

std::optional<ActorRef> Runtime::whereis(const std::string& name) const {
  std::unique_lock lk(mu_);
  auto it = names_.find(name);
  if (it == names_.end()) return std::nullopt;
  return ActorRef{it->second};
}

void Runtime::register_function(const std::string& mod, const std::string& fn,
                                std::size_t arity, NativeFn impl) {
  std::unique_lock lk(mu_);
  functions_[mod + ":" + fn + "/" + std::to_string(arity)] = std::move(impl);
}

std::size_t Runtime::add_hook(HookRegistration h) {
  std::unique_lock lk(mu_);
  hooks_.push_back(std::move(h));
  return hooks_.size() - 1;
}

void Runtime::clear_hooks() {
  std::unique_lock lk(mu_);
  hooks_.clear();
}

void Runtime::set_report_sink(std::function<void(const EventInstance&, const Nonce&)> sink) {
  std::unique_lock lk(mu_);
  report_sink_ = std::move(sink);
}

void Runtime::set_send_observer(std::function<void(Pid, Pid, const Value&)> obs) {
  std::unique_lock lk(mu_);
  send_observer_ = std::move(obs);
}

Actor* Runtime::find_actor_locked(Pid p) const {
  auto it = actors_.find(p.id);
  return it == actors_.end() ? nullptr : it->second.get();
}

void Runtime::enqueue_ready_locked(Actor* a) {
  a->state = Actor::St::Ready;
  ready_.push_back(a);
  cv_.notify_one();
}

void Runtime::deliver_locked(Pid from, Actor* to, Value msg) {
  if (to->state == Actor::St::Done) return;  // dead-letter: dropped silently
  if (send_observer_) send_observer_(from, to->pid, msg);
  if (to->state == Actor::St::Waiting && to->wait_clauses) {
    // Everything already in the mailbox has failed these clauses; only the
    // new message can wake the actor.
    if (auto r = match_single(msg, *to->wait_clauses, cfg_.preds)) {
      to->pending_receive = std::move(r);
      to->wait_clauses = nullptr;
      enqueue_ready_locked(to);
      return;
    }
  }
  to->mailbox.push_back(std::move(msg));
}

void Runtime::raw_send(Pid from, ActorRef to, Value msg) {
  std::unique_lock lk(mu_);
  Actor* a = find_actor_locked(to.pid);
  if (!a) return;
  deliver_locked(from, a, std::move(msg));
}

void Runtime::on_actor_done(Actor* a) {
  std::unique_lock lk(mu_);
  a->state = Actor::St::Done;
  cv_.notify_all();
}

Value Runtime::subject_for_locked(Pid p) const {
  auto it = rev_names_.find(p.id);
  if (it != rev_names_.end()) return Value::atom(it->second);
  return Value(p);
}

std::uint64_t Runtime::now_us() const {
  if (cfg_.mode == SchedMode::Deterministic) return virtual_now_us_;
  using namespace std::chrono;
  static const steady_clock::time_point epoch = steady_clock::now();
  return static_cast<std::uint64_t>(duration_cast<microseconds>(steady_clock::now() - epoch).count());
}

bool Runtime::pump_timers_locked() {
  bool moved = false;
  std::uint64_t now = now_us();
  while (!timers_.empty() && timers_.top().deadline_us <= now) {
    Actor* a = timers_.top().actor;
    timers_.pop();
    if (a->state == Actor::St::Sleeping) {
      enqueue_ready_locked(a);
      moved = true;
    }
  }
  return moved;
}

std::uint64_t Runtime::run_until_idle(std::uint64_t max_steps) {
  assert(cfg_.mode == SchedMode::Deterministic);
  std::uint64_t steps = 0;
  std::unique_lock lk(mu_);
  while (steps < max_steps) {
    if (!ready_.empty()) {
      Actor* a = ready_.front();
      ready_.pop_front();
      a->state = Actor::St::Running;
      lk.unlock();
      a->resume_point.resume();
      lk.lock();
      ++steps;
      continue;
    }
    if (!timers_.empty()) {
      virtual_now_us_ = std::max(virtual_now_us_, timers_.top().deadline_us);
      pump_timers_locked();
      continue;
    }
    break;
  }
  return steps;
}

void Runtime::start() {
  assert(cfg_.mode == SchedMode::Threaded);
  std::unique_lock lk(mu_);
  stopping_ = false;
  if (!workers_.empty()) return;
  for (unsigned i = 0; i < cfg_.workers; ++i)
    workers_.emplace_back([this] { worker_loop(); });
}

void Runtime::stop() {
  {
    std::unique_lock lk(mu_);
    stopping_ = true;
    cv_.notify_all();
  }
  for (auto& t : workers_) t.join();
  workers_.clear();
}

void Runtime::worker_loop() {
  std::unique_lock lk(mu_);
  while (true) {
    if (stopping_) return;
    if (!ready_.empty()) {
      Actor* a = ready_.front();
      ready_.pop_front();
      a->state = Actor::St::Running;
      ++running_;
      lk.unlock();
      a->resume_point.resume();
      lk.lock();
      --running_;
      cv_.notify_all();
      continue;
    }
    if (pump_timers_locked()) continue;
    if (!timers_.empty()) {
      using namespace std::chrono;
      std::uint64_t now = now_us();
      std::uint64_t top = timers_.top().deadline_us;
      if (top <= now) continue;
      cv_.wait_for(lk, microseconds(top - now));
      continue;
    }
    cv_.wait(lk);
  }
}

bool Runtime::wait_idle(std::uint64_t timeout_ms) {
  using namespace std::chrono;
  auto deadline = steady_clock::now() + milliseconds(timeout_ms);
  std::unique_lock lk(mu_);
  while (true) {
    if (ready_.empty() && running_ == 0 && timers_.empty()) return true;
    if (cv_.wait_until(lk, deadline) == std::cv_status::timeout)
      return ready_.empty() && running_ == 0 && timers_.empty();
  }
}

bool Runtime::is_done(ActorRef ar) const {
  std::unique_lock lk(mu_);
  Actor* a = find_actor_locked(ar.pid);
  return !a || a->state == Actor::St::Done;
}

std::exception_ptr Runtime::actor_error(ActorRef ar) const {
  std::unique_lock lk(mu_);
  Actor* a = find_actor_locked(ar.pid);
  return a ? a->error : nullptr;
}

std::size_t Runtime::live_actor_count() const {
  std::unique_lock lk(mu_);
  std::size_t n = 0;
  for (const auto& [_, a] : actors_)
    if (a->state != Actor::St::Done) ++n;
  return n;
}

// ---------------------------------------------------------------------
// Context
// ---------------------------------------------------------------------

ActorRef Context::self() const { return ActorRef{actor_->pid}; }
Pid Context::pid() const { return actor_->pid; }

Value Context::self_subject() const {
  std::unique_lock lk(rt_->mu_);
  return rt_->subject_for_locked(actor_->pid);
}

namespace {
struct HookTodo {
  ActorRef sink;
  bool sync;
  bool gate;
};
}  // namespace

Task<void> Context::emit_hooks(EventInstance ev) {
  std::vector<HookTodo> todo;
  std::function<void(const EventInstance&, const Nonce&)> sink_fn;
  {
    std::unique_lock lk(rt_->mu_);
    for (const auto& h : rt_->hooks_) {
      if (!h.kinds.count(ev.kind)) continue;
      if (h.emitters && !h.emitters->count(actor_->pid)) continue;
      HookDecision d = h.decide ? h.decide(ev) : HookDecision{true, false};
      if (!d.report) continue;
      todo.push_back(HookTodo{h.sink, d.sync, h.sync_start_gate});
    }
    sink_fn = rt_->report_sink_;
  }
  for (const HookTodo& t : todo) {
    if (t.sync) {
      if (t.gate && !actor_->sent_init) {
        actor_->sent_init = true;
        rt_->raw_send(actor_->pid, t.sink, encode_init(actor_->pid));
        std::vector<ReceiveClause> gate_clauses;
        gate_clauses.push_back(ReceiveClause{init_ack_pattern(actor_->pid), nullptr});
        co_await receive_raw(std::move(gate_clauses));
      }
      Nonce n = fresh_nonce();
      if (sink_fn) sink_fn(ev, n);
      rt_->raw_send(actor_->pid, t.sink, encode_event_message(ev, n));
      // Block until exactly this nonce is acknowledged; any other mailbox
      // traffic is left in place.
      std::vector<ReceiveClause> ack_clauses;
      ack_clauses.push_back(ReceiveClause{ack_pattern(n), nullptr});
      co_await receive_raw(std::move(ack_clauses));
    } else {
      Nonce n = Nonce::null_nonce();
      if (sink_fn) sink_fn(ev, n);
      rt_->raw_send(actor_->pid, t.sink, encode_event_message(ev, n));
    }
  }
}

namespace {
bool hook_possible(Runtime& rt, std::mutex& mu, const std::vector<HookRegistration>& hooks,
                   ActionKind kind, Pid pid) {
  (void)rt;
  std::unique_lock lk(mu);
  for (const auto& h : hooks) {
    if (!h.kinds.count(kind)) continue;
    if (h.emitters && !h.emitters->count(pid)) continue;
    return true;
  }
  return false;
}
}  // namespace

Task<void> Context::send(ActorRef to, Value msg) {
  if (actor_->traced && hook_possible(*rt_, rt_->mu_, rt_->hooks_, ActionKind::Output, actor_->pid)) {
    Value subject;
    {
      std::unique_lock lk(rt_->mu_);
      subject = rt_->subject_for_locked(to.pid);
    }
    EventInstance ev = EventInstance::output(std::move(subject), msg);
    ev.emitter = actor_->pid;
    ev.seq = actor_->seq++;
    co_await emit_hooks(std::move(ev));
  }
  rt_->raw_send(actor_->pid, to, std::move(msg));
}

Task<ReceiveResult> Context::receive_raw(std::vector<ReceiveClause> clauses) {
  co_return co_await ReceiveAwaiter{actor_, std::move(clauses), std::nullopt};
}

Task<ReceiveResult> Context::receive(std::vector<ReceiveClause> clauses) {
  ReceiveResult r = co_await receive_raw(std::move(clauses));
  if (actor_->traced && hook_possible(*rt_, rt_->mu_, rt_->hooks_, ActionKind::Input, actor_->pid)) {
    EventInstance ev = EventInstance::input(self_subject(), r.message);
    ev.emitter = actor_->pid;
    ev.seq = actor_->seq++;
    co_await emit_hooks(std::move(ev));
  }
  co_return r;
}

Task<ReceiveResult> Context::receive_match(Term pattern) {
  return receive(std::vector<ReceiveClause>{ReceiveClause{std::move(pattern), nullptr}});
}

Task<Value> Context::call(const std::string& mod, const std::string& fn,
                          std::vector<Value> args) {
  Runtime::NativeFn impl;
  {
    std::unique_lock lk(rt_->mu_);
    auto it = rt_->functions_.find(mod + ":" + fn + "/" + std::to_string(args.size()));
    if (it == rt_->functions_.end())
      throw RuntimeError("unknown function " + mod + ":" + fn + "/" +
                         std::to_string(args.size()));
    impl = it->second;
  }
  bool traced = actor_->traced;
  if (traced && hook_possible(*rt_, rt_->mu_, rt_->hooks_, ActionKind::Call, actor_->pid)) {
    EventInstance ev = EventInstance::call(self_subject(), mod, fn, args);
    ev.emitter = actor_->pid;
    ev.seq = actor_->seq++;
    co_await emit_hooks(std::move(ev));
  }
  Value result = impl(args);
  if (traced && hook_possible(*rt_, rt_->mu_, rt_->hooks_, ActionKind::Return, actor_->pid)) {
    EventInstance ev = EventInstance::ret(self_subject(), mod, fn, args.size(), result);
    ev.emitter = actor_->pid;
    ev.seq = actor_->seq++;
    co_await emit_hooks(std::move(ev));
  }
  co_return result;
}

Task<void> Context::sleep_us(std::uint64_t us) { co_await SleepAwaiter{actor_, us}; }

ActorRef Context::spawn(Behavior behavior, SpawnOptions opts) {
  return rt_->spawn(std::move(behavior), std::move(opts));
}

Nonce Context::fresh_nonce() { return Nonce::fresh(actor_->pid, ++actor_->nonce_counter); }

}  // namespace rv
