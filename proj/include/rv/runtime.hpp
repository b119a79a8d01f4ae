#pragma once

#include <atomic>
#include <condition_variable>
#include <coroutine>
#include <cstdint>
#include <deque>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "rv/boolexpr.hpp"
#include "rv/substitution.hpp"
#include "rv/term.hpp"
#include "rv/wire.hpp"

namespace rv {

struct RuntimeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------
// Coroutine task plumbing
// ---------------------------------------------------------------------

struct TaskFinalAwaiter {
  bool await_ready() noexcept { return false; }
  template <typename P>
  std::coroutine_handle<> await_suspend(std::coroutine_handle<P> h) noexcept {
    auto cont = h.promise().continuation;
    return cont ? cont : std::noop_coroutine();
  }
  void await_resume() noexcept {}
};

/// Lazily-started awaitable coroutine with symmetric transfer back to the
/// awaiting frame. Actor behaviours and all blocking context operations are
/// Tasks; suspension bottoms out in the scheduler's primitive awaiters.
template <typename T>
class [[nodiscard]] Task {
 public:
  struct promise_type {
    std::coroutine_handle<> continuation;
    std::optional<T> value;
    std::exception_ptr error;

    Task get_return_object() {
      return Task(std::coroutine_handle<promise_type>::from_promise(*this));
    }
    std::suspend_always initial_suspend() noexcept { return {}; }
    TaskFinalAwaiter final_suspend() noexcept { return {}; }
    void return_value(T v) { value = std::move(v); }
    void unhandled_exception() { error = std::current_exception(); }
  };

  Task() = default;
  explicit Task(std::coroutine_handle<promise_type> h) : h_(h) {}
  Task(Task&& o) noexcept : h_(o.h_) { o.h_ = {}; }
  Task& operator=(Task&& o) noexcept {
    if (this != &o) {
      if (h_) h_.destroy();
      h_ = o.h_;
      o.h_ = {};
    }
    return *this;
  }
  Task(const Task&) = delete;
  Task& operator=(const Task&) = delete;
  ~Task() {
    if (h_) h_.destroy();
  }

  bool await_ready() const noexcept { return false; }
  std::coroutine_handle<> await_suspend(std::coroutine_handle<> cont) noexcept {
    h_.promise().continuation = cont;
    return h_;
  }
  T await_resume() {
    if (h_.promise().error) std::rethrow_exception(h_.promise().error);
    return std::move(*h_.promise().value);
  }

 private:
  std::coroutine_handle<promise_type> h_;
};

template <>
class [[nodiscard]] Task<void> {
 public:
  struct promise_type {
    std::coroutine_handle<> continuation;
    std::exception_ptr error;

    Task get_return_object() {
      return Task(std::coroutine_handle<promise_type>::from_promise(*this));
    }
    std::suspend_always initial_suspend() noexcept { return {}; }
    TaskFinalAwaiter final_suspend() noexcept { return {}; }
    void return_void() {}
    void unhandled_exception() { error = std::current_exception(); }
  };

  Task() = default;
  explicit Task(std::coroutine_handle<promise_type> h) : h_(h) {}
  Task(Task&& o) noexcept : h_(o.h_) { o.h_ = {}; }
  Task& operator=(Task&& o) noexcept {
    if (this != &o) {
      if (h_) h_.destroy();
      h_ = o.h_;
      o.h_ = {};
    }
    return *this;
  }
  Task(const Task&) = delete;
  Task& operator=(const Task&) = delete;
  ~Task() {
    if (h_) h_.destroy();
  }

  bool await_ready() const noexcept { return false; }
  std::coroutine_handle<> await_suspend(std::coroutine_handle<> cont) noexcept {
    h_.promise().continuation = cont;
    return h_;
  }
  void await_resume() {
    if (h_.promise().error) std::rethrow_exception(h_.promise().error);
  }

 private:
  std::coroutine_handle<promise_type> h_;
};

class Runtime;
class Context;
struct Actor;

/// Root coroutine of an actor; completion and escaped exceptions are
/// recorded on the actor.
struct ActorBody {
  struct promise_type;
  std::coroutine_handle<promise_type> handle;
};

struct ActorRef {
  Pid pid;
  friend bool operator==(ActorRef, ActorRef) = default;
  friend auto operator<=>(ActorRef, ActorRef) = default;
};

using Behavior = std::function<Task<void>(Context&)>;

/// One alternative of a selective receive: pattern plus optional guard over
/// the pattern's bindings. The first matching (message, clause) pair fires.
struct ReceiveClause {
  Term pattern;
  BoolPtr guard;  // may be null
};

struct ReceiveResult {
  std::size_t clause = 0;
  Substitution bindings;
  Value message;
};

/// Variadic clause-list builder (friendlier to coroutine bodies than brace
/// lists, which trip older compilers inside co_await expressions).
template <typename... Cs>
std::vector<ReceiveClause> clauses(Cs&&... cs) {
  std::vector<ReceiveClause> v;
  v.reserve(sizeof...(cs));
  (v.push_back(std::forward<Cs>(cs)), ...);
  return v;
}

/// Per-event decision made by the instrumentation layer.
struct HookDecision {
  bool report = false;
  bool sync = false;
};

/// Interposition registration: which event kinds and emitters to observe,
/// how to decide reporting/synchrony per event, and where reports go.
struct HookRegistration {
  std::set<ActionKind> kinds;
  std::optional<std::set<Pid>> emitters;  // nullopt: every traced actor
  std::function<HookDecision(const EventInstance&)> decide;
  ActorRef sink;
  bool sync_start_gate = false;  // fully synchronous mode: handshake before first event
};

enum class SchedMode { Deterministic, Threaded };

struct RuntimeConfig {
  SchedMode mode = SchedMode::Deterministic;
  unsigned workers = 2;
  PredicateTable preds;
};

struct SpawnOptions {
  std::optional<std::string> name;  // registered atom name
  bool traced = true;
};

// ---------------------------------------------------------------------
// Runtime
// ---------------------------------------------------------------------

class Runtime {
 public:
  explicit Runtime(RuntimeConfig cfg = {});
  ~Runtime();
  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  ActorRef spawn(Behavior behavior, SpawnOptions opts = {});

  /// Fire-and-forget delivery from outside any actor (tests, drivers).
  void post(ActorRef to, Value msg);

  void register_name(const std::string& name, ActorRef ref);
  std::optional<ActorRef> whereis(const std::string& name) const;

  using NativeFn = std::function<Value(std::span<const Value>)>;
  void register_function(const std::string& mod, const std::string& fn, std::size_t arity,
                         NativeFn impl);

  std::size_t add_hook(HookRegistration h);
  void clear_hooks();

  /// Every reported event, with its nonce (trace dumps, wire dumps).
  void set_report_sink(std::function<void(const EventInstance&, const Nonce&)> sink);

  /// Observes every successful raw delivery (msg audits in tests). Must not
  /// call back into the runtime.
  void set_send_observer(std::function<void(Pid from, Pid to, const Value&)> obs);

  // Deterministic mode: drives the system until no actor is runnable and no
  // virtual timer is pending. Returns the number of resumptions.
  std::uint64_t run_until_idle(std::uint64_t max_steps = UINT64_MAX);

  // Threaded mode.
  void start();
  void stop();
  bool wait_idle(std::uint64_t timeout_ms);

  bool is_done(ActorRef a) const;
  std::exception_ptr actor_error(ActorRef a) const;
  std::size_t live_actor_count() const;

  const PredicateTable& preds() const { return cfg_.preds; }
  SchedMode mode() const { return cfg_.mode; }

  /// Virtual microseconds in deterministic mode, steady-clock in threaded.
  std::uint64_t now_us() const;

 private:
  friend class Context;
  friend struct ActorBody;
  friend struct ReceiveAwaiter;
  friend struct SleepAwaiter;

  struct Timer {
    std::uint64_t deadline_us;
    std::uint64_t order;
    Actor* actor;
    bool operator>(const Timer& o) const {
      return std::tie(deadline_us, order) > std::tie(o.deadline_us, o.order);
    }
  };

  Actor* find_actor_locked(Pid p) const;
  void enqueue_ready_locked(Actor* a);
  void deliver_locked(Pid from, Actor* to, Value msg);
  void raw_send(Pid from, ActorRef to, Value msg);
  void on_actor_done(Actor* a);
  Value subject_for_locked(Pid p) const;
  void worker_loop();
  void step_one(Actor* a);
  bool pump_timers_locked();  // move due timers to the ready queue

  RuntimeConfig cfg_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<std::uint64_t, std::unique_ptr<Actor>> actors_;
  std::deque<Actor*> ready_;
  std::priority_queue<Timer, std::vector<Timer>, std::greater<>> timers_;
  std::map<std::string, Pid> names_;
  std::map<std::uint64_t, std::string> rev_names_;
  std::vector<HookRegistration> hooks_;
  std::map<std::string, NativeFn> functions_;
  std::function<void(const EventInstance&, const Nonce&)> report_sink_;
  std::function<void(Pid, Pid, const Value&)> send_observer_;
  std::vector<std::thread> workers_;
  bool stopping_ = false;
  unsigned running_ = 0;
  std::uint64_t next_pid_ = 1;
  std::uint64_t timer_order_ = 0;
  std::uint64_t virtual_now_us_ = 0;
};

// ---------------------------------------------------------------------
// Actor context: the API visible to behaviours
// ---------------------------------------------------------------------

class Context {
 public:
  ActorRef self() const;
  Pid pid() const;

  /// Asynchronous send; the output hook fires (per its mode) before the
  /// message is enqueued, so a withheld acknowledgement stops the send.
  Task<void> send(ActorRef to, Value msg);

  /// Selective receive: first message (in arrival order) matching any clause
  /// (in clause order, guard included) is removed, possibly out of order;
  /// blocks until one exists. The input hook fires before this returns.
  Task<ReceiveResult> receive(std::vector<ReceiveClause> clauses);
  Task<ReceiveResult> receive_match(Term pattern);  // single-clause shorthand

  /// Invokes a registered module function with call/return interposition.
  Task<Value> call(const std::string& mod, const std::string& fn, std::vector<Value> args);

  Task<void> sleep_us(std::uint64_t us);

  ActorRef spawn(Behavior behavior, SpawnOptions opts = {});

  Nonce fresh_nonce();

  Runtime& runtime() { return *rt_; }

 private:
  friend class Runtime;
  friend struct ActorBody;
  Task<void> emit_hooks(EventInstance ev);
  Task<ReceiveResult> receive_raw(std::vector<ReceiveClause> clauses);
  Value self_subject() const;

  Runtime* rt_ = nullptr;
  Actor* actor_ = nullptr;
};

}  // namespace rv
