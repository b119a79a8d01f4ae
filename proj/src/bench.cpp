#include "rv/bench.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "rv/parser.hpp"

namespace rv::bench {

namespace detail {
std::atomic<std::uint64_t> g_alloc_bytes{0};
}

// ---------------------------------------------------------------------
// isMalicious
// ---------------------------------------------------------------------

bool is_malicious(std::span<const Value> headers, const MaliciousRules& rules) {
  for (const Value& h : headers) {
    if (!h.is_string()) continue;
    const std::string& s = h.as_string();
    for (const std::string& needle : rules.substrings)
      if (!needle.empty() && s.find(needle) != std::string::npos) return true;
    for (const std::string& agent : rules.agent_blacklist)
      if (!agent.empty() && s.find(agent) != std::string::npos) return true;
  }
  return false;
}

void register_predicates(PredicateTable& preds, MaliciousRules rules) {
  preds.add("isMalicious", 6, [rules = std::move(rules)](std::span<const Value> args) {
    return is_malicious(args, rules);
  });
}

// ---------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------

namespace {

const std::string kEq7 = R"(# succ-server request/response correctness
max X. [server ? {succ, X1, Y}] [Y ! Z]
  ((if Z = X1+1 then X) & (if Z != X1+1 then ff))
)";

const std::string kEx3 = R"(# succ-server correctness; over-by-one answers detected synchronously
max X. [server ? {succ, X1, Y}] [Y ! Z]
  ((if Z = X1+1 then X) & (if Z < X1+1 then ff) & (if Z > X1+1 then sff))
)";

const std::string kEq5 = R"(# webserver header safety, asynchronous violations
max X. [acceptor ! {HandID, next, _}]
 (X &
  max Y.
   [ret HandID yaws:do_recv/3 = {ok, {http_req, 'GET', _, _}}]
   [ret HandID yaws:do_recv/3 = {ok, {http_header, 1, H1}}]
   [ret HandID yaws:do_recv/3 = {ok, {http_header, 2, H2}}]
   [ret HandID yaws:do_recv/3 = {ok, {http_header, 3, H3}}]
   [ret HandID yaws:do_recv/3 = {ok, {http_header, 4, H4}}]
   [ret HandID yaws:do_recv/3 = {ok, {http_header, 5, H5}}]
   [ret HandID yaws:do_recv/3 = {ok, {http_header, 6, H6}}]
   ((if isMalicious(H1, H2, H3, H4, H5, H6) then ff)
    & (if not isMalicious(H1, H2, H3, H4, H5, H6) then
        [ret HandID yaws:do_recv/3 = {ok, http_eoh}] Y)))
)";

const std::string kEq6 = R"(# webserver header safety; violations block the offending handler
max X. [| acceptor ! {HandID, next, _} |]
 (X &
  max Y.
   [ret HandID yaws:do_recv/3 = {ok, {http_req, 'GET', _, _}}]
   [ret HandID yaws:do_recv/3 = {ok, {http_header, 1, H1}}]
   [ret HandID yaws:do_recv/3 = {ok, {http_header, 2, H2}}]
   [ret HandID yaws:do_recv/3 = {ok, {http_header, 3, H3}}]
   [ret HandID yaws:do_recv/3 = {ok, {http_header, 4, H4}}]
   [ret HandID yaws:do_recv/3 = {ok, {http_header, 5, H5}}]
   [ret HandID yaws:do_recv/3 = {ok, {http_header, 6, H6}}]
   ((if isMalicious(H1, H2, H3, H4, H5, H6) then sff)
    & (if not isMalicious(H1, H2, H3, H4, H5, H6) then
        [ret HandID yaws:do_recv/3 = {ok, http_eoh}] Y)))
)";

}  // namespace

const std::string& preset_formula(const std::string& name) {
  if (name == "eq5") return kEq5;
  if (name == "eq6") return kEq6;
  if (name == "eq7") return kEq7;
  if (name == "ex3") return kEx3;
  throw std::runtime_error("unknown preset " + name);
}

std::vector<std::string> preset_names() { return {"eq5", "eq6", "eq7", "ex3"}; }

// ---------------------------------------------------------------------
// Webserver workload
// ---------------------------------------------------------------------

namespace {

Value atom(const char* s) { return Value::atom(s); }

Term tpl(Term::TupleT parts) { return Term::tuple(std::move(parts)); }

bool is_http_req(const Value& v) {
  return v.is_tuple() && v.as_tuple().size() == 4 && v.as_tuple()[0] == atom("http_req");
}

bool is_header(const Value& v, int idx) {
  if (!v.is_tuple() || v.as_tuple().size() != 3) return false;
  const Tuple& t = v.as_tuple();
  return t[0] == atom("http_header") && t[1] == Value(idx);
}

Behavior handler_behavior(ActorRef port, ActorRef acceptor, ServerConfig cfg,
                          std::shared_ptr<ServerStats> stats);

Term notify_pattern() { return tpl({Term::var("H"), Term::atom("next"), Term::var("P")}); }
Term connect_pattern() {
  return tpl({Term::atom("connect"), Term::var("C"), Term::var("P")});
}
Term free_pattern() { return tpl({Term::atom("free_handler"), Term::var("H")}); }
Term assigned_pattern() { return tpl({Term::atom("assigned"), Term::var("H")}); }
Term response_pattern() {
  return tpl({Term::atom("response"), Term::var("C"), Term::var("B")});
}
Term error_response_pattern() { return tpl({Term::atom("error_response"), Term::var("C")}); }
Term succ_request_pattern() {
  return tpl({Term::atom("succ"), Term::var("X"), Term::var("C")});
}

Behavior acceptor_behavior(ActorRef port, ServerConfig cfg, std::shared_ptr<ServerStats> stats) {
  return [port, cfg, stats](Context& ctx) -> Task<void> {
    ctx.spawn(handler_behavior(port, ctx.self(), cfg, stats));
    const Term notify_pat = notify_pattern();
    while (true) {
      ReceiveResult r = co_await ctx.receive_match(notify_pat);
      stats->acceptor_notifications++;
      {
        std::unique_lock lk(stats->mu);
        stats->assigned_handlers.insert(r.bindings.lookup("H")->as_pid().id);
      }
      ctx.spawn(handler_behavior(port, ctx.self(), cfg, stats));
    }
  };
}

Behavior handler_behavior(ActorRef port, ActorRef acceptor, ServerConfig cfg,
                          std::shared_ptr<ServerStats> stats) {
  return [port, acceptor, cfg, stats](Context& ctx) -> Task<void> {
    stats->handlers_spawned++;
    co_await ctx.send(port, vtuple(atom("free_handler"), Value(ctx.pid())));

    ReceiveResult conn = co_await ctx.receive_match(connect_pattern());
    ActorRef client{conn.bindings.lookup("C")->as_pid()};
    Value portno = *conn.bindings.lookup("P");

    // Step (2) of the connection protocol: tell the acceptor this handler is
    // engaged; the acceptor spawns the next free handler.
    co_await ctx.send(acceptor, vtuple(Value(ctx.pid()), atom("next"), portno));
    co_await ctx.send(client, vtuple(atom("assigned"), Value(ctx.pid())));

    auto do_recv = [&ctx](Value msg) -> Task<Value> {
      return ctx.call("yaws", "do_recv",
                      {atom("listen_socket"), std::move(msg), atom("infinity")});
    };
    const Term any_pat = Term::var("M");

    while (true) {
      ReceiveResult m = co_await ctx.receive(
          clauses(ReceiveClause{Term::atom("disconnect"), nullptr},
                  ReceiveClause{any_pat, nullptr}));
      if (m.clause == 0) co_return;
      co_await do_recv(m.message);
      if (!is_http_req(m.message)) {
        stats->error_responses++;
        co_await ctx.send(client, vtuple(atom("error_response"), Value(400)));
        continue;
      }
      bool malformed = false;
      for (int i = 1; i <= 6 && !malformed; ++i) {
        ReceiveResult hm = co_await ctx.receive_match(any_pat);
        co_await do_recv(hm.message);
        if (!is_header(hm.message, i)) malformed = true;
      }
      if (!malformed) {
        // Any instruction past the sixth header's return event counts; a
        // handler blocked at that event must never get here.
        stats->steps_after_last_header++;
        ReceiveResult em = co_await ctx.receive_match(any_pat);
        co_await do_recv(em.message);
        if (!(em.message == atom("http_eoh"))) malformed = true;
        else stats->steps_after_last_header++;
      }
      if (malformed) {
        stats->error_responses++;
        co_await ctx.send(client, vtuple(atom("error_response"), Value(400)));
        continue;
      }
      if (cfg.service_delay_us) co_await ctx.sleep_us(cfg.service_delay_us);
      co_await ctx.send(client, vtuple(atom("response"), Value(200), Value("ok")));
      stats->responses++;
      stats->steps_after_last_header++;
    }
  };
}

// Stands in for the TCP listen socket: routes each connect to exactly one
// free handler, queueing connects while none is available.
Behavior port_behavior() {
  return [](Context& ctx) -> Task<void> {
    std::optional<Pid> free_handler;
    std::deque<Value> pending;
    const Term free_pat = free_pattern();
    const Term conn_pat = connect_pattern();
    while (true) {
      ReceiveResult r = co_await ctx.receive(
          clauses(ReceiveClause{free_pat, nullptr}, ReceiveClause{conn_pat, nullptr}));
      if (r.clause == 0) {
        Pid h = r.bindings.lookup("H")->as_pid();
        if (!pending.empty()) {
          co_await ctx.send(ActorRef{h}, std::move(pending.front()));
          pending.pop_front();
        } else {
          free_handler = h;
        }
      } else {
        if (free_handler) {
          co_await ctx.send(ActorRef{*free_handler}, r.message);
          free_handler.reset();
        } else {
          pending.push_back(r.message);
        }
      }
    }
  };
}

}  // namespace

ServerHandle start_server(Runtime& rt, ServerConfig cfg) {
  ServerHandle h;
  h.stats = std::make_shared<ServerStats>();
  rt.register_function("yaws", "do_recv", 3, [](std::span<const Value> args) {
    return Value::tuple({Value::atom("ok"), args[1]});
  });
  h.port = rt.spawn(port_behavior(), SpawnOptions{std::nullopt, /*traced=*/false});
  h.acceptor = rt.spawn(acceptor_behavior(h.port, cfg, h.stats),
                        SpawnOptions{std::string("acceptor"), /*traced=*/true});
  return h;
}

std::vector<Value> request_script(bool malicious, int request_idx) {
  std::vector<Value> script;
  script.push_back(Value::tuple(
      {atom("http_req"), atom("GET"), Value("/index/" + std::to_string(request_idx)),
       atom("http_1_1")}));
  const char* benign[6] = {
      "Host: localhost",        "User-Agent: rv-client", "Accept: */*",
      "Accept-Encoding: gzip",  "Connection: Keep-Alive", "Cache-Control: no-cache"};
  for (int i = 0; i < 6; ++i) {
    std::string value = benign[i];
    if (malicious && i == 3) value = "Accept-Encoding: ../../etc/passwd";
    script.push_back(Value::tuple({atom("http_header"), Value(i + 1), Value(value)}));
  }
  script.push_back(atom("http_eoh"));
  return script;
}

bool ClientResults::wait_done(std::size_t n, std::uint64_t timeout_ms) {
  using namespace std::chrono;
  std::unique_lock lk(mu);
  return cv.wait_for(lk, milliseconds(timeout_ms), [&] { return done_clients >= n; });
}

void spawn_clients(Runtime& rt, const ServerHandle& server, const ServerConfig& cfg,
                   std::shared_ptr<ClientResults> results) {
  using namespace std::chrono;
  for (std::size_t c = 0; c < cfg.clients; ++c) {
    bool malicious = c < cfg.malicious_clients;
    ActorRef port = server.port;
    std::size_t requests = cfg.requests_per_client;
    rt.spawn(
        [port, malicious, requests, results, c](Context& ctx) -> Task<void> {
          co_await ctx.send(port, Value::tuple({atom("connect"), Value(ctx.pid()),
                                                Value(static_cast<std::int64_t>(c))}));
          ReceiveResult a = co_await ctx.receive({ReceiveClause{
              tpl({Term::atom("assigned"), Term::var("H")}), nullptr}});
          ActorRef handler{a.bindings.lookup("H")->as_pid()};
          for (std::size_t r = 0; r < requests; ++r) {
            auto t0 = steady_clock::now();
            for (Value& v : request_script(malicious, static_cast<int>(r)))
              co_await ctx.send(handler, std::move(v));
            ReceiveResult resp = co_await ctx.receive(
                {ReceiveClause{tpl({Term::atom("response"), Term::var("C"), Term::var("B")}),
                               nullptr},
                 ReceiveClause{tpl({Term::atom("error_response"), Term::var("C")}), nullptr}});
            auto us = duration_cast<microseconds>(steady_clock::now() - t0).count();
            std::unique_lock lk(results->mu);
            results->latencies_us.push_back(static_cast<std::uint64_t>(us));
            results->responses.push_back(resp.message);
          }
          co_await ctx.send(handler, atom("disconnect"));
          {
            std::unique_lock lk(results->mu);
            results->done_clients++;
          }
          results->cv.notify_all();
        },
        SpawnOptions{std::nullopt, /*traced=*/false});
  }
}

// ---------------------------------------------------------------------
// Succ workload
// ---------------------------------------------------------------------

ActorRef start_succ_server(Runtime& rt, SuccAnswer answer) {
  return rt.spawn(
      [answer](Context& ctx) -> Task<void> {
        const Term pat = tpl({Term::atom("succ"), Term::var("X"), Term::var("C")});
        while (true) {
          ReceiveResult r = co_await ctx.receive({ReceiveClause{pat, nullptr}});
          std::int64_t x = r.bindings.lookup("X")->as_int();
          std::int64_t z = x + 1;
          if (answer == SuccAnswer::TooBig) z = x + 2;
          if (answer == SuccAnswer::TooSmall) z = x - 1;
          ActorRef client{r.bindings.lookup("C")->as_pid()};
          co_await ctx.send(client, Value(z));
        }
      },
      SpawnOptions{std::string("server"), /*traced=*/true});
}

void spawn_succ_clients(Runtime& rt, std::size_t clients, std::size_t requests,
                        std::shared_ptr<ClientResults> results) {
  using namespace std::chrono;
  for (std::size_t c = 0; c < clients; ++c) {
    rt.spawn(
        [requests, results, c](Context& ctx) -> Task<void> {
          auto server = ctx.runtime().whereis("server");
          for (std::size_t r = 0; r < requests; ++r) {
            auto t0 = steady_clock::now();
            co_await ctx.send(*server,
                              Value::tuple({atom("succ"),
                                            Value(static_cast<std::int64_t>(c * 1000 + r)),
                                            Value(ctx.pid())}));
            ReceiveResult resp =
                co_await ctx.receive({ReceiveClause{Term::var("Z"), nullptr}});
            auto us = duration_cast<microseconds>(steady_clock::now() - t0).count();
            std::unique_lock lk(results->mu);
            results->latencies_us.push_back(static_cast<std::uint64_t>(us));
            results->responses.push_back(resp.message);
          }
          {
            std::unique_lock lk(results->mu);
            results->done_clients++;
          }
          results->cv.notify_all();
        },
        SpawnOptions{std::nullopt, /*traced=*/false});
  }
}

// ---------------------------------------------------------------------
// Benchmark harness
// ---------------------------------------------------------------------

namespace {

InstrumentationMode parse_mode(const std::string& m) {
  if (m == "async") return InstrumentationMode::Async;
  if (m == "sync") return InstrumentationMode::Sync;
  if (m == "hybrid") return InstrumentationMode::Hybrid;
  throw std::runtime_error("unknown instrumentation mode " + m);
}

struct RunOutcome {
  std::vector<std::uint64_t> latencies;
  double cpu_ms = 0;
  std::uint64_t alloc = 0;
  std::size_t violations = 0;
};

RunOutcome run_once(const FormulaPtr& marked, const std::string& mode,
                    const BenchConfig& cfg, std::size_t clients) {
  RuntimeConfig rc;
  rc.mode = SchedMode::Threaded;
  rc.workers = cfg.workers;
  register_predicates(rc.preds);
  Runtime rt(std::move(rc));

  std::optional<MonitorNetwork> net;
  Blueprint bp;
  if (mode != "none") {
    bp = synthesize(marked, rt.preds());
    net = start_network(rt, bp);
    instrument(rt, marked, parse_mode(mode), net->sink());
  }

  auto results = std::make_shared<ClientResults>();
  if (cfg.workload == "succ") {
    start_succ_server(rt, SuccAnswer::Correct);
    spawn_succ_clients(rt, clients, cfg.requests, results);
  } else {
    ServerConfig scfg;
    scfg.service_delay_us = cfg.service_delay_us;
    scfg.clients = clients;
    scfg.requests_per_client = cfg.requests;
    ServerHandle server = start_server(rt, scfg);
    spawn_clients(rt, server, scfg, results);
  }

  double cpu0 = process_cpu_ms();
  std::uint64_t a0 = allocated_bytes();
  rt.start();
  bool ok = results->wait_done(clients, 120000);
  rt.stop();
  RunOutcome out;
  out.cpu_ms = process_cpu_ms() - cpu0;
  out.alloc = allocated_bytes() - a0;
  if (!ok) throw std::runtime_error("benchmark run timed out");
  {
    std::unique_lock lk(results->mu);
    out.latencies = results->latencies_us;
  }
  out.violations = net ? net->verdicts().size() : 0;
  return out;
}

double mean_of(const std::vector<std::uint64_t>& v) {
  if (v.empty()) return 0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double percentile(std::vector<std::uint64_t> v, double p) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  std::size_t idx = static_cast<std::size_t>(p * static_cast<double>(v.size() - 1));
  return static_cast<double>(v[idx]);
}

}  // namespace

MetricsReport run_benchmark(const BenchConfig& cfg) {
  std::string text = cfg.formula_text.empty() ? preset_formula("eq6") : cfg.formula_text;
  FormulaPtr marked = mark_synchronous(parse_formula(text));

  MetricsReport report;
  for (std::size_t load : cfg.client_loads) {
    for (const std::string& mode : cfg.modes) {
      MetricsRow row;
      row.mode = mode;
      row.clients = load;
      row.requests = cfg.requests;
      double cpu_sum = 0, mean_sum = 0, median_sum = 0, p95_sum = 0;
      std::uint64_t alloc_sum = 0;
      for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
        RunOutcome o = run_once(marked, mode, cfg, load);
        row.violations += o.violations;
        cpu_sum += o.cpu_ms;
        alloc_sum += o.alloc;
        double m = mean_of(o.latencies);
        row.rep_means_us.push_back(m);
        mean_sum += m;
        median_sum += percentile(o.latencies, 0.5);
        p95_sum += percentile(o.latencies, 0.95);
      }
      double reps = static_cast<double>(cfg.repetitions);
      row.mean_latency_us = mean_sum / reps;
      row.median_latency_us = median_sum / reps;
      row.p95_latency_us = p95_sum / reps;
      row.cpu_time_ms = cpu_sum / reps;
      row.alloc_bytes = alloc_sum / cfg.repetitions;
      if (row.violations > 0) report.valid = false;  // benign traffic only
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

std::string to_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "mode,clients,requests,mean_latency_us,median_latency_us,p95_latency_us,"
         "cpu_time_ms,alloc_bytes,violations\n";
  for (const MetricsRow& r : report.rows) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%.3f,%.3f,%.3f,%.3f,%llu,%zu\n",
                  r.mode.c_str(), r.clients, r.requests, r.mean_latency_us,
                  r.median_latency_us, r.p95_latency_us, r.cpu_time_ms,
                  static_cast<unsigned long long>(r.alloc_bytes), r.violations);
    out << buf;
  }
  return out.str();
}

MetricsReport parse_csv(const std::string& text) {
  MetricsReport report;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      line.find("mode,clients,requests,mean_latency_us") != 0)
    throw std::runtime_error("bad metrics CSV header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    MetricsRow r;
    std::istringstream ls(line);
    std::string field;
    auto next = [&]() {
      if (!std::getline(ls, field, ',')) throw std::runtime_error("short metrics CSV row");
      return field;
    };
    r.mode = next();
    r.clients = std::stoull(next());
    r.requests = std::stoull(next());
    r.mean_latency_us = std::stod(next());
    r.median_latency_us = std::stod(next());
    r.p95_latency_us = std::stod(next());
    r.cpu_time_ms = std::stod(next());
    r.alloc_bytes = std::stoull(next());
    r.violations = std::stoull(next());
    report.rows.push_back(std::move(r));
  }
  return report;
}

std::string to_dat(const MetricsReport& report) {
  std::ostringstream out;
  out << "# mode clients requests mean_latency_us median_latency_us p95_latency_us "
         "cpu_time_ms alloc_bytes violations\n";
  for (const MetricsRow& r : report.rows) {
    out << r.mode << ' ' << r.clients << ' ' << r.requests << ' ' << r.mean_latency_us
        << ' ' << r.median_latency_us << ' ' << r.p95_latency_us << ' ' << r.cpu_time_ms
        << ' ' << r.alloc_bytes << ' ' << r.violations << '\n';
  }
  return out.str();
}

double process_cpu_ms() {
  rusage ru{};
  getrusage(RUSAGE_SELF, &ru);
  auto ms = [](const timeval& tv) {
    return static_cast<double>(tv.tv_sec) * 1000.0 + static_cast<double>(tv.tv_usec) / 1000.0;
  };
  return ms(ru.ru_utime) + ms(ru.ru_stime);
}

std::uint64_t allocated_bytes() { return detail::g_alloc_bytes.load(); }

std::int64_t rss_kb() {
  std::ifstream in("/proc/self/status");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("VmRSS:", 0) == 0) {
      std::istringstream ls(line.substr(6));
      std::int64_t kb = -1;
      ls >> kb;
      return kb;
    }
  }
  return -1;
}

}  // namespace rv::bench
