#pragma once

#include <atomic>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "rv/monitor.hpp"
#include "rv/runtime.hpp"

namespace rv::bench {

// ---------------------------------------------------------------------
// isMalicious predicate
// ---------------------------------------------------------------------

/// Substring / user-agent blacklist rules deciding header maliciousness.
struct MaliciousRules {
  std::vector<std::string> substrings{"../"};
  std::vector<std::string> agent_blacklist;
};

bool is_malicious(std::span<const Value> headers, const MaliciousRules& rules);

/// Registers isMalicious/6 (the arity the webserver presets use).
void register_predicates(PredicateTable& preds, MaliciousRules rules = {});

// ---------------------------------------------------------------------
// Property presets
// ---------------------------------------------------------------------

/// eq5: webserver header-safety, asynchronous violations.
/// eq6: same property with a synchronous violation and a synchronous
///      connection-accept necessity.
/// eq7: succ-server request/response correctness (asynchronous).
/// ex3: eq7 refined so over-by-one answers are a synchronous violation.
const std::string& preset_formula(const std::string& name);
std::vector<std::string> preset_names();

// ---------------------------------------------------------------------
// Mock webserver workload
// ---------------------------------------------------------------------

struct ServerConfig {
  std::uint64_t service_delay_us = 1000;
  MaliciousRules rules;
  std::size_t requests_per_client = 10;
  std::size_t clients = 10;
  std::size_t malicious_clients = 0;  // clients sending a traversal header
};

struct ServerStats {
  std::atomic<std::size_t> acceptor_notifications{0};
  std::atomic<std::size_t> handlers_spawned{0};
  std::atomic<std::size_t> responses{0};
  std::atomic<std::size_t> error_responses{0};
  /// Bumped after the sixth header's do_recv returns, after the eoh return
  /// and after the response send: reads 0 while a handler is blocked at the
  /// sixth header's return event.
  std::atomic<std::size_t> steps_after_last_header{0};
  std::mutex mu;
  std::set<std::uint64_t> assigned_handlers;
};

struct ServerHandle {
  ActorRef acceptor;
  ActorRef port;  // stands in for the TCP listen socket
  std::shared_ptr<ServerStats> stats;
};

/// Spawns the acceptor and the first free handler; each accepted connection
/// notifies the acceptor ({HandlerPid, next, ClientPort}) which spawns a
/// fresh free handler.
ServerHandle start_server(Runtime& rt, ServerConfig cfg);

/// HTTP request script: http_req, six {http_header, N, Value} messages,
/// terminated by http_eoh. Malicious scripts carry a path-traversal header.
std::vector<Value> request_script(bool malicious, int request_idx);

struct ClientResults {
  std::mutex mu;
  std::condition_variable cv;
  std::vector<std::uint64_t> latencies_us;
  std::vector<Value> responses;
  std::size_t done_clients = 0;

  bool wait_done(std::size_t n, std::uint64_t timeout_ms);
};

/// One driver actor per client: connect, then send request scripts and
/// collect response latencies.
void spawn_clients(Runtime& rt, const ServerHandle& server, const ServerConfig& cfg,
                   std::shared_ptr<ClientResults> results);

// ---------------------------------------------------------------------
// Succ-server workload (eq7 / ex3 presets)
// ---------------------------------------------------------------------

enum class SuccAnswer { Correct, TooBig, TooSmall };

ActorRef start_succ_server(Runtime& rt, SuccAnswer answer);

/// Issues `requests` succ requests sequentially, recording latencies.
void spawn_succ_clients(Runtime& rt, std::size_t clients, std::size_t requests,
                        std::shared_ptr<ClientResults> results);

// ---------------------------------------------------------------------
// Overhead benchmark
// ---------------------------------------------------------------------

struct BenchConfig {
  std::string formula_text;                    // empty: eq6 preset
  std::vector<std::string> modes{"none", "async", "hybrid", "sync"};
  std::vector<std::size_t> client_loads{10, 50, 100};
  std::size_t requests = 10;
  std::size_t repetitions = 3;
  std::uint64_t service_delay_us = 1000;
  unsigned workers = 2;
  std::string workload = "webserver";  // webserver | succ
};

struct MetricsRow {
  std::string mode;
  std::size_t clients = 0;
  std::size_t requests = 0;
  double mean_latency_us = 0;
  double median_latency_us = 0;
  double p95_latency_us = 0;
  double cpu_time_ms = 0;
  std::uint64_t alloc_bytes = 0;
  std::size_t violations = 0;
  std::vector<double> rep_means_us;  // per repetition; not serialized
};

struct MetricsReport {
  std::vector<MetricsRow> rows;
  bool valid = true;  // false if a benign run produced violations
};

MetricsReport run_benchmark(const BenchConfig& cfg);

/// CSV with the fixed header row
/// mode,clients,requests,mean_latency_us,median_latency_us,p95_latency_us,cpu_time_ms,alloc_bytes,violations
std::string to_csv(const MetricsReport& report);
MetricsReport parse_csv(const std::string& text);
std::string to_dat(const MetricsReport& report);  // gnuplot-friendly

// ---------------------------------------------------------------------
// Process meters
// ---------------------------------------------------------------------

double process_cpu_ms();
std::uint64_t allocated_bytes();  // counting allocator total; 0 when not linked
std::int64_t rss_kb();            // -1 when unavailable

namespace detail {
extern std::atomic<std::uint64_t> g_alloc_bytes;
}

}  // namespace rv::bench
