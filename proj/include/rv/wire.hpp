#pragma once

#include <optional>
#include <string>

#include "rv/term.hpp"
#include "rv/value.hpp"

namespace rv {

/// Handshake token pairing a reported event with its acknowledgement.
/// Fresh nonces are (pid, counter) pairs, unique by construction; the null
/// nonce marks fire-and-forget events and is never acknowledged.
struct Nonce {
  bool null = true;
  Pid pid;
  std::uint64_t counter = 0;

  static Nonce null_nonce() { return Nonce{}; }
  static Nonce fresh(Pid p, std::uint64_t c) { return Nonce{false, p, c}; }

  friend bool operator==(const Nonce&, const Nonce&) = default;
};

// Internal message atoms carry a '$' prefix so they can never collide with
// user-level atoms (the surface syntax only admits plain lowercase names).

Value encode_nonce(const Nonce& n);
std::optional<Nonce> decode_nonce(const Value& v);

/// event message: {'$event', <kind>, <subject>, <payload...>, <emitter>, <seq>, <nonce>}
Value encode_event_message(const EventInstance& e, const Nonce& n);

struct EventMessage {
  EventInstance event;
  Nonce nonce;
};
std::optional<EventMessage> decode_event_message(const Value& v);

/// ack message: {'$ack', <nonce>}
Value encode_ack(const Nonce& n);
Term ack_pattern(const Nonce& n);
std::optional<Nonce> decode_ack(const Value& v);

/// start-gate handshake used by fully synchronous instrumentation
Value encode_init(Pid system_pid);
Value encode_init_ack(Pid system_pid);
Term init_ack_pattern(Pid system_pid);
std::optional<Pid> decode_init(const Value& v);

}  // namespace rv
