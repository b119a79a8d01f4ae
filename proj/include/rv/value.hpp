#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace rv {

/// Process identifier. Opaque to user code; allocated by the runtime.
struct Pid {
  std::uint64_t id = 0;
  friend bool operator==(Pid, Pid) = default;
  friend auto operator<=>(Pid, Pid) = default;
};

/// Interned-by-name symbolic constant ("atom" in the host-model sense).
struct Atom {
  std::string name;
  friend bool operator==(const Atom&, const Atom&) = default;
  friend auto operator<=>(const Atom&, const Atom&) = default;
};

class Value;
using Tuple = std::vector<Value>;

/// Closed runtime datum: atom, integer, string, tuple or pid.
/// Equality is structural; there is also a total order across kinds so
/// comparison guards are decidable on any pair of values.
class Value {
 public:
  using Rep = std::variant<Atom, std::int64_t, std::string, Tuple, Pid>;

  Value() : rep_(std::int64_t{0}) {}
  Value(Atom a) : rep_(std::move(a)) {}
  Value(std::int64_t i) : rep_(i) {}
  Value(int i) : rep_(std::int64_t{i}) {}
  Value(std::string s) : rep_(std::move(s)) {}
  Value(const char* s) : rep_(std::string(s)) {}
  Value(Tuple t) : rep_(std::move(t)) {}
  Value(Pid p) : rep_(p) {}

  static Value atom(std::string name) { return Value(Atom{std::move(name)}); }
  static Value tuple(Tuple elems) { return Value(std::move(elems)); }

  bool is_atom() const { return std::holds_alternative<Atom>(rep_); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(rep_); }
  bool is_string() const { return std::holds_alternative<std::string>(rep_); }
  bool is_tuple() const { return std::holds_alternative<Tuple>(rep_); }
  bool is_pid() const { return std::holds_alternative<Pid>(rep_); }

  const Atom& as_atom() const { return std::get<Atom>(rep_); }
  std::int64_t as_int() const { return std::get<std::int64_t>(rep_); }
  const std::string& as_string() const { return std::get<std::string>(rep_); }
  const Tuple& as_tuple() const { return std::get<Tuple>(rep_); }
  Pid as_pid() const { return std::get<Pid>(rep_); }

  const Rep& rep() const { return rep_; }

  friend bool operator==(const Value& a, const Value& b) { return a.rep_ == b.rep_; }

 private:
  Rep rep_;
};

/// Variadic tuple builder (friendlier to coroutine bodies than brace lists).
template <typename... Vs>
Value vtuple(Vs&&... parts) {
  Tuple t;
  t.reserve(sizeof...(parts));
  (t.push_back(Value(std::forward<Vs>(parts))), ...);
  return Value(std::move(t));
}

/// Total order over values: integers < atoms < strings < pids < tuples,
/// with the natural order inside each kind. Used by comparison guards.
int compare_values(const Value& a, const Value& b);

/// Printed form parseable by the term grammar: atoms bare (quoted when not a
/// plain lowercase identifier), pid(N), {a, b}, "strings" with escapes.
std::string to_string(const Value& v);

}  // namespace rv
