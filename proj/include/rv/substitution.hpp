#pragma once

#include <map>
#include <optional>
#include <string>

#include "rv/term.hpp"
#include "rv/value.hpp"

namespace rv {

/// Finite partial map from term-variable names to values, as produced by
/// matching an open action pattern against a closed event.
class Substitution {
 public:
  using Map = std::map<std::string, Value>;

  Substitution() = default;
  explicit Substitution(Map m) : map_(std::move(m)) {}

  bool empty() const { return map_.empty(); }
  std::size_t size() const { return map_.size(); }

  const Value* lookup(const std::string& name) const {
    auto it = map_.find(name);
    return it == map_.end() ? nullptr : &it->second;
  }

  /// Adds a binding; returns false if the name is already bound (to anything).
  bool bind(const std::string& name, Value v) {
    return map_.emplace(name, std::move(v)).second;
  }

  /// Union of two substitutions with disjoint domains (later wins never
  /// happens in practice; overlapping identical bindings are tolerated).
  Substitution merged(const Substitution& other) const {
    Substitution out = *this;
    for (const auto& [k, v] : other.map_) out.map_.emplace(k, v);
    return out;
  }

  const Map& map() const { return map_; }

  friend bool operator==(const Substitution&, const Substitution&) = default;

 private:
  Map map_;
};

/// Replaces variables of t that are in dom(s); wildcards and unmapped
/// variables are left alone. A fully closed result collapses to a literal.
Term apply_term(const Term& t, const Substitution& s);

std::string to_string(const Substitution& s);

}  // namespace rv
