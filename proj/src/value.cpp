#include "rv/value.hpp"

#include <cctype>

namespace rv {

namespace {

int kind_rank(const Value& v) {
  if (v.is_int()) return 0;
  if (v.is_atom()) return 1;
  if (v.is_string()) return 2;
  if (v.is_pid()) return 3;
  return 4;  // tuple
}

int cmp3(auto a, auto b) { return a < b ? -1 : (b < a ? 1 : 0); }

bool plain_atom_name(const std::string& s) {
  if (s.empty() || !std::islower(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

void quote_into(std::string& out, const std::string& s, char q) {
  out.push_back(q);
  for (char c : s) {
    if (c == q || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  out.push_back(q);
}

}  // namespace

int compare_values(const Value& a, const Value& b) {
  int ra = kind_rank(a), rb = kind_rank(b);
  if (ra != rb) return ra < rb ? -1 : 1;
  switch (ra) {
    case 0: return cmp3(a.as_int(), b.as_int());
    case 1: return cmp3(a.as_atom().name, b.as_atom().name);
    case 2: return cmp3(a.as_string(), b.as_string());
    case 3: return cmp3(a.as_pid().id, b.as_pid().id);
    default: {
      const Tuple& ta = a.as_tuple();
      const Tuple& tb = b.as_tuple();
      for (std::size_t i = 0; i < ta.size() && i < tb.size(); ++i)
        if (int c = compare_values(ta[i], tb[i]); c != 0) return c;
      return cmp3(ta.size(), tb.size());
    }
  }
}

std::string to_string(const Value& v) {
  std::string out;
  if (v.is_int()) {
    out = std::to_string(v.as_int());
  } else if (v.is_atom()) {
    const std::string& n = v.as_atom().name;
    if (plain_atom_name(n))
      out = n;
    else
      quote_into(out, n, '\'');
  } else if (v.is_string()) {
    quote_into(out, v.as_string(), '"');
  } else if (v.is_pid()) {
    out = "pid(" + std::to_string(v.as_pid().id) + ")";
  } else {
    out = "{";
    const Tuple& t = v.as_tuple();
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i) out += ", ";
      out += to_string(t[i]);
    }
    out += "}";
  }
  return out;
}

}  // namespace rv
