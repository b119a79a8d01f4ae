#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "rv/formula.hpp"
#include "rv/term.hpp"

namespace rv {

struct ParseError : std::runtime_error {
  ParseError(std::string msg, int line, int col)
      : std::runtime_error(std::move(msg)), line(line), col(col) {}
  int line = 1;
  int col = 1;
};

/// Parses the textual formula syntax:
///
///   ff | sff | f & g | and(f, g) | [P ! T] f | [P ? T] f | [| pat |] f
///   | max X. f | if b then f | X
///
/// Patterns: `P ! T` (output), `P ? T` (input), `call P m:f(T, ...)`,
/// `ret P m:f/A = T`. Terms: integers, "strings", atoms (lowercase or
/// 'quoted'), Variables (capitalized), `_` wildcards, {tuples}, pid(N).
/// Guards: comparisons (=, !=, <, >, <=, >=) over +, -, * arithmetic,
/// and/or/not, true/false, and predicate applications `name(T, ...)`.
/// `#` starts a line comment.
///
/// The result is well-formedness-checked and alpha-renamed; violations
/// throw ParseError.
FormulaPtr parse_formula(const std::string& text);

/// Formula text -> AST with no well-formedness gate (diagnostics testing).
FormulaPtr parse_formula_unchecked(const std::string& text);

/// Canonical text form; parse(pretty(f)) is alpha-equivalent to f.
std::string pretty(const Formula& f);

/// One trace-file line: `snd <subj> <term>`, `rcv <subj> <term>`,
/// `call <subj> <mod>:<fun>(<terms>)`, `ret <subj> <mod>:<fun>/<arity> <term>`.
EventInstance parse_event_line(const std::string& line);

/// Whole trace file: one event per line, `#` comments, blank lines ignored.
/// Sequence indexes are stamped in file order.
std::vector<EventInstance> parse_trace(const std::string& text);

/// Parses `<label-or-tau> <to-id>` (the tail of an LTS edge line): returns
/// the target state id and the event, or no event for a tau label.
struct EdgeLabel {
  bool tau = false;
  EventInstance event;
  std::string to;
};
EdgeLabel parse_edge_label(const std::string& text);

/// A single closed term (used by tests and tools).
Value parse_value(const std::string& text);

}  // namespace rv
