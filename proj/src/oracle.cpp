#include "rv/oracle.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rv/parser.hpp"

namespace rv {

FiniteLTS::State FiniteLTS::add_state(std::string id) {
  auto it = index_.find(id);
  if (it != index_.end()) return it->second;
  State s = ids_.size();
  index_.emplace(id, s);
  ids_.push_back(std::move(id));
  return s;
}

FiniteLTS::State FiniteLTS::state(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw std::out_of_range("unknown LTS state " + id);
  return it->second;
}

bool FiniteLTS::has_state(const std::string& id) const { return index_.count(id) != 0; }

void FiniteLTS::add_tau(State from, State to) {
  edges_.push_back(Edge{from, true, EventInstance{}, to});
}

void FiniteLTS::add_edge(State from, EventInstance label, State to) {
  edges_.push_back(Edge{from, false, std::move(label), to});
}

FiniteLTS load_lts(const std::string& text) {
  FiniteLTS lts;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word) || word[0] == '#') continue;
    if (word == "state") {
      std::string id;
      if (!(ls >> id)) throw ParseError("state line without id", lineno, 1);
      lts.add_state(id);
    } else if (word == "edge") {
      std::string from;
      if (!(ls >> from)) throw ParseError("edge line without source", lineno, 1);
      std::string rest;
      std::getline(ls, rest);
      EdgeLabel lbl = parse_edge_label(rest);
      FiniteLTS::State s = lts.add_state(from);
      FiniteLTS::State t = lts.add_state(lbl.to);
      if (lbl.tau)
        lts.add_tau(s, t);
      else
        lts.add_edge(s, std::move(lbl.event), t);
    } else {
      throw ParseError("expected 'state' or 'edge'", lineno, 1);
    }
  }
  return lts;
}

StateSet tau_closure(const FiniteLTS& lts, FiniteLTS::State from) {
  StateSet seen{from};
  std::deque<FiniteLTS::State> work{from};
  while (!work.empty()) {
    FiniteLTS::State s = work.front();
    work.pop_front();
    for (const auto& e : lts.edges()) {
      if (e.tau && e.from == s && seen.insert(e.to).second) work.push_back(e.to);
    }
  }
  return seen;
}

StateSet weak_step(const FiniteLTS& lts, FiniteLTS::State from, const EventInstance& a) {
  StateSet result;
  for (FiniteLTS::State s : tau_closure(lts, from)) {
    for (const auto& e : lts.edges()) {
      if (!e.tau && e.from == s && e.label == a) {
        StateSet post = tau_closure(lts, e.to);
        result.insert(post.begin(), post.end());
      }
    }
  }
  return result;
}

namespace {

StateSet all_states(const FiniteLTS& lts) {
  StateSet s;
  for (std::size_t i = 0; i < lts.num_states(); ++i) s.insert(i);
  return s;
}

StateSet intersect(const StateSet& a, const StateSet& b) {
  StateSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::inserter(out, out.begin()));
  return out;
}

// Distinct event labels of the LTS (structural dedup).
std::vector<EventInstance> distinct_labels(const FiniteLTS& lts) {
  std::vector<EventInstance> out;
  for (const auto& e : lts.edges()) {
    if (e.tau) continue;
    if (std::find(out.begin(), out.end(), e.label) == out.end()) out.push_back(e.label);
  }
  return out;
}

}  // namespace

StateSet denote(const FormulaPtr& f, const FiniteLTS& lts,
                const std::map<std::string, StateSet>& env, const PredicateTable& preds,
                DenoteStats* stats) {
  switch (f->kind) {
    case Formula::Kind::FF:
    case Formula::Kind::SFF:
      return {};
    case Formula::Kind::And:
      return intersect(denote(f->left, lts, env, preds, stats),
                       denote(f->body, lts, env, preds, stats));
    case Formula::Kind::Nec:
    case Formula::Kind::SyncNec: {
      StateSet ok = all_states(lts);
      for (const EventInstance& beta : distinct_labels(lts)) {
        auto sigma = match(f->pattern, beta);
        if (!sigma) continue;
        StateSet target =
            denote(apply_substitution(f->body, *sigma), lts, env, preds, stats);
        StateSet keep;
        for (FiniteLTS::State p : ok) {
          StateSet post = weak_step(lts, p, beta);
          if (std::includes(target.begin(), target.end(), post.begin(), post.end()))
            keep.insert(p);
        }
        ok = std::move(keep);
      }
      return ok;
    }
    case Formula::Kind::Max: {
      StateSet s = all_states(lts);
      int iter = 0;
      while (true) {
        ++iter;
        auto env2 = env;
        env2[f->var] = s;
        StateSet next = denote(f->body, lts, env2, preds, stats);
        if (next == s) break;
        s = std::move(next);
      }
      if (stats) stats->max_gfp_iterations = std::max(stats->max_gfp_iterations, iter);
      return s;
    }
    case Formula::Kind::Guard:
      return eval_bool(*f->cond, Substitution{}, preds)
                 ? denote(f->body, lts, env, preds, stats)
                 : all_states(lts);
    case Formula::Kind::Var: {
      auto it = env.find(f->var);
      if (it == env.end()) throw std::logic_error("denote: unbound formula variable " + f->var);
      return it->second;
    }
  }
  return {};
}

bool satisfies(const FiniteLTS& lts, FiniteLTS::State p, const FormulaPtr& f,
               const PredicateTable& preds) {
  return denote(f, lts, {}, preds).count(p) != 0;
}

// ---------------------------------------------------------------------
// Trace-level rejection oracle
// ---------------------------------------------------------------------

namespace {

using Env = std::map<std::string, FormulaPtr>;

struct Branch {
  bool sync = false;        // consumed-necessity annotation
  ActionPattern pattern;    // all enclosing bindings already substituted
  FormulaPtr cont;
  Env env;
  Substitution acc;
};

struct Expansion {
  std::vector<Branch> branches;
  bool violated = false;
  Substitution witness;
};

// Unfolds non-necessity structure until every leaf is a waiting necessity, a
// violation or trivially satisfied. Terminates because every formula
// variable is guarded.
void expand(const FormulaPtr& f, Env env, const Substitution& acc, const PredicateTable& preds,
            Expansion& out) {
  switch (f->kind) {
    case Formula::Kind::FF:
    case Formula::Kind::SFF:
      if (!out.violated) {
        out.violated = true;
        out.witness = acc;
      }
      return;
    case Formula::Kind::And:
      expand(f->left, env, acc, preds, out);
      expand(f->body, std::move(env), acc, preds, out);
      return;
    case Formula::Kind::Nec:
    case Formula::Kind::SyncNec:
      out.branches.push_back(Branch{f->kind == Formula::Kind::SyncNec, f->pattern, f->body,
                                    std::move(env), acc});
      return;
    case Formula::Kind::Max: {
      env[f->var] = f;
      expand(f->body, std::move(env), acc, preds, out);
      return;
    }
    case Formula::Kind::Guard:
      if (eval_bool(*f->cond, Substitution{}, preds))
        expand(f->body, std::move(env), acc, preds, out);
      return;  // guard false: trivially satisfied
    case Formula::Kind::Var: {
      auto it = env.find(f->var);
      if (it == env.end())
        throw std::logic_error("rejects_trace: unbound formula variable " + f->var);
      FormulaPtr unfolding = it->second;
      expand(unfolding->body, std::move(env), acc, preds, out);
      return;
    }
  }
}

}  // namespace

std::optional<Rejection> rejects_trace(const FormulaPtr& f, const Trace& t,
                                       const PredicateTable& preds) {
  Expansion init;
  expand(f, {}, Substitution{}, preds, init);
  // A violation present before any event is observable only once an event
  // arrives; the empty trace rejects nothing.
  if (init.violated)
    return t.empty() ? std::nullopt
                     : std::optional<Rejection>(Rejection{0, false, init.witness});

  std::vector<Branch> live = std::move(init.branches);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const EventInstance& e = t[i];
    std::vector<Branch> next;
    for (Branch& br : live) {
      if (!subject_matches(br.pattern, e)) {
        next.push_back(std::move(br));  // irrelevant event for this branch
        continue;
      }
      auto sigma = match(br.pattern, e);
      if (!sigma) continue;  // relevant but mismatching: trivially satisfied
      Substitution acc = br.acc.merged(*sigma);
      Expansion ex;
      expand(apply_substitution(br.cont, *sigma), br.env, acc, preds, ex);
      if (ex.violated) return Rejection{i, br.sync, ex.witness};
      for (Branch& nb : ex.branches) next.push_back(std::move(nb));
    }
    live = std::move(next);
  }
  return std::nullopt;
}

namespace {
std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace

Trace load_trace_file(const std::string& path) { return parse_trace(slurp(path)); }

FiniteLTS load_lts_file(const std::string& path) { return load_lts(slurp(path)); }

}  // namespace rv
