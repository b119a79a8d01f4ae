#include "rv/parser.hpp"

#include <cctype>
#include <optional>

#include "rv/formula_ops.hpp"

namespace rv {

namespace {

enum class Tok {
  End, Atom, QAtom, Var, Int, Str,
  LBrack, RBrack, LSyncBrack, RSyncBrack,  // [ ] [| |]
  LParen, RParen, LBrace, RBrace,
  Comma, Bang, Question, Dot, Amp, Colon, Slash,
  Eq, Ne, Lt, Gt, Le, Ge, Plus, Minus, Star,
  // keywords
  Ff, Sff, Max, If, Then, AndKw, OrKw, NotKw, Call, Ret, PidKw, True, False,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::int64_t int_val = 0;
  int line = 1, col = 1;
};

struct Lexer {
  const std::string& src;
  std::size_t pos = 0;
  int line = 1, col = 1;

  explicit Lexer(const std::string& s) : src(s) {}

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line, col); }

  char peek() const { return pos < src.size() ? src[pos] : '\0'; }
  char peek2() const { return pos + 1 < src.size() ? src[pos + 1] : '\0'; }

  char advance() {
    char c = src[pos++];
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    return c;
  }

  void skip_ws() {
    while (pos < src.size()) {
      char c = peek();
      if (c == '#') {
        while (pos < src.size() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string lex_quoted(char q) {
    std::string out;
    advance();  // opening quote
    while (true) {
      if (pos >= src.size()) fail("unterminated quoted literal");
      char c = advance();
      if (c == q) break;
      if (c == '\\') {
        if (pos >= src.size()) fail("unterminated escape");
        char e = advance();
        if (e == 'n')
          out.push_back('\n');
        else
          out.push_back(e);
      } else {
        out.push_back(c);
      }
    }
    return out;
  }

  Token next() {
    skip_ws();
    Token t;
    t.line = line;
    t.col = col;
    if (pos >= src.size()) return t;
    char c = peek();

    if (c == '[') {
      advance();
      if (peek() == '|') {
        advance();
        t.kind = Tok::LSyncBrack;
      } else {
        t.kind = Tok::LBrack;
      }
      return t;
    }
    if (c == '|') {
      advance();
      if (peek() == ']') {
        advance();
        t.kind = Tok::RSyncBrack;
        return t;
      }
      fail("stray '|'");
    }
    if (c == ']') { advance(); t.kind = Tok::RBrack; return t; }
    if (c == '(') { advance(); t.kind = Tok::LParen; return t; }
    if (c == ')') { advance(); t.kind = Tok::RParen; return t; }
    if (c == '{') { advance(); t.kind = Tok::LBrace; return t; }
    if (c == '}') { advance(); t.kind = Tok::RBrace; return t; }
    if (c == ',') { advance(); t.kind = Tok::Comma; return t; }
    if (c == '!') {
      advance();
      if (peek() == '=') { advance(); t.kind = Tok::Ne; return t; }
      t.kind = Tok::Bang;
      return t;
    }
    if (c == '?') { advance(); t.kind = Tok::Question; return t; }
    if (c == '.') { advance(); t.kind = Tok::Dot; return t; }
    if (c == '&') { advance(); t.kind = Tok::Amp; return t; }
    if (c == ':') { advance(); t.kind = Tok::Colon; return t; }
    if (c == '/') { advance(); t.kind = Tok::Slash; return t; }
    if (c == '=') { advance(); t.kind = Tok::Eq; return t; }
    if (c == '<') {
      advance();
      if (peek() == '=') { advance(); t.kind = Tok::Le; return t; }
      t.kind = Tok::Lt;
      return t;
    }
    if (c == '>') {
      advance();
      if (peek() == '=') { advance(); t.kind = Tok::Ge; return t; }
      t.kind = Tok::Gt;
      return t;
    }
    if (c == '+') { advance(); t.kind = Tok::Plus; return t; }
    if (c == '*') { advance(); t.kind = Tok::Star; return t; }
    if (c == '-' && std::isdigit(static_cast<unsigned char>(peek2()))) {
      advance();
      t.kind = Tok::Int;
      std::string digits;
      while (std::isdigit(static_cast<unsigned char>(peek()))) digits.push_back(advance());
      t.int_val = -std::stoll(digits);
      return t;
    }
    if (c == '-') { advance(); t.kind = Tok::Minus; return t; }
    if (c == '"') {
      t.kind = Tok::Str;
      t.text = lex_quoted('"');
      return t;
    }
    if (c == '\'') {
      t.kind = Tok::QAtom;
      t.text = lex_quoted('\'');
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      t.kind = Tok::Int;
      std::string digits;
      while (std::isdigit(static_cast<unsigned char>(peek()))) digits.push_back(advance());
      t.int_val = std::stoll(digits);
      return t;
    }
    if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
      t.kind = Tok::Var;
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')
        t.text.push_back(advance());
      return t;
    }
    if (std::islower(static_cast<unsigned char>(c))) {
      std::string w;
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')
        w.push_back(advance());
      t.text = w;
      if (w == "ff") t.kind = Tok::Ff;
      else if (w == "sff") t.kind = Tok::Sff;
      else if (w == "max") t.kind = Tok::Max;
      else if (w == "if") t.kind = Tok::If;
      else if (w == "then") t.kind = Tok::Then;
      else if (w == "and") t.kind = Tok::AndKw;
      else if (w == "or") t.kind = Tok::OrKw;
      else if (w == "not") t.kind = Tok::NotKw;
      else if (w == "call") t.kind = Tok::Call;
      else if (w == "ret") t.kind = Tok::Ret;
      else if (w == "pid") t.kind = Tok::PidKw;
      else if (w == "true") t.kind = Tok::True;
      else if (w == "false") t.kind = Tok::False;
      else t.kind = Tok::Atom;
      return t;
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

struct Parser {
  std::vector<Token> toks;
  std::size_t i = 0;

  explicit Parser(const std::string& text) {
    Lexer lx(text);
    while (true) {
      Token t = lx.next();
      bool end = t.kind == Tok::End;
      toks.push_back(std::move(t));
      if (end) break;
    }
  }

  const Token& cur() const { return toks[i]; }
  const Token& peek_next() const { return toks[i + 1 < toks.size() ? i + 1 : toks.size() - 1]; }
  bool at(Tok k) const { return cur().kind == k; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, cur().line, cur().col);
  }

  Token expect(Tok k, const char* what) {
    if (!at(k)) fail(std::string("expected ") + what);
    return toks[i++];
  }

  bool accept(Tok k) {
    if (at(k)) {
      ++i;
      return true;
    }
    return false;
  }

  // ---- terms ----

  Term parse_term() {
    const Token& t = cur();
    switch (t.kind) {
      case Tok::Int: ++i; return Term::lit(Value(t.int_val));
      case Tok::Str: ++i; return Term::lit(Value(t.text));
      case Tok::Atom:
      case Tok::QAtom: ++i; return Term::atom(t.text);
      case Tok::Var:
        ++i;
        if (t.text == "_") return Term::wildcard();
        return Term::var(t.text);
      case Tok::PidKw: {
        ++i;
        expect(Tok::LParen, "'(' after pid");
        Token n = expect(Tok::Int, "pid number");
        expect(Tok::RParen, "')'");
        return Term::lit(Value(Pid{static_cast<std::uint64_t>(n.int_val)}));
      }
      case Tok::LBrace: {
        ++i;
        Term::TupleT elems;
        if (!at(Tok::RBrace)) {
          elems.push_back(parse_term());
          while (accept(Tok::Comma)) elems.push_back(parse_term());
        }
        expect(Tok::RBrace, "'}'");
        return Term::tuple(std::move(elems));
      }
      default:
        fail("expected term");
    }
  }

  // ---- action patterns ----

  std::string expect_name(const char* what) {
    if (at(Tok::Atom) || at(Tok::QAtom)) {
      std::string n = cur().text;
      ++i;
      return n;
    }
    fail(std::string("expected ") + what);
  }

  ActionPattern parse_pattern() {
    if (accept(Tok::Call)) {
      Term subj = parse_term();
      std::string mod = expect_name("module name");
      expect(Tok::Colon, "':'");
      std::string fn = expect_name("function name");
      expect(Tok::LParen, "'('");
      std::vector<Term> args;
      if (!at(Tok::RParen)) {
        args.push_back(parse_term());
        while (accept(Tok::Comma)) args.push_back(parse_term());
      }
      expect(Tok::RParen, "')'");
      return ActionPattern::call(std::move(subj), std::move(mod), std::move(fn), std::move(args));
    }
    if (accept(Tok::Ret)) {
      Term subj = parse_term();
      std::string mod = expect_name("module name");
      expect(Tok::Colon, "':'");
      std::string fn = expect_name("function name");
      expect(Tok::Slash, "'/'");
      Token a = expect(Tok::Int, "arity");
      expect(Tok::Eq, "'='");
      Term val = parse_term();
      return ActionPattern::ret(std::move(subj), std::move(mod), std::move(fn),
                                static_cast<std::size_t>(a.int_val), std::move(val));
    }
    Term subj = parse_term();
    if (accept(Tok::Bang)) return ActionPattern::output(std::move(subj), parse_term());
    if (accept(Tok::Question)) return ActionPattern::input(std::move(subj), parse_term());
    fail("expected '!' or '?' in action pattern");
  }

  // ---- boolean guards ----

  ArithPtr parse_arith_prim() {
    if (accept(Tok::LParen)) {
      ArithPtr a = parse_arith();
      expect(Tok::RParen, "')'");
      return a;
    }
    return Arith::leaf(parse_term());
  }

  ArithPtr parse_arith_mul() {
    ArithPtr a = parse_arith_prim();
    while (at(Tok::Star)) {
      ++i;
      a = Arith::node(Arith::Op::Mul, a, parse_arith_prim());
    }
    return a;
  }

  ArithPtr parse_arith() {
    ArithPtr a = parse_arith_mul();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      Arith::Op op = at(Tok::Plus) ? Arith::Op::Add : Arith::Op::Sub;
      ++i;
      a = Arith::node(op, a, parse_arith_mul());
    }
    return a;
  }

  std::optional<BoolExpr::CmpOp> cmp_op_here() {
    switch (cur().kind) {
      case Tok::Eq: return BoolExpr::CmpOp::Eq;
      case Tok::Ne: return BoolExpr::CmpOp::Ne;
      case Tok::Lt: return BoolExpr::CmpOp::Lt;
      case Tok::Gt: return BoolExpr::CmpOp::Gt;
      case Tok::Le: return BoolExpr::CmpOp::Le;
      case Tok::Ge: return BoolExpr::CmpOp::Ge;
      default: return std::nullopt;
    }
  }

  BoolPtr parse_bool_atom() {
    if (accept(Tok::True)) return BoolExpr::lit(true);
    if (accept(Tok::False)) return BoolExpr::lit(false);
    if ((at(Tok::Atom) || at(Tok::QAtom)) && peek_next().kind == Tok::LParen) {
      std::string name = cur().text;
      ++i;
      ++i;  // '('
      std::vector<Term> args;
      if (!at(Tok::RParen)) {
        args.push_back(parse_term());
        while (accept(Tok::Comma)) args.push_back(parse_term());
      }
      expect(Tok::RParen, "')'");
      return BoolExpr::pred(std::move(name), std::move(args));
    }
    // Try a comparison; fall back to a parenthesised boolean.
    std::size_t save = i;
    try {
      ArithPtr lhs = parse_arith();
      if (auto op = cmp_op_here()) {
        ++i;
        ArithPtr rhs = parse_arith();
        return BoolExpr::cmp(*op, std::move(lhs), std::move(rhs));
      }
      i = save;
    } catch (const ParseError&) {
      i = save;
    }
    if (accept(Tok::LParen)) {
      BoolPtr b = parse_bool();
      expect(Tok::RParen, "')'");
      return b;
    }
    fail("expected boolean expression");
  }

  BoolPtr parse_bool_not() {
    if (accept(Tok::NotKw)) return BoolExpr::negate(parse_bool_not());
    return parse_bool_atom();
  }

  BoolPtr parse_bool_and() {
    BoolPtr b = parse_bool_not();
    while (accept(Tok::AndKw)) b = BoolExpr::conj(b, parse_bool_not());
    return b;
  }

  BoolPtr parse_bool() {
    BoolPtr b = parse_bool_and();
    while (accept(Tok::OrKw)) b = BoolExpr::disj(b, parse_bool_and());
    return b;
  }

  // ---- formulas ----

  FormulaPtr parse_unary() {
    if (accept(Tok::Ff)) return Formula::ff();
    if (accept(Tok::Sff)) return Formula::sff();
    if (at(Tok::Var)) {
      std::string name = cur().text;
      ++i;
      return Formula::fvar(std::move(name));
    }
    if (accept(Tok::LBrack)) {
      ActionPattern p = parse_pattern();
      expect(Tok::RBrack, "']'");
      return Formula::nec(std::move(p), parse_unary());
    }
    if (accept(Tok::LSyncBrack)) {
      ActionPattern p = parse_pattern();
      expect(Tok::RSyncBrack, "'|]'");
      return Formula::sync_nec(std::move(p), parse_unary());
    }
    if (accept(Tok::If)) {
      BoolPtr cond = parse_bool();
      expect(Tok::Then, "'then'");
      return Formula::guard(std::move(cond), parse_unary());
    }
    if (accept(Tok::Max)) {
      Token v = expect(Tok::Var, "fixpoint variable");
      expect(Tok::Dot, "'.'");
      return Formula::max(v.text, parse_formula_level());
    }
    if (at(Tok::AndKw) && peek_next().kind == Tok::LParen) {
      ++i;
      ++i;
      FormulaPtr l = parse_formula_level();
      expect(Tok::Comma, "','");
      FormulaPtr r = parse_formula_level();
      expect(Tok::RParen, "')'");
      return Formula::conj(std::move(l), std::move(r));
    }
    if (accept(Tok::LParen)) {
      FormulaPtr f = parse_formula_level();
      expect(Tok::RParen, "')'");
      return f;
    }
    fail("expected formula");
  }

  FormulaPtr parse_formula_level() {
    FormulaPtr f = parse_unary();
    while (accept(Tok::Amp)) f = Formula::conj(f, parse_unary());
    return f;
  }

  FormulaPtr parse_whole_formula() {
    FormulaPtr f = parse_formula_level();
    if (!at(Tok::End)) fail("trailing input after formula");
    return f;
  }

  // ---- events (trace lines / LTS edge labels) ----

  Value term_to_value(const Term& t) {
    if (!t.is_value()) fail("event terms must be closed (no variables)");
    return t.as_value();
  }

  EventInstance parse_event() {
    if (at(Tok::Atom) && cur().text == "snd") {
      ++i;
      Value subj = term_to_value(parse_term());
      Value payload = term_to_value(parse_term());
      return EventInstance::output(std::move(subj), std::move(payload));
    }
    if (at(Tok::Atom) && cur().text == "rcv") {
      ++i;
      Value subj = term_to_value(parse_term());
      Value payload = term_to_value(parse_term());
      return EventInstance::input(std::move(subj), std::move(payload));
    }
    if (accept(Tok::Call)) {
      Value subj = term_to_value(parse_term());
      std::string mod = expect_name("module name");
      expect(Tok::Colon, "':'");
      std::string fn = expect_name("function name");
      expect(Tok::LParen, "'('");
      std::vector<Value> args;
      if (!at(Tok::RParen)) {
        args.push_back(term_to_value(parse_term()));
        while (accept(Tok::Comma)) args.push_back(term_to_value(parse_term()));
      }
      expect(Tok::RParen, "')'");
      return EventInstance::call(std::move(subj), std::move(mod), std::move(fn), std::move(args));
    }
    if (accept(Tok::Ret)) {
      Value subj = term_to_value(parse_term());
      std::string mod = expect_name("module name");
      expect(Tok::Colon, "':'");
      std::string fn = expect_name("function name");
      expect(Tok::Slash, "'/'");
      Token a = expect(Tok::Int, "arity");
      Value val = term_to_value(parse_term());
      return EventInstance::ret(std::move(subj), std::move(mod), std::move(fn),
                                static_cast<std::size_t>(a.int_val), std::move(val));
    }
    fail("expected event (snd/rcv/call/ret)");
  }
};

// ---- pretty printing ----

std::string pretty_walk(const Formula& f);

std::string pretty_unary(const Formula& f) {
  if (f.kind == Formula::Kind::And || f.kind == Formula::Kind::Max)
    return "(" + pretty_walk(f) + ")";
  return pretty_walk(f);
}

std::string pretty_walk(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::FF: return "ff";
    case Formula::Kind::SFF: return "sff";
    case Formula::Kind::Var: return f.var;
    case Formula::Kind::Nec:
      return "[" + to_string(f.pattern) + "] " + pretty_unary(*f.body);
    case Formula::Kind::SyncNec:
      return "[| " + to_string(f.pattern) + " |] " + pretty_unary(*f.body);
    case Formula::Kind::Guard:
      return "if " + to_string(*f.cond) + " then " + pretty_unary(*f.body);
    case Formula::Kind::Max:
      return "max " + f.var + ". " + pretty_walk(*f.body);
    case Formula::Kind::And: {
      const Formula& l = *f.left;
      const Formula& r = *f.body;
      std::string ls = l.kind == Formula::Kind::Max ? "(" + pretty_walk(l) + ")" : pretty_walk(l);
      std::string rs = (r.kind == Formula::Kind::Max || r.kind == Formula::Kind::And)
                           ? "(" + pretty_walk(r) + ")"
                           : pretty_walk(r);
      return ls + " & " + rs;
    }
  }
  return "?";
}

}  // namespace

FormulaPtr parse_formula_unchecked(const std::string& text) {
  Parser p(text);
  return p.parse_whole_formula();
}

FormulaPtr parse_formula(const std::string& text) {
  FormulaPtr f = parse_formula_unchecked(text);
  if (auto diag = check_well_formed(*f)) throw ParseError(diag->message, 1, 1);
  return alpha_rename(f);
}

std::string pretty(const Formula& f) { return pretty_walk(f); }

EventInstance parse_event_line(const std::string& line) {
  Parser p(line);
  EventInstance e = p.parse_event();
  if (!p.at(Tok::End)) p.fail("trailing input after event");
  return e;
}

std::vector<EventInstance> parse_trace(const std::string& text) {
  std::vector<EventInstance> out;
  std::size_t start = 0;
  int lineno = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    std::string line = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
    ++lineno;
    std::size_t nz = line.find_first_not_of(" \t\r");
    if (nz != std::string::npos && line[nz] != '#') {
      try {
        EventInstance e = parse_event_line(line);
        e.seq = out.size();
        out.push_back(std::move(e));
      } catch (const ParseError& pe) {
        throw ParseError(pe.what(), lineno, pe.col);
      }
    }
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

EdgeLabel parse_edge_label(const std::string& text) {
  Parser p(text);
  EdgeLabel out;
  if (p.at(Tok::Atom) && p.cur().text == "tau") {
    ++p.i;
    out.tau = true;
  } else {
    out.event = p.parse_event();
  }
  if (p.at(Tok::Atom) || p.at(Tok::QAtom) || p.at(Tok::Var)) {
    out.to = p.cur().text;
    ++p.i;
  } else if (p.at(Tok::Int)) {
    out.to = std::to_string(p.cur().int_val);
    ++p.i;
  } else {
    p.fail("expected target state id");
  }
  if (!p.at(Tok::End)) p.fail("trailing input after edge");
  return out;
}

Value parse_value(const std::string& text) {
  Parser p(text);
  Term t = p.parse_term();
  if (!p.at(Tok::End)) p.fail("trailing input after term");
  if (!t.is_value()) p.fail("term is not closed");
  return t.as_value();
}

}  // namespace rv
