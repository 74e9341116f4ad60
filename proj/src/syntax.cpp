#include "fmc/syntax.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace fmc {

const Location& default_location() {
  static const Location lam("lam");
  return lam;
}

TermPtr mk_var(std::string name) {
  auto t = std::make_shared<Term>();
  t->kind = TermKind::Var;
  t->var = std::move(name);
  return t;
}

TermPtr mk_pop(Location loc, std::string binder, TermPtr body) {
  auto t = std::make_shared<Term>();
  t->kind = TermKind::Pop;
  t->loc = std::move(loc);
  t->binder = std::move(binder);
  t->body = std::move(body);
  return t;
}

TermPtr mk_push(TermPtr arg, Location loc, TermPtr body) {
  auto t = std::make_shared<Term>();
  t->kind = TermKind::Push;
  t->arg = std::move(arg);
  t->loc = std::move(loc);
  t->body = std::move(body);
  return t;
}

TermPtr mk_skip() {
  static const TermPtr skip = [] {
    auto t = std::make_shared<Term>();
    t->kind = TermKind::Skip;
    return t;
  }();
  return skip;
}

TermPtr mk_seq(TermPtr left, TermPtr right) {
  auto t = std::make_shared<Term>();
  t->kind = TermKind::Seq;
  t->left = std::move(left);
  t->right = std::move(right);
  return t;
}

ParseError::ParseError(const std::string& msg, int l, int c)
    : std::runtime_error(msg + " at line " + std::to_string(l) + ", column " +
                         std::to_string(c)),
      line(l), column(c) {}

// ---------------------------------------------------------------------------
// Parser

namespace {

struct Token {
  enum class Kind {
    Ident, Star, Underscore, LBrack, RBrack, LAngle, RAngle,
    Dot, Semi, LParen, RParen, End
  };
  Kind kind;
  std::string text;
  int line, column;
};

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

private:
  void advance() {
    skip_trivia();
    tok_.line = line_;
    tok_.column = col_;
    if (pos_ >= src_.size()) {
      tok_.kind = Token::Kind::End;
      tok_.text.clear();
      return;
    }
    char c = src_[pos_];
    switch (c) {
      case '*': tok_ = simple(Token::Kind::Star, "*"); return;
      case '_': tok_ = simple(Token::Kind::Underscore, "_"); return;
      case '[': tok_ = simple(Token::Kind::LBrack, "["); return;
      case ']': tok_ = simple(Token::Kind::RBrack, "]"); return;
      case '<': tok_ = simple(Token::Kind::LAngle, "<"); return;
      case '>': tok_ = simple(Token::Kind::RAngle, ">"); return;
      case '.': tok_ = simple(Token::Kind::Dot, "."); return;
      case ';': tok_ = simple(Token::Kind::Semi, ";"); return;
      case '(': tok_ = simple(Token::Kind::LParen, "("); return;
      case ')': tok_ = simple(Token::Kind::RParen, ")"); return;
      default: break;
    }
    if (c >= 'a' && c <= 'z') {
      std::size_t start = pos_;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        bump();
      tok_.kind = Token::Kind::Ident;
      tok_.text = std::string(src_.substr(start, pos_ - start));
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
  }

  Token simple(Token::Kind k, const char* s) {
    Token t{k, s, line_, col_};
    bump();
    return t;
  }

  void skip_trivia() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') bump();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        bump();
      } else {
        break;
      }
    }
  }

  void bump() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

class Parser {
public:
  explicit Parser(std::string_view src) : lex_(src) {}

  TermPtr parse_term() {
    TermPtr t = parse_seq();
    expect(Token::Kind::End, "end of input");
    return t;
  }

private:
  TermPtr parse_seq() {
    TermPtr first = parse_prefix();
    if (lex_.peek().kind == Token::Kind::Semi) {
      lex_.take();
      return mk_seq(std::move(first), parse_seq());
    }
    return first;
  }

  TermPtr parse_prefix() {
    const Token& t = lex_.peek();
    switch (t.kind) {
      case Token::Kind::LAngle:
        return parse_pop(default_location());
      case Token::Kind::LBrack:
        return parse_push();
      case Token::Kind::Star:
        lex_.take();
        return mk_skip();
      case Token::Kind::LParen: {
        lex_.take();
        TermPtr inner = parse_seq();
        expect(Token::Kind::RParen, "')'");
        return inner;
      }
      case Token::Kind::Ident: {
        Token id = lex_.take();
        if (lex_.peek().kind == Token::Kind::LAngle)
          return parse_pop(Location(id.text));
        return mk_var(id.text);
      }
      default:
        throw ParseError("expected a term, found '" + describe(t) + "'", t.line, t.column);
    }
  }

  TermPtr parse_pop(Location loc) {
    expect(Token::Kind::LAngle, "'<'");
    std::string binder;
    const Token& b = lex_.peek();
    if (b.kind == Token::Kind::Underscore) {
      lex_.take();
      binder = "_" + std::to_string(++wildcards_);
    } else if (b.kind == Token::Kind::Ident) {
      binder = lex_.take().text;
    } else {
      throw ParseError("expected a binder name or '_'", b.line, b.column);
    }
    expect(Token::Kind::RAngle, "'>'");
    expect(Token::Kind::Dot, "'.'");
    return mk_pop(std::move(loc), std::move(binder), parse_seq());
  }

  TermPtr parse_push() {
    expect(Token::Kind::LBrack, "'['");
    TermPtr arg = parse_seq();
    expect(Token::Kind::RBrack, "']'");
    Location loc = default_location();
    if (lex_.peek().kind == Token::Kind::Ident) loc = Location(lex_.take().text);
    expect(Token::Kind::Dot, "'.'");
    return mk_push(std::move(arg), std::move(loc), parse_seq());
  }

  void expect(Token::Kind k, const char* what) {
    const Token& t = lex_.peek();
    if (t.kind != k)
      throw ParseError(std::string("expected ") + what + ", found '" + describe(t) + "'",
                       t.line, t.column);
    lex_.take();
  }

  static std::string describe(const Token& t) {
    return t.kind == Token::Kind::End ? "end of input" : t.text;
  }

  Lexer lex_;
  int wildcards_ = 0;
};

} // namespace

TermPtr parse(std::string_view text) { return Parser(text).parse_term(); }

// ---------------------------------------------------------------------------
// Printer

namespace {

bool wildcard_binder(const TermPtr& pop) {
  return !pop->binder.empty() && pop->binder[0] == '_' &&
         !occurs_free(pop->body, pop->binder);
}

void print(const TermPtr& t, std::string& out) {
  switch (t->kind) {
    case TermKind::Skip:
      out += '*';
      return;
    case TermKind::Var:
      out += t->var;
      return;
    case TermKind::Pop:
      if (t->loc != default_location()) out += t->loc.name;
      out += '<';
      out += wildcard_binder(t) ? std::string("_") : t->binder;
      out += ">.";
      print(t->body, out);
      return;
    case TermKind::Push:
      out += '[';
      print(t->arg, out);
      out += ']';
      if (t->loc != default_location()) out += t->loc.name;
      out += '.';
      print(t->body, out);
      return;
    case TermKind::Seq: {
      // A pop, push, or seq on the left would swallow the ';' when reparsed.
      bool parens = t->left->kind == TermKind::Pop ||
                    t->left->kind == TermKind::Push ||
                    t->left->kind == TermKind::Seq;
      if (parens) out += '(';
      print(t->left, out);
      if (parens) out += ')';
      out += ';';
      print(t->right, out);
      return;
    }
  }
}

} // namespace

std::string pretty(const TermPtr& t) {
  std::string out;
  print(t, out);
  return out;
}

// ---------------------------------------------------------------------------
// Variables and structural utilities

namespace {

// Node-local (shadowing stops at the node), so the result per node is
// context-independent and shareable across the dag; machine-grown terms can
// be exponentially large as trees.
const std::set<std::string>& free_vars_memo(
    const Term* t, std::unordered_map<const Term*, std::set<std::string>>& memo) {
  auto it = memo.find(t);
  if (it != memo.end()) return it->second;
  std::set<std::string> acc;
  switch (t->kind) {
    case TermKind::Var:
      acc.insert(t->var);
      break;
    case TermKind::Skip:
      break;
    case TermKind::Pop:
      acc = free_vars_memo(t->body.get(), memo);
      acc.erase(t->binder);
      break;
    case TermKind::Push: {
      acc = free_vars_memo(t->arg.get(), memo);
      const auto& b = free_vars_memo(t->body.get(), memo);
      acc.insert(b.begin(), b.end());
      break;
    }
    case TermKind::Seq: {
      acc = free_vars_memo(t->left.get(), memo);
      const auto& r = free_vars_memo(t->right.get(), memo);
      acc.insert(r.begin(), r.end());
      break;
    }
  }
  return memo.emplace(t, std::move(acc)).first->second;
}

} // namespace

std::set<std::string> free_vars(const TermPtr& t) {
  std::unordered_map<const Term*, std::set<std::string>> memo;
  return free_vars_memo(t.get(), memo);
}

namespace {

// Memoized on nodes: whether x occurs free. Shadowing is node-local, so the
// answer per node is context-independent and safe to share across the dag.
bool occurs_memo(const Term* t, const std::string& x,
                 std::unordered_map<const Term*, bool>& memo) {
  auto it = memo.find(t);
  if (it != memo.end()) return it->second;
  bool r = false;
  switch (t->kind) {
    case TermKind::Var: r = (t->var == x); break;
    case TermKind::Skip: r = false; break;
    case TermKind::Pop:
      r = (t->binder != x) && occurs_memo(t->body.get(), x, memo);
      break;
    case TermKind::Push:
      r = occurs_memo(t->arg.get(), x, memo) || occurs_memo(t->body.get(), x, memo);
      break;
    case TermKind::Seq:
      r = occurs_memo(t->left.get(), x, memo) || occurs_memo(t->right.get(), x, memo);
      break;
  }
  memo.emplace(t, r);
  return r;
}

} // namespace

bool occurs_free(const TermPtr& t, const std::string& x) {
  std::unordered_map<const Term*, bool> memo;
  return occurs_memo(t.get(), x, memo);
}

std::set<Location> locations(const TermPtr& t) {
  std::set<Location> acc;
  std::vector<const Term*> work{t.get()};
  while (!work.empty()) {
    const Term* cur = work.back();
    work.pop_back();
    switch (cur->kind) {
      case TermKind::Var:
      case TermKind::Skip:
        break;
      case TermKind::Pop:
        acc.insert(cur->loc);
        work.push_back(cur->body.get());
        break;
      case TermKind::Push:
        acc.insert(cur->loc);
        work.push_back(cur->arg.get());
        work.push_back(cur->body.get());
        break;
      case TermKind::Seq:
        work.push_back(cur->left.get());
        work.push_back(cur->right.get());
        break;
    }
  }
  return acc;
}

namespace {

constexpr std::size_t kSizeCap = std::numeric_limits<std::size_t>::max() / 4;

std::size_t sat_add(std::size_t a, std::size_t b) {
  std::size_t s = a + b;
  return (s < a || s > kSizeCap) ? kSizeCap : s;
}

std::size_t size_memo(const Term* t, std::unordered_map<const Term*, std::size_t>& memo) {
  auto it = memo.find(t);
  if (it != memo.end()) return it->second;
  std::size_t r = 1;
  switch (t->kind) {
    case TermKind::Var:
    case TermKind::Skip:
      break;
    case TermKind::Pop:
      r = sat_add(1, size_memo(t->body.get(), memo));
      break;
    case TermKind::Push:
      r = sat_add(1, sat_add(size_memo(t->arg.get(), memo), size_memo(t->body.get(), memo)));
      break;
    case TermKind::Seq:
      r = sat_add(1, sat_add(size_memo(t->left.get(), memo), size_memo(t->right.get(), memo)));
      break;
  }
  memo.emplace(t, r);
  return r;
}

} // namespace

std::size_t term_size(const TermPtr& t) {
  std::unordered_map<const Term*, std::size_t> memo;
  return size_memo(t.get(), memo);
}

std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  std::string stem = base;
  while (!stem.empty() && std::isdigit(static_cast<unsigned char>(stem.back())))
    stem.pop_back();
  if (stem.empty()) stem = "v";
  for (unsigned long long i = 1;; ++i) {
    std::string cand = stem + std::to_string(i);
    if (!avoid.count(cand)) return cand;
  }
}

namespace {

TermPtr subst(const TermPtr& n, const std::string& x, const TermPtr& m,
              const std::set<std::string>& fvn,
              std::unordered_map<const Term*, bool>& occ) {
  if (!occurs_memo(m.get(), x, occ)) return m;
  switch (m->kind) {
    case TermKind::Var:
      return n; // occurs check passed, so m->var == x
    case TermKind::Skip:
      return m;
    case TermKind::Seq:
      return mk_seq(subst(n, x, m->left, fvn, occ), subst(n, x, m->right, fvn, occ));
    case TermKind::Push:
      return mk_push(subst(n, x, m->arg, fvn, occ), m->loc, subst(n, x, m->body, fvn, occ));
    case TermKind::Pop: {
      // binder != x here, else x would not occur free
      if (fvn.count(m->binder)) {
        std::set<std::string> avoid = fvn;
        auto fvb = free_vars(m->body);
        avoid.insert(fvb.begin(), fvb.end());
        avoid.insert(x);
        std::string b = fresh_name(m->binder, avoid);
        TermPtr renamed = substitute(mk_var(b), m->binder, m->body);
        return mk_pop(m->loc, b, subst(n, x, renamed, fvn, occ));
      }
      return mk_pop(m->loc, m->binder, subst(n, x, m->body, fvn, occ));
    }
  }
  return m;
}

} // namespace

TermPtr substitute(const TermPtr& n, const std::string& x, const TermPtr& m) {
  std::unordered_map<const Term*, bool> occ;
  if (!occurs_memo(m.get(), x, occ)) return m;
  return subst(n, x, m, free_vars(n), occ);
}

TermPtr apply_subst_map(const SubstMap& sigma, const TermPtr& t) {
  if (sigma.empty()) return t;
  // Route through fresh intermediates so the bindings act simultaneously.
  std::set<std::string> avoid;
  for (const auto& [v, img] : sigma) {
    avoid.insert(v);
    auto fv = free_vars(img);
    avoid.insert(fv.begin(), fv.end());
  }
  auto fvt = free_vars(t);
  avoid.insert(fvt.begin(), fvt.end());

  TermPtr cur = t;
  std::vector<std::pair<std::string, TermPtr>> staged;
  for (const auto& [v, img] : sigma) {
    if (!occurs_free(cur, v)) continue;
    std::string tmp = fresh_name("subst_tmp", avoid);
    avoid.insert(tmp);
    staged.emplace_back(tmp, img);
    cur = substitute(mk_var(tmp), v, cur);
  }
  for (const auto& [tmp, img] : staged) cur = substitute(img, tmp, cur);
  return cur;
}

namespace {

struct AlphaEnv {
  std::vector<std::pair<std::string, std::size_t>> scopes;

  std::optional<std::size_t> lookup(const std::string& name) const {
    for (auto it = scopes.rbegin(); it != scopes.rend(); ++it)
      if (it->first == name) return it->second;
    return std::nullopt;
  }
};

bool alpha_rec(const Term* s, const Term* t, AlphaEnv& es, AlphaEnv& et, std::size_t lvl) {
  // shared subtrees under identical environments are equal; this keeps the
  // walk proportional to the dag, not the tree
  if (s == t && es.scopes == et.scopes) return true;
  if (s->kind != t->kind) return false;
  switch (s->kind) {
    case TermKind::Skip:
      return true;
    case TermKind::Var: {
      auto ls = es.lookup(s->var);
      auto lt = et.lookup(t->var);
      if (ls.has_value() != lt.has_value()) return false;
      return ls.has_value() ? *ls == *lt : s->var == t->var;
    }
    case TermKind::Pop: {
      if (s->loc != t->loc) return false;
      es.scopes.emplace_back(s->binder, lvl);
      et.scopes.emplace_back(t->binder, lvl);
      bool r = alpha_rec(s->body.get(), t->body.get(), es, et, lvl + 1);
      es.scopes.pop_back();
      et.scopes.pop_back();
      return r;
    }
    case TermKind::Push:
      return s->loc == t->loc &&
             alpha_rec(s->arg.get(), t->arg.get(), es, et, lvl) &&
             alpha_rec(s->body.get(), t->body.get(), es, et, lvl);
    case TermKind::Seq:
      return alpha_rec(s->left.get(), t->left.get(), es, et, lvl) &&
             alpha_rec(s->right.get(), t->right.get(), es, et, lvl);
  }
  return false;
}

void alpha_key_rec(const Term* t, AlphaEnv& env, std::size_t lvl, std::string& out) {
  switch (t->kind) {
    case TermKind::Skip:
      out += '*';
      return;
    case TermKind::Var: {
      auto l = env.lookup(t->var);
      if (l) {
        out += 'b';
        out += std::to_string(*l);
      } else {
        out += 'f';
        out += t->var;
      }
      out += ' ';
      return;
    }
    case TermKind::Pop:
      out += '<';
      out += t->loc.name;
      out += '>';
      env.scopes.emplace_back(t->binder, lvl);
      alpha_key_rec(t->body.get(), env, lvl + 1, out);
      env.scopes.pop_back();
      return;
    case TermKind::Push:
      out += '[';
      alpha_key_rec(t->arg.get(), env, lvl, out);
      out += ']';
      out += t->loc.name;
      out += '.';
      alpha_key_rec(t->body.get(), env, lvl, out);
      return;
    case TermKind::Seq:
      out += '(';
      alpha_key_rec(t->left.get(), env, lvl, out);
      out += ';';
      alpha_key_rec(t->right.get(), env, lvl, out);
      out += ')';
      return;
  }
}

} // namespace

bool alpha_eq(const TermPtr& s, const TermPtr& t) {
  if (s.get() == t.get()) return true;
  AlphaEnv es, et;
  return alpha_rec(s.get(), t.get(), es, et, 0);
}

std::string alpha_key(const TermPtr& t) {
  std::string out;
  AlphaEnv env;
  alpha_key_rec(t.get(), env, 0, out);
  return out;
}

bool term_struct_eq(const TermPtr& s, const TermPtr& t) {
  if (s.get() == t.get()) return true;
  if (s->kind != t->kind) return false;
  switch (s->kind) {
    case TermKind::Skip: return true;
    case TermKind::Var: return s->var == t->var;
    case TermKind::Pop:
      return s->loc == t->loc && s->binder == t->binder && term_struct_eq(s->body, t->body);
    case TermKind::Push:
      return s->loc == t->loc && term_struct_eq(s->arg, t->arg) && term_struct_eq(s->body, t->body);
    case TermKind::Seq:
      return term_struct_eq(s->left, t->left) && term_struct_eq(s->right, t->right);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Positions

Position Position::child(Selector s) const {
  Position p = *this;
  p.path.push_back(s);
  return p;
}

bool Position::spine() const {
  return std::none_of(path.begin(), path.end(),
                      [](Selector s) { return s == Selector::PushArg; });
}

std::string selector_name(Selector s) {
  switch (s) {
    case Selector::PopBody: return "PopBody";
    case Selector::PushArg: return "PushArg";
    case Selector::PushBody: return "PushBody";
    case Selector::SeqLeft: return "SeqLeft";
    case Selector::SeqRight: return "SeqRight";
  }
  return "?";
}

std::string position_to_string(const Position& p) {
  std::string out;
  for (std::size_t i = 0; i < p.path.size(); ++i) {
    if (i) out += '/';
    out += selector_name(p.path[i]);
  }
  return out;
}

std::optional<Position> position_from_string(const std::string& s) {
  Position p;
  if (s.empty()) return p;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t end = s.find('/', start);
    std::string part = s.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (part == "PopBody") p.path.push_back(Selector::PopBody);
    else if (part == "PushArg") p.path.push_back(Selector::PushArg);
    else if (part == "PushBody") p.path.push_back(Selector::PushBody);
    else if (part == "SeqLeft") p.path.push_back(Selector::SeqLeft);
    else if (part == "SeqRight") p.path.push_back(Selector::SeqRight);
    else return std::nullopt;
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return p;
}

namespace {

const TermPtr* child_of(const TermPtr& t, Selector s) {
  switch (s) {
    case Selector::PopBody: return t->kind == TermKind::Pop ? &t->body : nullptr;
    case Selector::PushArg: return t->kind == TermKind::Push ? &t->arg : nullptr;
    case Selector::PushBody: return t->kind == TermKind::Push ? &t->body : nullptr;
    case Selector::SeqLeft: return t->kind == TermKind::Seq ? &t->left : nullptr;
    case Selector::SeqRight: return t->kind == TermKind::Seq ? &t->right : nullptr;
  }
  return nullptr;
}

} // namespace

std::optional<TermPtr> subterm_at(const TermPtr& t, const Position& p) {
  TermPtr cur = t;
  for (Selector s : p.path) {
    const TermPtr* next = child_of(cur, s);
    if (!next) return std::nullopt;
    cur = *next;
  }
  return cur;
}

TermPtr replace_at(const TermPtr& t, const Position& p, const TermPtr& replacement) {
  if (p.path.empty()) return replacement;
  Selector s = p.path.front();
  Position rest;
  rest.path.assign(p.path.begin() + 1, p.path.end());
  const TermPtr* next = child_of(t, s);
  if (!next) throw std::invalid_argument("replace_at: position invalid for term");
  TermPtr sub = replace_at(*next, rest, replacement);
  switch (t->kind) {
    case TermKind::Pop: return mk_pop(t->loc, t->binder, sub);
    case TermKind::Push:
      return s == Selector::PushArg ? mk_push(sub, t->loc, t->body)
                                    : mk_push(t->arg, t->loc, sub);
    case TermKind::Seq:
      return s == Selector::SeqLeft ? mk_seq(sub, t->right) : mk_seq(t->left, sub);
    default:
      throw std::invalid_argument("replace_at: position invalid for term");
  }
}

namespace {

void occurrences_rec(const Term* t, const std::string& x, Position& here,
                     std::vector<Position>& out) {
  switch (t->kind) {
    case TermKind::Var:
      if (t->var == x) out.push_back(here);
      return;
    case TermKind::Skip:
      return;
    case TermKind::Pop:
      if (t->binder == x) return;
      here.path.push_back(Selector::PopBody);
      occurrences_rec(t->body.get(), x, here, out);
      here.path.pop_back();
      return;
    case TermKind::Push:
      here.path.push_back(Selector::PushArg);
      occurrences_rec(t->arg.get(), x, here, out);
      here.path.back() = Selector::PushBody;
      occurrences_rec(t->body.get(), x, here, out);
      here.path.pop_back();
      return;
    case TermKind::Seq:
      here.path.push_back(Selector::SeqLeft);
      occurrences_rec(t->left.get(), x, here, out);
      here.path.back() = Selector::SeqRight;
      occurrences_rec(t->right.get(), x, here, out);
      here.path.pop_back();
      return;
  }
}

} // namespace

std::vector<Position> free_occurrences(const TermPtr& t, const std::string& x) {
  std::vector<Position> out;
  Position here;
  occurrences_rec(t.get(), x, here, out);
  return out;
}

// ---------------------------------------------------------------------------
// Enumeration

namespace {

struct Enumerator {
  std::vector<Location> locs;
  std::vector<std::string> vars;
  std::vector<std::string> binders; // canonical binder name per depth
  std::map<std::pair<std::size_t, std::size_t>, std::vector<TermPtr>> memo;

  const std::vector<TermPtr>& exact(std::size_t s, std::size_t depth) {
    auto key = std::make_pair(s, depth);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    std::vector<TermPtr> out;
    if (s == 1) {
      out.push_back(mk_skip());
      for (const auto& v : vars) out.push_back(mk_var(v));
      for (std::size_t j = 0; j < depth; ++j) out.push_back(mk_var(binders[j]));
    } else {
      for (const auto& loc : locs)
        for (const auto& b : exact(s - 1, depth + 1))
          out.push_back(mk_pop(loc, binders[depth], b));
      if (s >= 3) {
        for (std::size_t i = 1; i + 1 <= s - 1; ++i) {
          const auto& as = exact(i, depth);
          const auto& bs = exact(s - 1 - i, depth);
          for (const auto& loc : locs)
            for (const auto& a : as)
              for (const auto& b : bs) out.push_back(mk_push(a, loc, b));
          for (const auto& a : as)
            for (const auto& b : bs) out.push_back(mk_seq(a, b));
        }
      }
    }
    return memo.emplace(key, std::move(out)).first->second;
  }
};

} // namespace

std::vector<TermPtr> enumerate_terms(std::size_t max_size,
                                     const std::vector<Location>& locs,
                                     const std::vector<std::string>& vars) {
  Enumerator e;
  e.locs = locs;
  e.vars = vars;
  std::set<std::string> avoid(vars.begin(), vars.end());
  for (std::size_t d = 0; d < max_size + 1; ++d) {
    std::string name = "v" + std::to_string(d);
    while (avoid.count(name)) name += "x";
    avoid.insert(name);
    e.binders.push_back(name);
  }
  std::vector<TermPtr> out;
  for (std::size_t s = 1; s <= max_size; ++s) {
    const auto& batch = e.exact(s, 0);
    out.insert(out.end(), batch.begin(), batch.end());
  }
  return out;
}

std::vector<TermPtr> random_terms(std::size_t count, std::size_t max_size,
                                  const std::vector<Location>& locs,
                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick_loc = [&]() -> Location {
    if (locs.empty()) return default_location();
    return locs[rng() % locs.size()];
  };

  // Generates a closed term of size <= budget (>= 1).
  std::vector<std::string> bound;
  std::size_t binder_counter = 0;
  std::function<TermPtr(std::size_t)> gen = [&](std::size_t budget) -> TermPtr {
    auto leaf = [&]() -> TermPtr {
      if (!bound.empty() && rng() % 2 == 0) return mk_var(bound[rng() % bound.size()]);
      return mk_skip();
    };
    if (budget <= 1) return leaf();
    unsigned choice = rng() % (budget >= 3 ? 8u : 3u);
    if (choice <= 1) { // pop, twice as likely: binders make variables reachable
      std::string b = "r" + std::to_string(binder_counter++);
      bound.push_back(b);
      TermPtr body = gen(budget - 1);
      bound.pop_back();
      return mk_pop(pick_loc(), b, body);
    }
    if (choice == 2) return leaf();
    std::size_t left_budget = 1 + rng() % (budget - 2);
    if (choice <= 5) {
      TermPtr a = gen(left_budget);
      return mk_push(a, pick_loc(), gen(budget - 1 - left_budget));
    }
    TermPtr l = gen(left_budget);
    return mk_seq(l, gen(budget - 1 - left_budget));
  };

  std::vector<TermPtr> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t budget = 1 + rng() % max_size;
    out.push_back(gen(budget));
  }
  return out;
}

} // namespace fmc
