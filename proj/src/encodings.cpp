#include "fmc/encodings.hpp"

#include <cctype>
#include <stdexcept>

namespace fmc {

LambdaPtr lam_var(std::string name) {
  auto t = std::make_shared<LambdaTerm>();
  t->kind = LambdaTerm::Kind::Var;
  t->var = std::move(name);
  return t;
}

LambdaPtr lam_abs(std::string binder, LambdaPtr body) {
  auto t = std::make_shared<LambdaTerm>();
  t->kind = LambdaTerm::Kind::Lam;
  t->var = std::move(binder);
  t->body = std::move(body);
  return t;
}

LambdaPtr lam_app(LambdaPtr fun, LambdaPtr arg) {
  auto t = std::make_shared<LambdaTerm>();
  t->kind = LambdaTerm::Kind::App;
  t->fun = std::move(fun);
  t->arg = std::move(arg);
  return t;
}

// ---------------------------------------------------------------------------
// Lambda parser: \x. M, juxtaposition, parentheses

namespace {

struct LambdaParser {
  std::string_view src;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  }

  char peek() {
    skip_ws();
    return pos < src.size() ? src[pos] : '\0';
  }

  std::string ident() {
    skip_ws();
    std::size_t start = pos;
    while (pos < src.size() &&
           (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
      ++pos;
    if (start == pos) throw std::invalid_argument("lambda syntax: expected an identifier");
    return std::string(src.substr(start, pos - start));
  }

  LambdaPtr parse() {
    LambdaPtr t = term();
    skip_ws();
    if (pos != src.size()) throw std::invalid_argument("lambda syntax: trailing input");
    return t;
  }

  LambdaPtr term() {
    if (peek() == '\\') {
      ++pos;
      std::string x = ident();
      skip_ws();
      if (pos >= src.size() || src[pos] != '.')
        throw std::invalid_argument("lambda syntax: expected '.' after the binder");
      ++pos;
      return lam_abs(std::move(x), term());
    }
    LambdaPtr t = atom();
    while (true) {
      char c = peek();
      if (c == '(' || std::isalpha(static_cast<unsigned char>(c)))
        t = lam_app(std::move(t), atom());
      else
        break;
    }
    return t;
  }

  LambdaPtr atom() {
    char c = peek();
    if (c == '(') {
      ++pos;
      LambdaPtr t = term();
      skip_ws();
      if (pos >= src.size() || src[pos] != ')')
        throw std::invalid_argument("lambda syntax: expected ')'");
      ++pos;
      return t;
    }
    if (c == '\\') return term();
    return lam_var(ident());
  }
};

} // namespace

LambdaPtr parse_lambda(std::string_view text) { return LambdaParser{text}.parse(); }

std::string pretty_lambda(const LambdaPtr& t) {
  switch (t->kind) {
    case LambdaTerm::Kind::Var:
      return t->var;
    case LambdaTerm::Kind::Lam:
      return "\\" + t->var + ". " + pretty_lambda(t->body);
    case LambdaTerm::Kind::App: {
      std::string f = t->fun->kind == LambdaTerm::Kind::Lam ? "(" + pretty_lambda(t->fun) + ")"
                                                            : pretty_lambda(t->fun);
      std::string a = t->arg->kind == LambdaTerm::Kind::Var ? pretty_lambda(t->arg)
                                                            : "(" + pretty_lambda(t->arg) + ")";
      return f + " " + a;
    }
  }
  return "";
}

// ---------------------------------------------------------------------------
// Encoders

TermPtr encode_cbn(const LambdaPtr& t) {
  switch (t->kind) {
    case LambdaTerm::Kind::Var:
      return mk_var(t->var);
    case LambdaTerm::Kind::Lam:
      return mk_pop(default_location(), t->var, encode_cbn(t->body));
    case LambdaTerm::Kind::App:
      return mk_push(encode_cbn(t->arg), default_location(), encode_cbn(t->fun));
  }
  throw std::logic_error("encode_cbn: bad term");
}

TermPtr encode_cbv_value(const LambdaPtr& v) {
  switch (v->kind) {
    case LambdaTerm::Kind::Var:
      return mk_var(v->var);
    case LambdaTerm::Kind::Lam:
      return mk_pop(default_location(), v->var, encode_cbv(v->body));
    case LambdaTerm::Kind::App:
      throw std::invalid_argument("encode_cbv_value: an application is not a value");
  }
  throw std::logic_error("encode_cbv_value: bad term");
}

TermPtr encode_cbv(const LambdaPtr& t) {
  switch (t->kind) {
    case LambdaTerm::Kind::Var:
    case LambdaTerm::Kind::Lam:
      return mk_push(encode_cbv_value(t), default_location(), mk_skip());
    case LambdaTerm::Kind::App: {
      TermPtr arg = encode_cbv(t->arg);
      if (t->fun->kind != LambdaTerm::Kind::App)
        return mk_seq(std::move(arg), encode_cbv_value(t->fun)); // v t = t ; v
      // general function position: run it, then pop and enter the value
      TermPtr fun = encode_cbv(t->fun);
      return mk_seq(std::move(arg),
                    mk_seq(std::move(fun),
                           mk_pop(default_location(), "f", mk_var("f"))));
    }
  }
  throw std::logic_error("encode_cbv: bad term");
}

// ---------------------------------------------------------------------------
// Store terms

StoreValuePtr store_var(std::string name) {
  auto v = std::make_shared<StoreValue>();
  v->kind = StoreValue::Kind::Var;
  v->var = std::move(name);
  return v;
}

StoreValuePtr store_lam(std::string binder, StoreCompPtr body) {
  auto v = std::make_shared<StoreValue>();
  v->kind = StoreValue::Kind::Lam;
  v->var = std::move(binder);
  v->body = std::move(body);
  return v;
}

StoreCompPtr store_ret(StoreValuePtr v) {
  auto m = std::make_shared<StoreComp>();
  m->kind = StoreComp::Kind::Ret;
  m->value = std::move(v);
  return m;
}

StoreCompPtr store_bind(StoreCompPtr pre, StoreValuePtr v) {
  auto m = std::make_shared<StoreComp>();
  m->kind = StoreComp::Kind::Bind;
  m->comp = std::move(pre);
  m->value = std::move(v);
  return m;
}

StoreCompPtr store_get(Location loc, std::string binder, StoreCompPtr body) {
  auto m = std::make_shared<StoreComp>();
  m->kind = StoreComp::Kind::Get;
  m->loc = std::move(loc);
  m->binder = std::move(binder);
  m->comp = std::move(body);
  return m;
}

StoreCompPtr store_set(Location loc, StoreValuePtr v, StoreCompPtr cont) {
  auto m = std::make_shared<StoreComp>();
  m->kind = StoreComp::Kind::Set;
  m->loc = std::move(loc);
  m->value = std::move(v);
  m->comp = std::move(cont);
  return m;
}

namespace {

struct StoreParser {
  std::string_view src;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  }

  bool at(const char* kw) {
    skip_ws();
    std::size_t n = std::string_view(kw).size();
    if (src.substr(pos, n) != kw) return false;
    char after = pos + n < src.size() ? src[pos + n] : ' ';
    return !std::isalnum(static_cast<unsigned char>(after)) && after != '_';
  }

  bool eat(const char* kw) {
    if (!at(kw)) return false;
    pos += std::string_view(kw).size();
    return true;
  }

  std::string ident() {
    skip_ws();
    std::size_t start = pos;
    while (pos < src.size() &&
           (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
      ++pos;
    if (start == pos) throw std::invalid_argument("store syntax: expected an identifier");
    return std::string(src.substr(start, pos - start));
  }

  void expect(char c) {
    skip_ws();
    if (pos >= src.size() || src[pos] != c)
      throw std::invalid_argument(std::string("store syntax: expected '") + c + "'");
    ++pos;
  }

  StoreCompPtr parse() {
    StoreCompPtr m = comp();
    skip_ws();
    if (pos != src.size()) throw std::invalid_argument("store syntax: trailing input");
    return m;
  }

  StoreCompPtr comp() {
    StoreCompPtr m = simple();
    while (true) {
      skip_ws();
      if (src.substr(pos, 3) == ">>=") {
        pos += 3;
        m = store_bind(std::move(m), value());
      } else {
        break;
      }
    }
    return m;
  }

  StoreCompPtr simple() {
    if (eat("ret")) return store_ret(value());
    if (eat("get")) {
      Location loc{ident()};
      expect('(');
      StoreValuePtr f = value();
      expect(')');
      if (f->kind != StoreValue::Kind::Lam)
        throw std::invalid_argument("store syntax: get needs a lambda");
      return store_get(std::move(loc), f->var, f->body);
    }
    if (eat("set")) {
      Location loc{ident()};
      StoreValuePtr v = value();
      return store_set(std::move(loc), std::move(v), simple_or_paren());
    }
    skip_ws();
    if (pos < src.size() && src[pos] == '(') {
      ++pos;
      StoreCompPtr m = comp();
      expect(')');
      return m;
    }
    throw std::invalid_argument("store syntax: expected ret, get, set, or '('");
  }

  StoreCompPtr simple_or_paren() {
    skip_ws();
    if (pos < src.size() && src[pos] == '(') {
      ++pos;
      StoreCompPtr m = comp();
      expect(')');
      return m;
    }
    return simple();
  }

  StoreValuePtr value() {
    skip_ws();
    if (pos < src.size() && src[pos] == '(') {
      ++pos;
      StoreValuePtr v = value();
      expect(')');
      return v;
    }
    if (pos < src.size() && src[pos] == '\\') {
      ++pos;
      std::string x = ident();
      expect('.');
      return store_lam(std::move(x), comp());
    }
    return store_var(ident());
  }
};

std::string pretty_store_value(const StoreValuePtr& v) {
  if (v->kind == StoreValue::Kind::Var) return v->var;
  return "(\\" + v->var + ". " + pretty_store(v->body) + ")";
}

} // namespace

StoreCompPtr parse_store(std::string_view text) { return StoreParser{text}.parse(); }

std::string pretty_store(const StoreCompPtr& m) {
  switch (m->kind) {
    case StoreComp::Kind::Ret:
      return "ret " + pretty_store_value(m->value);
    case StoreComp::Kind::Bind:
      return pretty_store(m->comp) + " >>= " + pretty_store_value(m->value);
    case StoreComp::Kind::Get:
      return "get " + m->loc.name + " ((\\" + m->binder + ". " + pretty_store(m->comp) + "))";
    case StoreComp::Kind::Set:
      return "set " + m->loc.name + " " + pretty_store_value(m->value) + " (" +
             pretty_store(m->comp) + ")";
  }
  return "";
}

TermPtr encode_store_value(const StoreValuePtr& v) {
  if (v->kind == StoreValue::Kind::Var) return mk_var(v->var);
  return mk_pop(default_location(), v->var, encode_store(v->body));
}

TermPtr encode_store(const StoreCompPtr& m) {
  switch (m->kind) {
    case StoreComp::Kind::Ret: // [V] = [V].*
      return mk_push(encode_store_value(m->value), default_location(), mk_skip());
    case StoreComp::Kind::Bind: // M >>= V = M;V
      return mk_seq(encode_store(m->comp), encode_store_value(m->value));
    case StoreComp::Kind::Get: // get_a(\x.M) = a<x>.[x]a.M
      return mk_pop(m->loc, m->binder,
                    mk_push(mk_var(m->binder), m->loc, encode_store(m->comp)));
    case StoreComp::Kind::Set: { // set_a(V,M) = a<_>.[V]a.M
      TermPtr value = encode_store_value(m->value);
      TermPtr cont = encode_store(m->comp);
      std::set<std::string> avoid = free_vars(value);
      auto fv = free_vars(cont);
      avoid.insert(fv.begin(), fv.end());
      std::string wild = fresh_name("_w", avoid);
      return mk_pop(m->loc, wild, mk_push(std::move(value), m->loc, std::move(cont)));
    }
  }
  throw std::logic_error("encode_store: bad term");
}

TermPtr derived_update(const Location& loc, const TermPtr& value, const TermPtr& cont) {
  std::set<std::string> avoid = free_vars(value);
  auto fv = free_vars(cont);
  avoid.insert(fv.begin(), fv.end());
  std::string wild = fresh_name("_w", avoid);
  return mk_pop(loc, wild, mk_push(value, loc, cont));
}

TermPtr derived_let_get(const Location& loc, const std::string& var, const TermPtr& cont,
                        bool simplified) {
  if (simplified) // a<x>.[x]a.M
    return mk_pop(loc, var, mk_push(mk_var(var), loc, cont));
  // (a<x>.[x]a.[x].*) ; <x>.M
  TermPtr lookup = derived_lookup(loc, true);
  return mk_seq(lookup, mk_pop(default_location(), var, cont));
}

TermPtr derived_lookup(const Location& loc, bool simplified) {
  // let-get with continuation [x].*
  std::string x = "x";
  TermPtr ret = mk_push(mk_var(x), default_location(), mk_skip());
  if (simplified) return mk_pop(loc, x, mk_push(mk_var(x), loc, ret));
  return derived_let_get(loc, x, ret, false);
}

} // namespace fmc
