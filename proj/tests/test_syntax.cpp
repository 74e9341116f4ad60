#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fmc/syntax.hpp"
#include "oracles.hpp"

using namespace fmc;

namespace {

const Location kA("a");
const Location kB("b");

TermPtr P(const char* s) { return parse(s); }

} // namespace

TEST_CASE("parse elaborates the default location and binds ; loosely") {
  CHECK(P("*")->kind == TermKind::Skip);

  TermPtr t = P("[*].<x>.x");
  REQUIRE(t->kind == TermKind::Push);
  CHECK(t->loc == default_location());
  CHECK(t->arg->kind == TermKind::Skip);
  REQUIRE(t->body->kind == TermKind::Pop);
  CHECK(t->body->loc == default_location());
  CHECK(t->body->binder == "x");
  CHECK(t->body->body->kind == TermKind::Var);

  TermPtr g = P("a<x>.[x]a.m");
  REQUIRE(g->kind == TermKind::Pop);
  CHECK(g->loc == kA);
  REQUIRE(g->body->kind == TermKind::Push);
  CHECK(g->body->loc == kA);
  CHECK(g->body->arg->var == "x");
  CHECK(g->body->body->var == "m");

  // a prefix body swallows the rest of the sequence
  TermPtr s = P("<x>.a ; b");
  REQUIRE(s->kind == TermKind::Pop);
  CHECK(s->body->kind == TermKind::Seq);
  // parenthesized override
  TermPtr s2 = P("(<x>.a) ; b");
  CHECK(s2->kind == TermKind::Seq);

  // ; right-associates
  TermPtr r = P("x;y;z");
  REQUIRE(r->kind == TermKind::Seq);
  CHECK(r->left->kind == TermKind::Var);
  CHECK(r->right->kind == TermKind::Seq);

  CHECK(alpha_eq(P("# comment\n *"), mk_skip()));
}

TEST_CASE("parse errors carry a source position") {
  CHECK_THROWS_AS(P("[*].<x>"), ParseError);
  CHECK_THROWS_AS(P("[*.x"), ParseError);
  CHECK_THROWS_AS(P("(x;y"), ParseError);
  CHECK_THROWS_AS(P(""), ParseError);
  CHECK_THROWS_AS(P("x@"), ParseError);
  try {
    P("x;\n  @");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
    CHECK(e.column == 3);
  }
}

TEST_CASE("wildcard binder parses fresh and never captures") {
  TermPtr t = P("a<_>.[x]a.*");
  REQUIRE(t->kind == TermKind::Pop);
  CHECK(t->binder != "x");
  CHECK(!occurs_free(t->body, t->binder));
  CHECK(pretty(t) == "a<_>.[x]a.*");
  CHECK(alpha_eq(parse(pretty(t)), t));
}

TEST_CASE("pretty prints the expected concrete forms") {
  CHECK(pretty(mk_skip()) == "*");
  CHECK(pretty(mk_seq(mk_skip(), mk_skip())) == "*;*");
  CHECK(pretty(mk_push(mk_skip(), kB, mk_pop(kA, "x", mk_skip()))) == "[*]b.a<x>.*");
  CHECK(pretty(P("(<x>.a);b")) == "(<x>.a);b");
  CHECK(pretty(P("(x;y);z")) == "(x;y);z");
}

TEST_CASE("pretty/parse round-trip over all small terms") {
  auto all = enumerate_terms(5, {default_location(), kA}, {"u"});
  for (const auto& t : all) {
    CAPTURE(pretty(t));
    CHECK(alpha_eq(parse(pretty(t)), t));
  }
}

TEST_CASE("free_vars follows the binding structure") {
  CHECK(free_vars(P("x")) == std::set<std::string>{"x"});
  CHECK(free_vars(P("<x>.x")).empty());
  TermPtr t = mk_push(mk_var("y"), kA, mk_pop(kA, "y", mk_var("y")));
  CHECK(free_vars(t) == std::set<std::string>{"y"});
}

TEST_CASE("locations are syntactically computable") {
  CHECK(locations(P("*")).empty());
  CHECK(locations(P("[*]b.a<x>.*")) == std::set<Location>{kA, kB});
  CHECK(locations(P("[*].*")) == std::set<Location>{default_location()});
}

TEST_CASE("size follows the stated clauses") {
  CHECK(term_size(P("*")) == 1);
  CHECK(term_size(P("*;*")) == 3);
  CHECK(term_size(P("[*].<x>.x")) == 4);
}

TEST_CASE("substitute: spec cases") {
  CHECK(alpha_eq(substitute(mk_skip(), "x", P("x")), mk_skip()));
  CHECK(alpha_eq(substitute(mk_skip(), "x", P("y")), P("y")));

  // capture case: {y/x}(<y>.x) must rename the binder
  TermPtr m = mk_pop(default_location(), "y", mk_var("x"));
  TermPtr r = substitute(mk_var("y"), "x", m);
  REQUIRE(r->kind == TermKind::Pop);
  CHECK(r->binder != "y");
  CHECK(r->body->var == "y");
  CHECK(oracle::substitute_matches_oracle(mk_var("y"), "x", m, r));
}

TEST_CASE("substitute matches the nameless oracle on random triples") {
  auto pool = enumerate_terms(5, {default_location(), kA}, {"x", "y"});
  std::mt19937_64 rng(7);
  for (int i = 0; i < 4000; ++i) {
    const TermPtr& n = pool[rng() % pool.size()];
    const TermPtr& m = pool[rng() % pool.size()];
    const char* x = (rng() % 2) ? "x" : "y";
    TermPtr r = substitute(n, x, m);
    CAPTURE(pretty(n));
    CAPTURE(pretty(m));
    CAPTURE(x);
    CHECK(oracle::substitute_matches_oracle(n, x, m, r));
  }
}

TEST_CASE("substitute: free-variable and size laws") {
  auto pool = enumerate_terms(5, {default_location(), kA}, {"x", "y"});
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const TermPtr& n = pool[rng() % pool.size()];
    const TermPtr& m = pool[rng() % pool.size()];
    TermPtr r = substitute(n, "x", m);

    auto fv_m = free_vars(m);
    auto fv_n = free_vars(n);
    auto fv_r = free_vars(r);
    std::set<std::string> bound = fv_m;
    bound.erase("x");
    if (fv_m.count("x"))
      for (const auto& v : fv_n) bound.insert(v);
    CHECK(fv_r == bound);

    std::size_t k = free_occurrences(m, "x").size();
    CHECK(term_size(r) == term_size(m) + k * (term_size(n) - 1));
  }
}

TEST_CASE("apply_subst_map is simultaneous") {
  CHECK(alpha_eq(apply_subst_map({}, P("x;y")), P("x;y")));
  CHECK(alpha_eq(apply_subst_map({{"x", mk_skip()}}, P("x")), mk_skip()));
  SubstMap swap{{"x", mk_var("y")}, {"y", mk_var("x")}};
  CHECK(alpha_eq(apply_subst_map(swap, P("x;y")), P("y;x")));

  // against a sequential-with-fresh-intermediate oracle
  auto pool = enumerate_terms(4, {default_location()}, {"x", "y"});
  for (const auto& t : pool) {
    TermPtr direct = apply_subst_map(swap, t);
    TermPtr staged = substitute(mk_var("y"), "tmp0",
                                substitute(mk_var("x"), "y",
                                           substitute(mk_var("tmp0"), "x", t)));
    CHECK(alpha_eq(direct, staged));
  }
}

TEST_CASE("alpha_eq: spec cases") {
  CHECK(alpha_eq(P("<x>.x"), P("<y>.y")));
  CHECK(!alpha_eq(P("<x>.y"), P("<y>.y")));
  CHECK(!alpha_eq(P("[*]a.*"), P("[*]b.*"))); // locations are free constants
}

TEST_CASE("alpha_eq is an equivalence and a congruence; alpha_key agrees") {
  auto pool = enumerate_terms(4, {default_location(), kA}, {"x"});
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1500; ++i) {
    const TermPtr& s = pool[rng() % pool.size()];
    const TermPtr& t = pool[rng() % pool.size()];
    const TermPtr& u = pool[rng() % pool.size()];
    CHECK(alpha_eq(s, s));
    CHECK(alpha_eq(s, t) == alpha_eq(t, s));
    if (alpha_eq(s, t) && alpha_eq(t, u)) CHECK(alpha_eq(s, u));
    CHECK(alpha_eq(s, t) == (alpha_key(s) == alpha_key(t)));
    if (alpha_eq(s, t)) {
      CHECK(alpha_eq(mk_pop(kA, "z", s), mk_pop(kA, "w", substitute(mk_var("w"), "z", t))));
      CHECK(alpha_eq(mk_push(s, kA, u), mk_push(t, kA, u)));
      CHECK(alpha_eq(mk_seq(u, s), mk_seq(u, t)));
    }
  }
}

TEST_CASE("enumerate_terms: alphabets, uniqueness, counts") {
  auto only_skip = enumerate_terms(1, {default_location()}, {});
  REQUIRE(only_skip.size() == 1);
  CHECK(only_skip[0]->kind == TermKind::Skip);

  auto two = enumerate_terms(1, {default_location()}, {"x"});
  CHECK(two.size() == 2);

  // uniqueness up to alpha
  auto all = enumerate_terms(5, {default_location(), kA}, {"x"});
  std::set<std::string> keys;
  for (const auto& t : all) keys.insert(alpha_key(t));
  CHECK(keys.size() == all.size());

  // counts against the independent recursion over the grammar
  CHECK(all.size() == oracle::count_upto(5, 2, 1));
  auto closed3 = enumerate_terms(3, {default_location()}, {});
  CHECK(closed3.size() == oracle::count_upto(3, 1, 0));
  CHECK(closed3.size() == 8); // regression pin
  CHECK(enumerate_terms(7, {default_location(), kA}, {}).size() ==
        oracle::count_upto(7, 2, 0));
}

TEST_CASE("random_terms is deterministic per seed and respects the size bound") {
  auto a = random_terms(64, 15, {default_location(), kA}, 42);
  auto b = random_terms(64, 15, {default_location(), kA}, 42);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(alpha_eq(a[i], b[i]));
    CHECK(term_size(a[i]) <= 15);
    CHECK(free_vars(a[i]).empty());
  }
  auto c = random_terms(64, 15, {default_location(), kA}, 43);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!alpha_eq(a[i], c[i])) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("positions address subterms") {
  TermPtr t = P("[x]a.(y;z)");
  Position root;
  CHECK(alpha_eq(*subterm_at(t, root), t));
  Position arg = root.child(Selector::PushArg);
  CHECK((*subterm_at(t, arg))->var == "x");
  Position right = root.child(Selector::PushBody).child(Selector::SeqRight);
  CHECK((*subterm_at(t, right))->var == "z");
  CHECK(!subterm_at(t, right.child(Selector::PopBody)).has_value());
  CHECK(alpha_eq(replace_at(t, arg, mk_skip()), P("[*]a.(y;z)")));
  CHECK(!arg.spine());
  CHECK(right.spine());

  CHECK(position_to_string(right) == "PushBody/SeqRight");
  CHECK(position_from_string("PushBody/SeqRight")->path == right.path);
  CHECK(position_from_string("")->path.empty());
  CHECK(!position_from_string("Nope").has_value());
}
