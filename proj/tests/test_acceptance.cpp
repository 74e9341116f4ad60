// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line. Run via ctest or directly; the binary exits nonzero when a criterion
// fails.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "fmc/encodings.hpp"
#include "fmc/infer.hpp"
#include "fmc/serialize.hpp"
#include "store_oracle.hpp"

using namespace fmc;

namespace {

constexpr std::size_t kFuel = 10000;
constexpr std::uint64_t kSeed = 20;

const Location kA("a");
const Location kB("b");
TermPtr P(const char* s) { return parse(s); }
const char* kOmega = "[<x>.[x].x].<x>.[x].x";

const std::vector<Location>& suite_locations() {
  static const std::vector<Location> locs{default_location(), kA};
  return locs;
}

// Suite 1: all closed terms of size <= 7 over {lam, a}, plus 1000 seeded
// random closed terms of size <= 15.
const std::vector<TermPtr>& suite1() {
  static const std::vector<TermPtr> terms = [] {
    std::vector<TermPtr> ts = enumerate_terms(7, suite_locations(), {});
    auto extra = random_terms(1000, 15, suite_locations(), kSeed);
    ts.insert(ts.end(), extra.begin(), extra.end());
    return ts;
  }();
  return terms;
}

struct Criterion {
  int number;
  const char* name;
  std::size_t checks = 0;
  std::size_t failures = 0;

  Criterion(int n, const char* nm) : number(n), name(nm) {}

  void expect(bool ok, const TermPtr& t, const char* what) {
    ++checks;
    if (!ok) {
      ++failures;
      if (failures <= 5) {
        CAPTURE(pretty(t));
        CAPTURE(what);
        CHECK(ok);
      }
    }
  }

  ~Criterion() {
    CHECK(failures == 0);
    std::printf("ACCEPTANCE %2d %-28s %s (%zu checks, %zu failures)\n", number, name,
                failures == 0 ? "PASS" : "FAIL", checks, failures);
    std::fflush(stdout);
  }
};

// The dimension needed by a spine normal form: each abstraction on the spine
// pops one item of the next dimension down.
std::size_t spine_dimension(const TermPtr& w) {
  switch (w->kind) {
    case TermKind::Pop: return 1 + spine_dimension(w->body);
    case TermKind::Seq: return spine_dimension(w->right);
    case TermKind::Push: return spine_dimension(w->body);
    default: return 0;
  }
}

std::size_t pop_nesting_depth(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Var:
    case TermKind::Skip:
      return 0;
    case TermKind::Pop:
      return 1 + pop_nesting_depth(t->body);
    case TermKind::Push:
      return std::max(pop_nesting_depth(t->arg), pop_nesting_depth(t->body));
    case TermKind::Seq:
      return std::max(pop_nesting_depth(t->left), pop_nesting_depth(t->right));
  }
  return 0;
}

} // namespace

TEST_CASE("criterion 1: small-step and big-step semantics agree") {
  Criterion c(1, "semantics-agreement");
  for (const auto& t : suite1()) {
    Verdict v = check_agreement(t, {}, kFuel);
    c.expect(v.kind != Verdict::Kind::Mismatch, t, "machine and big-step disagree");
  }
}

TEST_CASE("criteria 2+3: state weights equal run lengths and step down by one") {
  Criterion c2(2, "weight-equals-run-length");
  Criterion c3(3, "step-ladder");
  for (const auto& t : suite1()) {
    RunResult r = run({}, t, kFuel);
    if (r.status != RunResult::Status::Success) {
      auto d = infer_weak_state({}, t, kFuel);
      c2.expect(!d.has_value(), t, "failed run must not yield a state derivation");
      continue;
    }
    auto ladder = infer_weak_state_ladder({}, t, kFuel);
    if (!ladder) {
      c2.expect(false, t, "successful run but no state derivation");
      continue;
    }
    const DerivPtr& d = ladder->front();
    CheckResult chk = check_derivation(d, TypeSystem::State);
    bool ok = chk.ok && chk.weight == r.length;
    // output type is []^f with f the final memory's dimensions
    const CompType& ty = comp_of(d);
    ok = ok && ty.input.empty() && ty.output.dims() == r.final_memory.dims();
    for (const auto& [loc, v] : ty.output.per_loc)
      for (const auto& coll : v) ok = ok && coll.elems.empty();
    c2.expect(ok, t, "state derivation mismatch");

    bool ladder_ok = ladder->size() == r.length;
    for (std::size_t k = 0; ladder_ok && k < ladder->size(); ++k) {
      CheckResult ck = check_derivation((*ladder)[k], TypeSystem::State);
      ladder_ok = ck.ok && ck.weight == r.length - k;
    }
    c3.expect(ladder_ok, t, "consecutive state weights must differ by exactly one");
  }
}

TEST_CASE("criterion 4: weighted spine subject expansion") {
  Criterion c(4, "weighted-spine-expansion");
  for (const auto& t : suite1()) {
    for (const auto& r : redexes(t, true)) {
      auto [reduct, payload] = apply_redex(t, r);
      auto dr = infer_weak(reduct, kFuel);
      auto dt = infer_weak(t, kFuel);
      c.expect(dr.has_value() == dt.has_value(), t,
               "weak typeability must be invariant under one spine step");
      if (!dr) continue;
      DerivPtr e = expand_spine_step(*dr, r, payload);
      std::size_t delta = (r.rule == Rule::Beta || r.rule == Rule::Next) ? 2 : 0;
      bool ok = weight(e) == weight(*dr) + delta;
      CheckResult chk = check_derivation(e, TypeSystem::Weak);
      ok = ok && chk.ok && alpha_eq(subject_term(e), t) &&
           type_equal(comp_of(e), comp_of(*dr)) && context_equal(e->ctx, (*dr)->ctx);
      c.expect(ok, t, "expansion must add exactly 2 (beta/next) or 0 and re-check");
    }
  }
}

TEST_CASE("criterion 5: the weak equivalence triangle") {
  Criterion c(5, "weak-triangle");
  for (const auto& t : suite1()) {
    bool typeable = infer_weak(t, kFuel).has_value();
    auto nf = spine_normalize(t, kFuel);
    bool normalizes = nf.has_value();

    std::vector<Location> locs;
    for (const auto& l : locations(t)) locs.push_back(l);
    std::size_t d = normalizes ? spine_dimension(nf->final_term()) : pop_nesting_depth(t);
    Memory mem = dimension_memory(d, locs);
    SubstMap sigma = dimension_subst(d, locs, free_vars(t));
    RunResult r = run(mem, apply_subst_map(sigma, t), kFuel);
    bool terminates = r.status == RunResult::Status::Success;

    c.expect(typeable == normalizes, t, "weak typeability vs spine normalization");
    c.expect(normalizes == terminates, t, "spine normalization vs machine termination");
  }
}

TEST_CASE("criterion 6: the non-beta measure strictly decreases") {
  Criterion c(6, "non-beta-measure");
  for (const auto& t : suite1()) {
    auto before = non_beta_measure(t);
    for (const auto& r : redexes(t, false)) {
      if (r.rule == Rule::Beta) continue;
      auto after = non_beta_measure(apply_redex(t, r).first);
      c.expect(after < before, t, "lexicographic decrease");
    }
  }
}

TEST_CASE("criteria 7+8: the strong triangle and perpetual replay") {
  Criterion c7(7, "strong-triangle");
  Criterion c8(8, "perpetual-replay");
  for (const auto& t : enumerate_terms(6, suite_locations(), {})) {
    SNVerdict v = bounded_sn_check(t, 200000, 64);
    if (v.kind == SNVerdict::Kind::Unknown) continue;
    bool sn = v.kind == SNVerdict::Kind::SN;

    PerpResult p = perp_eval(t, kFuel);
    auto d = infer_strong(t, kFuel);
    c7.expect((p.status == PerpResult::Status::Done) == sn, t,
              "perpetual evaluation vs the SN oracle");
    c7.expect(d.has_value() == sn, t, "strong typeability vs the SN oracle");
    if (d) {
      CheckResult chk = check_derivation(*d, TypeSystem::Strong);
      c7.expect(chk.ok && alpha_eq(subject_term(*d), t), t, "strong derivation re-checks");
      c7.expect(v.max_beta_next <= chk.weight, t,
                "weight bounds the beta+next count of the longest path");
    }

    if (p.status == PerpResult::Status::Done) {
      bool ok = check_perp_tree(p.tree);
      try {
        ReductionTrace tr = perp_replay(p.tree);
        ok = ok && alpha_eq(tr.start, t) && alpha_eq(tr.final_term(), p.tree->result) &&
             is_normal(tr.final_term());
        TermPtr cur = tr.start;
        for (const auto& s : tr.steps) {
          auto [next, payload] = apply_redex(cur, s.redex);
          ok = ok && alpha_eq(next, s.result);
          cur = next;
        }
      } catch (const std::exception&) {
        ok = false;
      }
      c8.expect(ok, t, "perpetual tree must replay to a valid trace ending normal");
    }
  }
}

TEST_CASE("criterion 9: non-inhabitation") {
  Criterion c(9, "non-inhabitation");
  auto unit = inhabit_search(parse_comp_type("=>"), 4);
  c.expect(unit.has_value() && alpha_eq(*unit, P("*")), P("*"),
           "the unique inhabitant of => is *");
  auto push = inhabit_search(parse_comp_type("=> [=>]"), 4);
  bool shape = push.has_value() && (*push)->kind == TermKind::Push &&
               (*push)->loc == default_location() && (*push)->body->kind == TermKind::Skip;
  c.expect(shape, push ? *push : P("*"), "=> [=>] is inhabited by a [M].* form");
  auto none = inhabit_search(parse_comp_type("=> [=>, => [=>]]"), 4);
  c.expect(!none.has_value(), P("*"), "=> [=>, => [=>]] has no inhabitant");
}

TEST_CASE("criterion 10: effect encodings") {
  Criterion c(10, "effect-encodings");

  // the three displayed reduction lines
  {
    TermPtr t = P("([y].*);<x>.[x].*");
    auto [s1, p1] = apply_redex(t, {{}, Rule::PrefixPush, true});
    Position inner;
    inner.path.push_back(Selector::PushBody);
    auto [s2, p2] = apply_redex(s1, {inner, Rule::Next, true});
    c.expect(alpha_eq(s2, P("[y].<x>.[x].*")), t, "([W].*);V replays to [W].V");
  }
  {
    TermPtr letget = derived_let_get(kA, "x", P("[x].*"), false);
    auto tr = spine_normalize(letget, kFuel);
    c.expect(tr.has_value() && alpha_eq(tr->final_term(), P("a<x>.[x]a.[x].*")) &&
                 tr->steps.size() == 5,
             letget, "let-get replays to the get clause");
  }
  {
    TermPtr set_then = mk_seq(derived_update(kA, P("x"), mk_skip()), P("[y].*"));
    auto tr = spine_normalize(set_then, kFuel);
    c.expect(tr.has_value() && alpha_eq(tr->final_term(), P("a<_>.[x]a.[y].*")) &&
                 tr->steps.size() == 3,
             set_then, "update prefixing replays to the set clause");
  }

  // five store programs against the reference interpreter
  struct Sample {
    const char* program;
    std::map<Location, const char*> cells;
  };
  const Sample samples[] = {
      {"get a (\\x. ret x)", {{kA, "\\u. ret u"}}},
      {"set a (\\z. ret (\\v. ret v)) (get a (\\x. ret x))", {{kA, "\\u. ret u"}}},
      {"get a (\\x. get b (\\y. set a y (set b x (ret x))))",
       {{kA, "\\u. ret u"}, {kB, "\\u. ret (\\w. ret w)"}}},
      {"get a (\\f. ret (\\w. ret w) >>= f)",
       {{kA, "\\u. set b u (ret u)"}, {kB, "\\u. ret u"}}},
      {"ret (\\x. ret x) >>= (\\f. set a f (ret f))", {{kA, "\\u. ret u"}}},
  };
  for (const auto& sample : samples) {
    StoreCompPtr prog = parse_store(sample.program);
    std::map<Location, StoreValuePtr> cells;
    Memory mem;
    for (const auto& [loc, src] : sample.cells) {
      StoreCompPtr wrapped = parse_store((std::string("ret (") + src + ")").c_str());
      cells[loc] = wrapped->value;
      mem.push(loc, encode_store_value(wrapped->value));
    }
    auto expected = oracle::run_store(prog, cells, 1000);
    TermPtr enc = encode_store(prog);
    RunResult r = run(mem, enc, kFuel);
    bool ok = expected.has_value() && r.status == RunResult::Status::Success;
    if (ok)
      for (const auto& [loc, value] : expected->cells) {
        const auto* stack = r.final_memory.stack(loc);
        ok = ok && stack && stack->size() == 1 &&
             alpha_eq(stack->back(), encode_store_value(value));
      }
    if (ok) {
      const auto* lam_stack = r.final_memory.stack(default_location());
      ok = lam_stack && alpha_eq(lam_stack->back(), encode_store_value(expected->value));
    }
    c.expect(ok, enc, "store program must match the reference interpreter");
  }

  // the negative pair: weakly typeable but not strongly
  TermPtr negative = P((std::string("[") + kOmega + "].<x>.*").c_str());
  auto dw = infer_weak(negative, kFuel);
  c.expect(dw.has_value() && weight(*dw) == 3 &&
               check_derivation(*dw, TypeSystem::Weak).ok,
           negative, "[Omega].<x>.* is weakly typeable with weight 3");
  c.expect(!infer_strong(negative, kFuel).has_value(), negative,
           "[Omega].<x>.* is not strongly typeable");
}
