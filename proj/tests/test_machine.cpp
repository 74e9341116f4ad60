#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fmc/machine.hpp"

using namespace fmc;

namespace {

const Location kA("a");
const Location kB("b");

TermPtr P(const char* s) { return parse(s); }

MachineState st(Memory mem, const char* t) { return {std::move(mem), P(t), {}}; }

} // namespace

TEST_CASE("step: the four transitions") {
  // push moves the argument onto memory
  StepOutcome o = step(st({}, "[*].<x>.x"));
  REQUIRE(o.kind == StepOutcome::Kind::Next);
  REQUIRE(o.next.memory.stack(default_location()) != nullptr);
  CHECK(o.next.memory.stack(default_location())->size() == 1);
  CHECK(alpha_eq(o.next.focus, P("<x>.x")));
  CHECK(o.next.kont.empty());

  // seq pushes the continuation
  o = step(st({}, "x;y"));
  REQUIRE(o.kind == StepOutcome::Kind::Next);
  CHECK(alpha_eq(o.next.focus, P("x")));
  REQUIRE(o.next.kont.size() == 1);
  CHECK(alpha_eq(o.next.kont.front(), P("y")));

  // pop substitutes the top of the stack
  Memory m;
  m.push(kA, mk_skip());
  o = step(st(m, "a<x>.[x]a.x"));
  REQUIRE(o.kind == StepOutcome::Kind::Next);
  CHECK(o.next.memory.empty());
  CHECK(alpha_eq(o.next.focus, P("[*]a.*")));

  // skip pops the continuation
  MachineState s{{}, mk_skip(), {P("y")}};
  o = step(s);
  REQUIRE(o.kind == StepOutcome::Kind::Next);
  CHECK(alpha_eq(o.next.focus, P("y")));
  CHECK(o.next.kont.empty());
}

TEST_CASE("step: final and failure states") {
  StepOutcome o = step(st({}, "*"));
  CHECK(o.kind == StepOutcome::Kind::Final);

  // a final state may carry leftover memory
  Memory m;
  m.push(kA, mk_var("x"));
  o = step({m, mk_skip(), {}});
  CHECK(o.kind == StepOutcome::Kind::Final);

  o = step(st({}, "x"));
  REQUIRE(o.kind == StepOutcome::Kind::Failure);
  CHECK(o.failure == FailureKind::VarFocus);

  o = step(st({}, "a<x>.*"));
  REQUIRE(o.kind == StepOutcome::Kind::Failure);
  CHECK(o.failure == FailureKind::EmptyPop);
  CHECK(o.failure_loc == kA);
}

TEST_CASE("run counts states, not transitions") {
  RunResult r = run({}, P("*"), 10);
  REQUIRE(r.status == RunResult::Status::Success);
  CHECK(r.length == 1);
  CHECK(r.final_memory.empty());

  r = run({}, P("[*].<x>.x"), 10);
  REQUIRE(r.status == RunResult::Status::Success);
  CHECK(r.length == 3);
  CHECK(r.final_memory.empty());

  r = run({}, P("*;*"), 10);
  REQUIRE(r.status == RunResult::Status::Success);
  CHECK(r.length == 3);

  r = run({}, P("x"), 10);
  CHECK(r.status == RunResult::Status::Failed);
  CHECK(r.length == 1);

  // leftover memory is the output
  r = run({}, P("[x]a.*"), 10);
  REQUIRE(r.status == RunResult::Status::Success);
  CHECK(r.final_memory.stack(kA)->size() == 1);
}

TEST_CASE("run: trace recording and fuel") {
  RunResult r = run({}, P("[*].<x>.x"), 10, true);
  REQUIRE(r.trace.has_value());
  REQUIRE(r.trace->size() == 3);
  CHECK(alpha_eq(r.trace->front().focus, P("[*].<x>.x")));
  CHECK(r.trace->back().focus->kind == TermKind::Skip);

  TermPtr omega = P("[<x>.[x].x].<x>.[x].x");
  r = run({}, omega, 100);
  CHECK(r.status == RunResult::Status::FuelExhausted);

  // exactly enough fuel succeeds; one less exhausts
  r = run({}, P("[*].<x>.x"), 3);
  CHECK(r.status == RunResult::Status::Success);
  r = run({}, P("[*].<x>.x"), 2);
  CHECK(r.status == RunResult::Status::FuelExhausted);
}

TEST_CASE("eval_big: counts equal rule instances") {
  EvalResult e = eval_big({}, P("*"), 10);
  REQUIRE(e.status == EvalResult::Status::Done);
  CHECK(e.tree->count == 1);
  CHECK(e.tree->rule == EvalRule::Unit);

  e = eval_big({}, P("*;*"), 10);
  REQUIRE(e.status == EvalResult::Status::Done);
  CHECK(e.tree->count == 3);
  CHECK(e.tree->rule == EvalRule::SeqRule);
  REQUIRE(e.tree->children.size() == 2);
  CHECK(e.tree->children[0]->count == 1);

  Memory m;
  m.push(default_location(), mk_skip());
  e = eval_big(m, P("<x>.x"), 10);
  REQUIRE(e.status == EvalResult::Status::Done);
  CHECK(e.tree->count == 2);
  CHECK(e.out.empty());

  CHECK(eval_big({}, P("x"), 10).status == EvalResult::Status::Stuck);
  CHECK(eval_big({}, P("a<x>.*"), 10).status == EvalResult::Status::Stuck);
}

TEST_CASE("eval_big: tree invariants (count = 1 + children, seq = m+n+1)") {
  EvalResult e = eval_big({}, P("([*].<x>.x);*"), 100);
  REQUIRE(e.status == EvalResult::Status::Done);
  const auto& t = e.tree;
  CHECK(t->count == t->children[0]->count + t->children[1]->count + 1);
  CHECK(t->children[0]->count == 3);
  CHECK(alpha_eq(t->in, Memory{}));
  CHECK(alpha_eq(t->out, Memory{}));
}

TEST_CASE("check_agreement: examples") {
  Verdict v = check_agreement(P("*"), {}, 10);
  CHECK(v.kind == Verdict::Kind::Agree);
  CHECK(v.length == 1);

  v = check_agreement(P("[*].<x>.x"), {}, 10);
  CHECK(v.kind == Verdict::Kind::Agree);
  CHECK(v.length == 3);

  v = check_agreement(P("[<x>.[x].x].<x>.[x].x"), {}, 100);
  CHECK(v.kind == Verdict::Kind::BothDiverge);

  v = check_agreement(P("x;y"), {}, 10);
  CHECK(v.kind == Verdict::Kind::BothFail);
}

TEST_CASE("agreement holds on all small terms under small memories") {
  auto locs = std::vector<Location>{default_location(), kA};
  auto all = enumerate_terms(5, locs, {});
  for (std::size_t d = 0; d <= 2; ++d) {
    Memory mem = dimension_memory(d, locs);
    for (const auto& t : all) {
      Verdict v = check_agreement(t, mem, 300);
      CAPTURE(pretty(t));
      CAPTURE(d);
      CHECK(v.kind != Verdict::Kind::Mismatch);
    }
  }
}

TEST_CASE("dimension generators produce the minimal witnesses") {
  CHECK(alpha_eq(dimension_term(0, {kA}), P("*")));
  CHECK(alpha_eq(dimension_term(1, {kA}), P("[*]a.*")));
  CHECK(alpha_eq(dimension_term(2, {kA}), P("[[*]a.*]a.[[*]a.*]a.*")));

  CHECK(dimension_memory(0, {kA}).empty());
  Memory m1 = dimension_memory(1, {kA});
  REQUIRE(m1.stack(kA) != nullptr);
  REQUIRE(m1.stack(kA)->size() == 1);
  CHECK(alpha_eq(m1.stack(kA)->front(), P("*")));

  Memory m2 = dimension_memory(1, {kA, kB});
  CHECK(m2.stack(kA)->size() == 1);
  CHECK(m2.stack(kB)->size() == 1);

  SubstMap s0 = dimension_subst(0, {kA}, {"x"});
  CHECK(alpha_eq(s0.at("x"), P("*")));
  SubstMap s1 = dimension_subst(1, {kA}, {"x", "y"});
  CHECK(alpha_eq(s1.at("x"), P("[*]a.*")));
  CHECK(alpha_eq(s1.at("y"), P("[*]a.*")));
  CHECK(dimension_subst(3, {kA}, {}).empty());
}

TEST_CASE("dimension checkers accept generated witnesses, monotonically") {
  std::vector<Location> locs{kA, kB};
  for (std::size_t d = 0; d <= 3; ++d) {
    TermPtr t = dimension_term(d, locs);
    Memory m = dimension_memory(d, locs);
    for (std::size_t lower = 0; lower <= d; ++lower) {
      CHECK(is_term_of_dimension(t, lower, locs));
      CHECK(is_memory_of_dimension(m, lower, locs));
    }
    if (d < 3) {
      CHECK(!is_term_of_dimension(t, d + 1, locs));
      CHECK(!is_memory_of_dimension(m, d + 1, locs));
    }
  }
  CHECK(!is_term_of_dimension(P("<x>.*"), 0, {kA}));
}

TEST_CASE("memory canonicalization: push then pop is the identity") {
  auto pool = enumerate_terms(4, {default_location(), kA}, {"x"});
  Memory base;
  base.push(kA, mk_skip());
  for (const auto& t : pool) {
    Memory m = base;
    m.push(kB, t);
    auto popped = m.pop(kB);
    REQUIRE(popped.has_value());
    CHECK(alpha_eq(*popped, t));
    CHECK(alpha_eq(m, base));
    CHECK(m.stacks.count(kB) == 0); // no empty stack left behind
  }
}
