#ifndef FMC_MACHINE_HPP
#define FMC_MACHINE_HPP

#include <deque>
#include <map>
#include <optional>
#include <vector>

#include "fmc/syntax.hpp"

namespace fmc {

// A family of operand stacks indexed by locations. The last element of each
// vector is the top of that stack. An absent key and an empty stack are the
// same memory; the canonical form stores no empty stacks.
struct Memory {
  std::map<Location, std::vector<TermPtr>> stacks;

  void push(const Location& loc, TermPtr t) { stacks[loc].push_back(std::move(t)); }

  std::optional<TermPtr> pop(const Location& loc) {
    auto it = stacks.find(loc);
    if (it == stacks.end() || it->second.empty()) return std::nullopt;
    TermPtr top = it->second.back();
    it->second.pop_back();
    if (it->second.empty()) stacks.erase(it);
    return top;
  }

  const std::vector<TermPtr>* stack(const Location& loc) const {
    auto it = stacks.find(loc);
    return it == stacks.end() ? nullptr : &it->second;
  }

  bool empty() const { return stacks.empty(); }

  std::map<Location, std::size_t> dims() const {
    std::map<Location, std::size_t> d;
    for (const auto& [loc, s] : stacks)
      if (!s.empty()) d[loc] = s.size();
    return d;
  }
};

bool alpha_eq(const Memory& a, const Memory& b);

// Pending sequenced terms; front() is the head.
using Kont = std::deque<TermPtr>;

bool alpha_eq(const Kont& a, const Kont& b);

struct MachineState {
  Memory memory;
  TermPtr focus;
  Kont kont;
};

bool alpha_eq(const MachineState& a, const MachineState& b);

enum class FailureKind { VarFocus, EmptyPop };

struct StepOutcome {
  enum class Kind { Next, Final, Failure };
  Kind kind;
  MachineState next;     // Kind::Next
  FailureKind failure{}; // Kind::Failure
  Location failure_loc;  // FailureKind::EmptyPop
};

// The four machine transitions; final and failure states as values.
// Deterministic: exactly one outcome per state.
StepOutcome step(const MachineState& s);

struct RunResult {
  enum class Status { Success, Failed, FuelExhausted };
  Status status;
  Memory final_memory;     // Success
  MachineState stopped_at; // Failed / FuelExhausted
  // States traversed, not transitions; a unit run has length 1.
  std::size_t length = 0;
  FailureKind failure{};
  Location failure_loc;
  std::optional<std::vector<MachineState>> trace;
};

// Iterates step from (mem, t, empty kont), traversing at most `fuel` states.
RunResult run(Memory mem, TermPtr t, std::size_t fuel, bool record_trace = false);

enum class EvalRule { Unit, SeqRule, PushRule, PopRule };

struct EvalTree;
using EvalTreePtr = std::shared_ptr<const EvalTree>;

struct EvalTree {
  EvalRule rule;
  Memory in;
  TermPtr subject;
  Memory out;
  std::size_t count; // rule instances in this subtree
  std::vector<EvalTreePtr> children;
};

struct EvalResult {
  enum class Status { Done, Stuck, FuelExhausted };
  Status status;
  Memory out;       // Done
  EvalTreePtr tree; // Done
};

// Big-step evaluation, driven by an explicit work stack rather than term
// recursion (the pop rule re-enters on a substituted term). `fuel` bounds the
// number of rule instances, which makes its budget directly comparable to the
// machine's state count.
EvalResult eval_big(Memory mem, TermPtr t, std::size_t fuel);

struct Verdict {
  enum class Kind { Agree, BothFail, BothDiverge, Mismatch };
  Kind kind;
  std::size_t length = 0; // Agree
  std::string details;    // Mismatch
};

Verdict check_agreement(const TermPtr& t, const Memory& mem, std::size_t fuel);

// Minimal witnesses for the dimension-d notions: a dimension-d term pushes d
// terms of dimension d-1 on each listed location and ends in skip.
TermPtr dimension_term(std::size_t d, const std::vector<Location>& locs);
Memory dimension_memory(std::size_t d, const std::vector<Location>& locs);
SubstMap dimension_subst(std::size_t d, const std::vector<Location>& locs,
                         const std::set<std::string>& vars);

// Checkers for the same notions (any object of dimension d passes for all
// d' <= d).
bool is_term_of_dimension(const TermPtr& t, std::size_t d,
                          const std::vector<Location>& locs);
bool is_memory_of_dimension(const Memory& mem, std::size_t d,
                            const std::vector<Location>& locs);

} // namespace fmc

#endif
