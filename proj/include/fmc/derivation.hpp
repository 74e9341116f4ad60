#ifndef FMC_DERIVATION_HPP
#define FMC_DERIVATION_HPP

#include <variant>
#include <vector>

#include "fmc/machine.hpp"
#include "fmc/types.hpp"

namespace fmc {

enum class DRule {
  Var, Abs, AppWeak, Unit, Seq, Collection,
  MemEmpty, MemPush, KontEmpty, KontPush, State,
  AppStrong, Weakening, SubstAdmissible
};

std::string drule_name(DRule r);
std::optional<DRule> drule_from_name(const std::string& s);

enum class TypeSystem { Weak, Strong, State };

struct Derivation;
using DerivPtr = std::shared_ptr<const Derivation>;

using Subject = std::variant<TermPtr, Memory, Kont, MachineState>;
using JudgementType = std::variant<CompType, CollectionType, MemoryType>;

// One node of a typing derivation. Terms, collections and states are typed
// with empty-context memory/kont/state judgements kept closed, exactly as the
// rule schemas demand; check_derivation revalidates all of it independently
// of whoever built the tree.
struct Derivation {
  DRule rule;
  TypingContext ctx;
  Subject subject;
  JudgementType type;
  std::vector<DerivPtr> children;
  Location loc;       // MemPush: the location pushed to
  std::string binder; // SubstAdmissible: the substituted variable
};

DerivPtr mk_deriv(DRule rule, TypingContext ctx, Subject subject, JudgementType type,
                  std::vector<DerivPtr> children = {});

// Convenience accessors; throw on the wrong alternative.
const TermPtr& subject_term(const DerivPtr& d);
const CompType& comp_of(const DerivPtr& d);
const CollectionType& collection_of(const DerivPtr& d);
const MemoryType& memtype_of(const DerivPtr& d);

// Number of abstraction, application, sequencing and unit rule instances.
std::size_t weight(const DerivPtr& d);

struct CheckResult {
  bool ok = false;
  std::size_t weight = 0;
  std::vector<std::size_t> path; // child indices to the offending node
  std::string reason;
};

// Validates every node against its rule schema: context splits, type
// bookkeeping after canonicalization, location accounting, subject shapes.
// Weak admits AppWeak and rejects AppStrong/Weakening; Strong vice versa;
// State layers the memory/kont/state rules over Weak. SubstAdmissible is
// accepted everywhere (it is admissible in both systems) but never emitted
// by inference.
CheckResult check_derivation(const DerivPtr& d, TypeSystem system);

} // namespace fmc

#endif
