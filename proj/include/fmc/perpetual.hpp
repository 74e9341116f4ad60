#ifndef FMC_PERPETUAL_HPP
#define FMC_PERPETUAL_HPP

#include "fmc/rewrite.hpp"
#include "fmc/syntax.hpp"

namespace fmc {

// A term split as its maximal outer push sequence around a non-push core.
struct WeakHeadSplit {
  std::vector<std::pair<TermPtr, Location>> pushes; // outermost first
  TermPtr core;                                     // never a push
};

WeakHeadSplit weak_head_split(const TermPtr& t);
TermPtr reassemble(const std::vector<std::pair<TermPtr, Location>>& pushes, const TermPtr& core);

enum class PerpRule {
  Beta, Passage, Next, PrefixPop, PrefixPush, Associate,
  NormAbs, NormUnit, NormVar, NormSeq
};

std::string perp_rule_name(PerpRule r);

struct PerpTree;
using PerpPtr = std::shared_ptr<const PerpTree>;

// One node of a perpetual-evaluation derivation. A beta node has exactly two
// children: the continuation first, then the discarded argument's own
// evaluation. The root's result is a full normal form of the subject.
struct PerpTree {
  PerpRule rule;
  TermPtr subject;
  TermPtr result;
  std::vector<PerpPtr> children;
};

struct PerpResult {
  enum class Status { Done, FuelExhausted };
  Status status;
  PerpPtr tree; // Done
};

// Deterministic, fuel-bounded construction of the evaluation relation: split
// off the weak head context, case on the core, and for an abstraction on the
// location of the innermost adjacent push. The argument premise of a beta
// node is evaluated before the continuation premise. Fuel bounds rule
// instances; exhaustion covers both divergence and a too-small budget.
PerpResult perp_eval(const TermPtr& t, std::size_t fuel);

// Independent re-validation of every node against its schema.
bool check_perp_tree(const PerpPtr& p);

// Replays the evaluation as plain reduction steps from subject to result.
// Head steps come first, then argument and suffix normalizations left to
// right; a beta node's argument premise contributes no steps.
ReductionTrace perp_replay(const PerpPtr& p);

} // namespace fmc

#endif
