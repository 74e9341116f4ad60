#ifndef FMC_INFER_HPP
#define FMC_INFER_HPP

#include <optional>

#include "fmc/derivation.hpp"
#include "fmc/perpetual.hpp"
#include "fmc/rewrite.hpp"

namespace fmc {

// Constructive weak typing of a spine normal form, following the W/V grammar:
// push arguments get the empty collection, head variables get singleton
// collections, and the function f is fixed to zero where the abstraction
// prefix ends. Output type is always of the []^f shape.
// Precondition: is_spine_normal(w); throws std::invalid_argument otherwise.
DerivPtr type_spine_nf(const TermPtr& w);

struct SplitResult {
  DerivPtr arg_collection; // Collection node: G |- n : i
  DerivPtr body;           // D, x:i |- m_skeleton : t
};

// Inverts the admissible substitution rule: given a derivation of {n/x}m and
// the pre-substitution skeleton m, harvests the sub-derivations of n at every
// free occurrence of x and rebuilds the derivation over the skeleton.
// In the weak system weight(arg)+weight(body) equals weight(d); in the strong
// system it can exceed it only through weakened context. `arg` names the
// substituted term (needed when x does not occur in the skeleton).
// Throws std::invalid_argument on a skeleton mismatch.
SplitResult split_substitution(const DerivPtr& d, const TermPtr& m_skeleton,
                               const std::string& x, const TermPtr& arg, TypeSystem system);

// The forward direction: from G |- n : i and D, x:i |- m : t builds
// G+D |- {n/x}m : t without the substitution rule.
DerivPtr subst_derivation(const DerivPtr& arg_collection, const std::string& x,
                          const DerivPtr& body);

// Removes every SubstAdmissible node by performing the substitutions.
DerivPtr eliminate_subst(const DerivPtr& d);

// Subject expansion over one spine step in the weak system: from a derivation
// of the reduct, a derivation of the redex with weight +2 for beta/next and
// +0 otherwise. The step's position must be a spine position.
DerivPtr expand_spine_step(const DerivPtr& d, const Redex& redex,
                           const std::optional<BetaPayload>& payload);

// Spine-normalize, type the normal form, then fold expansions backwards over
// the trace. Absent when spine normalization runs out of fuel.
std::optional<DerivPtr> infer_weak(const TermPtr& t, std::size_t fuel);

// Types the initial state (mem, t, empty kont) by running the machine and
// expanding backwards from the final state, whose memory items all get the
// empty collection. The derivation weight equals the run length, and the
// output type is []^f with f the final memory's dimensions. Absent when the
// run fails or exhausts fuel.
std::optional<DerivPtr> infer_weak_state(const Memory& mem, const TermPtr& t, std::size_t fuel);

// One checkable state derivation per traversed state; weights step down by
// exactly one along the run.
std::optional<std::vector<DerivPtr>> infer_weak_state_ladder(const Memory& mem, const TermPtr& t,
                                                             std::size_t fuel);

// Strong typing via perpetual evaluation: synthesizes the derivation by
// recursion on the perpetual tree (beta nodes split the substitution, supply
// the argument's own typing as the third premise, and weaken the normal
// form's side). Absent when perpetual evaluation exhausts fuel.
std::optional<DerivPtr> infer_strong(const TermPtr& t, std::size_t fuel);

// Bounded goal-directed search for a closed spine-normal inhabitant of the
// target; pushed argument collections are searched, not fixed empty. Absent
// means no inhabitant within the depth bound.
std::optional<TermPtr> inhabit_search(const CompType& target, std::size_t max_depth);

} // namespace fmc

#endif
