#ifndef FMC_REWRITE_HPP
#define FMC_REWRITE_HPP

#include <optional>
#include <utility>
#include <vector>

#include "fmc/syntax.hpp"

namespace fmc {

enum class Rule { Beta, Passage, Next, PrefixPop, PrefixPush, Associate };

std::string rule_name(Rule r);
std::optional<Rule> rule_from_name(const std::string& s);

struct Redex {
  Position at;
  Rule rule;
  bool spine; // the path to `at` never enters a push argument
};

// For a beta step: which binder was eliminated, what was substituted, on
// which location, and where the copies landed (positions relative to the
// rewritten subterm).
struct BetaPayload {
  std::string binder;
  TermPtr argument;
  Location loc;
  std::vector<Position> occurrences;
};

struct ReductionStep {
  Redex redex;
  TermPtr result; // the whole term after the step
  std::optional<BetaPayload> payload;
};

struct ReductionTrace {
  TermPtr start;
  std::vector<ReductionStep> steps;

  const TermPtr& final_term() const { return steps.empty() ? start : steps.back().result; }
};

// The unique rule whose left-hand side matches at the root, if any. The
// side conditions (distinct locations for passage; binder freshness) are
// honored; freshness is always attainable by renaming, so only the location
// split decides between beta and passage.
std::optional<Rule> match_root(const TermPtr& t);

// All redex positions, leftmost-outermost (pre-order) order.
std::vector<Redex> redexes(const TermPtr& t, bool spine_only);

// Rewrites exactly the addressed subterm. Invalid positions or non-matching
// rules throw std::invalid_argument.
std::pair<TermPtr, std::optional<BetaPayload>> apply_redex(const TermPtr& t, const Redex& r);

// Leftmost-outermost spine strategy; fuel bounds the step count.
std::optional<ReductionTrace> spine_normalize(const TermPtr& t, std::size_t fuel);

// Leftmost-outermost over all contexts.
std::optional<ReductionTrace> normalize_full(const TermPtr& t, std::size_t fuel);

bool is_spine_normal(const TermPtr& t);
bool is_normal(const TermPtr& t);

// (sum of |left| over seq subterms, sum of |body| over push subterms):
// strictly lexicographically decreasing under every non-beta rule.
std::pair<std::size_t, std::size_t> non_beta_measure(const TermPtr& t);

struct SNVerdict {
  enum class Kind { SN, NotSN, Unknown };
  Kind kind;
  std::size_t max_path_len = 0;  // SN: longest reduction path found
  std::size_t max_beta_next = 0; // SN: most beta+next steps on any path
  std::vector<TermPtr> cycle;    // NotSN: a path segment that revisits its head
};

// Explores every reduction sequence with memoization on alpha-classes.
// NotSN only on a revisited class along one path; growth beyond size_cap or
// fuel exhaustion yields Unknown, never a wrong claim.
SNVerdict bounded_sn_check(const TermPtr& t, std::size_t fuel, std::size_t size_cap);

} // namespace fmc

#endif
