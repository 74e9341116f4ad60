#include "fmc/rewrite.hpp"

#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace fmc {

std::string rule_name(Rule r) {
  switch (r) {
    case Rule::Beta: return "Beta";
    case Rule::Passage: return "Passage";
    case Rule::Next: return "Next";
    case Rule::PrefixPop: return "PrefixPop";
    case Rule::PrefixPush: return "PrefixPush";
    case Rule::Associate: return "Associate";
  }
  return "?";
}

std::optional<Rule> rule_from_name(const std::string& s) {
  if (s == "Beta") return Rule::Beta;
  if (s == "Passage") return Rule::Passage;
  if (s == "Next") return Rule::Next;
  if (s == "PrefixPop") return Rule::PrefixPop;
  if (s == "PrefixPush") return Rule::PrefixPush;
  if (s == "Associate") return Rule::Associate;
  return std::nullopt;
}

std::optional<Rule> match_root(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Push:
      if (t->body->kind == TermKind::Pop)
        return t->loc == t->body->loc ? Rule::Beta : Rule::Passage;
      return std::nullopt;
    case TermKind::Seq:
      switch (t->left->kind) {
        case TermKind::Skip: return Rule::Next;
        case TermKind::Pop: return Rule::PrefixPop;
        case TermKind::Push: return Rule::PrefixPush;
        case TermKind::Seq: return Rule::Associate;
        case TermKind::Var: return std::nullopt;
      }
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

namespace {

void collect_redexes(const TermPtr& t, Position& here, bool spine_only, bool on_spine,
                     std::vector<Redex>& out) {
  if (!spine_only || on_spine)
    if (auto rule = match_root(t)) out.push_back({here, *rule, on_spine});
  switch (t->kind) {
    case TermKind::Var:
    case TermKind::Skip:
      return;
    case TermKind::Pop:
      here.path.push_back(Selector::PopBody);
      collect_redexes(t->body, here, spine_only, on_spine, out);
      here.path.pop_back();
      return;
    case TermKind::Push:
      here.path.push_back(Selector::PushArg);
      if (!spine_only) collect_redexes(t->arg, here, spine_only, false, out);
      here.path.back() = Selector::PushBody;
      collect_redexes(t->body, here, spine_only, on_spine, out);
      here.path.pop_back();
      return;
    case TermKind::Seq:
      here.path.push_back(Selector::SeqLeft);
      collect_redexes(t->left, here, spine_only, on_spine, out);
      here.path.back() = Selector::SeqRight;
      collect_redexes(t->right, here, spine_only, on_spine, out);
      here.path.pop_back();
      return;
  }
}

// Renames the binder of a pop so that it avoids everything free in `clash`.
TermPtr avoid_binder(const TermPtr& pop, const TermPtr& clash) {
  if (!occurs_free(clash, pop->binder)) return pop;
  std::set<std::string> avoid = free_vars(clash);
  auto fvb = free_vars(pop->body);
  avoid.insert(fvb.begin(), fvb.end());
  std::string b = fresh_name(pop->binder, avoid);
  return mk_pop(pop->loc, b, substitute(mk_var(b), pop->binder, pop->body));
}

std::pair<TermPtr, std::optional<BetaPayload>> apply_at_root(const TermPtr& t, Rule rule) {
  auto fail = [&]() -> std::pair<TermPtr, std::optional<BetaPayload>> {
    throw std::invalid_argument("apply_redex: rule " + rule_name(rule) +
                                " does not match at position");
  };
  auto matched = match_root(t);
  if (!matched || *matched != rule) fail();
  switch (rule) {
    case Rule::Beta: {
      const TermPtr& pop = t->body;
      BetaPayload payload{pop->binder, t->arg, t->loc, free_occurrences(pop->body, pop->binder)};
      return {substitute(t->arg, pop->binder, pop->body), std::move(payload)};
    }
    case Rule::Passage: {
      TermPtr pop = avoid_binder(t->body, t->arg); // x not free in the pushed term
      return {mk_pop(pop->loc, pop->binder, mk_push(t->arg, t->loc, pop->body)), std::nullopt};
    }
    case Rule::Next:
      return {t->right, std::nullopt};
    case Rule::PrefixPop: {
      TermPtr pop = avoid_binder(t->left, t->right); // x not free in the continuation
      return {mk_pop(pop->loc, pop->binder, mk_seq(pop->body, t->right)), std::nullopt};
    }
    case Rule::PrefixPush: {
      const TermPtr& push = t->left;
      return {mk_push(push->arg, push->loc, mk_seq(push->body, t->right)), std::nullopt};
    }
    case Rule::Associate: {
      const TermPtr& inner = t->left;
      return {mk_seq(inner->left, mk_seq(inner->right, t->right)), std::nullopt};
    }
  }
  return fail();
}

} // namespace

std::vector<Redex> redexes(const TermPtr& t, bool spine_only) {
  std::vector<Redex> out;
  Position here;
  collect_redexes(t, here, spine_only, true, out);
  return out;
}

std::pair<TermPtr, std::optional<BetaPayload>> apply_redex(const TermPtr& t, const Redex& r) {
  auto sub = subterm_at(t, r.at);
  if (!sub) throw std::invalid_argument("apply_redex: invalid position");
  auto [rewritten, payload] = apply_at_root(*sub, r.rule);
  return {replace_at(t, r.at, rewritten), std::move(payload)};
}

namespace {

std::optional<ReductionTrace> normalize(const TermPtr& t, std::size_t fuel, bool spine_only) {
  ReductionTrace trace;
  trace.start = t;
  TermPtr cur = t;
  while (true) {
    std::vector<Redex> rs = redexes(cur, spine_only);
    if (rs.empty()) return trace;
    if (trace.steps.size() == fuel) return std::nullopt;
    auto [next, payload] = apply_redex(cur, rs.front());
    trace.steps.push_back({rs.front(), next, std::move(payload)});
    cur = next;
  }
}

} // namespace

std::optional<ReductionTrace> spine_normalize(const TermPtr& t, std::size_t fuel) {
  return normalize(t, fuel, true);
}

std::optional<ReductionTrace> normalize_full(const TermPtr& t, std::size_t fuel) {
  return normalize(t, fuel, false);
}

namespace {

// W ::= a<x>.W | V    V ::= [M]a.V | x;W | x | *
// with the arguments M unconstrained (spine) or themselves normal (full).
bool is_nf_core(const Term* t, bool check_args, bool abstractions_ok);

bool is_nf(const Term* t, bool check_args) { return is_nf_core(t, check_args, true); }

bool is_nf_core(const Term* t, bool check_args, bool abstractions_ok) {
  switch (t->kind) {
    case TermKind::Var:
    case TermKind::Skip:
      return true;
    case TermKind::Pop:
      return abstractions_ok && is_nf_core(t->body.get(), check_args, true);
    case TermKind::Push:
      if (check_args && !is_nf(t->arg.get(), check_args)) return false;
      return is_nf_core(t->body.get(), check_args, false);
    case TermKind::Seq:
      return t->left->kind == TermKind::Var && is_nf_core(t->right.get(), check_args, true);
  }
  return false;
}

} // namespace

bool is_spine_normal(const TermPtr& t) { return is_nf(t.get(), false); }
bool is_normal(const TermPtr& t) { return is_nf(t.get(), true); }

namespace {

void measure_rec(const Term* t, std::size_t& seq_sum, std::size_t& push_sum) {
  switch (t->kind) {
    case TermKind::Var:
    case TermKind::Skip:
      return;
    case TermKind::Pop:
      measure_rec(t->body.get(), seq_sum, push_sum);
      return;
    case TermKind::Push:
      push_sum += term_size(t->body);
      measure_rec(t->arg.get(), seq_sum, push_sum);
      measure_rec(t->body.get(), seq_sum, push_sum);
      return;
    case TermKind::Seq:
      seq_sum += term_size(t->left);
      measure_rec(t->left.get(), seq_sum, push_sum);
      measure_rec(t->right.get(), seq_sum, push_sum);
      return;
  }
}

} // namespace

std::pair<std::size_t, std::size_t> non_beta_measure(const TermPtr& t) {
  std::size_t seq_sum = 0, push_sum = 0;
  measure_rec(t.get(), seq_sum, push_sum);
  return {seq_sum, push_sum};
}

namespace {

struct SNExplorer {
  std::size_t fuel;
  std::size_t size_cap;
  std::unordered_map<std::string, SNVerdict> memo;
  std::unordered_set<std::string> on_path;

  SNVerdict explore(const TermPtr& t) {
    if (term_size(t) > size_cap) {
      SNVerdict v;
      v.kind = SNVerdict::Kind::Unknown;
      return v;
    }
    std::string key = alpha_key(t);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    if (on_path.count(key)) {
      SNVerdict v;
      v.kind = SNVerdict::Kind::NotSN;
      v.cycle = {t};
      return v; // ancestors complete the cycle and memoize it
    }
    if (fuel == 0) {
      SNVerdict v;
      v.kind = SNVerdict::Kind::Unknown;
      return v;
    }
    --fuel;
    on_path.insert(key);
    SNVerdict result;
    result.kind = SNVerdict::Kind::SN;
    bool unknown = false;
    for (const Redex& r : redexes(t, false)) {
      auto [next, payload] = apply_redex(t, r);
      SNVerdict c = explore(next);
      if (c.kind == SNVerdict::Kind::NotSN) {
        result.kind = SNVerdict::Kind::NotSN;
        result.cycle = std::move(c.cycle);
        result.cycle.insert(result.cycle.begin(), t);
        break;
      }
      if (c.kind == SNVerdict::Kind::Unknown) {
        unknown = true;
        continue;
      }
      std::size_t bn = (r.rule == Rule::Beta || r.rule == Rule::Next) ? 1 : 0;
      result.max_path_len = std::max(result.max_path_len, 1 + c.max_path_len);
      result.max_beta_next = std::max(result.max_beta_next, bn + c.max_beta_next);
    }
    if (result.kind == SNVerdict::Kind::SN && unknown) {
      result.kind = SNVerdict::Kind::Unknown;
      result.max_path_len = 0;
      result.max_beta_next = 0;
    }
    on_path.erase(key);
    memo.emplace(std::move(key), result);
    return result;
  }
};

} // namespace

SNVerdict bounded_sn_check(const TermPtr& t, std::size_t fuel, std::size_t size_cap) {
  SNExplorer e;
  e.fuel = fuel;
  e.size_cap = size_cap;
  return e.explore(t);
}

} // namespace fmc
