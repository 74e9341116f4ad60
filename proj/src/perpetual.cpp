#include "fmc/perpetual.hpp"

#include <stdexcept>

namespace fmc {

WeakHeadSplit weak_head_split(const TermPtr& t) {
  WeakHeadSplit s;
  TermPtr cur = t;
  while (cur->kind == TermKind::Push) {
    s.pushes.emplace_back(cur->arg, cur->loc);
    cur = cur->body;
  }
  s.core = cur;
  return s;
}

TermPtr reassemble(const std::vector<std::pair<TermPtr, Location>>& pushes, const TermPtr& core) {
  TermPtr t = core;
  for (auto it = pushes.rbegin(); it != pushes.rend(); ++it)
    t = mk_push(it->first, it->second, t);
  return t;
}

std::string perp_rule_name(PerpRule r) {
  switch (r) {
    case PerpRule::Beta: return "Beta";
    case PerpRule::Passage: return "Passage";
    case PerpRule::Next: return "Next";
    case PerpRule::PrefixPop: return "PrefixPop";
    case PerpRule::PrefixPush: return "PrefixPush";
    case PerpRule::Associate: return "Associate";
    case PerpRule::NormAbs: return "NormAbs";
    case PerpRule::NormUnit: return "NormUnit";
    case PerpRule::NormVar: return "NormVar";
    case PerpRule::NormSeq: return "NormSeq";
  }
  return "?";
}

namespace {

PerpPtr mk_perp(PerpRule rule, TermPtr subject, TermPtr result, std::vector<PerpPtr> children) {
  auto p = std::make_shared<PerpTree>();
  p->rule = rule;
  p->subject = std::move(subject);
  p->result = std::move(result);
  p->children = std::move(children);
  return p;
}

// Renames a pop binder away from the free variables of `clash`.
TermPtr pop_avoiding(const TermPtr& pop, const TermPtr& clash) {
  if (!occurs_free(clash, pop->binder)) return pop;
  std::set<std::string> avoid = free_vars(clash);
  auto fvb = free_vars(pop->body);
  avoid.insert(fvb.begin(), fvb.end());
  std::string b = fresh_name(pop->binder, avoid);
  return mk_pop(pop->loc, b, substitute(mk_var(b), pop->binder, pop->body));
}

struct PerpEvaluator {
  std::size_t fuel;
  std::size_t depth = 0;
  // Divergent evaluations descend forever; bounding the depth keeps them on
  // the C++ stack and still reports exhaustion.
  static constexpr std::size_t kMaxDepth = 2048;

  struct DepthGuard {
    PerpEvaluator& e;
    explicit DepthGuard(PerpEvaluator& ev) : e(ev) { ++e.depth; }
    ~DepthGuard() { --e.depth; }
  };

  std::optional<PerpPtr> eval(const TermPtr& t) {
    if (fuel == 0 || depth >= kMaxDepth) {
      fuel = 0;
      return std::nullopt;
    }
    --fuel;
    DepthGuard guard(*this);
    WeakHeadSplit s = weak_head_split(t);

    switch (s.core->kind) {
      case TermKind::Skip:
      case TermKind::Var:
        return norm_applications(
            t, s, s.core->kind == TermKind::Skip ? PerpRule::NormUnit : PerpRule::NormVar,
            s.core, nullptr);

      case TermKind::Pop: {
        if (s.pushes.empty()) {
          auto body = eval(s.core->body);
          if (!body) return std::nullopt;
          return mk_perp(PerpRule::NormAbs, t,
                         mk_pop(s.core->loc, s.core->binder, (*body)->result), {*body});
        }
        auto [arg, loc] = s.pushes.back();
        std::vector<std::pair<TermPtr, Location>> outer(s.pushes.begin(), s.pushes.end() - 1);
        if (loc == s.core->loc) {
          // argument premise first: a divergent discarded argument fails fast
          auto argtree = eval(arg);
          if (!argtree) return std::nullopt;
          TermPtr contracted =
              reassemble(outer, substitute(arg, s.core->binder, s.core->body));
          auto cont = eval(contracted);
          if (!cont) return std::nullopt;
          return mk_perp(PerpRule::Beta, t, (*cont)->result, {*cont, *argtree});
        }
        TermPtr pop = pop_avoiding(s.core, arg);
        TermPtr passed =
            reassemble(outer, mk_pop(pop->loc, pop->binder, mk_push(arg, loc, pop->body)));
        auto cont = eval(passed);
        if (!cont) return std::nullopt;
        return mk_perp(PerpRule::Passage, t, (*cont)->result, {*cont});
      }

      case TermKind::Seq: {
        const TermPtr& l = s.core->left;
        const TermPtr& r = s.core->right;
        switch (l->kind) {
          case TermKind::Skip: {
            auto cont = eval(reassemble(s.pushes, r));
            if (!cont) return std::nullopt;
            return mk_perp(PerpRule::Next, t, (*cont)->result, {*cont});
          }
          case TermKind::Pop: {
            TermPtr pop = pop_avoiding(l, r);
            TermPtr next = reassemble(
                s.pushes, mk_pop(pop->loc, pop->binder, mk_seq(pop->body, r)));
            auto cont = eval(next);
            if (!cont) return std::nullopt;
            return mk_perp(PerpRule::PrefixPop, t, (*cont)->result, {*cont});
          }
          case TermKind::Push: {
            TermPtr next =
                reassemble(s.pushes, mk_push(l->arg, l->loc, mk_seq(l->body, r)));
            auto cont = eval(next);
            if (!cont) return std::nullopt;
            return mk_perp(PerpRule::PrefixPush, t, (*cont)->result, {*cont});
          }
          case TermKind::Seq: {
            TermPtr next =
                reassemble(s.pushes, mk_seq(l->left, mk_seq(l->right, r)));
            auto cont = eval(next);
            if (!cont) return std::nullopt;
            return mk_perp(PerpRule::Associate, t, (*cont)->result, {*cont});
          }
          case TermKind::Var:
            return norm_applications(t, s, PerpRule::NormSeq, l, &r);
        }
        return std::nullopt;
      }

      case TermKind::Push:
        return std::nullopt; // unreachable: the split core is never a push
    }
    return std::nullopt;
  }

  // Normal (unit), Normal (variable), Normal (sequence): evaluate every
  // pushed argument, and for a sequence also the continuation.
  std::optional<PerpPtr> norm_applications(const TermPtr& t, const WeakHeadSplit& s,
                                           PerpRule rule, const TermPtr& core_head,
                                           const TermPtr* seq_cont) {
    std::vector<PerpPtr> children;
    std::vector<std::pair<TermPtr, Location>> result_pushes;
    for (const auto& [arg, loc] : s.pushes) {
      auto c = eval(arg);
      if (!c) return std::nullopt;
      result_pushes.emplace_back((*c)->result, loc);
      children.push_back(*c);
    }
    TermPtr result_core;
    if (seq_cont) {
      auto c = eval(*seq_cont);
      if (!c) return std::nullopt;
      children.push_back(*c);
      result_core = mk_seq(core_head, (*c)->result);
    } else {
      result_core = core_head;
    }
    return mk_perp(rule, t, reassemble(result_pushes, result_core), std::move(children));
  }
};

} // namespace

PerpResult perp_eval(const TermPtr& t, std::size_t fuel) {
  PerpEvaluator e{fuel};
  auto r = e.eval(t);
  if (!r) return {PerpResult::Status::FuelExhausted, nullptr};
  return {PerpResult::Status::Done, *r};
}

namespace {

bool check_node(const PerpPtr& p) {
  WeakHeadSplit s = weak_head_split(p->subject);
  switch (p->rule) {
    case PerpRule::Beta: {
      if (p->children.size() != 2) return false;
      if (s.pushes.empty() || s.core->kind != TermKind::Pop) return false;
      auto [arg, loc] = s.pushes.back();
      if (loc != s.core->loc) return false;
      std::vector<std::pair<TermPtr, Location>> outer(s.pushes.begin(), s.pushes.end() - 1);
      TermPtr contracted = reassemble(outer, substitute(arg, s.core->binder, s.core->body));
      const PerpPtr& cont = p->children[0];
      const PerpPtr& argc = p->children[1];
      return alpha_eq(cont->subject, contracted) && alpha_eq(argc->subject, arg) &&
             alpha_eq(p->result, cont->result) && is_normal(argc->result) &&
             is_normal(p->result);
    }
    case PerpRule::Passage: {
      if (p->children.size() != 1) return false;
      if (s.pushes.empty() || s.core->kind != TermKind::Pop) return false;
      auto [arg, loc] = s.pushes.back();
      if (loc == s.core->loc) return false;
      std::vector<std::pair<TermPtr, Location>> outer(s.pushes.begin(), s.pushes.end() - 1);
      TermPtr pop = pop_avoiding(s.core, arg);
      TermPtr passed =
          reassemble(outer, mk_pop(pop->loc, pop->binder, mk_push(arg, loc, pop->body)));
      return alpha_eq(p->children[0]->subject, passed) &&
             alpha_eq(p->result, p->children[0]->result);
    }
    case PerpRule::Next:
    case PerpRule::PrefixPop:
    case PerpRule::PrefixPush:
    case PerpRule::Associate: {
      if (p->children.size() != 1) return false;
      if (s.core->kind != TermKind::Seq) return false;
      const TermPtr& l = s.core->left;
      const TermPtr& r = s.core->right;
      TermPtr next;
      switch (p->rule) {
        case PerpRule::Next:
          if (l->kind != TermKind::Skip) return false;
          next = reassemble(s.pushes, r);
          break;
        case PerpRule::PrefixPop: {
          if (l->kind != TermKind::Pop) return false;
          TermPtr pop = pop_avoiding(l, r);
          next = reassemble(s.pushes, mk_pop(pop->loc, pop->binder, mk_seq(pop->body, r)));
          break;
        }
        case PerpRule::PrefixPush:
          if (l->kind != TermKind::Push) return false;
          next = reassemble(s.pushes, mk_push(l->arg, l->loc, mk_seq(l->body, r)));
          break;
        default:
          if (l->kind != TermKind::Seq) return false;
          next = reassemble(s.pushes, mk_seq(l->left, mk_seq(l->right, r)));
          break;
      }
      return alpha_eq(p->children[0]->subject, next) &&
             alpha_eq(p->result, p->children[0]->result);
    }
    case PerpRule::NormAbs: {
      if (p->children.size() != 1) return false;
      if (p->subject->kind != TermKind::Pop) return false;
      const PerpPtr& c = p->children[0];
      return alpha_eq(c->subject, p->subject->body) &&
             alpha_eq(p->result,
                      mk_pop(p->subject->loc, p->subject->binder, c->result)) &&
             is_normal(p->result);
    }
    case PerpRule::NormUnit:
    case PerpRule::NormVar:
    case PerpRule::NormSeq: {
      const TermPtr& core = s.core;
      std::size_t expected = s.pushes.size();
      TermPtr result_core;
      if (p->rule == PerpRule::NormUnit) {
        if (core->kind != TermKind::Skip) return false;
        result_core = core;
      } else if (p->rule == PerpRule::NormVar) {
        if (core->kind != TermKind::Var) return false;
        result_core = core;
      } else {
        if (core->kind != TermKind::Seq || core->left->kind != TermKind::Var) return false;
        expected += 1;
        const PerpPtr& c = p->children.back();
        if (!alpha_eq(c->subject, core->right)) return false;
        result_core = mk_seq(core->left, c->result);
      }
      if (p->children.size() != expected) return false;
      std::vector<std::pair<TermPtr, Location>> result_pushes;
      for (std::size_t i = 0; i < s.pushes.size(); ++i) {
        const PerpPtr& c = p->children[i];
        if (!alpha_eq(c->subject, s.pushes[i].first)) return false;
        if (!is_normal(c->result)) return false;
        result_pushes.emplace_back(c->result, s.pushes[i].second);
      }
      return alpha_eq(p->result, reassemble(result_pushes, result_core)) &&
             is_normal(p->result);
    }
  }
  return false;
}

} // namespace

bool check_perp_tree(const PerpPtr& p) {
  if (!p) return false;
  if (!check_node(p)) return false;
  for (const auto& c : p->children)
    if (!check_perp_tree(c)) return false;
  return true;
}

namespace {

void prefix_steps(std::vector<std::pair<Position, Rule>>& steps, const Position& prefix) {
  for (auto& [pos, rule] : steps) {
    Position p = prefix;
    p.path.insert(p.path.end(), pos.path.begin(), pos.path.end());
    pos = p;
  }
}

Position push_body_path(std::size_t depth) {
  Position p;
  p.path.assign(depth, Selector::PushBody);
  return p;
}

std::vector<std::pair<Position, Rule>> replay_steps(const PerpPtr& p) {
  WeakHeadSplit s = weak_head_split(p->subject);
  std::vector<std::pair<Position, Rule>> out;
  auto head_step = [&](Rule rule, std::size_t depth) { out.emplace_back(push_body_path(depth), rule); };

  switch (p->rule) {
    case PerpRule::Beta:
    case PerpRule::Passage: {
      head_step(p->rule == PerpRule::Beta ? Rule::Beta : Rule::Passage, s.pushes.size() - 1);
      auto rest = replay_steps(p->children[0]);
      out.insert(out.end(), rest.begin(), rest.end());
      return out;
    }
    case PerpRule::Next:
    case PerpRule::PrefixPop:
    case PerpRule::PrefixPush:
    case PerpRule::Associate: {
      Rule rule = p->rule == PerpRule::Next        ? Rule::Next
                  : p->rule == PerpRule::PrefixPop ? Rule::PrefixPop
                  : p->rule == PerpRule::PrefixPush ? Rule::PrefixPush
                                                    : Rule::Associate;
      head_step(rule, s.pushes.size());
      auto rest = replay_steps(p->children[0]);
      out.insert(out.end(), rest.begin(), rest.end());
      return out;
    }
    case PerpRule::NormAbs: {
      auto rest = replay_steps(p->children[0]);
      Position prefix;
      prefix.path.push_back(Selector::PopBody);
      prefix_steps(rest, prefix);
      return rest;
    }
    case PerpRule::NormUnit:
    case PerpRule::NormVar:
    case PerpRule::NormSeq: {
      for (std::size_t i = 0; i < s.pushes.size(); ++i) {
        auto sub = replay_steps(p->children[i]);
        Position prefix = push_body_path(i);
        prefix.path.push_back(Selector::PushArg);
        prefix_steps(sub, prefix);
        out.insert(out.end(), sub.begin(), sub.end());
      }
      if (p->rule == PerpRule::NormSeq) {
        auto sub = replay_steps(p->children.back());
        Position prefix = push_body_path(s.pushes.size());
        prefix.path.push_back(Selector::SeqRight);
        prefix_steps(sub, prefix);
        out.insert(out.end(), sub.begin(), sub.end());
      }
      return out;
    }
  }
  return out;
}

} // namespace

ReductionTrace perp_replay(const PerpPtr& p) {
  ReductionTrace trace;
  trace.start = p->subject;
  TermPtr cur = p->subject;
  for (const auto& [pos, rule] : replay_steps(p)) {
    auto sub = subterm_at(cur, pos);
    if (!sub) throw std::logic_error("perp_replay: step position fell outside the term");
    Redex r{pos, rule, pos.spine()};
    auto [next, payload] = apply_redex(cur, r);
    trace.steps.push_back({r, next, std::move(payload)});
    cur = next;
  }
  if (!alpha_eq(cur, p->result))
    throw std::logic_error("perp_replay: replay did not reach the recorded normal form");
  return trace;
}

} // namespace fmc
