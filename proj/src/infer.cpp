#include "fmc/infer.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <variant>

namespace fmc {

namespace {

[[noreturn]] void mismatch(const std::string& what) {
  throw std::invalid_argument("derivation/skeleton mismatch: " + what);
}

DerivPtr empty_collection_node(const TermPtr& subject) {
  return mk_deriv(DRule::Collection, {}, subject, CollectionType{}, {});
}

DerivPtr collection_node(const TermPtr& subject, std::vector<DerivPtr> comps) {
  TypingContext ctx;
  CollectionType ty;
  for (const auto& c : comps) {
    ctx = context_sum(ctx, c->ctx);
    ty.elems.push_back(comp_of(c));
  }
  return mk_deriv(DRule::Collection, std::move(ctx), subject, std::move(ty), std::move(comps));
}

DerivPtr abs_node(const Location& loc, const std::string& binder, const DerivPtr& body) {
  CollectionType iota = body->ctx.lookup(binder);
  const CompType& bt = comp_of(body);
  CompType ty{mem_prepend(loc, iota, bt.input), bt.output};
  return mk_deriv(DRule::Abs, context_remove(body->ctx, binder),
                  mk_pop(loc, binder, subject_term(body)), std::move(ty), {body});
}

DerivPtr app_node(DRule rule, const Location& loc, const DerivPtr& argc, const DerivPtr& body,
                  const DerivPtr& witness = nullptr) {
  const CompType& bt = comp_of(body);
  auto front = mem_front(bt.input, loc);
  if (!front || !type_equal(*front, collection_of(argc)))
    mismatch("application body does not consume the argument collection");
  CompType ty{mem_drop_front(bt.input, loc), bt.output};
  TypingContext ctx = context_sum(argc->ctx, body->ctx);
  std::vector<DerivPtr> children{argc, body};
  if (rule == DRule::AppStrong) {
    ctx = context_sum(ctx, witness->ctx);
    children.push_back(witness);
  }
  return mk_deriv(rule, std::move(ctx),
                  mk_push(subject_term(argc), loc, subject_term(body)), std::move(ty),
                  std::move(children));
}

DerivPtr seq_node(const DerivPtr& l, const DerivPtr& r) {
  const CompType& lt = comp_of(l);
  const CompType& rt = comp_of(r);
  if (!type_equal(lt.output, rt.input)) mismatch("sequencing types do not compose");
  return mk_deriv(DRule::Seq, context_sum(l->ctx, r->ctx),
                  mk_seq(subject_term(l), subject_term(r)), CompType{lt.input, rt.output},
                  {l, r});
}

DerivPtr unit_node(const MemoryType& io) {
  return mk_deriv(DRule::Unit, {}, mk_skip(), CompType{io, io}, {});
}

DerivPtr var_node(const std::string& x, const CompType& ty) {
  TypingContext ctx;
  ctx.assign(x, CollectionType{{ty}});
  return mk_deriv(DRule::Var, std::move(ctx), mk_var(x), ty, {});
}

} // namespace

// ---------------------------------------------------------------------------
// Spine normal forms

namespace {

DerivPtr type_w(const TermPtr& w);

// G |- v : fin => []^g for an all-empty-collections input fin.
DerivPtr type_v(const TermPtr& v, const MemoryType& fin) {
  switch (v->kind) {
    case TermKind::Skip:
      return unit_node(fin);
    case TermKind::Var:
      return var_node(v->var, CompType{fin, MemoryType{}});
    case TermKind::Seq: {
      DerivPtr dw = type_w(v->right);
      DerivPtr dx = var_node(v->left->var, CompType{fin, comp_of(dw).input});
      return seq_node(dx, dw);
    }
    case TermKind::Push: {
      MemoryType fin2 = mem_prepend(v->loc, CollectionType{}, fin);
      DerivPtr body = type_v(v->body, fin2);
      return app_node(DRule::AppWeak, v->loc, empty_collection_node(v->arg), body);
    }
    default:
      mismatch("not a spine normal form");
  }
}

DerivPtr type_w(const TermPtr& w) {
  if (w->kind == TermKind::Pop) return abs_node(w->loc, w->binder, type_w(w->body));
  return type_v(w, MemoryType{});
}

} // namespace

DerivPtr type_spine_nf(const TermPtr& w) {
  if (!is_spine_normal(w)) throw std::invalid_argument("type_spine_nf: not spine-normal");
  return type_w(w);
}

// ---------------------------------------------------------------------------
// Substitution: split

namespace {

// Renames the free variable y to z throughout a derivation (subjects and
// context keys). z must be fresh for every subject in d.
DerivPtr rename_free_in_deriv(const DerivPtr& d, const std::string& y, const std::string& z) {
  std::vector<DerivPtr> children;
  children.reserve(d->children.size());
  for (const auto& c : d->children) children.push_back(rename_free_in_deriv(c, y, z));
  auto nd = std::make_shared<Derivation>(*d);
  nd->children = std::move(children);
  if (const TermPtr* t = std::get_if<TermPtr>(&d->subject))
    nd->subject = substitute(mk_var(z), y, *t);
  auto it = nd->ctx.bindings.find(y);
  if (it != nd->ctx.bindings.end()) {
    CollectionType c = it->second;
    nd->ctx.bindings.erase(it);
    nd->ctx.assign(z, std::move(c));
  }
  return nd;
}

// Multiset difference of collections by canonical keys; throws on underflow.
CollectionType collection_minus(const CollectionType& whole, const CollectionType& part) {
  std::vector<std::string> drop;
  drop.reserve(part.elems.size());
  for (const auto& e : part.elems) drop.push_back(type_key(e));
  std::sort(drop.begin(), drop.end());
  std::vector<std::pair<std::string, CompType>> keyed;
  keyed.reserve(whole.elems.size());
  for (const auto& e : whole.elems) keyed.emplace_back(type_key(e), e);
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& p, const auto& q) { return p.first < q.first; });
  CollectionType rest;
  std::size_t di = 0;
  for (auto& [k, e] : keyed) {
    if (di < drop.size() && drop[di] == k) {
      ++di;
      continue;
    }
    rest.elems.push_back(e);
  }
  if (di != drop.size()) mismatch("collection difference underflow");
  return rest;
}

struct Splitter {
  std::string x;
  TypeSystem system;
  std::vector<DerivPtr> harvested;

  DerivPtr walk(const DerivPtr& d, const TermPtr& skel) {
    if (system == TypeSystem::Strong && d->rule == DRule::Weakening &&
        skel->kind != TermKind::Var)
      return rebuild_weakening(d, skel);
    switch (skel->kind) {
      case TermKind::Var: {
        if (skel->var == x) {
          if (!std::get_if<CompType>(&d->type)) mismatch("occurrence site is not a computation");
          harvested.push_back(d);
          return var_node(x, comp_of(d));
        }
        return d;
      }
      case TermKind::Skip:
        return d;
      case TermKind::Pop: {
        if (skel->binder == x) return d; // x shadowed: no occurrences below
        if (d->rule != DRule::Abs) mismatch("expected an abstraction node");
        DerivPtr node = d;
        TermPtr subj = subject_term(node);
        if (subj->binder == x) {
          // rename the derivation's binder away from the substituted name
          std::set<std::string> avoid = free_vars(subj);
          auto fv = free_vars(skel);
          avoid.insert(fv.begin(), fv.end());
          avoid.insert(x);
          std::string z = fresh_name(subj->binder, avoid);
          node = abs_node(subj->loc, z, rename_free_in_deriv(node->children[0], x, z));
          subj = subject_term(node);
        }
        TermPtr skel_body =
            subj->binder == skel->binder
                ? skel->body
                : substitute(mk_var(subj->binder), skel->binder, skel->body);
        DerivPtr body = walk(node->children[0], skel_body);
        return abs_node(subj->loc, subj->binder, body);
      }
      case TermKind::Push: {
        bool strong_app = d->rule == DRule::AppStrong;
        if (d->rule != DRule::AppWeak && !strong_app) mismatch("expected an application node");
        const DerivPtr& argc = d->children[0];
        std::vector<DerivPtr> comps;
        comps.reserve(argc->children.size());
        for (const auto& c : argc->children) comps.push_back(walk(c, skel->arg));
        TermPtr arg_subject = comps.empty() ? skel->arg : subject_term(comps.front());
        DerivPtr new_argc = collection_node(arg_subject, std::move(comps));
        DerivPtr new_body = walk(d->children[1], skel->body);
        if (strong_app) {
          DerivPtr new_wit = walk(d->children[2], skel->arg);
          return app_node(DRule::AppStrong, subject_term(d)->loc, new_argc, new_body, new_wit);
        }
        return app_node(DRule::AppWeak, subject_term(d)->loc, new_argc, new_body);
      }
      case TermKind::Seq: {
        if (d->rule != DRule::Seq) mismatch("expected a sequencing node");
        DerivPtr l = walk(d->children[0], skel->left);
        DerivPtr r = walk(d->children[1], skel->right);
        return seq_node(l, r);
      }
    }
    mismatch("unreachable skeleton shape");
  }

  DerivPtr rebuild_weakening(const DerivPtr& d, const TermPtr& skel) {
    // The weakened-in part stays on the body side; it must not mention x.
    DerivPtr inner = walk(d->children[0], skel);
    TypingContext extra;
    for (const auto& [v, c] : d->ctx.bindings) {
      CollectionType diff = collection_minus(c, d->children[0]->ctx.lookup(v));
      if (diff.elems.empty()) continue;
      if (v == x) mismatch("weakening introduces the substituted variable");
      extra.assign(v, diff);
    }
    return mk_deriv(DRule::Weakening, context_sum(inner->ctx, extra), inner->subject,
                    inner->type, {inner});
  }
};

} // namespace

SplitResult split_substitution(const DerivPtr& d, const TermPtr& m_skeleton, const std::string& x,
                               const TermPtr& arg, TypeSystem system) {
  Splitter s{x, system, {}};
  DerivPtr body = s.walk(d, m_skeleton);
  TermPtr arg_subject = s.harvested.empty() ? arg : subject_term(s.harvested.front());
  DerivPtr argc = collection_node(arg_subject, std::move(s.harvested));
  return {argc, body};
}

// ---------------------------------------------------------------------------
// Substitution: the forward direction

namespace {

// Distributes a collection node's elements over parts with the given multiset
// types; elements are matched by canonical key.
std::vector<DerivPtr> split_collection_node(const DerivPtr& argc,
                                            const std::vector<CollectionType>& parts) {
  std::unordered_map<std::string, std::vector<DerivPtr>> pool;
  for (const auto& c : argc->children) pool[type_key(comp_of(c))].push_back(c);
  std::vector<DerivPtr> out;
  for (const auto& part : parts) {
    std::vector<DerivPtr> comps;
    for (const auto& e : part.elems) {
      auto& bucket = pool[type_key(e)];
      if (bucket.empty()) mismatch("collection split: missing element");
      comps.push_back(bucket.back());
      bucket.pop_back();
    }
    out.push_back(collection_node(subject_term(argc), std::move(comps)));
  }
  for (const auto& [k, bucket] : pool)
    if (!bucket.empty()) mismatch("collection split: leftover elements");
  return out;
}

DerivPtr subst_rec(const DerivPtr& argc, const std::string& x, const DerivPtr& body);

DerivPtr subst_into_collection(const DerivPtr& argc, const std::string& x, const DerivPtr& coll) {
  std::vector<CollectionType> needs;
  for (const auto& c : coll->children) needs.push_back(c->ctx.lookup(x));
  auto shares = split_collection_node(argc, needs);
  std::vector<DerivPtr> comps;
  comps.reserve(coll->children.size());
  for (std::size_t i = 0; i < coll->children.size(); ++i)
    comps.push_back(subst_rec(shares[i], x, coll->children[i]));
  TermPtr subject = comps.empty()
                        ? substitute(subject_term(argc), x, subject_term(coll))
                        : subject_term(comps.front());
  return collection_node(subject, std::move(comps));
}

DerivPtr subst_rec(const DerivPtr& argc, const std::string& x, const DerivPtr& body) {
  if (body->ctx.lookup(x).elems.empty() && argc->children.empty()) {
    // nothing to substitute below; the subject still changes if x occurs
    const TermPtr* t = std::get_if<TermPtr>(&body->subject);
    if (t && !occurs_free(*t, x)) return body;
  }
  switch (body->rule) {
    case DRule::Var: {
      const TermPtr& v = subject_term(body);
      if (v->var == x) {
        if (argc->children.size() != 1) mismatch("variable site needs a singleton collection");
        return argc->children[0];
      }
      return body;
    }
    case DRule::Unit:
      return body;
    case DRule::Abs: {
      const TermPtr& subj = subject_term(body);
      if (subj->binder == x) return body; // shadowed
      TermPtr n = subject_term(argc);
      DerivPtr b = body;
      if (occurs_free(n, subj->binder)) {
        std::set<std::string> avoid = free_vars(n);
        auto fv = free_vars(subj);
        avoid.insert(fv.begin(), fv.end());
        avoid.insert(x);
        std::string z = fresh_name(subj->binder, avoid);
        b = abs_node(subj->loc, z, rename_free_in_deriv(body->children[0], subj->binder, z));
      }
      DerivPtr inner = subst_rec(argc, x, b->children[0]);
      return abs_node(subject_term(b)->loc, subject_term(b)->binder, inner);
    }
    case DRule::AppWeak:
    case DRule::AppStrong: {
      bool strong = body->rule == DRule::AppStrong;
      std::vector<CollectionType> needs;
      for (const auto& c : body->children) needs.push_back(c->ctx.lookup(x));
      auto shares = split_collection_node(argc, needs);
      DerivPtr new_argc = subst_into_collection(shares[0], x, body->children[0]);
      DerivPtr new_body = subst_rec(shares[1], x, body->children[1]);
      if (strong) {
        DerivPtr new_wit = subst_rec(shares[2], x, body->children[2]);
        return app_node(DRule::AppStrong, subject_term(body)->loc, new_argc, new_body, new_wit);
      }
      return app_node(DRule::AppWeak, subject_term(body)->loc, new_argc, new_body);
    }
    case DRule::Seq: {
      std::vector<CollectionType> needs{body->children[0]->ctx.lookup(x),
                                        body->children[1]->ctx.lookup(x)};
      auto shares = split_collection_node(argc, needs);
      return seq_node(subst_rec(shares[0], x, body->children[0]),
                      subst_rec(shares[1], x, body->children[1]));
    }
    case DRule::Weakening: {
      const DerivPtr& child = body->children[0];
      CollectionType need = child->ctx.lookup(x);
      CollectionType weakened = collection_minus(body->ctx.lookup(x), need);
      auto shares = split_collection_node(argc, {need, weakened});
      DerivPtr inner = subst_rec(shares[0], x, child);
      // the discarded share contributes only its context
      TypingContext extra;
      for (const auto& [v, c] : body->ctx.bindings) {
        if (v == x) continue;
        CollectionType diff = collection_minus(c, child->ctx.lookup(v));
        if (!diff.elems.empty()) extra.assign(v, diff);
      }
      TypingContext ctx = context_sum(context_sum(inner->ctx, shares[1]->ctx), extra);
      return mk_deriv(DRule::Weakening, std::move(ctx), inner->subject, inner->type, {inner});
    }
    default:
      mismatch("substitution into unsupported rule " + drule_name(body->rule));
  }
}

} // namespace

DerivPtr subst_derivation(const DerivPtr& arg_collection, const std::string& x,
                          const DerivPtr& body) {
  if (!type_equal(body->ctx.lookup(x), collection_of(arg_collection)))
    mismatch("body context does not assign the argument collection to x");
  return subst_rec(arg_collection, x, body);
}

DerivPtr eliminate_subst(const DerivPtr& d) {
  std::vector<DerivPtr> children;
  children.reserve(d->children.size());
  bool changed = false;
  for (const auto& c : d->children) {
    children.push_back(eliminate_subst(c));
    if (children.back() != c) changed = true;
  }
  if (d->rule == DRule::SubstAdmissible)
    return subst_derivation(children[0], d->binder, children[1]);
  if (!changed) return d;
  auto nd = std::make_shared<Derivation>(*d);
  nd->children = std::move(children);
  return nd;
}

// ---------------------------------------------------------------------------
// Subject expansion

namespace {

// Expands a non-beta rule at the root of the derivation of the contracted
// core. Shared between the weak system and the strong recursion.
DerivPtr expand_core_non_beta(const DerivPtr& dr, Rule rule) {
  switch (rule) {
    case Rule::Next:
      return seq_node(unit_node(comp_of(dr).input), dr);
    case Rule::Passage: {
      if (dr->rule != DRule::Abs) mismatch("passage expansion expects an abstraction");
      const TermPtr& pop_subj = subject_term(dr);
      const DerivPtr& app = dr->children[0];
      bool strong = app->rule == DRule::AppStrong;
      if (!strong && app->rule != DRule::AppWeak)
        mismatch("passage expansion expects an application under the abstraction");
      const DerivPtr& argc = app->children[0];
      const DerivPtr& dm = app->children[1];
      if (occurs_free(subject_term(argc), pop_subj->binder) ||
          !argc->ctx.lookup(pop_subj->binder).elems.empty())
        mismatch("passage expansion would change the binding of the argument");
      DerivPtr abs = abs_node(pop_subj->loc, pop_subj->binder, dm);
      if (strong) {
        const DerivPtr& wit = app->children[2];
        if (!wit->ctx.lookup(pop_subj->binder).elems.empty())
          mismatch("passage expansion would change the binding of the witness");
        return app_node(DRule::AppStrong, subject_term(app)->loc, argc, abs, wit);
      }
      return app_node(DRule::AppWeak, subject_term(app)->loc, argc, abs);
    }
    case Rule::PrefixPop: {
      if (dr->rule != DRule::Abs) mismatch("prefix-pop expansion expects an abstraction");
      const TermPtr& pop_subj = subject_term(dr);
      const DerivPtr& seq = dr->children[0];
      if (seq->rule != DRule::Seq) mismatch("prefix-pop expansion expects a sequencing");
      const DerivPtr& dn = seq->children[0];
      const DerivPtr& dm = seq->children[1];
      if (occurs_free(subject_term(dm), pop_subj->binder) ||
          !dm->ctx.lookup(pop_subj->binder).elems.empty())
        mismatch("prefix-pop expansion would change the binding of the continuation");
      return seq_node(abs_node(pop_subj->loc, pop_subj->binder, dn), dm);
    }
    case Rule::PrefixPush: {
      bool strong = dr->rule == DRule::AppStrong;
      if (!strong && dr->rule != DRule::AppWeak)
        mismatch("prefix-push expansion expects an application");
      const DerivPtr& argc = dr->children[0];
      const DerivPtr& seq = dr->children[1];
      if (seq->rule != DRule::Seq) mismatch("prefix-push expansion expects a sequencing");
      const DerivPtr& dn = seq->children[0];
      const DerivPtr& dm = seq->children[1];
      const Location& loc = subject_term(dr)->loc;
      DerivPtr app = strong ? app_node(DRule::AppStrong, loc, argc, dn, dr->children[2])
                            : app_node(DRule::AppWeak, loc, argc, dn);
      return seq_node(app, dm);
    }
    case Rule::Associate: {
      if (dr->rule != DRule::Seq || dr->children[1]->rule != DRule::Seq)
        mismatch("associate expansion expects nested sequencing");
      const DerivPtr& dp = dr->children[0];
      const DerivPtr& inner = dr->children[1];
      return seq_node(seq_node(dp, inner->children[0]), inner->children[1]);
    }
    case Rule::Beta:
      mismatch("beta expansion is handled separately");
  }
  mismatch("unknown rule");
}

DerivPtr expand_core_beta_weak(const DerivPtr& dr, const BetaPayload& payload) {
  TermPtr skeleton = subject_term(dr);
  for (const auto& pos : payload.occurrences)
    skeleton = replace_at(skeleton, pos, mk_var(payload.binder));
  SplitResult split =
      split_substitution(dr, skeleton, payload.binder, payload.argument, TypeSystem::Weak);
  DerivPtr abs = abs_node(payload.loc, payload.binder, split.body);
  return app_node(DRule::AppWeak, payload.loc, split.arg_collection, abs);
}

} // namespace

DerivPtr expand_spine_step(const DerivPtr& d, const Redex& redex,
                           const std::optional<BetaPayload>& payload) {
  if (!redex.at.spine())
    throw std::invalid_argument("expand_spine_step: position is not a spine position");

  std::vector<DerivPtr> ancestors;
  DerivPtr cur = d;
  for (Selector sel : redex.at.path) {
    ancestors.push_back(cur);
    switch (sel) {
      case Selector::PopBody:
        if (cur->rule != DRule::Abs) mismatch("path expects an abstraction node");
        cur = cur->children[0];
        break;
      case Selector::PushBody:
        if (cur->rule != DRule::AppWeak) mismatch("path expects an application node");
        cur = cur->children[1];
        break;
      case Selector::SeqLeft:
        if (cur->rule != DRule::Seq) mismatch("path expects a sequencing node");
        cur = cur->children[0];
        break;
      case Selector::SeqRight:
        if (cur->rule != DRule::Seq) mismatch("path expects a sequencing node");
        cur = cur->children[1];
        break;
      case Selector::PushArg:
        mismatch("a spine path cannot enter a push argument");
    }
  }

  DerivPtr expanded;
  if (redex.rule == Rule::Beta) {
    if (!payload) throw std::invalid_argument("expand_spine_step: beta needs its payload");
    expanded = expand_core_beta_weak(cur, *payload);
  } else {
    expanded = expand_core_non_beta(cur, redex.rule);
  }

  // rebuild ancestors: contexts and types are untouched by a spine expansion
  for (std::size_t i = ancestors.size(); i-- > 0;) {
    const DerivPtr& node = ancestors[i];
    Selector sel = redex.at.path[i];
    switch (sel) {
      case Selector::PopBody: {
        const TermPtr& subj = subject_term(node);
        expanded = abs_node(subj->loc, subj->binder, expanded);
        break;
      }
      case Selector::PushBody:
        expanded = app_node(DRule::AppWeak, subject_term(node)->loc, node->children[0], expanded);
        break;
      case Selector::SeqLeft:
        expanded = seq_node(expanded, node->children[1]);
        break;
      case Selector::SeqRight:
        expanded = seq_node(node->children[0], expanded);
        break;
      case Selector::PushArg:
        mismatch("unreachable");
    }
  }
  return expanded;
}

// ---------------------------------------------------------------------------
// Weak inference

std::optional<DerivPtr> infer_weak(const TermPtr& t, std::size_t fuel) {
  auto trace = spine_normalize(t, fuel);
  if (!trace) return std::nullopt;
  DerivPtr d = type_spine_nf(trace->final_term());
  for (auto it = trace->steps.rbegin(); it != trace->steps.rend(); ++it)
    d = expand_spine_step(d, it->redex, it->payload);
  return d;
}

// ---------------------------------------------------------------------------
// State inference

namespace {

// Per-location collection derivations aligned with the stacks (back = top).
using LooseMemory = std::map<Location, std::vector<DerivPtr>>;

MemoryType loose_memory_type(const LooseMemory& loose) {
  MemoryType ty;
  for (const auto& [loc, items] : loose) {
    if (items.empty()) continue;
    VectorType v;
    for (auto it = items.rbegin(); it != items.rend(); ++it) // pop order: top first
      v.push_back(collection_of(*it));
    ty.per_loc[loc] = std::move(v);
  }
  return ty;
}

DerivPtr materialize_memory(const LooseMemory& loose) {
  DerivPtr d = mk_deriv(DRule::MemEmpty, {}, Memory{}, MemoryType{}, {});
  Memory m;
  MemoryType ty;
  for (const auto& [loc, items] : loose) {
    for (const auto& item : items) {
      m.push(loc, subject_term(item));
      ty = mem_prepend(loc, collection_of(item), ty);
      auto node = std::make_shared<Derivation>();
      node->rule = DRule::MemPush;
      node->subject = m;
      node->type = ty;
      node->children = {d, item};
      node->loc = loc;
      d = node;
    }
  }
  return d;
}

DerivPtr materialize_kont(const std::deque<DerivPtr>& items, const MemoryType& final_out) {
  Kont k;
  DerivPtr d = mk_deriv(DRule::KontEmpty, {}, k, CompType{final_out, final_out}, {});
  for (auto it = items.rbegin(); it != items.rend(); ++it) {
    k.push_front(subject_term(*it));
    d = mk_deriv(DRule::KontPush, {}, k,
                 CompType{comp_of(*it).input, comp_of(d).output}, {*it, d});
  }
  return d;
}

DerivPtr state_node(const MachineState& s, const LooseMemory& loose, const DerivPtr& term,
                    const std::deque<DerivPtr>& kont, const MemoryType& final_out) {
  DerivPtr memd = materialize_memory(loose);
  DerivPtr kontd = materialize_kont(kont, final_out);
  return mk_deriv(DRule::State, {}, s, CompType{MemoryType{}, comp_of(kontd).output},
                  {memd, term, kontd});
}

} // namespace

std::optional<std::vector<DerivPtr>> infer_weak_state_ladder(const Memory& mem, const TermPtr& t,
                                                             std::size_t fuel) {
  RunResult r = run(mem, t, fuel, true);
  if (r.status != RunResult::Status::Success) return std::nullopt;
  const std::vector<MachineState>& states = *r.trace;

  // final state: every memory item gets the empty collection
  LooseMemory loose;
  for (const auto& [loc, stack] : r.final_memory.stacks)
    for (const auto& item : stack) loose[loc].push_back(empty_collection_node(item));
  MemoryType final_out = loose_memory_type(loose);
  DerivPtr term = unit_node(final_out);
  std::deque<DerivPtr> kont;

  std::vector<DerivPtr> ladder(states.size());
  ladder[states.size() - 1] = state_node(states.back(), loose, term, kont, final_out);

  for (std::size_t k = states.size() - 1; k-- > 0;) {
    const TermPtr& focus = states[k].focus;
    switch (focus->kind) {
      case TermKind::Push: {
        auto& stack = loose[focus->loc];
        DerivPtr argc = stack.back();
        stack.pop_back();
        if (stack.empty()) loose.erase(focus->loc);
        term = app_node(DRule::AppWeak, focus->loc, argc, term);
        break;
      }
      case TermKind::Pop: {
        const auto* s = states[k].memory.stack(focus->loc);
        TermPtr popped = s->back();
        SplitResult split =
            split_substitution(term, focus->body, focus->binder, popped, TypeSystem::Weak);
        term = abs_node(focus->loc, focus->binder, split.body);
        loose[focus->loc].push_back(split.arg_collection);
        break;
      }
      case TermKind::Seq: {
        DerivPtr right = kont.front();
        kont.pop_front();
        term = seq_node(term, right);
        break;
      }
      case TermKind::Skip: {
        kont.push_front(term);
        term = unit_node(comp_of(term).input);
        break;
      }
      case TermKind::Var:
        return std::nullopt; // cannot happen on a successful run
    }
    ladder[k] = state_node(states[k], loose, term, kont, final_out);
  }
  return ladder;
}

std::optional<DerivPtr> infer_weak_state(const Memory& mem, const TermPtr& t, std::size_t fuel) {
  auto ladder = infer_weak_state_ladder(mem, t, fuel);
  if (!ladder) return std::nullopt;
  return ladder->front();
}

// ---------------------------------------------------------------------------
// Strong inference

namespace {

struct StrongPair {
  DerivPtr subject; // types the perp node's subject
  DerivPtr result;  // types its normal form, same context and type
};

struct ChainLink {
  DerivPtr argc;
  DerivPtr witness;
  Location loc;
};

// Descends `count` strong application nodes along the body spine.
std::pair<std::vector<ChainLink>, DerivPtr> walk_chain(const DerivPtr& d, std::size_t count) {
  std::vector<ChainLink> chain;
  DerivPtr cur = d;
  for (std::size_t i = 0; i < count; ++i) {
    if (cur->rule != DRule::AppStrong) mismatch("expected a strong application chain");
    chain.push_back({cur->children[0], cur->children[2], subject_term(cur)->loc});
    cur = cur->children[1];
  }
  return {std::move(chain), cur};
}

DerivPtr rebuild_chain(const std::vector<ChainLink>& chain, DerivPtr core) {
  for (auto it = chain.rbegin(); it != chain.rend(); ++it)
    core = app_node(DRule::AppStrong, it->loc, it->argc, core, it->witness);
  return core;
}

// Wraps pushes with empty argument collections and the given witnesses.
DerivPtr wrap_strong_pushes(const std::vector<std::pair<TermPtr, Location>>& pushes,
                            const std::vector<DerivPtr>& witnesses, DerivPtr core) {
  for (std::size_t i = pushes.size(); i-- > 0;)
    core = app_node(DRule::AppStrong, pushes[i].second,
                    empty_collection_node(pushes[i].first), core, witnesses[i]);
  return core;
}

struct StrongSynth {
  std::optional<StrongPair> rec(const PerpPtr& p) {
    WeakHeadSplit s = weak_head_split(p->subject);
    switch (p->rule) {
      case PerpRule::Beta: {
        auto cont = rec(p->children[0]);
        auto arg = rec(p->children[1]);
        if (!cont || !arg) return std::nullopt;
        auto [chain, core] = walk_chain(cont->subject, s.pushes.size() - 1);
        SplitResult split = split_substitution(core, s.core->body, s.core->binder,
                                               s.pushes.back().first, TypeSystem::Strong);
        DerivPtr abs = abs_node(s.core->loc, s.core->binder, split.body);
        DerivPtr redex = app_node(DRule::AppStrong, s.pushes.back().second,
                                  split.arg_collection, abs, arg->subject);
        DerivPtr subject = rebuild_chain(chain, redex);
        DerivPtr result = mk_deriv(DRule::Weakening,
                                   context_sum(cont->result->ctx, arg->subject->ctx),
                                   cont->result->subject, cont->result->type, {cont->result});
        return StrongPair{subject, result};
      }

      case PerpRule::Passage: {
        auto cont = rec(p->children[0]);
        if (!cont) return std::nullopt;
        auto [chain, core] = walk_chain(cont->subject, s.pushes.size() - 1);
        DerivPtr expanded = expand_core_non_beta(core, Rule::Passage);
        return StrongPair{rebuild_chain(chain, expanded), cont->result};
      }

      case PerpRule::Next:
      case PerpRule::PrefixPop:
      case PerpRule::PrefixPush:
      case PerpRule::Associate: {
        auto cont = rec(p->children[0]);
        if (!cont) return std::nullopt;
        Rule rule = p->rule == PerpRule::Next        ? Rule::Next
                    : p->rule == PerpRule::PrefixPop ? Rule::PrefixPop
                    : p->rule == PerpRule::PrefixPush ? Rule::PrefixPush
                                                      : Rule::Associate;
        auto [chain, core] = walk_chain(cont->subject, s.pushes.size());
        DerivPtr expanded = expand_core_non_beta(core, rule);
        return StrongPair{rebuild_chain(chain, expanded), cont->result};
      }

      case PerpRule::NormAbs: {
        auto body = rec(p->children[0]);
        if (!body) return std::nullopt;
        return StrongPair{abs_node(p->subject->loc, p->subject->binder, body->subject),
                          abs_node(p->subject->loc, p->subject->binder, body->result)};
      }

      case PerpRule::NormUnit:
      case PerpRule::NormVar:
      case PerpRule::NormSeq: {
        std::vector<StrongPair> args;
        for (std::size_t i = 0; i < s.pushes.size(); ++i) {
          auto a = rec(p->children[i]);
          if (!a) return std::nullopt;
          args.push_back(std::move(*a));
        }
        std::map<Location, std::size_t> dims;
        for (const auto& [arg, loc] : s.pushes) ++dims[loc];
        MemoryType f = mem_empties(dims);

        DerivPtr subject_core, result_core;
        if (p->rule == PerpRule::NormUnit) {
          subject_core = unit_node(f);
          result_core = subject_core;
        } else if (p->rule == PerpRule::NormVar) {
          subject_core = var_node(s.core->var, CompType{f, MemoryType{}});
          result_core = subject_core;
        } else {
          auto contp = rec(p->children.back());
          if (!contp) return std::nullopt;
          DerivPtr var_s =
              var_node(s.core->left->var, CompType{f, comp_of(contp->subject).input});
          subject_core = seq_node(var_s, contp->subject);
          DerivPtr var_r =
              var_node(s.core->left->var, CompType{f, comp_of(contp->result).input});
          result_core = seq_node(var_r, contp->result);
        }

        std::vector<DerivPtr> sub_wits, res_wits;
        std::vector<std::pair<TermPtr, Location>> res_pushes;
        for (std::size_t i = 0; i < s.pushes.size(); ++i) {
          sub_wits.push_back(args[i].subject);
          res_wits.push_back(args[i].result);
          res_pushes.emplace_back(subject_term(args[i].result), s.pushes[i].second);
        }
        return StrongPair{wrap_strong_pushes(s.pushes, sub_wits, subject_core),
                          wrap_strong_pushes(res_pushes, res_wits, result_core)};
      }
    }
    return std::nullopt;
  }
};

} // namespace

std::optional<DerivPtr> infer_strong(const TermPtr& t, std::size_t fuel) {
  PerpResult p = perp_eval(t, fuel);
  if (p.status != PerpResult::Status::Done) return std::nullopt;
  StrongSynth synth;
  auto pair = synth.rec(p.tree);
  if (!pair) return std::nullopt;
  return pair->subject;
}

// ---------------------------------------------------------------------------
// Inhabitation search

namespace {

using HoleId = int;
using SearchSlot = std::variant<CollectionType, HoleId>;

struct SearchMem {
  std::map<Location, std::vector<SearchSlot>> per_loc;

  static SearchMem from(const MemoryType& m) {
    SearchMem s;
    for (const auto& [loc, v] : m.per_loc)
      for (const auto& c : v) s.per_loc[loc].push_back(c);
    return s;
  }

  SearchMem prepend(const Location& loc, SearchSlot slot) const {
    SearchMem out = *this;
    auto& v = out.per_loc[loc];
    v.insert(v.begin(), std::move(slot));
    return out;
  }
};

using HoleBinding = std::map<HoleId, CollectionType>;

std::optional<HoleBinding> unify(const SearchMem& in, const MemoryType& target) {
  HoleBinding out;
  // every location mentioned on either side must line up
  std::set<Location> locs;
  for (const auto& [l, v] : in.per_loc)
    if (!v.empty()) locs.insert(l);
  for (const auto& [l, v] : target.per_loc)
    if (!v.empty()) locs.insert(l);
  for (const auto& l : locs) {
    auto it = in.per_loc.find(l);
    const VectorType* tv = target.find(l);
    std::size_t in_n = it == in.per_loc.end() ? 0 : it->second.size();
    std::size_t t_n = tv ? tv->size() : 0;
    if (in_n != t_n) return std::nullopt;
    for (std::size_t i = 0; i < in_n; ++i) {
      const SearchSlot& slot = it->second[i];
      if (const CollectionType* c = std::get_if<CollectionType>(&slot)) {
        if (!type_equal(*c, (*tv)[i])) return std::nullopt;
      } else {
        out[std::get<HoleId>(slot)] = (*tv)[i];
      }
    }
  }
  return out;
}

struct EnvEntry {
  std::string name;
  CompType type;
};

struct Candidate {
  TermPtr term;
  HoleBinding holes;
};

struct InhabitSearch {
  std::vector<Location> push_locs;
  int next_hole = 0;
  int next_binder = 0;
  static constexpr std::size_t kMaxCandidates = 200;

  std::vector<TermPtr> inhabit_all(const CompType& goal, std::size_t depth) {
    std::vector<TermPtr> out;
    std::set<std::string> seen;
    for (auto& c : search_w(SearchMem::from(goal.input), goal.output, {}, depth)) {
      std::string key = alpha_key(c.term);
      if (seen.insert(key).second) out.push_back(c.term);
    }
    return out;
  }

  // goal_in here never contains holes: the top-level input is concrete and a
  // sequencing continuation restarts from a concrete environment type.
  std::vector<Candidate> search_w(const SearchMem& goal_in, const MemoryType& goal_out,
                                  const std::vector<EnvEntry>& env, std::size_t depth) {
    std::vector<Candidate> out = search_v(goal_in, goal_out, env, depth);
    if (depth == 0) return out;
    for (const auto& [loc, v] : goal_in.per_loc) {
      if (v.empty()) continue;
      const CollectionType* iota = std::get_if<CollectionType>(&v.front());
      if (!iota) continue;
      SearchMem rest = goal_in;
      auto& rv = rest.per_loc[loc];
      rv.erase(rv.begin());
      if (rv.empty()) rest.per_loc.erase(loc);
      std::string x = "i" + std::to_string(next_binder++);
      std::vector<EnvEntry> env2 = env;
      for (const auto& tau : iota->elems) env2.push_back({x, tau});
      for (auto& c : search_w(rest, goal_out, env2, depth - 1)) {
        if (out.size() >= kMaxCandidates) break;
        out.push_back({mk_pop(loc, x, c.term), std::move(c.holes)});
      }
    }
    return out;
  }

  std::vector<Candidate> search_v(const SearchMem& goal_in, const MemoryType& goal_out,
                                  const std::vector<EnvEntry>& env, std::size_t depth) {
    std::vector<Candidate> out;

    // unit: identity, everything consumed
    if (env.empty())
      if (auto holes = unify(goal_in, goal_out)) out.push_back({mk_skip(), *holes});

    // a single head variable
    if (env.size() == 1) {
      const EnvEntry& e = env.front();
      if (type_equal(e.type.output, goal_out))
        if (auto holes = unify(goal_in, e.type.input))
          out.push_back({mk_var(e.name), *holes});
    }

    if (depth == 0) return out;

    // head variable followed by a continuation
    for (std::size_t i = 0; i < env.size(); ++i) {
      if (out.size() >= kMaxCandidates) break;
      auto holes = unify(goal_in, env[i].type.input);
      if (!holes) continue;
      std::vector<EnvEntry> rest = env;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
      for (auto& c :
           search_w(SearchMem::from(env[i].type.output), goal_out, rest, depth - 1)) {
        if (out.size() >= kMaxCandidates) break;
        HoleBinding merged = *holes;
        merged.insert(c.holes.begin(), c.holes.end());
        out.push_back({mk_seq(mk_var(env[i].name), c.term), std::move(merged)});
      }
    }

    // a push with a searched argument collection
    for (const auto& loc : push_locs) {
      if (out.size() >= kMaxCandidates) break;
      HoleId h = next_hole++;
      SearchMem inner = goal_in.prepend(loc, h);
      for (auto& c : search_v(inner, goal_out, env, depth - 1)) {
        if (out.size() >= kMaxCandidates) break;
        auto it = c.holes.find(h);
        if (it == c.holes.end()) continue;
        CollectionType iota = it->second;
        c.holes.erase(it);
        for (const auto& arg : args_for(iota, depth - 1)) {
          if (out.size() >= kMaxCandidates) break;
          out.push_back({mk_push(arg, loc, c.term), c.holes});
        }
      }
    }
    return out;
  }

  // closed terms inhabiting every element of the collection
  std::vector<TermPtr> args_for(const CollectionType& iota, std::size_t depth) {
    if (iota.elems.empty()) return {mk_skip()};
    std::vector<TermPtr> candidates = inhabit_all(iota.elems.front(), depth);
    for (std::size_t i = 1; i < iota.elems.size() && !candidates.empty(); ++i) {
      std::set<std::string> keep;
      for (const auto& t : inhabit_all(iota.elems[i], depth)) keep.insert(alpha_key(t));
      std::vector<TermPtr> next;
      for (const auto& t : candidates)
        if (keep.count(alpha_key(t))) next.push_back(t);
      candidates = std::move(next);
    }
    return candidates;
  }
};

void collect_type_locations(const MemoryType& m, std::set<Location>& out);

void collect_type_locations(const CompType& t, std::set<Location>& out) {
  collect_type_locations(t.input, out);
  collect_type_locations(t.output, out);
}

void collect_type_locations(const MemoryType& m, std::set<Location>& out) {
  for (const auto& [loc, v] : m.per_loc) {
    if (!v.empty()) out.insert(loc);
    for (const auto& c : v)
      for (const auto& e : c.elems) collect_type_locations(e, out);
  }
}

} // namespace

std::optional<TermPtr> inhabit_search(const CompType& target, std::size_t max_depth) {
  InhabitSearch s;
  std::set<Location> locs;
  collect_type_locations(target, locs);
  locs.insert(default_location());
  s.push_locs.assign(locs.begin(), locs.end());
  auto found = s.inhabit_all(type_canonical(target), max_depth);
  if (found.empty()) return std::nullopt;
  return found.front();
}

} // namespace fmc
