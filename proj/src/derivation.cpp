#include "fmc/derivation.hpp"

#include <stdexcept>

namespace fmc {

std::string drule_name(DRule r) {
  switch (r) {
    case DRule::Var: return "Var";
    case DRule::Abs: return "Abs";
    case DRule::AppWeak: return "AppWeak";
    case DRule::Unit: return "Unit";
    case DRule::Seq: return "Seq";
    case DRule::Collection: return "Collection";
    case DRule::MemEmpty: return "MemEmpty";
    case DRule::MemPush: return "MemPush";
    case DRule::KontEmpty: return "KontEmpty";
    case DRule::KontPush: return "KontPush";
    case DRule::State: return "State";
    case DRule::AppStrong: return "AppStrong";
    case DRule::Weakening: return "Weakening";
    case DRule::SubstAdmissible: return "SubstAdmissible";
  }
  return "?";
}

std::optional<DRule> drule_from_name(const std::string& s) {
  static const std::map<std::string, DRule> table = {
      {"Var", DRule::Var}, {"Abs", DRule::Abs}, {"AppWeak", DRule::AppWeak},
      {"Unit", DRule::Unit}, {"Seq", DRule::Seq}, {"Collection", DRule::Collection},
      {"MemEmpty", DRule::MemEmpty}, {"MemPush", DRule::MemPush},
      {"KontEmpty", DRule::KontEmpty}, {"KontPush", DRule::KontPush},
      {"State", DRule::State}, {"AppStrong", DRule::AppStrong},
      {"Weakening", DRule::Weakening}, {"SubstAdmissible", DRule::SubstAdmissible}};
  auto it = table.find(s);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

DerivPtr mk_deriv(DRule rule, TypingContext ctx, Subject subject, JudgementType type,
                  std::vector<DerivPtr> children) {
  auto d = std::make_shared<Derivation>();
  d->rule = rule;
  d->ctx = std::move(ctx);
  d->subject = std::move(subject);
  d->type = std::move(type);
  d->children = std::move(children);
  return d;
}

const TermPtr& subject_term(const DerivPtr& d) {
  const TermPtr* t = std::get_if<TermPtr>(&d->subject);
  if (!t) throw std::logic_error("derivation subject is not a term");
  return *t;
}

const CompType& comp_of(const DerivPtr& d) {
  const CompType* t = std::get_if<CompType>(&d->type);
  if (!t) throw std::logic_error("derivation type is not a computation type");
  return *t;
}

const CollectionType& collection_of(const DerivPtr& d) {
  const CollectionType* t = std::get_if<CollectionType>(&d->type);
  if (!t) throw std::logic_error("derivation type is not a collection type");
  return *t;
}

const MemoryType& memtype_of(const DerivPtr& d) {
  const MemoryType* t = std::get_if<MemoryType>(&d->type);
  if (!t) throw std::logic_error("derivation type is not a memory type");
  return *t;
}

std::size_t weight(const DerivPtr& d) {
  std::size_t w = 0;
  switch (d->rule) {
    case DRule::Abs:
    case DRule::AppWeak:
    case DRule::AppStrong:
    case DRule::Seq:
    case DRule::Unit:
      w = 1;
      break;
    default:
      break;
  }
  for (const auto& c : d->children) w += weight(c);
  return w;
}

namespace {

struct Checker {
  TypeSystem system;
  std::vector<std::size_t> path;
  CheckResult failure;
  bool failed = false;

  bool fail(const std::string& reason) {
    if (!failed) {
      failed = true;
      failure.ok = false;
      failure.path = path;
      failure.reason = reason;
    }
    return false;
  }

  bool check_children(const DerivPtr& d) {
    for (std::size_t i = 0; i < d->children.size(); ++i) {
      path.push_back(i);
      bool ok = check(d->children[i]);
      path.pop_back();
      if (!ok) return false;
    }
    return true;
  }

  bool rule_allowed(DRule r) {
    switch (r) {
      case DRule::AppWeak:
        return system != TypeSystem::Strong;
      case DRule::AppStrong:
      case DRule::Weakening:
        return system == TypeSystem::Strong;
      case DRule::MemEmpty:
      case DRule::MemPush:
      case DRule::KontEmpty:
      case DRule::KontPush:
      case DRule::State:
        return system == TypeSystem::State;
      default:
        return true;
    }
  }

  bool expect_arity(const DerivPtr& d, std::size_t n) {
    if (d->children.size() != n)
      return fail(drule_name(d->rule) + ": expected " + std::to_string(n) + " premises, found " +
                  std::to_string(d->children.size()));
    return true;
  }

  bool ctx_is_sum(const DerivPtr& d, const std::vector<DerivPtr>& parts) {
    TypingContext sum;
    for (const auto& p : parts) sum = context_sum(sum, p->ctx);
    if (!context_equal(d->ctx, sum))
      return fail(drule_name(d->rule) + ": context is not the sum of the premises");
    return true;
  }

  bool check(const DerivPtr& d) {
    if (!rule_allowed(d->rule))
      return fail(drule_name(d->rule) + " is not part of this system");
    if (!check_children(d)) return false;

    switch (d->rule) {
      case DRule::Var: {
        if (!expect_arity(d, 0)) return false;
        const TermPtr* t = std::get_if<TermPtr>(&d->subject);
        if (!t || (*t)->kind != TermKind::Var) return fail("Var: subject is not a variable");
        const CompType* ty = std::get_if<CompType>(&d->type);
        if (!ty) return fail("Var: not a computation type");
        TypingContext want;
        want.assign((*t)->var, CollectionType{{*ty}});
        if (!context_equal(d->ctx, want))
          return fail("Var: context must be exactly x:[t]");
        return true;
      }

      case DRule::Abs: {
        if (!expect_arity(d, 1)) return false;
        const TermPtr* t = std::get_if<TermPtr>(&d->subject);
        if (!t || (*t)->kind != TermKind::Pop) return fail("Abs: subject is not a pop");
        const DerivPtr& body = d->children[0];
        const TermPtr* bt = std::get_if<TermPtr>(&body->subject);
        if (!bt || !term_struct_eq(*bt, (*t)->body))
          return fail("Abs: premise subject is not the pop body");
        const CompType* bty = std::get_if<CompType>(&body->type);
        const CompType* ty = std::get_if<CompType>(&d->type);
        if (!bty || !ty) return fail("Abs: not computation types");
        CollectionType iota = body->ctx.lookup((*t)->binder);
        CompType want{mem_prepend((*t)->loc, iota, bty->input), bty->output};
        if (!type_equal(*ty, want)) return fail("Abs: type does not extend the premise by a(i)");
        if (!context_equal(d->ctx, context_remove(body->ctx, (*t)->binder)))
          return fail("Abs: context must be the premise without the binder");
        return true;
      }

      case DRule::AppWeak:
      case DRule::AppStrong: {
        bool strong = d->rule == DRule::AppStrong;
        if (!expect_arity(d, strong ? 3 : 2)) return false;
        const TermPtr* t = std::get_if<TermPtr>(&d->subject);
        if (!t || (*t)->kind != TermKind::Push) return fail("App: subject is not a push");
        const DerivPtr& argc = d->children[0];
        const DerivPtr& body = d->children[1];
        if (argc->rule != DRule::Collection)
          return fail("App: first premise must be a collection judgement");
        const TermPtr* at = std::get_if<TermPtr>(&argc->subject);
        if (!at || !term_struct_eq(*at, (*t)->arg))
          return fail("App: collection premise subject is not the argument");
        const CollectionType* iota = std::get_if<CollectionType>(&argc->type);
        if (!iota) return fail("App: collection premise lacks a collection type");
        const TermPtr* bt = std::get_if<TermPtr>(&body->subject);
        if (!bt || !term_struct_eq(*bt, (*t)->body))
          return fail("App: body premise subject is not the push body");
        const CompType* bty = std::get_if<CompType>(&body->type);
        const CompType* ty = std::get_if<CompType>(&d->type);
        if (!bty || !ty) return fail("App: not computation types");
        auto front = mem_front(bty->input, (*t)->loc);
        if (!front || !type_equal(*front, *iota))
          return fail("App: body input does not start with a(i) for the argument collection");
        CompType want{mem_drop_front(bty->input, (*t)->loc), bty->output};
        if (!type_equal(*ty, want)) return fail("App: conclusion type mismatch");
        std::vector<DerivPtr> parts{argc, body};
        if (strong) {
          const DerivPtr& wit = d->children[2];
          const TermPtr* wt = std::get_if<TermPtr>(&wit->subject);
          if (!wt || !term_struct_eq(*wt, (*t)->arg))
            return fail("AppStrong: witness subject is not the argument");
          if (!std::get_if<CompType>(&wit->type))
            return fail("AppStrong: witness must carry a computation type");
          parts.push_back(wit);
        }
        return ctx_is_sum(d, parts);
      }

      case DRule::Unit: {
        if (!expect_arity(d, 0)) return false;
        const TermPtr* t = std::get_if<TermPtr>(&d->subject);
        if (!t || (*t)->kind != TermKind::Skip) return fail("Unit: subject is not skip");
        const CompType* ty = std::get_if<CompType>(&d->type);
        if (!ty) return fail("Unit: not a computation type");
        if (!type_equal(ty->input, ty->output)) return fail("Unit: input and output differ");
        if (!d->ctx.empty()) return fail("Unit: context must be empty");
        return true;
      }

      case DRule::Seq: {
        if (!expect_arity(d, 2)) return false;
        const TermPtr* t = std::get_if<TermPtr>(&d->subject);
        if (!t || (*t)->kind != TermKind::Seq) return fail("Seq: subject is not a sequencing");
        const DerivPtr& l = d->children[0];
        const DerivPtr& r = d->children[1];
        const TermPtr* lt = std::get_if<TermPtr>(&l->subject);
        const TermPtr* rt = std::get_if<TermPtr>(&r->subject);
        if (!lt || !term_struct_eq(*lt, (*t)->left) || !rt || !term_struct_eq(*rt, (*t)->right))
          return fail("Seq: premise subjects do not match the operands");
        const CompType* lty = std::get_if<CompType>(&l->type);
        const CompType* rty = std::get_if<CompType>(&r->type);
        const CompType* ty = std::get_if<CompType>(&d->type);
        if (!lty || !rty || !ty) return fail("Seq: not computation types");
        if (!type_equal(lty->output, rty->input))
          return fail("Seq: middle types do not compose");
        if (!type_equal(ty->input, lty->input) || !type_equal(ty->output, rty->output))
          return fail("Seq: conclusion type mismatch");
        return ctx_is_sum(d, {l, r});
      }

      case DRule::Collection: {
        const TermPtr* t = std::get_if<TermPtr>(&d->subject);
        if (!t) return fail("Collection: subject is not a term");
        const CollectionType* ty = std::get_if<CollectionType>(&d->type);
        if (!ty) return fail("Collection: not a collection type");
        CollectionType got;
        for (const auto& c : d->children) {
          const TermPtr* ct = std::get_if<TermPtr>(&c->subject);
          if (!ct || !alpha_eq(*ct, *t))
            return fail("Collection: premises must type the same term");
          const CompType* cty = std::get_if<CompType>(&c->type);
          if (!cty) return fail("Collection: premise is not a computation judgement");
          got.elems.push_back(*cty);
        }
        if (!type_equal(got, *ty))
          return fail("Collection: type is not the multiset of the premise types");
        return ctx_is_sum(d, d->children);
      }

      case DRule::MemEmpty: {
        if (!expect_arity(d, 0)) return false;
        const Memory* m = std::get_if<Memory>(&d->subject);
        if (!m || !m->empty()) return fail("MemEmpty: subject is not the empty memory");
        const MemoryType* ty = std::get_if<MemoryType>(&d->type);
        if (!ty || !ty->empty()) return fail("MemEmpty: type is not the empty memory type");
        if (!d->ctx.empty()) return fail("MemEmpty: context must be empty");
        return true;
      }

      case DRule::MemPush: {
        if (!expect_arity(d, 2)) return false;
        const Memory* m = std::get_if<Memory>(&d->subject);
        if (!m) return fail("MemPush: subject is not a memory");
        const DerivPtr& rest = d->children[0];
        const DerivPtr& item = d->children[1];
        const Memory* rm = std::get_if<Memory>(&rest->subject);
        if (!rm) return fail("MemPush: first premise is not a memory judgement");
        if (item->rule != DRule::Collection)
          return fail("MemPush: second premise must be a collection judgement");
        const TermPtr* it = std::get_if<TermPtr>(&item->subject);
        if (!it) return fail("MemPush: collection premise subject is not a term");
        Memory expect = *rm;
        expect.push(d->loc, *it);
        if (!alpha_eq(expect, *m))
          return fail("MemPush: subject is not the premise memory with the item pushed");
        const MemoryType* rty = std::get_if<MemoryType>(&rest->type);
        const CollectionType* ity = std::get_if<CollectionType>(&item->type);
        const MemoryType* ty = std::get_if<MemoryType>(&d->type);
        if (!rty || !ity || !ty) return fail("MemPush: type layers mismatch");
        if (!type_equal(*ty, mem_prepend(d->loc, *ity, *rty)))
          return fail("MemPush: type is not the premise with the collection pushed");
        if (!d->ctx.empty() || !rest->ctx.empty() || !item->ctx.empty())
          return fail("MemPush: memory judgements are closed");
        return true;
      }

      case DRule::KontEmpty: {
        if (!expect_arity(d, 0)) return false;
        const Kont* k = std::get_if<Kont>(&d->subject);
        if (!k || !k->empty()) return fail("KontEmpty: subject is not the empty stack");
        const CompType* ty = std::get_if<CompType>(&d->type);
        if (!ty || !type_equal(ty->input, ty->output))
          return fail("KontEmpty: type must be an identity");
        if (!d->ctx.empty()) return fail("KontEmpty: context must be empty");
        return true;
      }

      case DRule::KontPush: {
        if (!expect_arity(d, 2)) return false;
        const Kont* k = std::get_if<Kont>(&d->subject);
        if (!k || k->empty()) return fail("KontPush: subject is not a non-empty stack");
        const DerivPtr& head = d->children[0];
        const DerivPtr& rest = d->children[1];
        const TermPtr* ht = std::get_if<TermPtr>(&head->subject);
        if (!ht || !alpha_eq(*ht, k->front()))
          return fail("KontPush: first premise is not the head term");
        const Kont* rk = std::get_if<Kont>(&rest->subject);
        Kont tail = *k;
        tail.pop_front();
        if (!rk || !alpha_eq(*rk, tail)) return fail("KontPush: second premise is not the tail");
        if (!head->ctx.empty()) return fail("KontPush: head judgement must be closed");
        const CompType* hty = std::get_if<CompType>(&head->type);
        const CompType* rty = std::get_if<CompType>(&rest->type);
        const CompType* ty = std::get_if<CompType>(&d->type);
        if (!hty || !rty || !ty) return fail("KontPush: not computation types");
        if (!type_equal(hty->output, rty->input))
          return fail("KontPush: middle types do not compose");
        if (!type_equal(ty->input, hty->input) || !type_equal(ty->output, rty->output))
          return fail("KontPush: conclusion type mismatch");
        if (!d->ctx.empty()) return fail("KontPush: context must be empty");
        return true;
      }

      case DRule::State: {
        if (!expect_arity(d, 3)) return false;
        const MachineState* s = std::get_if<MachineState>(&d->subject);
        if (!s) return fail("State: subject is not a machine state");
        const DerivPtr& mem = d->children[0];
        const DerivPtr& term = d->children[1];
        const DerivPtr& kont = d->children[2];
        const Memory* mm = std::get_if<Memory>(&mem->subject);
        if (!mm || !alpha_eq(*mm, s->memory)) return fail("State: memory premise mismatch");
        const TermPtr* tt = std::get_if<TermPtr>(&term->subject);
        if (!tt || !alpha_eq(*tt, s->focus)) return fail("State: focus premise mismatch");
        const Kont* kk = std::get_if<Kont>(&kont->subject);
        if (!kk || !alpha_eq(*kk, s->kont)) return fail("State: continuation premise mismatch");
        if (!term->ctx.empty()) return fail("State: the focus judgement must be closed");
        const MemoryType* mty = std::get_if<MemoryType>(&mem->type);
        const CompType* tty = std::get_if<CompType>(&term->type);
        const CompType* kty = std::get_if<CompType>(&kont->type);
        const CompType* ty = std::get_if<CompType>(&d->type);
        if (!mty || !tty || !kty || !ty) return fail("State: type layers mismatch");
        if (!type_equal(*mty, tty->input))
          return fail("State: memory type does not feed the focus input");
        if (!type_equal(tty->output, kty->input))
          return fail("State: focus output does not feed the continuation");
        if (!ty->input.empty()) return fail("State: input type must be empty");
        if (!type_equal(ty->output, kty->output)) return fail("State: output type mismatch");
        if (!d->ctx.empty()) return fail("State: context must be empty");
        return true;
      }

      case DRule::Weakening: {
        if (!expect_arity(d, 1)) return false;
        const DerivPtr& c = d->children[0];
        const TermPtr* t = std::get_if<TermPtr>(&d->subject);
        const TermPtr* ct = std::get_if<TermPtr>(&c->subject);
        if (!t || !ct || !term_struct_eq(*t, *ct))
          return fail("Weakening: subject must match the premise");
        const CompType* ty = std::get_if<CompType>(&d->type);
        const CompType* cty = std::get_if<CompType>(&c->type);
        if (!ty || !cty || !type_equal(*ty, *cty))
          return fail("Weakening: type must match the premise");
        if (!context_subset(c->ctx, d->ctx))
          return fail("Weakening: context must contain the premise context");
        return true;
      }

      case DRule::SubstAdmissible: {
        if (!expect_arity(d, 2)) return false;
        const DerivPtr& argc = d->children[0];
        const DerivPtr& body = d->children[1];
        if (argc->rule != DRule::Collection)
          return fail("SubstAdmissible: first premise must be a collection judgement");
        const TermPtr* nt = std::get_if<TermPtr>(&argc->subject);
        const TermPtr* mt = std::get_if<TermPtr>(&body->subject);
        const TermPtr* st = std::get_if<TermPtr>(&d->subject);
        if (!nt || !mt || !st) return fail("SubstAdmissible: subjects must be terms");
        const CollectionType* iota = std::get_if<CollectionType>(&argc->type);
        if (!iota) return fail("SubstAdmissible: collection premise lacks a collection type");
        if (!type_equal(body->ctx.lookup(d->binder), *iota))
          return fail("SubstAdmissible: body context does not assign the collection to x");
        if (!alpha_eq(*st, substitute(*nt, d->binder, *mt)))
          return fail("SubstAdmissible: subject is not the substituted term");
        const CompType* bty = std::get_if<CompType>(&body->type);
        const CompType* ty = std::get_if<CompType>(&d->type);
        if (!bty || !ty || !type_equal(*bty, *ty))
          return fail("SubstAdmissible: type must match the body premise");
        TypingContext sum = context_sum(argc->ctx, context_remove(body->ctx, d->binder));
        if (!context_equal(d->ctx, sum))
          return fail("SubstAdmissible: context mismatch");
        return true;
      }
    }
    return fail("unknown rule");
  }
};

} // namespace

CheckResult check_derivation(const DerivPtr& d, TypeSystem system) {
  Checker c;
  c.system = system;
  CheckResult res;
  if (c.check(d)) {
    res.ok = true;
    res.weight = weight(d);
  } else {
    res = c.failure;
  }
  return res;
}

} // namespace fmc
