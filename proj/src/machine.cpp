#include "fmc/machine.hpp"

#include <variant>

namespace fmc {

bool alpha_eq(const Memory& a, const Memory& b) {
  auto ia = a.stacks.begin(), ib = b.stacks.begin();
  while (true) {
    while (ia != a.stacks.end() && ia->second.empty()) ++ia;
    while (ib != b.stacks.end() && ib->second.empty()) ++ib;
    if (ia == a.stacks.end() || ib == b.stacks.end())
      return ia == a.stacks.end() && ib == b.stacks.end();
    if (ia->first != ib->first || ia->second.size() != ib->second.size()) return false;
    for (std::size_t i = 0; i < ia->second.size(); ++i)
      if (!alpha_eq(ia->second[i], ib->second[i])) return false;
    ++ia;
    ++ib;
  }
}

bool alpha_eq(const Kont& a, const Kont& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!alpha_eq(a[i], b[i])) return false;
  return true;
}

bool alpha_eq(const MachineState& a, const MachineState& b) {
  return alpha_eq(a.focus, b.focus) && alpha_eq(a.memory, b.memory) && alpha_eq(a.kont, b.kont);
}

StepOutcome step(const MachineState& s) {
  StepOutcome out;
  switch (s.focus->kind) {
    case TermKind::Push: {
      out.kind = StepOutcome::Kind::Next;
      out.next = s;
      out.next.memory.push(s.focus->loc, s.focus->arg);
      out.next.focus = s.focus->body;
      return out;
    }
    case TermKind::Seq: {
      out.kind = StepOutcome::Kind::Next;
      out.next = s;
      out.next.focus = s.focus->left;
      out.next.kont.push_front(s.focus->right);
      return out;
    }
    case TermKind::Pop: {
      Memory mem = s.memory;
      auto top = mem.pop(s.focus->loc);
      if (!top) {
        out.kind = StepOutcome::Kind::Failure;
        out.failure = FailureKind::EmptyPop;
        out.failure_loc = s.focus->loc;
        return out;
      }
      out.kind = StepOutcome::Kind::Next;
      out.next.memory = std::move(mem);
      out.next.focus = substitute(*top, s.focus->binder, s.focus->body);
      out.next.kont = s.kont;
      return out;
    }
    case TermKind::Skip: {
      if (s.kont.empty()) {
        out.kind = StepOutcome::Kind::Final;
        return out;
      }
      out.kind = StepOutcome::Kind::Next;
      out.next = s;
      out.next.focus = s.kont.front();
      out.next.kont.pop_front();
      return out;
    }
    case TermKind::Var: {
      out.kind = StepOutcome::Kind::Failure;
      out.failure = FailureKind::VarFocus;
      return out;
    }
  }
  out.kind = StepOutcome::Kind::Failure;
  out.failure = FailureKind::VarFocus;
  return out;
}

RunResult run(Memory mem, TermPtr t, std::size_t fuel, bool record_trace) {
  RunResult res;
  if (record_trace) res.trace.emplace();
  MachineState cur{std::move(mem), std::move(t), {}};
  std::size_t traversed = 0;
  while (true) {
    if (traversed == fuel) {
      res.status = RunResult::Status::FuelExhausted;
      res.stopped_at = cur;
      res.length = traversed;
      return res;
    }
    ++traversed;
    if (res.trace) res.trace->push_back(cur);
    StepOutcome o = step(cur);
    switch (o.kind) {
      case StepOutcome::Kind::Final:
        res.status = RunResult::Status::Success;
        res.final_memory = cur.memory;
        res.length = traversed;
        return res;
      case StepOutcome::Kind::Failure:
        res.status = RunResult::Status::Failed;
        res.stopped_at = cur;
        res.failure = o.failure;
        res.failure_loc = o.failure_loc;
        res.length = traversed;
        return res;
      case StepOutcome::Kind::Next:
        cur = std::move(o.next);
        break;
    }
  }
}

namespace {

struct EvalItem {
  enum class Tag { Eval, BuildSeq, BuildPush, BuildPop };
  Tag tag;
  TermPtr term; // Eval: term to evaluate; Build*: the subject
  Memory in;    // Build*: input memory of the subject
};

} // namespace

EvalResult eval_big(Memory mem, TermPtr t, std::size_t fuel) {
  EvalResult res;
  std::vector<EvalItem> work;
  std::vector<EvalTreePtr> done;
  work.push_back({EvalItem::Tag::Eval, std::move(t), {}});
  Memory cur = std::move(mem);
  std::size_t used = 0;

  while (!work.empty()) {
    EvalItem item = std::move(work.back());
    work.pop_back();
    switch (item.tag) {
      case EvalItem::Tag::Eval: {
        if (used == fuel) {
          res.status = EvalResult::Status::FuelExhausted;
          return res;
        }
        ++used;
        const TermPtr& m = item.term;
        switch (m->kind) {
          case TermKind::Skip: {
            auto node = std::make_shared<EvalTree>();
            node->rule = EvalRule::Unit;
            node->in = cur;
            node->subject = m;
            node->out = cur;
            node->count = 1;
            done.push_back(std::move(node));
            break;
          }
          case TermKind::Seq:
            work.push_back({EvalItem::Tag::BuildSeq, m, cur});
            work.push_back({EvalItem::Tag::Eval, m->right, {}});
            work.push_back({EvalItem::Tag::Eval, m->left, {}});
            break;
          case TermKind::Push:
            work.push_back({EvalItem::Tag::BuildPush, m, cur});
            cur.push(m->loc, m->arg);
            work.push_back({EvalItem::Tag::Eval, m->body, {}});
            break;
          case TermKind::Pop: {
            auto top = cur.pop(m->loc);
            if (!top) {
              res.status = EvalResult::Status::Stuck;
              return res;
            }
            work.push_back({EvalItem::Tag::BuildPop, m, cur});
            // restore: BuildPop's `in` must be the memory before the pop
            work.back().in.push(m->loc, *top);
            work.push_back({EvalItem::Tag::Eval, substitute(*top, m->binder, m->body), {}});
            break;
          }
          case TermKind::Var:
            res.status = EvalResult::Status::Stuck;
            return res;
        }
        break;
      }
      case EvalItem::Tag::BuildSeq: {
        EvalTreePtr right = std::move(done.back());
        done.pop_back();
        EvalTreePtr left = std::move(done.back());
        done.pop_back();
        auto node = std::make_shared<EvalTree>();
        node->rule = EvalRule::SeqRule;
        node->in = std::move(item.in);
        node->subject = item.term;
        node->out = right->out;
        node->count = left->count + right->count + 1;
        node->children = {std::move(left), std::move(right)};
        done.push_back(std::move(node));
        break;
      }
      case EvalItem::Tag::BuildPush:
      case EvalItem::Tag::BuildPop: {
        EvalTreePtr child = std::move(done.back());
        done.pop_back();
        auto node = std::make_shared<EvalTree>();
        node->rule = item.tag == EvalItem::Tag::BuildPush ? EvalRule::PushRule : EvalRule::PopRule;
        node->in = std::move(item.in);
        node->subject = item.term;
        node->out = child->out;
        node->count = child->count + 1;
        node->children = {std::move(child)};
        done.push_back(std::move(node));
        break;
      }
    }
  }

  res.status = EvalResult::Status::Done;
  res.out = std::move(cur);
  res.tree = std::move(done.back());
  return res;
}

Verdict check_agreement(const TermPtr& t, const Memory& mem, std::size_t fuel) {
  RunResult r = run(mem, t, fuel);
  EvalResult e = eval_big(mem, t, fuel);
  Verdict v;
  if (r.status == RunResult::Status::Success && e.status == EvalResult::Status::Done) {
    if (r.length == e.tree->count && alpha_eq(r.final_memory, e.out)) {
      v.kind = Verdict::Kind::Agree;
      v.length = r.length;
    } else {
      v.kind = Verdict::Kind::Mismatch;
      v.details = "run length " + std::to_string(r.length) + " vs big-step count " +
                  std::to_string(e.tree->count);
    }
    return v;
  }
  if (r.status == RunResult::Status::Failed && e.status == EvalResult::Status::Stuck) {
    v.kind = Verdict::Kind::BothFail;
    return v;
  }
  if (r.status == RunResult::Status::FuelExhausted &&
      e.status == EvalResult::Status::FuelExhausted) {
    v.kind = Verdict::Kind::BothDiverge;
    return v;
  }
  v.kind = Verdict::Kind::Mismatch;
  v.details = "machine status " + std::to_string(static_cast<int>(r.status)) +
              " vs big-step status " + std::to_string(static_cast<int>(e.status));
  return v;
}

TermPtr dimension_term(std::size_t d, const std::vector<Location>& locs) {
  if (d == 0) return mk_skip();
  TermPtr inner = dimension_term(d - 1, locs);
  TermPtr t = mk_skip();
  // iterate in reverse so the printed pushes come out location-ordered
  for (auto it = locs.rbegin(); it != locs.rend(); ++it)
    for (std::size_t i = 0; i < d; ++i) t = mk_push(inner, *it, t);
  return t;
}

Memory dimension_memory(std::size_t d, const std::vector<Location>& locs) {
  Memory mem;
  if (d == 0) return mem;
  TermPtr item = dimension_term(d - 1, locs);
  for (const auto& loc : locs)
    for (std::size_t i = 0; i < d; ++i) mem.push(loc, item);
  return mem;
}

SubstMap dimension_subst(std::size_t d, const std::vector<Location>& locs,
                         const std::set<std::string>& vars) {
  SubstMap sigma;
  if (vars.empty()) return sigma;
  TermPtr image = dimension_term(d, locs);
  for (const auto& v : vars) sigma[v] = image;
  return sigma;
}

bool is_memory_of_dimension(const Memory& mem, std::size_t d,
                            const std::vector<Location>& locs) {
  if (d == 0) return true;
  for (const auto& loc : locs) {
    const auto* s = mem.stack(loc);
    if (!s || s->size() < d) return false;
    for (const auto& item : *s)
      if (!is_term_of_dimension(item, d - 1, locs)) return false;
  }
  return true;
}

bool is_term_of_dimension(const TermPtr& t, std::size_t d,
                          const std::vector<Location>& locs) {
  Memory mem;
  const Term* cur = t.get();
  while (cur->kind == TermKind::Push) {
    mem.push(cur->loc, cur->arg);
    cur = cur->body.get();
  }
  if (cur->kind != TermKind::Skip) return false;
  return is_memory_of_dimension(mem, d, locs);
}

} // namespace fmc
