#include "fmc/serialize.hpp"

#include <stdexcept>

namespace fmc {

Json memory_json(const Memory& m) {
  Json j = Json::object();
  for (const auto& [loc, stack] : m.stacks) {
    if (stack.empty()) continue;
    Json items = Json::array();
    for (const auto& t : stack) items.push_back(pretty(t));
    j[loc.name] = std::move(items);
  }
  return j;
}

Memory memory_from_json(const Json& j) {
  Memory m;
  for (const auto& [name, items] : j.items())
    for (const auto& s : items) m.push(Location(name), parse(s.get<std::string>()));
  return m;
}

Json state_json(const MachineState& s) {
  Json j;
  j["memory"] = memory_json(s.memory);
  j["focus"] = pretty(s.focus);
  Json kont = Json::array();
  for (const auto& t : s.kont) kont.push_back(pretty(t));
  j["kont"] = std::move(kont);
  return j;
}

MachineState state_from_json(const Json& j) {
  MachineState s;
  s.memory = memory_from_json(j.at("memory"));
  s.focus = parse(j.at("focus").get<std::string>());
  for (const auto& t : j.at("kont")) s.kont.push_back(parse(t.get<std::string>()));
  return s;
}

Json run_json(const RunResult& r) {
  Json j;
  switch (r.status) {
    case RunResult::Status::Success:
      j["status"] = "success";
      j["length"] = r.length;
      j["memory"] = memory_json(r.final_memory);
      break;
    case RunResult::Status::Failed:
      j["status"] = "failure";
      j["length"] = r.length;
      j["kind"] = r.failure == FailureKind::VarFocus ? "var-focus" : "empty-pop";
      if (r.failure == FailureKind::EmptyPop) j["location"] = r.failure_loc.name;
      j["state"] = state_json(r.stopped_at);
      break;
    case RunResult::Status::FuelExhausted:
      j["status"] = "fuel-exhausted";
      j["state"] = state_json(r.stopped_at);
      break;
  }
  if (r.trace) {
    Json steps = Json::array();
    for (const auto& s : *r.trace) steps.push_back(state_json(s));
    j["trace"] = std::move(steps);
  }
  return j;
}

Json eval_tree_json(const EvalTreePtr& t) {
  Json j;
  switch (t->rule) {
    case EvalRule::Unit: j["rule"] = "Unit"; break;
    case EvalRule::SeqRule: j["rule"] = "Seq"; break;
    case EvalRule::PushRule: j["rule"] = "Push"; break;
    case EvalRule::PopRule: j["rule"] = "Pop"; break;
  }
  j["count"] = t->count;
  j["in"] = memory_json(t->in);
  j["subject"] = pretty(t->subject);
  j["out"] = memory_json(t->out);
  Json children = Json::array();
  for (const auto& c : t->children) children.push_back(eval_tree_json(c));
  j["children"] = std::move(children);
  return j;
}

Json reduction_trace_json(const ReductionTrace& t) {
  Json j;
  j["start"] = pretty(t.start);
  Json steps = Json::array();
  for (const auto& s : t.steps) {
    Json step;
    step["position"] = position_to_string(s.redex.at);
    step["rule"] = rule_name(s.redex.rule);
    step["result"] = pretty(s.result);
    steps.push_back(std::move(step));
  }
  j["steps"] = std::move(steps);
  j["result"] = pretty(t.final_term());
  return j;
}

Json perp_tree_json(const PerpPtr& p) {
  Json j;
  j["rule"] = perp_rule_name(p->rule);
  j["subject"] = pretty(p->subject);
  j["result"] = pretty(p->result);
  Json children = Json::array();
  for (const auto& c : p->children) children.push_back(perp_tree_json(c));
  j["children"] = std::move(children);
  return j;
}

Json derivation_json(const DerivPtr& d) {
  Json j;
  j["rule"] = drule_name(d->rule);
  Json ctx = Json::object();
  for (const auto& [x, c] : d->ctx.bindings) {
    Json types = Json::array();
    for (const auto& e : c.elems) types.push_back(print_comp(e));
    ctx[x] = std::move(types);
  }
  j["context"] = std::move(ctx);

  Json subject;
  if (const TermPtr* t = std::get_if<TermPtr>(&d->subject)) {
    subject["term"] = pretty(*t);
  } else if (const Memory* m = std::get_if<Memory>(&d->subject)) {
    subject["memory"] = memory_json(*m);
  } else if (const Kont* k = std::get_if<Kont>(&d->subject)) {
    Json items = Json::array();
    for (const auto& t : *k) items.push_back(pretty(t));
    subject["kont"] = std::move(items);
  } else if (const MachineState* s = std::get_if<MachineState>(&d->subject)) {
    subject["state"] = state_json(*s);
  }
  j["subject"] = std::move(subject);

  Json type;
  if (const CompType* t = std::get_if<CompType>(&d->type)) {
    type["comp"] = print_comp(*t);
  } else if (const CollectionType* c = std::get_if<CollectionType>(&d->type)) {
    type["collection"] = print_collection(*c);
  } else if (const MemoryType* m = std::get_if<MemoryType>(&d->type)) {
    type["memory"] = print_memory(*m, true);
  }
  j["type"] = std::move(type);

  if (d->rule == DRule::MemPush) j["loc"] = d->loc.name;
  if (d->rule == DRule::SubstAdmissible) j["binder"] = d->binder;

  Json children = Json::array();
  for (const auto& c : d->children) children.push_back(derivation_json(c));
  j["children"] = std::move(children);
  return j;
}

DerivPtr derivation_from_json(const Json& j) {
  auto rule = drule_from_name(j.at("rule").get<std::string>());
  if (!rule) throw std::invalid_argument("derivation: unknown rule name");

  TypingContext ctx;
  if (j.contains("context"))
    for (const auto& [x, types] : j.at("context").items()) {
      CollectionType c;
      for (const auto& s : types) c.elems.push_back(parse_comp_type(s.get<std::string>()));
      ctx.assign(x, std::move(c));
    }

  const Json& sj = j.at("subject");
  Subject subject;
  if (sj.contains("term")) {
    subject = parse(sj.at("term").get<std::string>());
  } else if (sj.contains("memory")) {
    subject = memory_from_json(sj.at("memory"));
  } else if (sj.contains("kont")) {
    Kont k;
    for (const auto& t : sj.at("kont")) k.push_back(parse(t.get<std::string>()));
    subject = std::move(k);
  } else if (sj.contains("state")) {
    subject = state_from_json(sj.at("state"));
  } else {
    throw std::invalid_argument("derivation: missing subject");
  }

  const Json& tj = j.at("type");
  JudgementType type;
  if (tj.contains("comp")) {
    type = parse_comp_type(tj.at("comp").get<std::string>());
  } else if (tj.contains("collection")) {
    type = parse_collection_type(tj.at("collection").get<std::string>());
  } else if (tj.contains("memory")) {
    type = parse_memory_type(tj.at("memory").get<std::string>(), true);
  } else {
    throw std::invalid_argument("derivation: missing type");
  }

  std::vector<DerivPtr> children;
  if (j.contains("children"))
    for (const auto& c : j.at("children")) children.push_back(derivation_from_json(c));

  auto d = std::make_shared<Derivation>();
  d->rule = *rule;
  d->ctx = std::move(ctx);
  d->subject = std::move(subject);
  d->type = std::move(type);
  d->children = std::move(children);
  if (j.contains("loc")) d->loc = Location(j.at("loc").get<std::string>());
  if (j.contains("binder")) d->binder = j.at("binder").get<std::string>();
  return d;
}

} // namespace fmc
