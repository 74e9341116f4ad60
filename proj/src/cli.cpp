#include "fmc/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fmc/encodings.hpp"
#include "fmc/infer.hpp"
#include "fmc/serialize.hpp"

namespace fmc {

namespace {

constexpr std::size_t kDefaultFuel = 10000;
constexpr std::size_t kSelfTestFuel = 100000;

struct Output {
  bool json = false;
  Json j;
  std::string text;

  void field(const char* key, const std::string& value) {
    if (json)
      j[key] = value;
    else
      text += std::string(key) + ": " + value + "\n";
  }

  void field(const char* key, std::size_t value) {
    if (json)
      j[key] = value;
    else
      text += std::string(key) + ": " + std::to_string(value) + "\n";
  }

  void raw(const char* key, Json value, const std::string& human) {
    if (json)
      j[key] = std::move(value);
    else
      text += std::string(key) + ": " + human + "\n";
  }

  std::string render() const {
    if (json) return j.dump(2) + "\n";
    return text;
  }
};

std::string memory_human(const Memory& m) { return memory_json(m).dump(); }

struct NegativeResult {}; // marks exit code 1 after output is rendered

} // namespace

std::string load_input(const std::string& arg) {
  if (arg.empty() || arg[0] != '@') return arg;
  std::ifstream in(arg.substr(1));
  if (!in) throw std::invalid_argument("cannot read file '" + arg.substr(1) + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Memory parse_memory_literal(const std::string& spec) {
  Memory mem;
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < spec.size() &&
           (std::isspace(static_cast<unsigned char>(spec[pos])) || spec[pos] == ','))
      ++pos;
  };
  skip();
  while (pos < spec.size()) {
    std::size_t start = pos;
    while (pos < spec.size() &&
           (std::isalnum(static_cast<unsigned char>(spec[pos])) || spec[pos] == '_'))
      ++pos;
    if (start == pos) throw std::invalid_argument("memory literal: expected a location name");
    Location loc(spec.substr(start, pos - start));
    skip();
    if (pos >= spec.size() || spec[pos] != ':')
      throw std::invalid_argument("memory literal: expected ':'");
    ++pos;
    skip();
    if (pos >= spec.size() || spec[pos] != '[')
      throw std::invalid_argument("memory literal: expected '['");
    ++pos;
    // split the bracket contents on top-level commas; terms contain no commas
    int depth = 0;
    std::string piece;
    std::vector<std::string> pieces;
    for (; pos < spec.size(); ++pos) {
      char c = spec[pos];
      if (c == '[' || c == '(') ++depth;
      if (c == ']' || c == ')') {
        if (c == ']' && depth == 0) break;
        --depth;
      }
      if (c == ',' && depth == 0) {
        pieces.push_back(piece);
        piece.clear();
        continue;
      }
      piece += c;
    }
    if (pos >= spec.size()) throw std::invalid_argument("memory literal: unbalanced '['");
    ++pos; // ']'
    auto blank = [](const std::string& s) {
      return s.find_first_not_of(" \t\r\n") == std::string::npos;
    };
    if (!blank(piece)) pieces.push_back(piece);
    for (const auto& p : pieces) mem.push(loc, parse(p)); // top of stack last
    skip();
  }
  return mem;
}

namespace {

// ---------------------------------------------------------------------------
// self-test suites

struct SuiteReport {
  std::string name;
  std::size_t cases = 0;
  std::vector<std::string> failures; // sorted by term text

  void check(bool ok, const TermPtr& t, const std::string& what) {
    ++cases;
    if (!ok) failures.push_back(pretty(t) + ": " + what);
  }
};

SuiteReport suite_agreement(std::size_t fuel, std::uint64_t seed) {
  SuiteReport rep;
  rep.name = "agreement";
  std::vector<Location> locs{default_location(), Location("a")};
  auto terms = enumerate_terms(5, locs, {});
  auto extra = random_terms(200, 12, locs, seed);
  terms.insert(terms.end(), extra.begin(), extra.end());
  for (const auto& t : terms) {
    Verdict v = check_agreement(t, {}, fuel);
    rep.check(v.kind != Verdict::Kind::Mismatch, t, "machine/big-step mismatch: " + v.details);
  }
  std::sort(rep.failures.begin(), rep.failures.end());
  return rep;
}

SuiteReport suite_weights(std::size_t fuel) {
  SuiteReport rep;
  rep.name = "weights";
  std::vector<Location> locs{default_location(), Location("a")};
  for (const auto& t : enumerate_terms(5, locs, {})) {
    RunResult r = run({}, t, fuel);
    if (r.status != RunResult::Status::Success) continue;
    auto d = infer_weak_state({}, t, fuel);
    if (!d) {
      rep.check(false, t, "run succeeded but the state is untyped");
      continue;
    }
    bool ok = weight(*d) == r.length && check_derivation(*d, TypeSystem::State).ok;
    rep.check(ok, t, "state weight disagrees with the run length");
  }
  std::sort(rep.failures.begin(), rep.failures.end());
  return rep;
}

SuiteReport suite_spine(std::size_t fuel) {
  SuiteReport rep;
  rep.name = "spine";
  std::vector<Location> locs{default_location(), Location("a")};
  for (const auto& t : enumerate_terms(5, locs, {"x"})) {
    bool coherent = is_spine_normal(t) == redexes(t, true).empty() &&
                    is_normal(t) == redexes(t, false).empty();
    rep.check(coherent, t, "normal-form recognizer disagrees with redex discovery");
    auto d = infer_weak(t, fuel);
    bool normalizes = spine_normalize(t, fuel).has_value();
    rep.check(d.has_value() == normalizes, t, "weak typing disagrees with spine normalization");
    if (d) rep.check(check_derivation(*d, TypeSystem::Weak).ok, t, "weak derivation fails to check");
  }
  std::sort(rep.failures.begin(), rep.failures.end());
  return rep;
}

SuiteReport suite_strong(std::size_t fuel) {
  SuiteReport rep;
  rep.name = "strong";
  std::vector<Location> locs{default_location(), Location("a")};
  for (const auto& t : enumerate_terms(5, locs, {})) {
    SNVerdict v = bounded_sn_check(t, fuel, 60);
    if (v.kind == SNVerdict::Kind::Unknown) continue;
    PerpResult p = perp_eval(t, fuel);
    auto d = infer_strong(t, fuel);
    bool sn = v.kind == SNVerdict::Kind::SN;
    rep.check((p.status == PerpResult::Status::Done) == sn, t,
              "perpetual evaluation disagrees with the SN oracle");
    rep.check(d.has_value() == sn, t, "strong typing disagrees with the SN oracle");
    if (d)
      rep.check(check_derivation(*d, TypeSystem::Strong).ok, t,
                "strong derivation fails to check");
  }
  std::sort(rep.failures.begin(), rep.failures.end());
  return rep;
}

SuiteReport suite_encodings(std::size_t fuel) {
  SuiteReport rep;
  rep.name = "encodings";
  // the displayed store reduction lines
  TermPtr letget = derived_let_get(Location("a"), "x", parse("[x].*"), false);
  auto tr = spine_normalize(letget, fuel);
  rep.check(tr && alpha_eq(tr->final_term(), parse("a<x>.[x]a.[x].*")), letget,
            "let-get failed to reduce to the get clause");
  TermPtr set_then = mk_seq(derived_update(Location("a"), parse("x"), mk_skip()), parse("[y].*"));
  tr = spine_normalize(set_then, fuel);
  rep.check(tr && alpha_eq(tr->final_term(), parse("a<_>.[x]a.[y].*")), set_then,
            "update prefixing failed to reduce");
  // cbn simulates beta in one spine step
  LambdaPtr redex = parse_lambda("(\\x. x x) (\\z. z)");
  TermPtr enc = encode_cbn(redex);
  auto rs = redexes(enc, true);
  bool ok = !rs.empty() && rs.front().rule == Rule::Beta;
  if (ok) {
    auto [reduct, payload] = apply_redex(enc, rs.front());
    ok = alpha_eq(reduct, substitute(encode_cbn(redex->arg), "x",
                                     encode_cbn(redex->fun->body)));
  }
  rep.check(ok, enc, "cbn encoding does not simulate beta");
  // weak/strong disagree on a discarded divergent argument
  TermPtr negative = parse("[[<x>.[x].x].<x>.[x].x].<x>.*");
  rep.check(infer_weak(negative, fuel).has_value(), negative, "expected weak typeability");
  rep.check(!infer_strong(negative, fuel).has_value(), negative, "expected strong failure");
  return rep;
}

// ---------------------------------------------------------------------------

int run_dispatch(const std::vector<std::string>& argv, std::string& out_s, std::string& err_s) {
  CLI::App app{"Functional Machine Calculus toolkit"};
  app.name("fmc");
  app.require_subcommand(1);
  app.fallthrough(); // global flags may follow the subcommand

  std::size_t fuel = kDefaultFuel;
  bool json = false;
  bool trace = false;
  std::string mem_spec;
  app.add_option("--fuel", fuel, "budget in machine states / rule instances / steps");
  app.add_flag("--json", json, "structured output");
  app.add_flag("--trace", trace, "include traces or derivations in the output");
  app.add_option("--mem", mem_spec, "initial memory, e.g. 'a:[*, <x>.x]' (top last)");

  std::string term_arg, system_arg = "weak", strategy_arg = "full", source_arg = "cbn";
  std::string type_arg, deriv_arg, suite_arg = "all";
  std::size_t depth = 4;

  CLI::App* cmd_parse = app.add_subcommand("parse", "parse a term and print it back");
  cmd_parse->add_option("term", term_arg)->required();

  CLI::App* cmd_run = app.add_subcommand("run", "run the abstract machine");
  cmd_run->add_option("term", term_arg)->required();

  CLI::App* cmd_eval = app.add_subcommand("eval", "big-step evaluation with counts");
  cmd_eval->add_option("term", term_arg)->required();

  CLI::App* cmd_norm = app.add_subcommand("normalize", "reduce to (spine) normal form");
  cmd_norm->add_option("term", term_arg)->required();
  cmd_norm->add_option("--strategy", strategy_arg)
      ->check(CLI::IsMember({"full", "spine", "perpetual"}));

  CLI::App* cmd_infer = app.add_subcommand("infer", "quantitative type inference");
  cmd_infer->add_option("term", term_arg)->required();
  cmd_infer->add_option("--system", system_arg)->check(CLI::IsMember({"weak", "strong", "state"}));

  CLI::App* cmd_check = app.add_subcommand("check-derivation", "validate a serialized derivation");
  cmd_check->add_option("derivation", deriv_arg, "inline JSON or @file")->required();
  cmd_check->add_option("--system", system_arg)->check(CLI::IsMember({"weak", "strong", "state"}));

  CLI::App* cmd_inhabit = app.add_subcommand("inhabit", "search for a closed inhabitant");
  cmd_inhabit->add_option("type", type_arg)->required();
  cmd_inhabit->add_option("--depth", depth);

  CLI::App* cmd_encode = app.add_subcommand("encode", "translate an effect calculus term");
  cmd_encode->add_option("expr", term_arg)->required();
  cmd_encode->add_option("--source", source_arg)->check(CLI::IsMember({"cbn", "cbv", "store"}));

  CLI::App* cmd_selftest = app.add_subcommand("self-test", "run a built-in property suite");
  cmd_selftest->add_option("suite", suite_arg)
      ->check(CLI::IsMember({"agreement", "weights", "spine", "strong", "encodings", "all"}));

  std::vector<std::string> args(argv.rbegin(), argv.rend());
  try {
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    out_s = app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err_s = std::string(e.what()) + "\n";
    return 2;
  }

  Output o;
  o.json = json;
  bool negative = false;

  try {
    if (*cmd_parse) {
      TermPtr t = parse(load_input(term_arg));
      o.field("term", pretty(t));
      o.field("size", term_size(t));
      if (json) {
        Json fv = Json::array();
        for (const auto& v : free_vars(t)) fv.push_back(v);
        o.j["free_vars"] = std::move(fv);
        Json ls = Json::array();
        for (const auto& l : locations(t)) ls.push_back(l.name);
        o.j["locations"] = std::move(ls);
      }
    } else if (*cmd_run) {
      TermPtr t = parse(load_input(term_arg));
      Memory mem = mem_spec.empty() ? Memory{} : parse_memory_literal(mem_spec);
      RunResult r = run(mem, t, fuel, trace);
      if (json) {
        o.j = run_json(r);
      } else {
        switch (r.status) {
          case RunResult::Status::Success:
            o.field("status", std::string("success"));
            o.field("length", r.length);
            o.field("memory", memory_human(r.final_memory));
            break;
          case RunResult::Status::Failed:
            o.field("status", std::string("failure"));
            o.field("kind", std::string(r.failure == FailureKind::VarFocus ? "var-focus"
                                                                           : "empty-pop"));
            o.field("state", state_json(r.stopped_at).dump());
            break;
          case RunResult::Status::FuelExhausted:
            o.field("status", std::string("fuel-exhausted"));
            break;
        }
        if (trace && r.trace)
          for (const auto& s : *r.trace) o.text += "  " + state_json(s).dump() + "\n";
      }
      negative = r.status != RunResult::Status::Success;
    } else if (*cmd_eval) {
      TermPtr t = parse(load_input(term_arg));
      Memory mem = mem_spec.empty() ? Memory{} : parse_memory_literal(mem_spec);
      EvalResult e = eval_big(mem, t, fuel);
      switch (e.status) {
        case EvalResult::Status::Done:
          o.field("status", std::string("success"));
          o.field("count", e.tree->count);
          o.raw("memory", memory_json(e.out), memory_human(e.out));
          if (trace) o.raw("tree", eval_tree_json(e.tree), eval_tree_json(e.tree).dump());
          break;
        case EvalResult::Status::Stuck:
          o.field("status", std::string("failure"));
          negative = true;
          break;
        case EvalResult::Status::FuelExhausted:
          o.field("status", std::string("fuel-exhausted"));
          negative = true;
          break;
      }
    } else if (*cmd_norm) {
      TermPtr t = parse(load_input(term_arg));
      if (strategy_arg == "perpetual") {
        PerpResult p = perp_eval(t, fuel);
        if (p.status == PerpResult::Status::Done) {
          o.field("status", std::string("success"));
          o.field("result", pretty(p.tree->result));
          if (trace) o.raw("tree", perp_tree_json(p.tree), perp_tree_json(p.tree).dump());
        } else {
          o.field("status", std::string("fuel-exhausted"));
          negative = true;
        }
      } else {
        auto tr = strategy_arg == "spine" ? spine_normalize(t, fuel) : normalize_full(t, fuel);
        if (tr) {
          o.field("status", std::string("success"));
          o.field("result", pretty(tr->final_term()));
          o.field("steps", tr->steps.size());
          if (trace)
            o.raw("trace", reduction_trace_json(*tr), reduction_trace_json(*tr).dump());
        } else {
          o.field("status", std::string("fuel-exhausted"));
          negative = true;
        }
      }
    } else if (*cmd_infer) {
      TermPtr t = parse(load_input(term_arg));
      std::optional<DerivPtr> d;
      if (system_arg == "weak") {
        d = infer_weak(t, fuel);
      } else if (system_arg == "strong") {
        d = infer_strong(t, fuel);
      } else {
        Memory mem = mem_spec.empty() ? Memory{} : parse_memory_literal(mem_spec);
        RunResult r = run(mem, t, fuel);
        if (r.status == RunResult::Status::Failed) {
          o.field("status", std::string("untypeable"));
          negative = true;
        } else {
          d = infer_weak_state(mem, t, fuel);
        }
      }
      if (d) {
        o.field("status", std::string("success"));
        o.field("type", print_comp(comp_of(*d)));
        o.field("weight", weight(*d));
        o.field("context", print_context((*d)->ctx));
        if (trace) o.raw("derivation", derivation_json(*d), derivation_json(*d).dump());
      } else if (!negative) {
        o.field("status", std::string("fuel-exhausted"));
        negative = true;
      }
    } else if (*cmd_check) {
      DerivPtr d = derivation_from_json(Json::parse(load_input(deriv_arg)));
      TypeSystem sys = system_arg == "weak"    ? TypeSystem::Weak
                       : system_arg == "strong" ? TypeSystem::Strong
                                                : TypeSystem::State;
      CheckResult r = check_derivation(d, sys);
      if (r.ok) {
        o.field("status", std::string("success"));
        o.field("weight", r.weight);
      } else {
        o.field("status", std::string("invalid"));
        std::string path;
        for (std::size_t i : r.path) path += (path.empty() ? "" : "/") + std::to_string(i);
        o.field("path", path);
        o.field("reason", r.reason);
        negative = true;
      }
    } else if (*cmd_inhabit) {
      CompType target = parse_comp_type(load_input(type_arg));
      auto t = inhabit_search(target, depth);
      if (t) {
        o.field("status", std::string("success"));
        o.field("term", pretty(*t));
      } else {
        o.field("status", std::string("uninhabited-within-depth"));
        negative = true;
      }
    } else if (*cmd_encode) {
      std::string text = load_input(term_arg);
      TermPtr t;
      if (source_arg == "cbn")
        t = encode_cbn(parse_lambda(text));
      else if (source_arg == "cbv")
        t = encode_cbv(parse_lambda(text));
      else
        t = encode_store(parse_store(text));
      o.field("term", pretty(t));
    } else if (*cmd_selftest) {
      std::size_t st_fuel = fuel == kDefaultFuel ? kSelfTestFuel : fuel;
      std::uint64_t seed = 1;
      if (const char* env = std::getenv("FMC_SEED")) seed = std::strtoull(env, nullptr, 10);
      std::vector<SuiteReport> reports;
      if (suite_arg == "agreement" || suite_arg == "all")
        reports.push_back(suite_agreement(st_fuel, seed));
      if (suite_arg == "weights" || suite_arg == "all") reports.push_back(suite_weights(st_fuel));
      if (suite_arg == "spine" || suite_arg == "all") reports.push_back(suite_spine(st_fuel));
      if (suite_arg == "strong" || suite_arg == "all") reports.push_back(suite_strong(st_fuel));
      if (suite_arg == "encodings" || suite_arg == "all")
        reports.push_back(suite_encodings(st_fuel));
      Json suites = Json::array();
      std::size_t failed = 0;
      for (const auto& rep : reports) {
        failed += rep.failures.size();
        if (json) {
          Json sj;
          sj["suite"] = rep.name;
          sj["cases"] = rep.cases;
          sj["failures"] = rep.failures;
          suites.push_back(std::move(sj));
        } else {
          o.text += "suite " + rep.name + ": " +
                    (rep.failures.empty() ? "ok" : "FAILED") + " (" +
                    std::to_string(rep.cases) + " cases)\n";
          for (const auto& f : rep.failures) o.text += "  " + f + "\n";
        }
      }
      if (json) {
        o.j["suites"] = std::move(suites);
        o.j["failed"] = failed;
      }
      negative = failed > 0;
    }
  } catch (const ParseError& e) {
    err_s = std::string("parse error: ") + e.what() + "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err_s = std::string("error: ") + e.what() + "\n";
    return 2;
  } catch (const Json::exception& e) {
    err_s = std::string("json error: ") + e.what() + "\n";
    return 2;
  }

  out_s = o.render();
  return negative ? 1 : 0;
}

} // namespace

CliResult dispatch(const std::vector<std::string>& argv) {
  CliResult res;
  res.code = run_dispatch(argv, res.out, res.err);
  return res;
}

} // namespace fmc
