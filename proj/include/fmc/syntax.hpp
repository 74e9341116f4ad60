#ifndef FMC_SYNTAX_HPP
#define FMC_SYNTAX_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fmc {

// A location names one operand stack of the machine. Locations are global
// constants: they are never bound and never renamed.
struct Location {
  std::string name;

  Location() = default;
  explicit Location(std::string n) : name(std::move(n)) {}

  bool operator==(const Location& o) const { return name == o.name; }
  bool operator!=(const Location& o) const { return name != o.name; }
  bool operator<(const Location& o) const { return name < o.name; }
};

// The default location, written implicitly in the concrete syntax.
const Location& default_location();

struct Term;
using TermPtr = std::shared_ptr<const Term>;

enum class TermKind { Var, Pop, Push, Skip, Seq };

// Terms are immutable; subtrees are shared freely. Equality throughout the
// library means alpha-equivalence, never pointer or spelling identity.
struct Term {
  TermKind kind;
  std::string var;     // Var
  Location loc;        // Pop, Push
  std::string binder;  // Pop: bound in body only
  TermPtr arg;         // Push
  TermPtr body;        // Pop, Push
  TermPtr left, right; // Seq
};

TermPtr mk_var(std::string name);
TermPtr mk_pop(Location loc, std::string binder, TermPtr body);
TermPtr mk_push(TermPtr arg, Location loc, TermPtr body);
TermPtr mk_skip();
TermPtr mk_seq(TermPtr left, TermPtr right);

struct ParseError : std::runtime_error {
  int line;
  int column;
  ParseError(const std::string& msg, int l, int c);
};

// Concrete syntax:
//   term   := seq
//   seq    := prefix (";" seq)?                  -- ";" right-associates
//   prefix := pop | push | atom
//   pop    := loc? "<" (ident | "_") ">" "." seq -- body extends maximally
//   push   := "[" term "]" loc? "." seq
//   atom   := "*" | ident | "(" term ")"
// loc/ident = [a-z][a-zA-Z0-9_]*; omitted loc is the default location;
// "#" starts a line comment. A pop or push body swallows the rest of the
// sequence, so "<x>.a;b" is <x>.(a;b); parenthesize to get (<x>.a);b.
// The wildcard binder "_" parses to a fresh, never-referenced identifier.
TermPtr parse(std::string_view text);

std::string pretty(const TermPtr& t);

std::set<std::string> free_vars(const TermPtr& t);
bool occurs_free(const TermPtr& t, const std::string& x);
std::set<Location> locations(const TermPtr& t);

// Tree size, with shared subtrees counted once per occurrence. Saturates
// instead of overflowing (machine-grown terms can be astronomically large
// as trees while small as dags).
std::size_t term_size(const TermPtr& t);

// {n/x}m, capture-avoiding: binders in m that would capture free variables
// of n are renamed with fresh suffix counters.
TermPtr substitute(const TermPtr& n, const std::string& x, const TermPtr& m);

// Simultaneous substitution; domain variables are pairwise distinct.
using SubstMap = std::map<std::string, TermPtr>;
TermPtr apply_subst_map(const SubstMap& sigma, const TermPtr& t);

bool alpha_eq(const TermPtr& s, const TermPtr& t);

// Canonical serialization: two terms are alpha-equivalent iff their keys
// are equal. Used for memo tables and enumeration dedup.
std::string alpha_key(const TermPtr& t);

// Exact structural equality, names included. Only used where a derivation
// must reproduce a subject verbatim; never load-bearing for term identity.
bool term_struct_eq(const TermPtr& s, const TermPtr& t);

// A name not in `avoid`, formed from `base` by bumping a numeric suffix.
std::string fresh_name(const std::string& base, const std::set<std::string>& avoid);

// Paths into a term.
enum class Selector { PopBody, PushArg, PushBody, SeqLeft, SeqRight };

struct Position {
  std::vector<Selector> path;

  bool operator==(const Position& o) const { return path == o.path; }
  Position child(Selector s) const;
  bool spine() const; // true iff the path never enters a push argument
};

std::string selector_name(Selector s);
std::string position_to_string(const Position& p);
std::optional<Position> position_from_string(const std::string& s);

// Subterm at a position; nullopt if the path leaves the tree.
std::optional<TermPtr> subterm_at(const TermPtr& t, const Position& p);
// Replace the subterm at a valid position.
TermPtr replace_at(const TermPtr& t, const Position& p, const TermPtr& replacement);

// Positions of the free occurrences of x in t, leftmost-outermost order.
std::vector<Position> free_occurrences(const TermPtr& t, const std::string& x);

// Every alpha-distinct term of size <= max_size over the given location and
// free-variable alphabets, each exactly once. Binders get canonical names,
// so distinct results are never alpha-equivalent.
std::vector<TermPtr> enumerate_terms(std::size_t max_size,
                                     const std::vector<Location>& locs,
                                     const std::vector<std::string>& vars);

// Seeded random closed terms of size <= max_size.
std::vector<TermPtr> random_terms(std::size_t count, std::size_t max_size,
                                  const std::vector<Location>& locs,
                                  std::uint64_t seed);

} // namespace fmc

#endif
