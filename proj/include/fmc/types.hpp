#ifndef FMC_TYPES_HPP
#define FMC_TYPES_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fmc/syntax.hpp"

namespace fmc {

// The four type layers. Every vector is kept in pop order: element 0 is the
// next collection to be popped, i.e. the top of the corresponding stack.
// Under this convention an identity type is a literal equality of input and
// output, pushing prepends, and the abstraction rule prepends the binder's
// collection at the front of the body's input.
//
// The printer restores the paper-facing surface: vectors on the left of "=>"
// are emitted in storage order, all other vectors reversed (bottom of stack
// first).

struct CompType;

// A multiset of computation types. Order is irrelevant and multiplicity is
// not: [t,t] and [t] are different collections.
struct CollectionType {
  std::vector<CompType> elems;
};

using VectorType = std::vector<CollectionType>;

// Location-indexed vectors; an absent location is the empty vector and empty
// vectors are never stored.
struct MemoryType {
  std::map<Location, VectorType> per_loc;

  const VectorType* find(const Location& loc) const {
    auto it = per_loc.find(loc);
    return it == per_loc.end() ? nullptr : &it->second;
  }
  bool empty() const { return per_loc.empty(); }
  std::map<Location, std::size_t> dims() const {
    std::map<Location, std::size_t> d;
    for (const auto& [loc, v] : per_loc)
      if (!v.empty()) d[loc] = v.size();
    return d;
  }
};

struct CompType {
  MemoryType input;  // pop order
  MemoryType output; // pop order
};

// Prepends a collection at the front (top) of the vector at loc.
MemoryType mem_prepend(const Location& loc, const CollectionType& c, const MemoryType& m);
// The front collection at loc, if the vector there is non-empty.
std::optional<CollectionType> mem_front(const MemoryType& m, const Location& loc);
// Drops the front collection at loc; requires one to exist.
MemoryType mem_drop_front(const MemoryType& m, const Location& loc);
// Pointwise concatenation (left vectors pop first).
MemoryType mem_concat(const MemoryType& a, const MemoryType& b);
// The memory type []^f: dims[loc] empty collections per location.
MemoryType mem_empties(const std::map<Location, std::size_t>& dims);

// Canonicalization sorts every collection recursively by a fixed total
// structural order; idempotent. Two values are semantically equal iff their
// canonical forms are structurally identical.
CompType type_canonical(const CompType& t);
CollectionType type_canonical(const CollectionType& c);
VectorType type_canonical(const VectorType& v);
MemoryType type_canonical(const MemoryType& m);

// Stable serialized form of the canonical value; doubles as the sort key.
std::string type_key(const CompType& t);
std::string type_key(const CollectionType& c);
std::string type_key(const VectorType& v);
std::string type_key(const MemoryType& m);

bool type_equal(const CompType& a, const CompType& b);
bool type_equal(const CollectionType& a, const CollectionType& b);
bool type_equal(const MemoryType& a, const MemoryType& b);

// Multiset union.
CollectionType collection_sum(const CollectionType& a, const CollectionType& b);
// Multiset inclusion (respecting multiplicities).
bool collection_subset(const CollectionType& a, const CollectionType& b);

// Paper surface syntax. Collections print as "[t1, t2]", location vectors as
// "a([t] [s])" with the default location's vector bare, implications as
// "A => B", and the empty memory type as "".
std::string print_collection(const CollectionType& c);
std::string print_memory(const MemoryType& m, bool reversed);
std::string print_comp(const CompType& t);

// Parses what print_comp/print_collection/print_memory emit.
CompType parse_comp_type(std::string_view s);
CollectionType parse_collection_type(std::string_view s);
MemoryType parse_memory_type(std::string_view s, bool reversed);

// A typing context. Absent variables implicitly carry the empty collection;
// entries with empty collections are never stored.
struct TypingContext {
  std::map<std::string, CollectionType> bindings;

  CollectionType lookup(const std::string& x) const {
    auto it = bindings.find(x);
    return it == bindings.end() ? CollectionType{} : it->second;
  }
  void assign(const std::string& x, CollectionType c) {
    if (c.elems.empty())
      bindings.erase(x);
    else
      bindings[x] = std::move(c);
  }
  bool empty() const { return bindings.empty(); }
};

TypingContext context_sum(const TypingContext& g, const TypingContext& d);
// g with x removed.
TypingContext context_remove(const TypingContext& g, const std::string& x);
bool context_equal(const TypingContext& a, const TypingContext& b);
// Pointwise multiset inclusion.
bool context_subset(const TypingContext& a, const TypingContext& b);
std::string print_context(const TypingContext& g);

} // namespace fmc

#endif
