#include "fmc/types.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

namespace fmc {

MemoryType mem_prepend(const Location& loc, const CollectionType& c, const MemoryType& m) {
  MemoryType out = m;
  auto& v = out.per_loc[loc];
  v.insert(v.begin(), c);
  return out;
}

std::optional<CollectionType> mem_front(const MemoryType& m, const Location& loc) {
  const VectorType* v = m.find(loc);
  if (!v || v->empty()) return std::nullopt;
  return v->front();
}

MemoryType mem_drop_front(const MemoryType& m, const Location& loc) {
  MemoryType out = m;
  auto it = out.per_loc.find(loc);
  if (it == out.per_loc.end() || it->second.empty())
    throw std::invalid_argument("mem_drop_front: empty vector at " + loc.name);
  it->second.erase(it->second.begin());
  if (it->second.empty()) out.per_loc.erase(it);
  return out;
}

MemoryType mem_concat(const MemoryType& a, const MemoryType& b) {
  MemoryType out = a;
  for (const auto& [loc, v] : b.per_loc) {
    auto& dst = out.per_loc[loc];
    dst.insert(dst.end(), v.begin(), v.end());
    if (dst.empty()) out.per_loc.erase(loc);
  }
  return out;
}

MemoryType mem_empties(const std::map<Location, std::size_t>& dims) {
  MemoryType out;
  for (const auto& [loc, n] : dims)
    if (n > 0) out.per_loc[loc] = VectorType(n, CollectionType{});
  return out;
}

CollectionType type_canonical(const CollectionType& c) {
  std::vector<std::pair<std::string, CompType>> keyed;
  keyed.reserve(c.elems.size());
  for (const auto& e : c.elems) {
    CompType canon = type_canonical(e);
    keyed.emplace_back(type_key(canon), std::move(canon));
  }
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  CollectionType out;
  out.elems.reserve(keyed.size());
  for (auto& [k, v] : keyed) out.elems.push_back(std::move(v));
  return out;
}

VectorType type_canonical(const VectorType& v) {
  VectorType out;
  out.reserve(v.size());
  for (const auto& c : v) out.push_back(type_canonical(c));
  return out;
}

MemoryType type_canonical(const MemoryType& m) {
  MemoryType out;
  for (const auto& [loc, v] : m.per_loc)
    if (!v.empty()) out.per_loc[loc] = type_canonical(v);
  return out;
}

CompType type_canonical(const CompType& t) {
  return {type_canonical(t.input), type_canonical(t.output)};
}

namespace {

void key_rec(const CollectionType& c, std::string& out);

void key_rec(const MemoryType& m, std::string& out) {
  out += '{';
  for (const auto& [loc, v] : m.per_loc) {
    if (v.empty()) continue;
    out += loc.name;
    out += ':';
    for (const auto& c : v) key_rec(c, out);
    out += ';';
  }
  out += '}';
}

void key_rec(const CompType& t, std::string& out) {
  out += '(';
  key_rec(t.input, out);
  out += '>';
  key_rec(t.output, out);
  out += ')';
}

void key_rec(const CollectionType& c, std::string& out) {
  out += '[';
  for (const auto& e : c.elems) key_rec(e, out);
  out += ']';
}

} // namespace

std::string type_key(const CompType& t) {
  std::string out;
  key_rec(type_canonical(t), out);
  return out;
}

std::string type_key(const CollectionType& c) {
  std::string out;
  key_rec(type_canonical(c), out);
  return out;
}

std::string type_key(const VectorType& v) {
  std::string out;
  for (const auto& c : type_canonical(v)) key_rec(c, out);
  return out;
}

std::string type_key(const MemoryType& m) {
  std::string out;
  key_rec(type_canonical(m), out);
  return out;
}

namespace {

// Structural identity is a sound fast path: unordered collections fall back
// to the canonical keys.
bool struct_eq(const CompType& a, const CompType& b);

bool struct_eq(const CollectionType& a, const CollectionType& b) {
  if (a.elems.size() != b.elems.size()) return false;
  for (std::size_t i = 0; i < a.elems.size(); ++i)
    if (!struct_eq(a.elems[i], b.elems[i])) return false;
  return true;
}

bool struct_eq(const MemoryType& a, const MemoryType& b) {
  auto ia = a.per_loc.begin(), ib = b.per_loc.begin();
  while (true) {
    while (ia != a.per_loc.end() && ia->second.empty()) ++ia;
    while (ib != b.per_loc.end() && ib->second.empty()) ++ib;
    if (ia == a.per_loc.end() || ib == b.per_loc.end())
      return ia == a.per_loc.end() && ib == b.per_loc.end();
    if (ia->first != ib->first || ia->second.size() != ib->second.size()) return false;
    for (std::size_t i = 0; i < ia->second.size(); ++i)
      if (!struct_eq(ia->second[i], ib->second[i])) return false;
    ++ia;
    ++ib;
  }
}

bool struct_eq(const CompType& a, const CompType& b) {
  return struct_eq(a.input, b.input) && struct_eq(a.output, b.output);
}

} // namespace

bool type_equal(const CompType& a, const CompType& b) {
  return struct_eq(a, b) || type_key(a) == type_key(b);
}
bool type_equal(const CollectionType& a, const CollectionType& b) {
  return struct_eq(a, b) || type_key(a) == type_key(b);
}
bool type_equal(const MemoryType& a, const MemoryType& b) {
  return struct_eq(a, b) || type_key(a) == type_key(b);
}

CollectionType collection_sum(const CollectionType& a, const CollectionType& b) {
  CollectionType out = a;
  out.elems.insert(out.elems.end(), b.elems.begin(), b.elems.end());
  return out;
}

bool collection_subset(const CollectionType& a, const CollectionType& b) {
  std::vector<std::string> ka, kb;
  for (const auto& e : a.elems) ka.push_back(type_key(e));
  for (const auto& e : b.elems) kb.push_back(type_key(e));
  std::sort(ka.begin(), ka.end());
  std::sort(kb.begin(), kb.end());
  return std::includes(kb.begin(), kb.end(), ka.begin(), ka.end());
}

// ---------------------------------------------------------------------------
// Printing

std::string print_collection(const CollectionType& c) {
  std::string out = "[";
  for (std::size_t i = 0; i < c.elems.size(); ++i) {
    if (i) out += ", ";
    out += print_comp(c.elems[i]);
  }
  out += ']';
  return out;
}

namespace {

std::string print_vector(const VectorType& v, bool reversed) {
  std::string out;
  auto emit = [&](const CollectionType& c) {
    if (!out.empty()) out += ' ';
    out += print_collection(c);
  };
  if (reversed)
    for (auto it = v.rbegin(); it != v.rend(); ++it) emit(*it);
  else
    for (const auto& c : v) emit(c);
  return out;
}

} // namespace

std::string print_memory(const MemoryType& m, bool reversed) {
  std::string out;
  auto append = [&](const std::string& s) {
    if (!s.empty() && !out.empty()) out += ' ';
    out += s;
  };
  // default location first, bare; others named, sorted
  if (const VectorType* v = m.find(default_location())) append(print_vector(*v, reversed));
  for (const auto& [loc, v] : m.per_loc) {
    if (loc == default_location() || v.empty()) continue;
    append(loc.name + "(" + print_vector(v, reversed) + ")");
  }
  return out;
}

std::string print_comp(const CompType& t) {
  std::string in = print_memory(t.input, false);
  std::string out = print_memory(t.output, true);
  if (in.empty()) return out.empty() ? "=>" : "=> " + out;
  return out.empty() ? in + " =>" : in + " => " + out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct TypeParser {
  std::string_view src;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  }

  bool at_end() {
    skip_ws();
    return pos >= src.size();
  }

  char peek() {
    skip_ws();
    return pos < src.size() ? src[pos] : '\0';
  }

  bool try_consume(char c) {
    skip_ws();
    if (pos < src.size() && src[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  bool try_arrow() {
    skip_ws();
    if (pos + 1 < src.size() && src[pos] == '=' && src[pos + 1] == '>') {
      pos += 2;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!try_consume(c))
      throw std::invalid_argument(std::string("type syntax: expected '") + c + "' in '" +
                                  std::string(src) + "'");
  }

  std::string ident() {
    skip_ws();
    std::size_t start = pos;
    while (pos < src.size() &&
           (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
      ++pos;
    if (start == pos) throw std::invalid_argument("type syntax: expected a location name");
    return std::string(src.substr(start, pos - start));
  }

  CollectionType collection() {
    expect('[');
    CollectionType c;
    if (!try_consume(']')) {
      while (true) {
        c.elems.push_back(comp());
        if (try_consume(']')) break;
        expect(',');
      }
    }
    return c;
  }

  // Stops at '=>', ')', ',', ']' or end.
  MemoryType memory(bool reversed) {
    MemoryType m;
    while (true) {
      char c = peek();
      if (c == '[') {
        m.per_loc[default_location()].push_back(collection());
      } else if (std::isalpha(static_cast<unsigned char>(c))) {
        skip_ws();
        std::size_t save = pos;
        if (pos + 1 < src.size() && src[pos] == '=' && src[pos + 1] == '>') break;
        std::string name = ident();
        if (!try_consume('(')) {
          pos = save;
          break;
        }
        auto& v = m.per_loc[Location(name)];
        while (!try_consume(')')) v.push_back(collection());
      } else {
        break;
      }
    }
    for (auto it = m.per_loc.begin(); it != m.per_loc.end();) {
      if (reversed) std::reverse(it->second.begin(), it->second.end());
      it = it->second.empty() ? m.per_loc.erase(it) : std::next(it);
    }
    return m;
  }

  CompType comp() {
    CompType t;
    t.input = memory(false);
    if (!try_arrow())
      throw std::invalid_argument("type syntax: expected '=>' in '" + std::string(src) + "'");
    t.output = memory(true);
    return t;
  }
};

} // namespace

CompType parse_comp_type(std::string_view s) {
  TypeParser p{s};
  CompType t = p.comp();
  if (!p.at_end()) throw std::invalid_argument("type syntax: trailing input in '" + std::string(s) + "'");
  return t;
}

CollectionType parse_collection_type(std::string_view s) {
  TypeParser p{s};
  CollectionType c = p.collection();
  if (!p.at_end()) throw std::invalid_argument("type syntax: trailing input in '" + std::string(s) + "'");
  return c;
}

MemoryType parse_memory_type(std::string_view s, bool reversed) {
  TypeParser p{s};
  MemoryType m = p.memory(reversed);
  if (!p.at_end()) throw std::invalid_argument("type syntax: trailing input in '" + std::string(s) + "'");
  return m;
}

// ---------------------------------------------------------------------------
// Contexts

TypingContext context_sum(const TypingContext& g, const TypingContext& d) {
  TypingContext out = g;
  for (const auto& [x, c] : d.bindings) {
    auto it = out.bindings.find(x);
    if (it == out.bindings.end())
      out.bindings[x] = c;
    else
      it->second = collection_sum(it->second, c);
  }
  return out;
}

TypingContext context_remove(const TypingContext& g, const std::string& x) {
  TypingContext out = g;
  out.bindings.erase(x);
  return out;
}

bool context_equal(const TypingContext& a, const TypingContext& b) {
  if (a.bindings.size() != b.bindings.size()) return false;
  for (const auto& [x, c] : a.bindings) {
    auto it = b.bindings.find(x);
    if (it == b.bindings.end() || !type_equal(c, it->second)) return false;
  }
  return true;
}

bool context_subset(const TypingContext& a, const TypingContext& b) {
  for (const auto& [x, c] : a.bindings)
    if (!collection_subset(c, b.lookup(x))) return false;
  return true;
}

std::string print_context(const TypingContext& g) {
  std::string out;
  for (const auto& [x, c] : g.bindings) {
    if (!out.empty()) out += ", ";
    out += x + ":" + print_collection(c);
  }
  return out;
}

} // namespace fmc
