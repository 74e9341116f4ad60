#ifndef FMC_ENCODINGS_HPP
#define FMC_ENCODINGS_HPP

#include "fmc/syntax.hpp"

namespace fmc {

// ---------------------------------------------------------------------------
// Call-by-name / call-by-value lambda calculus

struct LambdaTerm;
using LambdaPtr = std::shared_ptr<const LambdaTerm>;

struct LambdaTerm {
  enum class Kind { Var, Lam, App };
  Kind kind;
  std::string var;     // Var, Lam binder
  LambdaPtr body;      // Lam
  LambdaPtr fun, arg;  // App
};

LambdaPtr lam_var(std::string name);
LambdaPtr lam_abs(std::string binder, LambdaPtr body);
LambdaPtr lam_app(LambdaPtr fun, LambdaPtr arg);

// "\x. M" and juxtaposition application; parentheses as usual.
LambdaPtr parse_lambda(std::string_view text);
std::string pretty_lambda(const LambdaPtr& t);

// Call-by-name: an application pushes its argument and an abstraction pops,
// all on the default location.
TermPtr encode_cbn(const LambdaPtr& t);

// Weak open call-by-value: values become pushes of their value encodings and
// an application runs its argument before the function. A value applied to a
// term simplifies to plain sequencing; a non-value function position goes
// through the generic pop-and-run expansion.
TermPtr encode_cbv(const LambdaPtr& t);
TermPtr encode_cbv_value(const LambdaPtr& v); // Var or Lam only

// ---------------------------------------------------------------------------
// The monadic store calculus

struct StoreValue;
struct StoreComp;
using StoreValuePtr = std::shared_ptr<const StoreValue>;
using StoreCompPtr = std::shared_ptr<const StoreComp>;

struct StoreValue {
  enum class Kind { Var, Lam };
  Kind kind;
  std::string var;   // Var, Lam binder
  StoreCompPtr body; // Lam
};

struct StoreComp {
  enum class Kind { Ret, Bind, Get, Set };
  Kind kind;
  StoreValuePtr value;  // Ret, Bind (the function), Set (the stored value)
  StoreCompPtr comp;    // Bind (the prefix), Get/Set (the continuation)
  Location loc;         // Get, Set
  std::string binder;   // Get
};

StoreValuePtr store_var(std::string name);
StoreValuePtr store_lam(std::string binder, StoreCompPtr body);
StoreCompPtr store_ret(StoreValuePtr v);
StoreCompPtr store_bind(StoreCompPtr m, StoreValuePtr v);
StoreCompPtr store_get(Location loc, std::string binder, StoreCompPtr body);
StoreCompPtr store_set(Location loc, StoreValuePtr v, StoreCompPtr cont);

// "ret V", "M >>= V" (left-associative), "get a (\x. M)", "set a V M";
// values are variables and "\x. M".
StoreCompPtr parse_store(std::string_view text);
std::string pretty_store(const StoreCompPtr& m);

// The four computation clauses; cells are stacks driven at depth one by the
// get/set protocol.
TermPtr encode_store(const StoreCompPtr& m);
TermPtr encode_store_value(const StoreValuePtr& v);

// Sugared forms. The unsimplified let-get spine-reduces to the get clause.
TermPtr derived_update(const Location& loc, const TermPtr& value, const TermPtr& cont);
TermPtr derived_let_get(const Location& loc, const std::string& var, const TermPtr& cont,
                        bool simplified);
TermPtr derived_lookup(const Location& loc, bool simplified);

} // namespace fmc

#endif
