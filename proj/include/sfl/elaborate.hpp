#pragma once

#include "sfl/result.hpp"
#include "sfl/syntax.hpp"
#include "sfl/typecheck.hpp"

namespace sfl {

// Adds R to any set holding W: {W} and {R,W} share a monad, as do {W,E} and
// {R,W,E}.
EffectSet normalize(EffectSet eps);

// M_eps(t) for a pure type t.
Type monad_type(const Setting& s, EffectSet eps, const Type& t);

// Pure image of an effect-system type: a ->[eff e] b becomes a -> M_e(b).
// pc arrows are converted to effect arrows first.
Type pure_type(const Setting& s, const Type& t);
// Fix-bound names become Lift of their pure type.
Context pure_context(const Setting& s, const Context& ctx);

// Closed pure combinators over pure types. Each throws TypeError
// (InvalidCoercion) when asked for a pair with no monad morphism.
Expr eta(const Setting& s, EffectSet eps, const Type& t);                       // t -> M t
Expr bind(const Setting& s, EffectSet eps, const Type& t1, const Type& t2);     // M t1 -> (t1 -> M t2) -> M t2
Expr coerce(const Setting& s, EffectSet from, EffectSet to, const Type& t);     // M_from t -> M_to t

struct Captured {
  Expr term;      // pure, of type monad_type(effect, pure_type(type))
  Type type;      // effect-system type of the source
  EffectSet effect;
};

// Type-directed translation into the pure calculus. The output is checked
// with check_pure before it is returned.
Result<Captured> capture(const Setting& s, const Context& ctx, const Expr& e);

// unlabel x as x' in label[l] p[x'/x]: lifts p : t_in -> t_out to
// L[l] t_in -> L[l] t_out.
Expr map_label(Label l, const Expr& p, const std::string& x);

}  // namespace sfl
