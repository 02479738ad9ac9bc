#pragma once

#include "sfl/effects.hpp"
#include "sfl/result.hpp"
#include "sfl/syntax.hpp"

namespace sfl {

// l protected by t. Each variant throws TypeError(WrongCalculus) on an arrow
// of another calculus; sums are never protected.

// Pure DCC with Lift: Lift t needs l flows l_pnt.
bool protects_pure(const EffectPolicy& policy, Label l, const Type& t);

// pc system: l protects a ->[pc p] b needs l flows p.
bool protects_pc(const EffectPolicy& policy, Label l, const Type& t);

// Type-and-effect system: l protects a ->[eff e] b needs l flows effect_label(e).
bool protects_eff(const EffectPolicy& policy, Label l, const Type& t);

}  // namespace sfl
