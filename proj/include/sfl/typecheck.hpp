#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sfl/effects.hpp"
#include "sfl/protection.hpp"
#include "sfl/result.hpp"
#include "sfl/syntax.hpp"

namespace sfl {

struct Binding {
  std::string name;
  Type type;
  bool recursive = false;  // bound by fix
};

// Later bindings shadow earlier ones.
using Context = std::vector<Binding>;

Context make_context(const std::vector<std::pair<std::string, Type>>& vars);

// Everything a checker needs besides the context: the policy and the state
// type (null in pnt mode).
struct Setting {
  EffectPolicy policy;
  Type sigma;
  Alphabet mode() const { return policy.alphabet(); }
};

// Setting for a parsed program. Keys in `overrides` win over the program's
// own `policy` line; unset labels default to the lattice top and the mode to
// global. Throws PolicyError on unknown labels or modes.
Setting setting_for(const LatticePtr& lat, const Program& p, const PolicySpec& overrides = {});

enum class System { Pure, Plain, Pc, Effect };
const char* to_string(System s);

struct Judgment {
  Type type;
  EffectSet effect;
};

// Effect derivation mirroring the expression: kids follow the a, b, c
// subterm order.
struct Derivation {
  Type type;
  EffectSet effect;
  std::vector<Derivation> kids;
};

// Throws TypeError(WrongCalculus) on pc or effect arrows.
bool is_pointed(const Type& t);

// Pure DCC with Lift, seq and fix at pointed types.
Result<Type> check_pure(const Setting& s, const Context& ctx, const Expr& e);

// DCC plus read/write/throw/try/fix with no pc or effect tracking. Latent
// annotations on arrows are erased.
Result<Type> check_plain(const Setting& s, const Context& ctx, const Expr& e);

Result<Type> check_pc(const Setting& s, const Context& ctx, Label pc, const Expr& e);

// Principal (least) effect.
Result<Judgment> infer_effect(const Setting& s, const Context& ctx, const Expr& e);
Result<Derivation> derive_effect(const Setting& s, const Context& ctx, const Expr& e);

Result<Type> check_effect(const Setting& s, const Context& ctx, const Expr& e, EffectSet eps);

// Latent effect standing for a latent pc.
EffectSet pc_to_effect(const EffectPolicy& policy, Label pc);
// pc arrows become effect arrows; effect arrows pass through.
Type pc_to_effect_type(const EffectPolicy& policy, const Type& t);
Context pc_to_effect_context(const EffectPolicy& policy, const Context& ctx);
// Every arrow becomes a plain arrow.
Type erase_latent(const Type& t);

// Program-level premises: sigma is first-order and protects l_state; in
// global state-exn mode l_exn flows to l_state.
std::optional<TypeError> validate_program(const Setting& s, const Program& p);

// Fills the binder type of every `let` using the given system.
Result<Expr> annotate_lets(const Setting& s, System sys, const Context& ctx, const Expr& e, Label pc);

}  // namespace sfl
