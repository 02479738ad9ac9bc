#include "sfl/protection.hpp"

namespace sfl {

const char* to_string(TypeErrorKind k) {
  switch (k) {
    case TypeErrorKind::Mismatch: return "Mismatch";
    case TypeErrorKind::ProtectionFail: return "ProtectionFail";
    case TypeErrorKind::PcTooHigh: return "PcTooHigh";
    case TypeErrorKind::EffectCompositionFail: return "EffectCompositionFail";
    case TypeErrorKind::NotPointed: return "NotPointed";
    case TypeErrorKind::WrongCalculus: return "WrongCalculus";
    case TypeErrorKind::UnboundVar: return "UnboundVar";
    case TypeErrorKind::StateTypeInvalid: return "StateTypeInvalid";
    case TypeErrorKind::InvalidCoercion: return "InvalidCoercion";
    case TypeErrorKind::ElaborationUnsupported: return "ElaborationUnsupported";
    case TypeErrorKind::InternalIllTyped: return "InternalIllTyped";
  }
  return "?";
}

namespace {

enum class Calculus { Pure, Pc, Eff };

bool protects(const EffectPolicy& policy, Label l, const Type& t, Calculus calc) {
  const LabelLattice& lat = policy.lattice();
  auto wrong = [&]() -> bool {
    throw TypeError(TypeErrorKind::WrongCalculus, "protection asked of a foreign type", print_type(t));
  };
  switch (t->kind) {
    case TypeKind::Unit:
    case TypeKind::Sum: return false;
    case TypeKind::Labeled: return lat.flows(l, t->label) || protects(policy, l, t->a, calc);
    case TypeKind::Prod: return protects(policy, l, t->a, calc) && protects(policy, l, t->b, calc);
    case TypeKind::FunPure:
      if (calc != Calculus::Pure) return wrong();
      return protects(policy, l, t->b, calc);
    case TypeKind::FunPc:
      if (calc != Calculus::Pc) return wrong();
      return protects(policy, l, t->b, calc) && lat.flows(l, t->label);
    case TypeKind::FunEff:
      if (calc != Calculus::Eff) return wrong();
      return protects(policy, l, t->b, calc) && lat.flows(l, policy.effect_label(t->eff));
    case TypeKind::Lift:
      if (calc != Calculus::Pure) return wrong();
      return lat.flows(l, policy.l_pnt()) && protects(policy, l, t->a, calc);
  }
  return false;
}

}  // namespace

bool protects_pure(const EffectPolicy& policy, Label l, const Type& t) {
  return protects(policy, l, t, Calculus::Pure);
}

bool protects_pc(const EffectPolicy& policy, Label l, const Type& t) {
  return protects(policy, l, t, Calculus::Pc);
}

bool protects_eff(const EffectPolicy& policy, Label l, const Type& t) {
  return protects(policy, l, t, Calculus::Eff);
}

}  // namespace sfl
