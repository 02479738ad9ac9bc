#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "sfl/protection.hpp"

using namespace sfl;
using namespace sfl::testing;

namespace {

// Small closed type universe over the two-point lattice, per calculus.
std::vector<Type> types(TypeKind arrow) {
  std::vector<Type> base = {ty::unit(), ty::bool_(), ty::labeled(pub(), ty::unit()),
                            ty::labeled(sec(), ty::bool_())};
  std::vector<Type> out = base;
  for (const auto& a : base)
    for (const auto& b : base) {
      out.push_back(ty::prod(a, b));
      out.push_back(ty::labeled(sec(), ty::prod(a, b)));
      for (Label l : {pub(), sec()}) {
        if (arrow == TypeKind::FunPc) out.push_back(ty::fun_pc(a, l, b));
      }
      if (arrow == TypeKind::FunEff)
        for (EffectSet e : {EffectSet::empty(), EffectSet::W(), EffectSet::RWE()})
          out.push_back(ty::fun_eff(a, e, b));
      if (arrow == TypeKind::FunPure) {
        out.push_back(ty::fun(a, b));
        out.push_back(ty::lift(b));
      }
    }
  return out;
}

}  // namespace

TEST(Protection, Pure) {
  auto s = pnt("Pub");
  EXPECT_TRUE(protects_pure(s.policy, pub(), T("L[Sec] unit")));
  EXPECT_FALSE(protects_pure(s.policy, sec(), T("unit")));
  EXPECT_FALSE(protects_pure(s.policy, pub(), T("unit + L[Sec] unit")));
  EXPECT_FALSE(protects_pure(s.policy, sec(), T("Lift (L[Sec] unit)")));
  EXPECT_TRUE(protects_pure(pnt("Sec").policy, sec(), T("Lift (L[Sec] unit)")));
  EXPECT_TRUE(protects_pure(s.policy, sec(), T("unit -> L[Sec] unit")));
  EXPECT_TRUE(protects_pure(s.policy, pub(), T("L[Pub] unit * L[Sec] unit")));
}

TEST(Protection, Pc) {
  auto p = state_exn("Pub", "Pub").policy;
  EXPECT_FALSE(protects_pc(p, sec(), T("unit ->[pc Pub] L[Sec] unit")));
  EXPECT_TRUE(protects_pc(p, pub(), T("unit ->[pc Sec] L[Pub] unit")));
  for (Label l : {pub(), sec()}) EXPECT_TRUE(protects_pc(p, l, ty::labeled(l, ty::bool_())));
  EXPECT_THROW(protects_pc(p, pub(), T("unit ->[eff {}] unit")), TypeError);
}

TEST(Protection, Effect) {
  auto p = state_exn("Pub", "Pub").policy;
  EXPECT_FALSE(protects_eff(p, sec(), T("unit ->[eff {W}] L[Sec] unit")));
  for (Label l : {pub(), sec()}) {
    EXPECT_TRUE(protects_eff(p, l, ty::fun_eff(ty::unit(), EffectSet::R(), ty::labeled(l, ty::unit()))));
    auto a = ty::labeled(l, ty::unit());
    auto b = ty::labeled(pub(), ty::unit());
    EXPECT_EQ(protects_eff(p, l, ty::prod(a, b)), protects_eff(p, l, a) && protects_eff(p, l, b));
  }
  EXPECT_THROW(protects_eff(p, pub(), T("unit ->[pc Pub] unit")), TypeError);
}

TEST(ProtectionLaws, Monotone) {
  auto p = state_exn("Pub", "Pub").policy;
  auto check = [&](auto protects, TypeKind arrow) {
    for (const auto& t : types(arrow))
      if (protects(p, sec(), t)) {
        EXPECT_TRUE(protects(p, pub(), t)) << print_type(t);
      }
  };
  check(protects_pure, TypeKind::FunPure);
  check(protects_pc, TypeKind::FunPc);
  check(protects_eff, TypeKind::FunEff);
}

// Any l' with l flows l' protects L[l'] t.
TEST(ProtectionLaws, LabeledByHigher) {
  auto p = state_exn("Pub", "Pub").policy;
  for (const auto& t : types(TypeKind::FunPc))
    for (Label l : {pub(), sec()})
      for (Label l2 : {pub(), sec()})
        if (p.lattice().flows(l, l2)) {
          EXPECT_TRUE(protects_pc(p, l, ty::labeled(l2, t)));
        }
}

// pc to effect conversion preserves protection in the => direction.
TEST(ProtectionLaws, TranslationPreserves) {
  for (auto s : {state_exn("Pub", "Pub"), state_exn("Sec", "Pub"), state_exn("Sec", "Sec")}) {
    for (const auto& t : types(TypeKind::FunPc))
      for (Label l : {pub(), sec()})
        if (protects_pc(s.policy, l, t)) {
          EXPECT_TRUE(protects_eff(s.policy, l, pc_to_effect_type(s.policy, t)))
              << print_type(t) << " at " << l.name();
        }
  }
}
