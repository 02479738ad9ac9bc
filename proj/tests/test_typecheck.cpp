#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "sfl/harness.hpp"
#include "sfl/typecheck.hpp"

using namespace sfl;
using namespace sfl::testing;

namespace {

template <typename T>
TypeErrorKind error_of(const Result<T>& r) {
  EXPECT_FALSE(r.ok());
  return r.ok() ? TypeErrorKind::InternalIllTyped : r.error().kind();
}

Program load(const std::string& name) {
  static const LabelLattice lat = two_point_lattice();
  std::ifstream in(std::string(SFL_SOURCE_DIR "/corpus/") + name + ".sfl");
  std::stringstream text;
  text << in.rdbuf();
  return parse_program(text.str(), &lat);
}

Setting setting(const Program& p) { return setting_for(two_point(), p); }

const char* kProgram1 =
    "let v = unlabel h as x in match x with | inl a -> throw : L[Sec] unit "
    "| inr b -> label[Sec] () in write s";

}  // namespace

TEST(Typecheck, Pointed) {
  EXPECT_TRUE(is_pointed(T("Lift unit")));
  EXPECT_FALSE(is_pointed(T("unit")));
  EXPECT_TRUE(is_pointed(T("unit -> Lift unit")));
  EXPECT_TRUE(is_pointed(T("L[Sec] Lift unit * Lift unit")));
  EXPECT_THROW(is_pointed(T("unit ->[pc Pub] Lift unit")), TypeError);
}

TEST(Typecheck, Pure) {
  auto s = pnt("Pub");
  EXPECT_TRUE(type_equal(*check_pure(s, {}, E("label[Sec] ()")), T("L[Sec] unit")));
  EXPECT_EQ(error_of(check_pure(s, {}, E("unlabel (label[Sec] ()) as x in x"))),
            TypeErrorKind::ProtectionFail);
  EXPECT_TRUE(type_equal(*check_pure(s, {}, E("fix f : Lift unit = lift ()")), T("Lift unit")));
  EXPECT_EQ(error_of(check_pure(s, {}, E("fix f : unit = f"))), TypeErrorKind::NotPointed);
  EXPECT_EQ(error_of(check_pure(s, {}, E("read"))), TypeErrorKind::WrongCalculus);
  EXPECT_EQ(error_of(check_pure(s, {}, E("y"))), TypeErrorKind::UnboundVar);
  EXPECT_EQ(error_of(check_pure(s, {}, E("fst ()"))), TypeErrorKind::Mismatch);
}

TEST(Typecheck, ProgramOneRejected) {
  auto p = load("exn_write_leak");
  auto s = setting(p);
  auto err = validate_program(s, p);
  ASSERT_TRUE(err.has_value());
  EXPECT_EQ(err->kind(), TypeErrorKind::ProtectionFail);
  EXPECT_TRUE(check_plain(s, make_context(p.context), p.body).ok());
}

TEST(Typecheck, ProgramOneLegal) {
  auto p = load("exn_write_legal");
  auto s = setting(p);
  EXPECT_FALSE(validate_program(s, p).has_value());
  auto t = check_pc(s, make_context(p.context), pub(), p.body);
  ASSERT_TRUE(t.ok()) << t.error().what();
  EXPECT_TRUE(type_equal(*t, ty::unit()));
}

TEST(Typecheck, ProgramOneSameTextUnderBothPolicies) {
  auto sigma = T("L[Pub] (unit + unit)");
  Context ctx = make_context({{"h", T("L[Sec] (unit + unit)")}, {"s", sigma}});
  auto body = E(kProgram1, sigma);
  auto legal = state_exn("Sec", "Sec", T("L[Sec] (unit + unit)"));
  Context ctx2 = make_context({{"h", T("L[Sec] (unit + unit)")}, {"s", legal.sigma}});
  EXPECT_TRUE(check_pc(legal, ctx2, pub(), body).ok());
  auto partial = state_exn("Pub", "Sec", sigma, ComposeMode::Partial);
  EXPECT_EQ(error_of(infer_effect(partial, ctx, body)), TypeErrorKind::EffectCompositionFail);
}

TEST(Typecheck, WriteAtHighPc) {
  auto s = state_exn("Pub", "Pub");
  EXPECT_EQ(error_of(check_pc(s, {}, sec(), E("write ()"))), TypeErrorKind::PcTooHigh);
  EXPECT_TRUE(check_pc(s, {}, pub(), E("write ()")).ok());
  EXPECT_EQ(error_of(check_pc(s, {}, sec(), E("throw : unit"))), TypeErrorKind::PcTooHigh);
  EXPECT_TRUE(check_pc(s, {}, sec(), E("read")).ok());
}

TEST(Typecheck, InferEffect) {
  auto s = state_exn("Pub", "Pub", ty::bool_());
  Context x = make_context({{"x", ty::bool_()}});
  auto j = infer_effect(s, x, E("match x with inl a -> read | inr b -> throw : unit + unit"));
  ASSERT_TRUE(j.ok()) << j.error().what();
  EXPECT_EQ(j->effect, EffectSet::RE());
  EXPECT_TRUE(type_equal(j->type, ty::bool_()));

  Context h = make_context({{"h", T("L[Sec] (unit + unit)")}});
  auto j2 = infer_effect(s, h,
                         E("unlabel h as x in match x with inl a -> label[Sec] read "
                           "| inr b -> label[Sec] (inl () : unit + unit)"));
  ASSERT_TRUE(j2.ok()) << j2.error().what();
  EXPECT_EQ(j2->effect, EffectSet::R());

  auto f = infer_effect(pnt("Pub"), {}, E("fix f : unit = f"));
  ASSERT_TRUE(f.ok()) << f.error().what();
  EXPECT_EQ(f->effect, EffectSet::PNT());
}

TEST(Typecheck, CheckEffect) {
  auto s = state_exn("Pub", "Pub");
  EXPECT_TRUE(type_equal(*check_effect(s, {}, E("read"), EffectSet::RWE()), ty::unit()));
  EXPECT_EQ(error_of(check_effect(s, {}, E("read"), EffectSet::empty())), TypeErrorKind::Mismatch);
  EXPECT_TRUE(check_effect(s, {}, E("write ()"), EffectSet::W()).ok());
}

TEST(Typecheck, PcToEffectType) {
  auto p = state_exn("Pub", "Pub").policy;
  EXPECT_TRUE(type_equal(pc_to_effect_type(p, T("unit ->[pc Pub] unit")), T("unit ->[eff {R,W,E}] unit")));
  EXPECT_TRUE(type_equal(pc_to_effect_type(p, T("L[Sec] (unit ->[pc Sec] unit)")),
                         T("L[Sec] (unit ->[eff {R}] unit)")));
  auto q = pnt("Pub").policy;
  EXPECT_TRUE(type_equal(pc_to_effect_type(q, T("unit ->[pc Sec] unit")), T("unit ->[eff {}] unit")));
  EXPECT_TRUE(type_equal(pc_to_effect_type(q, T("unit ->[pc Pub] unit")), T("unit ->[eff {PNT}] unit")));
}

TEST(Typecheck, SettingFor) {
  auto p = load("exn_write_leak");
  auto s = setting_for(two_point(), p, PolicySpec{std::nullopt, "Pub", std::nullopt, std::nullopt});
  EXPECT_EQ(s.policy.l_exn(), pub());
  EXPECT_EQ(s.policy.l_state(), pub());
  EXPECT_THROW(setting_for(two_point(), p, PolicySpec{"Nope", {}, {}, {}}), PolicyError);
  EXPECT_THROW(setting_for(two_point(), p, PolicySpec{{}, {}, {}, "sometimes"}), PolicyError);
}

// Generated pc programs: the effect system accepts them at their principal
// effect and every superset, and rejects every set missing part of it.
TEST(TypecheckLaws, PrincipalityAndSubsumption) {
  auto sets = all_effect_sets(Alphabet::StateExn);
  for (auto s : {state_exn("Sec", "Pub", T("L[Sec] (unit + unit)")),
                 state_exn("Pub", "Pub", T("L[Pub] (unit + unit)"))}) {
    for (std::uint64_t seed = 1; seed <= 150; ++seed) {
      auto g = random_program(seed, 12, GenSystem::PcStateExn, s);
      ASSERT_TRUE(check_pc(s, {}, g.pc, g.expr).ok()) << print_expr(g.expr);
      auto j = infer_effect(s, {}, g.expr);
      ASSERT_TRUE(j.ok()) << print_expr(g.expr) << ": " << j.error().what();
      for (EffectSet e : sets) {
        bool ok = check_effect(s, {}, g.expr, e).ok();
        EXPECT_EQ(ok, j->effect.subset_of(e)) << print_expr(g.expr) << " at " << e.str();
      }
    }
  }
}

// Raising the pc only removes programs.
TEST(TypecheckLaws, PcVariance) {
  auto s = state_exn("Sec", "Pub", T("L[Sec] (unit + unit)"));
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    auto g = random_program(seed, 12, GenSystem::PcStateExn, s);
    for (Label pc : {pub(), sec()})
      if (s.policy.lattice().flows(pc, g.pc)) {
        EXPECT_TRUE(check_pc(s, {}, pc, g.expr).ok()) << print_expr(g.expr) << " at " << pc.name();
      }
  }
}

TEST(TypecheckLaws, PureGeneratedAccepted) {
  auto s = pnt("Pub");
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    auto g = random_program(seed, 12, GenSystem::Pure, s);
    auto t = check_pure(s, {}, g.expr);
    ASSERT_TRUE(t.ok()) << print_expr(g.expr);
    EXPECT_TRUE(type_equal(*t, g.type));
  }
}
