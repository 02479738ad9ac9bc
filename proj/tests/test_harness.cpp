#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "sfl/harness.hpp"

using namespace sfl;
using namespace sfl::testing;

namespace {

Outcome value_outcome(Expr v) {
  Outcome o;
  o.kind = OutcomeKind::Val;
  o.value = std::move(v);
  return o;
}

const Type kHigh = T("L[Sec] (unit + unit)");

// unlabel hole as _ in label[Sec] (inl () : unit + unit), any binder name.
bool has_unlabel_context(const std::vector<Expr>& xs) {
  auto body = E("label[Sec] (inl () : unit + unit)");
  for (const auto& x : xs)
    if (x->kind == ExprKind::Unlabel && expr_equal(x->a, ex::var(kHole)) && expr_equal(x->b, body)) return true;
  return false;
}

}  // namespace

TEST(Harness, EnumerateValues) {
  EXPECT_EQ(enumerate_values(ty::bool_()).size(), 2u);
  EXPECT_EQ(enumerate_values(T("(unit + unit) * L[Sec] (unit + unit)")).size(), 4u);
  EXPECT_TRUE(enumerate_values(T("unit -> unit")).empty());
  EXPECT_TRUE(enumerate_values(T("(unit + unit) * (unit + unit)"), 3).empty());
}

TEST(Harness, EnumerateContexts) {
  auto s = pnt("Pub");
  ContextSpec spec{T("L[Sec] unit"), sec(), 3, Observation::Pure};
  auto cs = enumerate_contexts(s, spec);
  EXPECT_TRUE(has_unlabel_context(cs))
      << cs.size() << " contexts";
  for (const auto& c : cs) {
    EXPECT_TRUE(occurs_free(kHole, c)) << print_expr(c);
    EXPECT_LE(expr_size(c), 3u + 2u);
  }
  spec.size_bound = 1;
  for (const auto& c : enumerate_contexts(s, spec)) EXPECT_TRUE(expr_equal(c, ex::var(kHole)));
  auto again = enumerate_contexts(s, ContextSpec{T("L[Sec] unit"), sec(), 3, Observation::Pure});
  ASSERT_EQ(again.size(), cs.size());
}

TEST(Harness, LabeledValuesUnderPureEquivalence) {
  auto s = pnt("Pub");
  auto a = E("label[Sec] (inl () : unit + unit)");
  auto b = E("label[Sec] (inr () : unit + unit)");
  EXPECT_EQ(check_l_equiv(s, a, a, sec(), kHigh, 5).kind, VerdictKind::Equivalent);
  EXPECT_EQ(check_l_equiv(s, a, b, pub(), kHigh, 5).kind, VerdictKind::Equivalent);
  auto v = check_l_equiv(s, a, b, sec(), kHigh, 5);
  ASSERT_EQ(v.kind, VerdictKind::Distinguished);
  EXPECT_TRUE(occurs_free(kHole, v.witness));
}

TEST(Harness, ProgramOneLeaksUnderIllegalPolicy) {
  auto sigma = T("L[Pub] (unit + unit)");
  auto s = state_exn("Pub", "Sec", sigma);
  auto prog = [&](const char* h) {
    return E(std::string("let v : L[Sec] unit = unlabel ") + h +
                 " as x in match x with | inl a -> throw : L[Sec] unit | inr b -> label[Sec] () "
                 "in write (label[Pub] (inl () : unit + unit))",
             sigma);
  };
  auto p = desugar(prog("label[Sec] (inl () : unit + unit)"));
  auto q = desugar(prog("label[Sec] (inr () : unit + unit)"));
  auto v = check_state_exn_equiv(s, p, q, pub(), ty::unit(), 3);
  EXPECT_EQ(v.kind, VerdictKind::Distinguished) << v.describe();
  EXPECT_EQ(check_state_exn_equiv(s, p, p, pub(), ty::unit(), 3).kind, VerdictKind::Equivalent);
}

TEST(Harness, TerminationSensitive) {
  auto s = pnt("Pub");
  auto done = E("lift ()");
  auto loop = E("fix f : Lift unit = f");
  auto t = T("Lift unit");
  auto v = check_ts_equiv(s, done, loop, pub(), t, 4);
  EXPECT_EQ(v.kind, VerdictKind::Distinguished) << v.describe();
  EXPECT_EQ(check_ts_equiv(s, loop, loop, pub(), t, 4).kind, VerdictKind::Equivalent);
}

TEST(Harness, Decode) {
  auto s = state_exn("Pub", "Pub", T("L[Pub] (unit + unit)"));
  auto st = E("label[Pub] (inl () : unit + unit)");

  Outcome thrown = value_outcome(E("label[Pub] (inl () : unit + unit)"));
  EXPECT_EQ(decode(s, EffectSet::E(), thrown, st).kind, OutcomeKind::Thrown);

  Outcome pure = value_outcome(ex::unit());
  auto d = decode(s, EffectSet::empty(), pure, st);
  EXPECT_EQ(d.kind, OutcomeKind::ValWithState);
  EXPECT_EQ(value_eq(d.value, ex::unit()), ValueEq::Equal);
  EXPECT_EQ(value_eq(d.state, st), ValueEq::Equal);

  auto pair_fn = E("fun (s : L[Pub] (unit + unit)) -> (s, s)");
  auto ran = run(ex::app(pair_fn, st), std::nullopt);
  auto rw = decode(s, EffectSet::RW(), ran, st);
  EXPECT_EQ(rw.kind, OutcomeKind::ValWithState);
  EXPECT_EQ(value_eq(rw.value, st), ValueEq::Equal);
  EXPECT_EQ(value_eq(rw.state, st), ValueEq::Equal);

  auto p = pnt("Pub");
  auto lifted = decode(p, EffectSet::PNT(), value_outcome(E("lift ()")), nullptr);
  EXPECT_EQ(lifted.kind, OutcomeKind::Val);
  EXPECT_TRUE(expr_equal(lifted.value, ex::unit()));

  EXPECT_THROW(decode(s, EffectSet::E(), pure, st), DecodeShapeError);
}

TEST(Harness, SimulationOnRead) {
  auto s = state_exn("Pub", "Pub", T("L[Pub] (unit + unit)"));
  auto r = check_simulation(s, E("read"), enumerate_values(s.sigma));
  EXPECT_TRUE(r.pass()) << r.summary();
  EXPECT_EQ(r.cases, 2u);
}

TEST(Harness, GeneratorDeterministic) {
  auto s = state_exn("Sec", "Pub", T("L[Sec] (unit + unit)"));
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    auto a = random_program(seed, 14, GenSystem::PcStateExn, s);
    auto b = random_program(seed, 14, GenSystem::PcStateExn, s);
    EXPECT_TRUE(expr_equal(a.expr, b.expr));
    EXPECT_EQ(a.pc, b.pc);
  }
}

TEST(Harness, Report) {
  Report r;
  r.suite = "demo";
  r.record("a", true);
  r.record("b", false, "why");
  r.skip("c", "later");
  EXPECT_EQ(r.cases, 2u);
  EXPECT_EQ(r.failures, 1u);
  EXPECT_EQ(r.skipped, 1u);
  EXPECT_FALSE(r.pass());
}

TEST(Harness, SmallSuitesPass) {
  SuiteOptions o;
  o.count = 60;
  for (const auto& r : {suite_capture(o), suite_simulation(o), suite_lemmas(o), suite_pc_bounded(o),
                        suite_captured_seq(o)})
    EXPECT_TRUE(r.pass()) << r.summary();
  EXPECT_TRUE(suite_coproduct_demo(two_point_lattice()).pass());
}

TEST(Harness, GeneratorCoversEveryRule) {
  SuiteOptions o;
  o.count = 1000;
  auto r = suite_generator_coverage(o);
  EXPECT_TRUE(r.pass()) << r.summary();
}
