#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "sfl/eval.hpp"
#include "sfl/harness.hpp"

using namespace sfl;
using namespace sfl::testing;

namespace {

const Type kSigma = T("L[Sec] (unit + unit)");

Expr step1(const std::string& text) {
  auto next = step_pure(E(text));
  EXPECT_TRUE(next.has_value()) << text;
  return next ? *next : nullptr;
}

// The next redex is a throw. Propagation keeps the throw's own annotation,
// so the configuration is not typed at the program's type until it is
// caught or reaches the top.
bool throw_in_focus(const Expr& e) {
  if (e->kind == ExprKind::Throw) return true;
  switch (e->kind) {
    case ExprKind::Pair:
    case ExprKind::App:
      if (!is_value(e->a)) return throw_in_focus(e->a);
      return !is_value(e->b) && throw_in_focus(e->b);
    case ExprKind::Proj: case ExprKind::Inl: case ExprKind::Inr: case ExprKind::Match:
    case ExprKind::LabelE: case ExprKind::Unlabel: case ExprKind::Write: case ExprKind::TryCatch:
    case ExprKind::LiftE: case ExprKind::Seq: case ExprKind::Let:
      return !is_value(e->a) && throw_in_focus(e->a);
    default: return false;
  }
}

}  // namespace

TEST(Eval, PureSteps) {
  EXPECT_TRUE(expr_equal(step1("unlabel (label[Sec] (inl () : unit + unit)) as x in label[Sec] x"),
                         E("label[Sec] (inl () : unit + unit)")));
  EXPECT_TRUE(expr_equal(step1("(fun (x : unit) -> x) ()"), ex::unit()));
  auto unrolled = step1("fix f : Lift unit = lift ()");
  EXPECT_TRUE(expr_equal(unrolled, E("lift ()")));
  EXPECT_FALSE(step_pure(E("lift ()")).has_value());
  EXPECT_TRUE(expr_equal(step1("seq x = lift () in lift x"), E("lift ()")));
  EXPECT_TRUE(expr_equal(step1("match (inr () : unit + unit) with inl a -> (a, a) | inr b -> (b, ())"),
                         E("((), ())")));
}

TEST(Eval, StateSteps) {
  auto w = step_state({E("write (inl () : unit + unit)"), E("inr () : unit + unit")});
  ASSERT_TRUE(w.has_value());
  EXPECT_TRUE(expr_equal(w->expr, ex::unit()));
  EXPECT_TRUE(expr_equal(w->state, E("inl () : unit + unit")));

  auto t = step_state({E("try throw : unit catch ((), ())"), ex::unit()});
  ASSERT_TRUE(t.has_value());
  EXPECT_TRUE(expr_equal(t->expr, E("((), ())")));

  auto p = step_state({E("write (throw : unit)"), ex::unit()});
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(p->expr->kind, ExprKind::Throw);

  auto r = step_state({E("read"), E("inl () : unit + unit")});
  ASSERT_TRUE(r.has_value());
  EXPECT_TRUE(expr_equal(r->expr, E("inl () : unit + unit")));
  EXPECT_FALSE(step_state({E("throw : unit"), ex::unit()}).has_value());
}

TEST(Eval, Run) {
  EXPECT_EQ(run(E("fix f : Lift unit = f"), std::nullopt, 100).kind, OutcomeKind::Timeout);
  for (std::size_t fuel : {0u, 1u, 100u}) {
    auto out = run(E("label[Sec] ()"), std::nullopt, fuel);
    EXPECT_EQ(out.kind, OutcomeKind::Val);
    EXPECT_TRUE(expr_equal(out.value, E("label[Sec] ()")));
  }
  auto stuck = run(E("fst ()"), std::nullopt);
  EXPECT_EQ(stuck.kind, OutcomeKind::Stuck);
  EXPECT_FALSE(stuck.reason.empty());
}

TEST(Eval, ProgramOneThrowsBeforeTheWrite) {
  auto body = E("let v : L[Sec] unit = unlabel h as x in match x with | inl a -> throw : L[Sec] unit "
                "| inr b -> label[Sec] () in write s",
                kSigma);
  auto s0 = E("label[Sec] (inr () : unit + unit)");
  auto s1 = E("label[Sec] (inl () : unit + unit)");
  auto closed = subst(subst(body, "h", E("label[Sec] (inl () : unit + unit)")), "s", s1);
  auto out = run(desugar(closed), s0);
  EXPECT_EQ(out.kind, OutcomeKind::Thrown);
  EXPECT_EQ(value_eq(out.state, s0), ValueEq::Equal);

  auto other = subst(subst(body, "h", E("label[Sec] (inr () : unit + unit)")), "s", s1);
  auto out2 = run(desugar(other), s0);
  EXPECT_EQ(out2.kind, OutcomeKind::ValWithState);
  EXPECT_EQ(value_eq(out2.state, s1), ValueEq::Equal);
}

TEST(Eval, ValueEq) {
  EXPECT_EQ(value_eq(ex::unit(), ex::unit()), ValueEq::Equal);
  EXPECT_EQ(value_eq(E("inl () : unit + unit"), E("inr () : unit + unit")), ValueEq::Different);
  EXPECT_EQ(value_eq(E("fun (x : unit) -> x"), E("fun (x : unit) -> x")), ValueEq::NotComparable);
  EXPECT_EQ(value_eq(E("label[Sec] ()"), E("label[Pub] ()")), ValueEq::Different);
}

// Generated programs step to well-typed terms, never get stuck, and run
// deterministically.
TEST(EvalLaws, PreservationProgressDeterminism) {
  auto s = state_exn("Sec", "Pub", kSigma);
  auto states = enumerate_values(kSigma);
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    auto g = random_program(seed, 12, GenSystem::PcStateExn, s);
    auto e = desugar(g.expr);
    MachineConfig c{e, states[seed % states.size()]};
    for (int i = 0; i < 300; ++i) {
      std::optional<MachineConfig> next;
      ASSERT_NO_THROW(next = step_state(c)) << print_expr(c.expr);
      if (!next) break;
      c = *next;
      if (throw_in_focus(c.expr)) break;
      auto t = check_plain(s, {}, c.expr);
      ASSERT_TRUE(t.ok()) << print_expr(c.expr) << ": " << t.error().what();
      EXPECT_TRUE(type_equal(*t, erase_latent(g.type))) << print_expr(c.expr);
    }
    auto a = run(e, states[0]);
    auto b = run(e, states[0]);
    EXPECT_NE(a.kind, OutcomeKind::Stuck) << a.reason;
    EXPECT_EQ(print_outcome(a), print_outcome(b));
  }
}

TEST(EvalLaws, PurePreservation) {
  auto s = pnt("Pub");
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    auto g = random_program(seed, 12, GenSystem::PcPnt, s);
    auto e = desugar(g.expr);
    for (int i = 0; i < 200; ++i) {
      auto next = step_pure(e);
      if (!next) break;
      e = *next;
      auto t = check_plain(s, {}, e);
      ASSERT_TRUE(t.ok()) << print_expr(e) << ": " << t.error().what();
      EXPECT_TRUE(type_equal(*t, erase_latent(g.type)));
    }
  }
}
