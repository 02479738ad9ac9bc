#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "sfl/elaborate.hpp"
#include "sfl/eval.hpp"
#include "sfl/harness.hpp"

using namespace sfl;
using namespace sfl::testing;

namespace {

const Type kSigma = T("L[Pub] (unit + unit)");

Setting standard() { return state_exn("Pub", "Pub", kSigma); }

// Outcomes of a monadic term, one per state when the monad takes one.
std::vector<Outcome> observe(const Setting& s, EffectSet eps, const Expr& m) {
  std::vector<Outcome> out;
  if (normalize(eps).has(EffectSet::kR)) {
    for (const auto& st : enumerate_values(s.sigma)) out.push_back(run(ex::app(m, st), std::nullopt));
  } else {
    out.push_back(run(m, std::nullopt));
  }
  return out;
}

void expect_same(const std::vector<Outcome>& a, const std::vector<Outcome>& b, const std::string& what) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    EXPECT_EQ(outcome_eq(a[i], b[i]), ValueEq::Equal)
        << what << ": " << print_outcome(a[i]) << " vs " << print_outcome(b[i]);
}

std::vector<EffectSet> monads() {
  return {EffectSet::empty(), EffectSet::R(), EffectSet::E(), EffectSet::RW(), EffectSet::RE(),
          EffectSet::RWE()};
}

}  // namespace

TEST(Elaborate, Normalize) {
  EXPECT_EQ(normalize(EffectSet::W()), EffectSet::RW());
  EXPECT_EQ(normalize(EffectSet(EffectSet::kW | EffectSet::kE)), EffectSet::RWE());
  EXPECT_EQ(normalize(EffectSet::E()), EffectSet::E());
}

TEST(Elaborate, MonadType) {
  auto s = standard();
  EXPECT_TRUE(type_equal(monad_type(s, EffectSet::RWE(), ty::unit()),
                         ty::fun(kSigma, ty::prod(T("L[Pub] (unit + unit)"), kSigma))));
  EXPECT_TRUE(type_equal(monad_type(s, EffectSet::empty(), ty::bool_()), ty::bool_()));
  EXPECT_TRUE(type_equal(monad_type(s, EffectSet::R(), ty::unit()), ty::fun(kSigma, ty::unit())));
  EXPECT_TRUE(type_equal(monad_type(s, EffectSet::E(), ty::unit()), T("L[Pub] (unit + unit)")));
  EXPECT_TRUE(type_equal(monad_type(pnt("Pub"), EffectSet::PNT(), ty::unit()), T("Lift unit")));
}

TEST(Elaborate, EtaException) {
  auto s = state_exn("Sec", "Sec", T("L[Sec] (unit + unit)"));
  auto eta_e = eta(s, EffectSet::E(), ty::bool_());
  auto t = check_pure(s, {}, eta_e);
  ASSERT_TRUE(t.ok()) << t.error().what();
  EXPECT_TRUE(type_equal(*t, T("(unit + unit) -> L[Sec] (unit + (unit + unit))")));
  auto out = run(ex::app(eta_e, E("inl () : unit + unit")), std::nullopt);
  EXPECT_TRUE(expr_equal(out.value, E("label[Sec] (inr (inl () : unit + unit) : unit + (unit + unit))")))
      << print_outcome(out);
}

TEST(Elaborate, CoerceFromEmptyIsEta) {
  auto s = standard();
  for (EffectSet eps : monads()) {
    auto v = E("inr () : unit + unit");
    expect_same(observe(s, eps, ex::app(coerce(s, EffectSet::empty(), eps, ty::bool_()), v)),
                observe(s, eps, ex::app(eta(s, eps, ty::bool_()), v)), eps.str());
  }
  EXPECT_THROW(coerce(s, EffectSet::RW(), EffectSet::R(), ty::unit()), TypeError);
}

TEST(Elaborate, CombinatorsTypecheck) {
  auto s = standard();
  auto t = ty::bool_();
  for (EffectSet from : monads()) {
    auto m = monad_type(s, from, t);
    EXPECT_TRUE(type_equal(*check_pure(s, {}, eta(s, from, t)), ty::fun(t, m))) << from.str();
    EXPECT_TRUE(type_equal(*check_pure(s, {}, sfl::bind(s, from, t, t)),
                           ty::fun(m, ty::fun(ty::fun(t, m), m))))
        << from.str();
    for (EffectSet to : monads()) {
      if (!from.subset_of(to)) continue;
      EXPECT_TRUE(type_equal(*check_pure(s, {}, coerce(s, from, to, t)),
                             ty::fun(m, monad_type(s, to, t))))
          << from.str() << " to " << to.str();
    }
  }
}

TEST(Elaborate, CaptureRead) {
  auto s = standard();
  auto c = capture(s, {}, E("read"));
  ASSERT_TRUE(c.ok()) << c.error().what();
  EXPECT_EQ(c->effect, EffectSet::R());
  EXPECT_TRUE(type_equal(c->type, kSigma));
  EXPECT_TRUE(type_equal(*check_pure(s, {}, c->term), ty::fun(kSigma, kSigma)));
  for (const auto& st : enumerate_values(kSigma))
    EXPECT_EQ(value_eq(run(ex::app(c->term, st), std::nullopt).value, st), ValueEq::Equal);
}

TEST(Elaborate, CaptureUnit) {
  auto c = capture(standard(), {}, E("()"));
  ASSERT_TRUE(c.ok());
  EXPECT_TRUE(expr_equal(c->term, ex::unit()));
  EXPECT_EQ(c->effect, EffectSet::empty());
}

TEST(Elaborate, ReadOrThrowSimulates) {
  auto s = standard();
  auto body = E("match x with inl a -> read | inr b -> throw : sigma", kSigma);
  for (const auto& x : enumerate_values(ty::bool_())) {
    auto closed = subst(body, "x", x);
    auto c = capture(s, {}, closed);
    ASSERT_TRUE(c.ok()) << c.error().what();
    EXPECT_EQ(c->effect, EffectSet::RE());
    EXPECT_TRUE(type_equal(*check_pure(s, {}, c->term),
                           ty::fun(kSigma, T("L[Pub] (unit + L[Pub] (unit + unit))"))));
    auto report = check_simulation(s, closed, enumerate_values(kSigma));
    EXPECT_TRUE(report.pass()) << report.summary();
    EXPECT_EQ(report.cases, 2u);
  }
}

TEST(Elaborate, WriteThenRead) {
  auto s = standard();
  auto e = E("let u : unit = write (label[Pub] (inr () : unit + unit)) in read", kSigma);
  auto report = check_simulation(s, e, enumerate_values(kSigma));
  EXPECT_TRUE(report.pass()) << report.summary();
  for (const auto& st : enumerate_values(kSigma)) {
    auto out = run(e, st);
    EXPECT_EQ(out.kind, OutcomeKind::ValWithState);
    EXPECT_EQ(value_eq(out.value, out.state), ValueEq::Equal);
  }
}

TEST(Elaborate, MapLabel) {
  auto s = pnt("Pub");
  auto m = map_label(sec(), ex::var("x"), "x");
  Context ctx = make_context({{"x", T("L[Sec] (unit + unit)")}});
  auto t = check_pure(s, ctx, m);
  ASSERT_TRUE(t.ok()) << t.error().what();
  EXPECT_TRUE(type_equal(*t, T("L[Sec] (unit + unit)")));
}

// p accepted at pc under x : t gives map_label(pc, p) accepted under
// x : L[pc] t; its effect stays above the label.
TEST(ElaborateLaws, MapLabelPcAndEffect) {
  auto s = state_exn("Sec", "Pub", T("L[Sec] (unit + unit)"));
  ProgramGenerator gen(s, GenSystem::PcStateExn, 7);
  std::size_t checked = 0;
  for (int i = 0; i < 200; ++i) {
    Type t = gen.random_type(2, true);
    Label pc = gen.random_label();
    Context ctx = make_context({{"x", t}});
    Generated g;
    try {
      g = gen.generate(ctx, pc, nullptr, 10);
    } catch (const GenerationExhausted&) {
      continue;
    }
    ASSERT_TRUE(check_pc(s, ctx, pc, g.expr).ok());
    auto m = map_label(pc, g.expr, "x");
    Context lifted = make_context({{"x", ty::labeled(pc, t)}});
    auto r = check_pc(s, lifted, pc, m);
    EXPECT_TRUE(r.ok()) << print_expr(m) << ": " << r.error().what();
    auto jp = infer_effect(s, ctx, g.expr);
    auto jm = infer_effect(s, lifted, m);
    if (jm.ok() && jp.ok()) {
      EXPECT_TRUE(s.policy.lattice().flows(pc, s.policy.effect_label(jp->effect)));
    }
    ++checked;
  }
  EXPECT_GT(checked, 100u);
}

// bind (eta v) f = f v and bind m eta = m, observed on every state.
TEST(ElaborateLaws, MonadUnits) {
  auto s = standard();
  auto t = ty::bool_();
  for (EffectSet eps : monads()) {
    auto e = eta(s, eps, t);
    auto b = sfl::bind(s, eps, t, t);
    // A nontrivial continuation: swap the injection, then return.
    auto swap = E("fun (y : unit + unit) -> match y with inl a -> (inr () : unit + unit) | inr b -> (inl () : unit + unit)");
    auto f = ex::lam("z", t, ex::app(e, ex::app(swap, ex::var("z"))));
    for (const auto& v : enumerate_values(t)) {
      expect_same(observe(s, eps, ex::app(b, ex::app(e, v), f)), observe(s, eps, ex::app(f, v)),
                  "left unit " + eps.str());
      auto m = ex::app(e, v);
      expect_same(observe(s, eps, ex::app(b, m, e)), observe(s, eps, m), "right unit " + eps.str());
    }
  }
}
