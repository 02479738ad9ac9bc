#include "sfl/typecheck.hpp"

#include <unordered_map>

namespace sfl {

const char* to_string(System s) {
  switch (s) {
    case System::Pure: return "pure";
    case System::Plain: return "plain";
    case System::Pc: return "pc";
    case System::Effect: return "effect";
  }
  return "?";
}

Context make_context(const std::vector<std::pair<std::string, Type>>& vars) {
  Context ctx;
  for (const auto& [name, t] : vars) ctx.push_back({name, t, false});
  return ctx;
}

Setting setting_for(const LatticePtr& lat, const Program& p, const PolicySpec& overrides) {
  auto pick = [&](const std::optional<std::string>& over, const std::optional<std::string>& own) {
    const auto& v = over ? over : own;
    if (!v) return lat->top();
    Label l(*v);
    if (!lat->contains(l)) throw PolicyError(PolicyErrorKind::UnknownLabel, "unknown label '" + *v + "'");
    return l;
  };
  const auto& mode_text = overrides.mode ? overrides.mode : p.policy.mode;
  ComposeMode mode = ComposeMode::GlobalFlow;
  if (mode_text) {
    if (*mode_text == "partial") mode = ComposeMode::Partial;
    else if (*mode_text != "global")
      throw PolicyError(PolicyErrorKind::BadValue, "mode must be global or partial, got '" + *mode_text + "'");
  }
  Setting s;
  s.policy = EffectPolicy::make(lat, p.mode, pick(overrides.l_state, p.policy.l_state),
                                pick(overrides.l_exn, p.policy.l_exn), pick(overrides.l_pnt, p.policy.l_pnt), mode);
  s.sigma = p.mode == Alphabet::StateExn ? p.sigma : nullptr;
  return s;
}

bool is_pointed(const Type& t) {
  switch (t->kind) {
    case TypeKind::Unit:
    case TypeKind::Sum: return false;
    case TypeKind::Prod: return is_pointed(t->a) && is_pointed(t->b);
    case TypeKind::FunPure: return is_pointed(t->b);
    case TypeKind::FunPc:
    case TypeKind::FunEff:
      throw TypeError(TypeErrorKind::WrongCalculus, "pointedness of a latent arrow", print_type(t));
    case TypeKind::Labeled: return is_pointed(t->a);
    case TypeKind::Lift: return true;
  }
  return false;
}

EffectSet pc_to_effect(const EffectPolicy& policy, Label pc) { return gamma(policy, pc); }

Type pc_to_effect_type(const EffectPolicy& policy, const Type& t) {
  switch (t->kind) {
    case TypeKind::Unit: return t;
    case TypeKind::Sum: return ty::sum(pc_to_effect_type(policy, t->a), pc_to_effect_type(policy, t->b));
    case TypeKind::Prod: return ty::prod(pc_to_effect_type(policy, t->a), pc_to_effect_type(policy, t->b));
    case TypeKind::Labeled: return ty::labeled(t->label, pc_to_effect_type(policy, t->a));
    case TypeKind::FunPc:
      return ty::fun_eff(pc_to_effect_type(policy, t->a), pc_to_effect(policy, t->label),
                         pc_to_effect_type(policy, t->b));
    case TypeKind::FunEff:
      return ty::fun_eff(pc_to_effect_type(policy, t->a), t->eff, pc_to_effect_type(policy, t->b));
    case TypeKind::FunPure:
    case TypeKind::Lift:
      throw TypeError(TypeErrorKind::WrongCalculus, "no effect-system counterpart", print_type(t));
  }
  return t;
}

Context pc_to_effect_context(const EffectPolicy& policy, const Context& ctx) {
  Context out;
  out.reserve(ctx.size());
  for (const auto& b : ctx) out.push_back({b.name, pc_to_effect_type(policy, b.type), b.recursive});
  return out;
}

Type erase_latent(const Type& t) {
  switch (t->kind) {
    case TypeKind::Unit: return t;
    case TypeKind::Sum: return ty::sum(erase_latent(t->a), erase_latent(t->b));
    case TypeKind::Prod: return ty::prod(erase_latent(t->a), erase_latent(t->b));
    case TypeKind::Labeled: return ty::labeled(t->label, erase_latent(t->a));
    case TypeKind::Lift: return ty::lift(erase_latent(t->a));
    case TypeKind::FunPure:
    case TypeKind::FunPc:
    case TypeKind::FunEff: return ty::fun(erase_latent(t->a), erase_latent(t->b));
  }
  return t;
}

namespace {

using LetTypes = std::unordered_map<const ExprNode*, Type>;

[[noreturn]] void fail(TypeErrorKind k, const std::string& detail, const Expr& at) {
  throw TypeError(k, detail, print_expr(at));
}

const Binding& lookup(const Context& ctx, const Expr& e) {
  for (auto it = ctx.rbegin(); it != ctx.rend(); ++it)
    if (it->name == e->x) return *it;
  fail(TypeErrorKind::UnboundVar, "unbound variable " + e->x, e);
}

void expect_equal(const Type& want, const Type& got, const Expr& at, const char* what) {
  if (!type_equal(want, got))
    fail(TypeErrorKind::Mismatch,
         std::string(what) + ": expected " + print_type(want) + ", got " + print_type(got), at);
}

void expect_kind(const Type& t, TypeKind k, const Expr& at, const char* what) {
  if (t->kind != k) fail(TypeErrorKind::Mismatch, std::string(what) + ", got " + print_type(t), at);
}

// Rejects arrows and Lift that do not belong to the calculus.
void check_type_calculus(const Type& t, System sys, const Expr& at) {
  switch (t->kind) {
    case TypeKind::Unit: return;
    case TypeKind::Labeled: check_type_calculus(t->a, sys, at); return;
    case TypeKind::Sum:
    case TypeKind::Prod:
      check_type_calculus(t->a, sys, at);
      check_type_calculus(t->b, sys, at);
      return;
    case TypeKind::FunPure:
      if (sys == System::Pc || sys == System::Effect)
        fail(TypeErrorKind::WrongCalculus, "plain arrow " + print_type(t), at);
      break;
    case TypeKind::FunPc:
      if (sys == System::Pure || sys == System::Effect)
        fail(TypeErrorKind::WrongCalculus, "pc arrow " + print_type(t), at);
      break;
    case TypeKind::FunEff:
      if (sys == System::Pure || sys == System::Pc)
        fail(TypeErrorKind::WrongCalculus, "effect arrow " + print_type(t), at);
      break;
    case TypeKind::Lift:
      if (sys == System::Pc || sys == System::Effect)
        fail(TypeErrorKind::WrongCalculus, "Lift outside the pure calculus", at);
      check_type_calculus(t->a, sys, at);
      return;
  }
  check_type_calculus(t->a, sys, at);
  check_type_calculus(t->b, sys, at);
}

Context extend(const Context& ctx, const std::string& x, Type t, bool recursive = false) {
  Context out = ctx;
  out.push_back({x, std::move(t), recursive});
  return out;
}

// ---------------------------------------------------------------- pure / plain

class SimpleChecker {
 public:
  SimpleChecker(const Setting& s, bool plain, LetTypes* lets) : s_(s), plain_(plain), lets_(lets) {}

  Type check(const Context& ctx, const Expr& e) {
    const LabelLattice& lat = s_.policy.lattice();
    switch (e->kind) {
      case ExprKind::Var: return lookup(ctx, e).type;
      case ExprKind::Unit: return ty::unit();
      case ExprKind::Pair: return ty::prod(check(ctx, e->a), check(ctx, e->b));
      case ExprKind::Proj: {
        Type t = check(ctx, e->a);
        expect_kind(t, TypeKind::Prod, e, "projection of a non-product");
        return e->index == 1 ? t->a : t->b;
      }
      case ExprKind::Inl:
      case ExprKind::Inr: {
        Type annot = norm(e->annot, e);
        expect_kind(annot, TypeKind::Sum, e, "injection annotated with a non-sum");
        expect_equal(e->kind == ExprKind::Inl ? annot->a : annot->b, check(ctx, e->a), e, "injection");
        return annot;
      }
      case ExprKind::Match: {
        Type t = check(ctx, e->a);
        expect_kind(t, TypeKind::Sum, e, "match on a non-sum");
        Type t1 = check(extend(ctx, e->x, t->a), e->b);
        Type t2 = check(extend(ctx, e->y, t->b), e->c);
        expect_equal(t1, t2, e, "match branches");
        return t1;
      }
      case ExprKind::Lam: {
        if (!plain_ && e->latent != Latent::None)
          fail(TypeErrorKind::WrongCalculus, "latent annotation in the pure calculus", e);
        Type annot = norm(e->annot, e);
        return ty::fun(annot, check(extend(ctx, e->x, annot), e->a));
      }
      case ExprKind::App: {
        Type f = check(ctx, e->a);
        expect_kind(f, TypeKind::FunPure, e, "application of a non-function");
        expect_equal(f->a, check(ctx, e->b), e, "argument");
        return f->b;
      }
      case ExprKind::LabelE: return ty::labeled(s_.policy.surface(e->label), check(ctx, e->a));
      case ExprKind::Unlabel: {
        Type t = check(ctx, e->a);
        expect_kind(t, TypeKind::Labeled, e, "unlabel of an unlabeled value");
        Type body = check(extend(ctx, e->x, t->a), e->b);
        if (!protects_pure(s_.policy, t->label, body))
          fail(TypeErrorKind::ProtectionFail,
               t->label.name() + " is not protected by " + print_type(body), e);
        return body;
      }
      case ExprKind::Read:
        need_plain(e);
        need_state(e);
        return norm(s_.sigma, e);
      case ExprKind::Write:
        need_plain(e);
        need_state(e);
        expect_equal(norm(s_.sigma, e), check(ctx, e->a), e, "written value");
        return ty::unit();
      case ExprKind::Throw:
        need_plain(e);
        need_state(e);
        return norm(e->annot, e);
      case ExprKind::TryCatch: {
        need_plain(e);
        need_state(e);
        Type t1 = check(ctx, e->a);
        expect_equal(t1, check(ctx, e->b), e, "try branches");
        return t1;
      }
      case ExprKind::Fix: {
        Type annot = norm(e->annot, e);
        if (!plain_ && !is_pointed(annot))
          fail(TypeErrorKind::NotPointed, print_type(annot) + " is not pointed", e);
        expect_equal(annot, check(extend(ctx, e->x, annot, true), e->a), e, "fix body");
        return annot;
      }
      case ExprKind::LiftE: return ty::lift(check(ctx, e->a));
      case ExprKind::Seq: {
        Type t = check(ctx, e->a);
        expect_kind(t, TypeKind::Lift, e, "seq of a non-Lift");
        Type body = check(extend(ctx, e->x, t->a), e->b);
        if (!is_pointed(body)) fail(TypeErrorKind::NotPointed, print_type(body) + " is not pointed", e);
        return body;
      }
      case ExprKind::Let: {
        Type t1 = check(ctx, e->a);
        if (e->annot) expect_equal(norm(e->annot, e), t1, e, "let binder");
        if (lets_) (*lets_)[e.get()] = t1;
        return check(extend(ctx, e->x, t1), e->b);
      }
    }
    (void)lat;
    fail(TypeErrorKind::InternalIllTyped, "unknown expression", e);
  }

 private:
  Type norm(const Type& t, const Expr& at) {
    if (!t) fail(TypeErrorKind::StateTypeInvalid, "no state type", at);
    if (plain_) return erase_latent(t);
    check_type_calculus(t, System::Pure, at);
    return t;
  }
  void need_plain(const Expr& e) {
    if (!plain_) fail(TypeErrorKind::WrongCalculus, "effect in the pure calculus", e);
  }
  void need_state(const Expr& e) {
    if (s_.mode() != Alphabet::StateExn)
      fail(TypeErrorKind::WrongCalculus, "state or exceptions in pnt mode", e);
  }

  const Setting& s_;
  bool plain_;
  LetTypes* lets_;
};

// Forms that only one mode of the pc and effect systems knows.
void check_form_mode(const Setting& s, const Expr& e) {
  switch (e->kind) {
    case ExprKind::LiftE:
    case ExprKind::Seq: fail(TypeErrorKind::WrongCalculus, "Lift outside the pure calculus", e);
    case ExprKind::Fix:
      if (s.mode() != Alphabet::Pnt) fail(TypeErrorKind::WrongCalculus, "fix in state-exn mode", e);
      return;
    case ExprKind::Read:
    case ExprKind::Write:
    case ExprKind::Throw:
    case ExprKind::TryCatch:
      if (s.mode() != Alphabet::StateExn)
        fail(TypeErrorKind::WrongCalculus, "state or exceptions in pnt mode", e);
      if (!s.sigma) fail(TypeErrorKind::StateTypeInvalid, "no state type", e);
      return;
    default: return;
  }
}

// ---------------------------------------------------------------- pc system

class PcChecker {
 public:
  PcChecker(const Setting& s, LetTypes* lets) : s_(s), lat_(s.policy.lattice()), lets_(lets) {}

  Type check(const Context& ctx, Label pc, const Expr& e) {
    check_form_mode(s_, e);
    switch (e->kind) {
      case ExprKind::Var: {
        const Binding& b = lookup(ctx, e);
        if (b.recursive) need_flow(pc, s_.policy.l_pnt(), e, "recursive call");
        return b.type;
      }
      case ExprKind::Unit: return ty::unit();
      case ExprKind::Pair: return ty::prod(check(ctx, pc, e->a), check(ctx, pc, e->b));
      case ExprKind::Proj: {
        Type t = check(ctx, pc, e->a);
        expect_kind(t, TypeKind::Prod, e, "projection of a non-product");
        return e->index == 1 ? t->a : t->b;
      }
      case ExprKind::Inl:
      case ExprKind::Inr: {
        Type annot = norm(e->annot, e);
        expect_kind(annot, TypeKind::Sum, e, "injection annotated with a non-sum");
        expect_equal(e->kind == ExprKind::Inl ? annot->a : annot->b, check(ctx, pc, e->a), e, "injection");
        return annot;
      }
      case ExprKind::Match: {
        Type t = check(ctx, pc, e->a);
        expect_kind(t, TypeKind::Sum, e, "match on a non-sum");
        Type t1 = check(extend(ctx, e->x, t->a), pc, e->b);
        Type t2 = check(extend(ctx, e->y, t->b), pc, e->c);
        expect_equal(t1, t2, e, "match branches");
        return t1;
      }
      case ExprKind::Lam: {
        if (e->latent == Latent::Eff)
          fail(TypeErrorKind::WrongCalculus, "effect annotation in the pc system", e);
        Label latent = e->latent == Latent::Pc ? e->label : pc;
        Type annot = norm(e->annot, e);
        return ty::fun_pc(annot, latent, check(extend(ctx, e->x, annot), latent, e->a));
      }
      case ExprKind::App: {
        Type f = check(ctx, pc, e->a);
        expect_kind(f, TypeKind::FunPc, e, "application of a non-function");
        expect_equal(f->a, check(ctx, pc, e->b), e, "argument");
        need_flow(pc, f->label, e, "call");
        return f->b;
      }
      case ExprKind::LabelE: return ty::labeled(s_.policy.surface(e->label), check(ctx, pc, e->a));
      case ExprKind::Unlabel: {
        Type t = check(ctx, pc, e->a);
        expect_kind(t, TypeKind::Labeled, e, "unlabel of an unlabeled value");
        Type body = check(extend(ctx, e->x, t->a), lat_.join(pc, t->label), e->b);
        if (!protects_pc(s_.policy, t->label, body))
          fail(TypeErrorKind::ProtectionFail,
               t->label.name() + " is not protected by " + print_type(body), e);
        return body;
      }
      case ExprKind::Read: return s_.sigma;
      case ExprKind::Write:
        expect_equal(s_.sigma, check(ctx, pc, e->a), e, "written value");
        need_flow(pc, s_.policy.l_state(), e, "write");
        return ty::unit();
      case ExprKind::Throw:
        need_flow(pc, s_.policy.l_exn(), e, "throw");
        return norm(e->annot, e);
      case ExprKind::TryCatch: {
        Type t1 = check(ctx, pc, e->a);
        expect_equal(t1, check(ctx, pc, e->b), e, "try branches");
        if (!protects_pc(s_.policy, s_.policy.l_exn(), t1))
          fail(TypeErrorKind::ProtectionFail,
               s_.policy.l_exn().name() + " is not protected by " + print_type(t1), e);
        return t1;
      }
      case ExprKind::Fix: {
        need_flow(pc, s_.policy.l_pnt(), e, "fix");
        Type annot = norm(e->annot, e);
        expect_equal(annot, check(extend(ctx, e->x, annot, true), pc, e->a), e, "fix body");
        return annot;
      }
      case ExprKind::Let: {
        Type t1 = check(ctx, pc, e->a);
        if (e->annot) expect_equal(norm(e->annot, e), t1, e, "let binder");
        if (lets_) (*lets_)[e.get()] = t1;
        return check(extend(ctx, e->x, t1), pc, e->b);
      }
      case ExprKind::LiftE:
      case ExprKind::Seq: break;
    }
    fail(TypeErrorKind::InternalIllTyped, "unknown expression", e);
  }

 private:
  Type norm(const Type& t, const Expr& at) {
    check_type_calculus(t, System::Pc, at);
    return t;
  }
  void need_flow(Label pc, Label bound, const Expr& e, const char* what) {
    if (!lat_.flows(pc, bound))
      fail(TypeErrorKind::PcTooHigh,
           std::string(what) + " at pc " + pc.name() + " above " + bound.name(), e);
  }

  const Setting& s_;
  const LabelLattice& lat_;
  LetTypes* lets_;
};

// ---------------------------------------------------------------- effect system

class EffectChecker {
 public:
  EffectChecker(const Setting& s, LetTypes* lets) : s_(s), lat_(s.policy.lattice()), lets_(lets) {}

  Derivation derive(const Context& ctx, const Expr& e) {
    check_form_mode(s_, e);
    Derivation d;
    d.kids.reserve(3);
    auto kid = [&](const Context& c, const Expr& sub) -> const Derivation& {
      d.kids.push_back(derive(c, sub));
      return d.kids.back();
    };
    switch (e->kind) {
      case ExprKind::Var: {
        const Binding& b = lookup(ctx, e);
        d.type = b.type;
        d.effect = b.recursive ? EffectSet::PNT() : EffectSet::empty();
        return d;
      }
      case ExprKind::Unit:
        d.type = ty::unit();
        return d;
      case ExprKind::Pair: {
        Type ta = kid(ctx, e->a).type;
        Type tb = kid(ctx, e->b).type;
        d.type = ty::prod(ta, tb);
        d.effect = join_parts(e, {d.kids[0].effect, d.kids[1].effect});
        return d;
      }
      case ExprKind::Proj: {
        const Derivation& k = kid(ctx, e->a);
        expect_kind(k.type, TypeKind::Prod, e, "projection of a non-product");
        d.type = e->index == 1 ? k.type->a : k.type->b;
        d.effect = k.effect;
        return d;
      }
      case ExprKind::Inl:
      case ExprKind::Inr: {
        Type annot = norm(e->annot, e);
        expect_kind(annot, TypeKind::Sum, e, "injection annotated with a non-sum");
        const Derivation& k = kid(ctx, e->a);
        expect_equal(e->kind == ExprKind::Inl ? annot->a : annot->b, k.type, e, "injection");
        d.type = annot;
        d.effect = k.effect;
        return d;
      }
      case ExprKind::Match: {
        Type t = kid(ctx, e->a).type;
        expect_kind(t, TypeKind::Sum, e, "match on a non-sum");
        kid(extend(ctx, e->x, t->a), e->b);
        kid(extend(ctx, e->y, t->b), e->c);
        expect_equal(d.kids[1].type, d.kids[2].type, e, "match branches");
        d.type = d.kids[1].type;
        d.effect = join_parts(e, {d.kids[0].effect, d.kids[1].effect | d.kids[2].effect});
        return d;
      }
      case ExprKind::Lam: {
        Type annot = norm(e->annot, e);
        const Derivation& body = kid(extend(ctx, e->x, annot), e->a);
        EffectSet latent = body.effect;
        if (e->latent != Latent::None) {
          latent = e->latent == Latent::Eff ? e->latent_eff : pc_to_effect(s_.policy, e->label);
          if (!body.effect.subset_of(latent))
            fail(TypeErrorKind::Mismatch,
                 "body effect " + body.effect.str() + " exceeds latent " + latent.str(), e);
        }
        d.type = ty::fun_eff(annot, latent, body.type);
        return d;
      }
      case ExprKind::App: {
        Type f = kid(ctx, e->a).type;
        expect_kind(f, TypeKind::FunEff, e, "application of a non-function");
        expect_equal(f->a, kid(ctx, e->b).type, e, "argument");
        d.type = f->b;
        d.effect = join_parts(e, {d.kids[0].effect, d.kids[1].effect, f->eff});
        return d;
      }
      case ExprKind::LabelE: {
        const Derivation& k = kid(ctx, e->a);
        d.type = ty::labeled(s_.policy.surface(e->label), k.type);
        d.effect = k.effect;
        return d;
      }
      case ExprKind::Unlabel: {
        Type t = kid(ctx, e->a).type;
        expect_kind(t, TypeKind::Labeled, e, "unlabel of an unlabeled value");
        const Derivation& body = kid(extend(ctx, e->x, t->a), e->b);
        if (!protects_eff(s_.policy, t->label, body.type))
          fail(TypeErrorKind::ProtectionFail,
               t->label.name() + " is not protected by " + print_type(body.type), e);
        Label eff_label = s_.policy.effect_label(body.effect);
        if (!lat_.flows(t->label, eff_label))
          fail(TypeErrorKind::ProtectionFail,
               t->label.name() + " does not flow to the label " + eff_label.name() + " of " +
                   body.effect.str(),
               e);
        d.type = body.type;
        d.effect = join_parts(e, {d.kids[0].effect, body.effect});
        return d;
      }
      case ExprKind::Read:
        d.type = norm(s_.sigma, e);
        d.effect = EffectSet::R();
        return d;
      case ExprKind::Write: {
        const Derivation& k = kid(ctx, e->a);
        expect_equal(norm(s_.sigma, e), k.type, e, "written value");
        d.type = ty::unit();
        d.effect = join_parts(e, {k.effect, EffectSet::W()});
        return d;
      }
      case ExprKind::Throw:
        d.type = norm(e->annot, e);
        d.effect = EffectSet::E();
        return d;
      case ExprKind::TryCatch: {
        kid(ctx, e->a);
        kid(ctx, e->b);
        expect_equal(d.kids[0].type, d.kids[1].type, e, "try branches");
        d.type = d.kids[0].type;
        if (!protects_eff(s_.policy, s_.policy.l_exn(), d.type))
          fail(TypeErrorKind::ProtectionFail,
               s_.policy.l_exn().name() + " is not protected by " + print_type(d.type), e);
        EffectSet p1 = d.kids[0].effect, p2 = d.kids[1].effect;
        // The handler runs only after the body raised.
        join_parts(e, {p1, p2});
        d.effect = (p1 - EffectSet::E()) | p2;
        return d;
      }
      case ExprKind::Fix: {
        Type annot = norm(e->annot, e);
        const Derivation& body = kid(extend(ctx, e->x, annot, true), e->a);
        expect_equal(annot, body.type, e, "fix body");
        d.type = annot;
        d.effect = EffectSet::PNT();
        return d;
      }
      case ExprKind::Let: {
        Type t1 = kid(ctx, e->a).type;
        if (e->annot) expect_equal(norm(e->annot, e), t1, e, "let binder");
        if (lets_) (*lets_)[e.get()] = t1;
        const Derivation& body = kid(extend(ctx, e->x, t1), e->b);
        d.type = body.type;
        d.effect = join_parts(e, {d.kids[0].effect, body.effect});
        return d;
      }
      case ExprKind::LiftE:
      case ExprKind::Seq: break;
    }
    fail(TypeErrorKind::InternalIllTyped, "unknown expression", e);
  }

 private:
  Type norm(const Type& t, const Expr& at) {
    if (!t) fail(TypeErrorKind::StateTypeInvalid, "no state type", at);
    Type out = pc_to_effect_type(s_.policy, t);
    check_type_calculus(out, System::Effect, at);
    return out;
  }

  // Union of the parts, checked for composability in partial mode.
  EffectSet join_parts(const Expr& e, const std::vector<EffectSet>& parts) {
    EffectSet whole;
    for (EffectSet p : parts) whole = whole | p;
    if (!compose(s_.policy, parts, whole)) {
      std::string seq;
      for (EffectSet p : parts) seq += (seq.empty() ? "" : " then ") + p.str();
      fail(TypeErrorKind::EffectCompositionFail, "cannot sequence " + seq, e);
    }
    return whole;
  }

  const Setting& s_;
  const LabelLattice& lat_;
  LetTypes* lets_;
};

Expr fill_lets(const Expr& e, const LetTypes& lets) {
  if (!e) return e;
  Expr a = fill_lets(e->a, lets), b = fill_lets(e->b, lets), c = fill_lets(e->c, lets);
  if (e->kind == ExprKind::Let && !e->annot) {
    auto it = lets.find(e.get());
    if (it == lets.end())
      throw TypeError(TypeErrorKind::InternalIllTyped, "let left unchecked", print_expr(e));
    return ex::let(e->x, a, b, it->second);
  }
  return rebuild(e, a, b, c);
}

}  // namespace

Result<Type> check_pure(const Setting& s, const Context& ctx, const Expr& e) {
  return capture_errors([&] { return SimpleChecker(s, false, nullptr).check(ctx, e); });
}

Result<Type> check_plain(const Setting& s, const Context& ctx, const Expr& e) {
  return capture_errors([&] {
    Context erased;
    for (const auto& b : ctx) erased.push_back({b.name, erase_latent(b.type), b.recursive});
    return SimpleChecker(s, true, nullptr).check(erased, e);
  });
}

Result<Type> check_pc(const Setting& s, const Context& ctx, Label pc, const Expr& e) {
  return capture_errors([&] {
    for (const auto& b : ctx) check_type_calculus(b.type, System::Pc, ex::var(b.name));
    return PcChecker(s, nullptr).check(ctx, pc, e);
  });
}

Result<Derivation> derive_effect(const Setting& s, const Context& ctx, const Expr& e) {
  return capture_errors(
      [&] { return EffectChecker(s, nullptr).derive(pc_to_effect_context(s.policy, ctx), e); });
}

Result<Judgment> infer_effect(const Setting& s, const Context& ctx, const Expr& e) {
  return capture_errors([&] {
    Derivation d = EffectChecker(s, nullptr).derive(pc_to_effect_context(s.policy, ctx), e);
    return Judgment{d.type, d.effect};
  });
}

Result<Type> check_effect(const Setting& s, const Context& ctx, const Expr& e, EffectSet eps) {
  return capture_errors([&] {
    Derivation d = EffectChecker(s, nullptr).derive(pc_to_effect_context(s.policy, ctx), e);
    if (!compose(s.policy, {d.effect}, eps))
      throw TypeError(TypeErrorKind::Mismatch,
                      "effect " + d.effect.str() + " exceeds " + eps.str(), print_expr(e));
    return d.type;
  });
}

std::optional<TypeError> validate_program(const Setting& s, const Program& p) {
  (void)p;
  if (s.mode() != Alphabet::StateExn) return std::nullopt;
  if (!s.sigma) return TypeError(TypeErrorKind::StateTypeInvalid, "state-exn program without a state type");
  if (!is_first_order(s.sigma))
    return TypeError(TypeErrorKind::StateTypeInvalid, "state type is not first-order", print_type(s.sigma));
  auto protects = capture_errors([&] { return protects_pure(s.policy, s.policy.l_state(), s.sigma); });
  if (!protects.ok() || !*protects)
    return TypeError(TypeErrorKind::StateTypeInvalid,
                     "state type does not protect " + s.policy.l_state().name(), print_type(s.sigma));
  if (s.policy.compose_mode() == ComposeMode::GlobalFlow && !s.policy.legal())
    return TypeError(TypeErrorKind::ProtectionFail,
                     "policy premise fails: l_exn " + s.policy.l_exn().name() +
                         " does not flow to l_state " + s.policy.l_state().name());
  return std::nullopt;
}

Result<Expr> annotate_lets(const Setting& s, System sys, const Context& ctx, const Expr& e, Label pc) {
  return capture_errors([&] {
    LetTypes lets;
    switch (sys) {
      case System::Pure: SimpleChecker(s, false, &lets).check(ctx, e); break;
      case System::Plain: SimpleChecker(s, true, &lets).check(ctx, e); break;
      case System::Pc: PcChecker(s, &lets).check(ctx, pc, e); break;
      case System::Effect:
        EffectChecker(s, &lets).derive(pc_to_effect_context(s.policy, ctx), e);
        break;
    }
    return fill_lets(e, lets);
  });
}

}  // namespace sfl
