#include "sfl/elaborate.hpp"

#include <functional>

namespace sfl {

namespace {

const EffectSet kR = EffectSet::R(), kE = EffectSet::E(), kRW = EffectSet::RW(),
                kRE = EffectSet::RE(), kRWE = EffectSet::RWE(), kPNT = EffectSet::PNT();

[[noreturn]] void no_monad(EffectSet eps) {
  throw TypeError(TypeErrorKind::InvalidCoercion, "no monad for " + eps.str());
}

Type sigma_of(const Setting& s) {
  if (!s.sigma) throw TypeError(TypeErrorKind::StateTypeInvalid, "state monad without a state type");
  return s.sigma;
}

Label exn_label(const Setting& s) { return s.policy.l_exn(); }

// unit + t, labeled at l_exn.
Type exn_type(const Setting& s, const Type& t) {
  return ty::labeled(exn_label(s), ty::sum(ty::unit(), t));
}

Expr var(const std::string& x) { return ex::var(x); }

// f x, except that the identity combinator is dropped.
Expr call(const Expr& f, const Expr& x) {
  if (!f) return x;
  return ex::app(f, x);
}

}  // namespace

EffectSet normalize(EffectSet eps) {
  return eps.has(EffectSet::kW) ? eps | EffectSet::R() : eps;
}

Type monad_type(const Setting& s, EffectSet eps, const Type& t) {
  EffectSet n = normalize(eps);
  if (n.is_empty()) return t;
  if (n == kR) return ty::fun(sigma_of(s), t);
  if (n == kE) return exn_type(s, t);
  if (n == kRW) return ty::fun(sigma_of(s), ty::prod(t, sigma_of(s)));
  if (n == kRE) return ty::fun(sigma_of(s), exn_type(s, t));
  if (n == kRWE) return ty::fun(sigma_of(s), ty::prod(exn_type(s, t), sigma_of(s)));
  if (n == kPNT) return ty::lift(t);
  no_monad(eps);
}

Type pure_type(const Setting& s, const Type& t) {
  switch (t->kind) {
    case TypeKind::Unit: return t;
    case TypeKind::Sum: return ty::sum(pure_type(s, t->a), pure_type(s, t->b));
    case TypeKind::Prod: return ty::prod(pure_type(s, t->a), pure_type(s, t->b));
    case TypeKind::Labeled: return ty::labeled(t->label, pure_type(s, t->a));
    case TypeKind::FunPc: return pure_type(s, pc_to_effect_type(s.policy, t));
    case TypeKind::FunEff: return ty::fun(pure_type(s, t->a), monad_type(s, t->eff, pure_type(s, t->b)));
    case TypeKind::FunPure:
    case TypeKind::Lift:
      throw TypeError(TypeErrorKind::WrongCalculus, "pure type in an effectful program", print_type(t));
  }
  return t;
}

Context pure_context(const Setting& s, const Context& ctx) {
  Context out;
  for (const auto& b : ctx) {
    Type t = pure_type(s, b.type);
    out.push_back({b.name, b.recursive ? ty::lift(t) : t, false});
  }
  return out;
}

Expr eta(const Setting& s, EffectSet eps, const Type& t) {
  EffectSet n = normalize(eps);
  std::string v = fresh_name("v");
  Expr body;
  auto ok = [&](const Expr& x) { return ex::label(exn_label(s), ex::inr(x, ty::sum(ty::unit(), t))); };
  if (n.is_empty()) {
    body = var(v);
  } else if (n == kPNT) {
    body = ex::lift(var(v));
  } else if (n == kE) {
    body = ok(var(v));
  } else {
    std::string st = fresh_name("s");
    Expr inner;
    if (n == kR) inner = var(v);
    else if (n == kRW) inner = ex::pair(var(v), var(st));
    else if (n == kRE) inner = ok(var(v));
    else if (n == kRWE) inner = ex::pair(ok(var(v)), var(st));
    else no_monad(eps);
    body = ex::lam(st, sigma_of(s), inner);
  }
  return ex::lam(v, t, body);
}

Expr bind(const Setting& s, EffectSet eps, const Type& t1, const Type& t2) {
  EffectSet n = normalize(eps);
  std::string m = fresh_name("m"), f = fresh_name("f");
  Type mt1 = monad_type(s, n, t1);
  Type ft = ty::fun(t1, monad_type(s, n, t2));
  Type sum2 = ty::sum(ty::unit(), t2);
  // Re-raise: label[X](inl u).
  auto reraise = [&](const std::string& u) { return ex::label(exn_label(s), ex::inl(var(u), sum2)); };
  Expr body;
  if (n.is_empty()) {
    body = ex::app(var(f), var(m));
  } else if (n == kPNT) {
    std::string x = fresh_name("x");
    body = ex::seq(x, var(m), ex::app(var(f), var(x)));
  } else if (n == kE) {
    std::string r = fresh_name("r"), u = fresh_name("u"), x = fresh_name("x");
    body = ex::unlabel(var(m), r, ex::match(var(r), u, reraise(u), x, ex::app(var(f), var(x))));
  } else {
    std::string st = fresh_name("s");
    Expr inner;
    if (n == kR) {
      inner = ex::app(var(f), ex::app(var(m), var(st)), var(st));
    } else if (n == kRW) {
      std::string p = fresh_name("p");
      Expr use = ex::app(var(f), ex::proj(1, var(p)), ex::proj(2, var(p)));
      inner = ex::app(ex::lam(p, ty::prod(t1, sigma_of(s)), use), ex::app(var(m), var(st)));
    } else if (n == kRE) {
      std::string r = fresh_name("r"), u = fresh_name("u"), x = fresh_name("x");
      inner = ex::unlabel(ex::app(var(m), var(st)), r,
                          ex::match(var(r), u, reraise(u), x, ex::app(var(f), var(x), var(st))));
    } else if (n == kRWE) {
      std::string p = fresh_name("p"), r = fresh_name("r"), u = fresh_name("u"), x = fresh_name("x");
      Expr after = ex::proj(2, var(p));
      Expr handled = ex::unlabel(
          ex::proj(1, var(p)), r,
          ex::match(var(r), u, ex::pair(reraise(u), after), x, ex::app(var(f), var(x), after)));
      inner = ex::app(ex::lam(p, ty::prod(exn_type(s, t1), sigma_of(s)), handled),
                      ex::app(var(m), var(st)));
    } else {
      no_monad(eps);
    }
    body = ex::lam(st, sigma_of(s), inner);
  }
  return ex::lam(m, mt1, ex::lam(f, ft, body));
}

namespace {

// Null for the identity coercion.
Expr coerce_or_null(const Setting& s, EffectSet from, EffectSet to, const Type& t) {
  EffectSet a = normalize(from), b = normalize(to);
  if (a == b) return nullptr;
  if (a.is_empty()) return eta(s, b, t);
  std::string m = fresh_name("m");
  auto lam_m = [&](const Expr& body) { return ex::lam(m, monad_type(s, a, t), body); };
  auto ok = [&](const Expr& x) { return ex::label(exn_label(s), ex::inr(x, ty::sum(ty::unit(), t))); };
  std::string st = fresh_name("s");
  auto lam_s = [&](const Expr& body) { return ex::lam(st, sigma_of(s), body); };
  Expr ms = ex::app(var(m), var(st));
  if (a == kR && b == kRW) return lam_m(lam_s(ex::pair(ms, var(st))));
  if (a == kR && b == kRE) return lam_m(lam_s(ok(ms)));
  if (a == kR && b == kRWE) return lam_m(lam_s(ex::pair(ok(ms), var(st))));
  if (a == kE && b == kRE) return lam_m(lam_s(var(m)));
  if (a == kE && b == kRWE) return lam_m(lam_s(ex::pair(var(m), var(st))));
  if (a == kRE && b == kRWE) return lam_m(lam_s(ex::pair(ms, var(st))));
  if (a == kRW && b == kRWE) {
    std::string p = fresh_name("p");
    Expr body = ex::pair(ok(ex::proj(1, var(p))), ex::proj(2, var(p)));
    return lam_m(lam_s(ex::app(ex::lam(p, ty::prod(t, sigma_of(s)), body), ms)));
  }
  throw TypeError(TypeErrorKind::InvalidCoercion, "no coercion from " + from.str() + " to " + to.str());
}

}  // namespace

Expr coerce(const Setting& s, EffectSet from, EffectSet to, const Type& t) {
  Expr c = coerce_or_null(s, from, to, t);
  if (c) return c;
  std::string m = fresh_name("m");
  return ex::lam(m, monad_type(s, from, t), var(m));
}

namespace {

struct Piece {
  Expr term;
  EffectSet effect;
  Type type;  // pure type of the carried value
};

class Capturer {
 public:
  explicit Capturer(const Setting& s) : s_(s) {}

  Expr go(const Expr& e, const Derivation& d) {
    const EffectSet eps = d.effect;
    const Type tau = pure_type(s_, d.type);
    auto piece = [&](std::size_t i, const Expr& sub) {
      return Piece{go(sub, d.kids[i]), d.kids[i].effect, pure_type(s_, d.kids[i].type)};
    };
    auto unit_eta = [&](const Expr& x) { return call(eta_or_null(eps, tau), x); };
    switch (e->kind) {
      case ExprKind::Var: return e;
      case ExprKind::Unit: return e;
      case ExprKind::Pair:
        return sequence(eps, {piece(0, e->a), piece(1, e->b)}, tau,
                        [&](const std::vector<Expr>& v) { return unit_eta(ex::pair(v[0], v[1])); });
      case ExprKind::Proj:
        return sequence(eps, {piece(0, e->a)}, tau,
                        [&](const std::vector<Expr>& v) { return unit_eta(ex::proj(e->index, v[0])); });
      case ExprKind::Inl:
      case ExprKind::Inr:
        return sequence(eps, {piece(0, e->a)}, tau, [&](const std::vector<Expr>& v) {
          return unit_eta(e->kind == ExprKind::Inl ? ex::inl(v[0], tau) : ex::inr(v[0], tau));
        });
      case ExprKind::LabelE:
        return sequence(eps, {piece(0, e->a)}, tau,
                        [&](const std::vector<Expr>& v) { return unit_eta(ex::label(e->label, v[0])); });
      case ExprKind::Match: {
        Expr left = up(piece(1, e->b), eps, tau), right = up(piece(2, e->c), eps, tau);
        return sequence(eps, {piece(0, e->a)}, tau, [&](const std::vector<Expr>& v) {
          return ex::match(v[0], e->x, left, e->y, right);
        });
      }
      case ExprKind::Lam: {
        Type arg = pure_type(s_, d.type->a);
        Type res = pure_type(s_, d.type->b);
        return ex::lam(e->x, arg, up(piece(0, e->a), d.type->eff, res));
      }
      case ExprKind::App: {
        EffectSet latent = d.kids[0].type->eff;
        return sequence(eps, {piece(0, e->a), piece(1, e->b)}, tau, [&](const std::vector<Expr>& v) {
          return call(coerce_or_null(s_, latent, eps, tau), ex::app(v[0], v[1]));
        });
      }
      case ExprKind::Unlabel: {
        // The unlabel sits at the body's own effect, which its label flows to.
        Piece body = piece(1, e->b);
        return sequence(eps, {piece(0, e->a)}, tau, [&](const std::vector<Expr>& v) {
          return call(coerce_or_null(s_, body.effect, eps, tau), ex::unlabel(v[0], e->x, body.term));
        });
      }
      case ExprKind::Read: {
        std::string st = fresh_name("s");
        return ex::lam(st, sigma_of(s_), var(st));
      }
      case ExprKind::Write:
        return sequence(eps, {piece(0, e->a)}, tau, [&](const std::vector<Expr>& v) {
          std::string st = fresh_name("s");
          Expr put = ex::lam(st, sigma_of(s_), ex::pair(ex::unit(), v[0]));
          return call(coerce_or_null(s_, EffectSet::RW(), eps, tau), put);
        });
      case ExprKind::Throw:
        return ex::label(exn_label(s_), ex::inl(ex::unit(), ty::sum(ty::unit(), tau)));
      case ExprKind::TryCatch: return try_catch(e, d, tau);
      case ExprKind::Fix:
        return ex::fix(e->x, ty::lift(tau), up(piece(0, e->a), EffectSet::PNT(), tau));
      case ExprKind::Let: {
        Piece body = piece(1, e->b);
        Type bound = pure_type(s_, d.kids[0].type);
        return sequence(eps, {piece(0, e->a)}, tau, [&](const std::vector<Expr>& v) {
          return call(coerce_or_null(s_, body.effect, eps, tau),
                       ex::app(ex::lam(e->x, bound, body.term), v[0]));
        });
      }
      case ExprKind::LiftE:
      case ExprKind::Seq: break;
    }
    throw TypeError(TypeErrorKind::WrongCalculus, "no translation", print_expr(e));
  }

 private:
  Expr eta_or_null(EffectSet eps, const Type& t) {
    return normalize(eps).is_empty() ? nullptr : eta(s_, eps, t);
  }

  // Coerces a piece up to `eps`.
  Expr up(const Piece& p, EffectSet eps, const Type& t) {
    return call(coerce_or_null(s_, p.effect, eps, t), p.term);
  }

  // Binds the effectful pieces in order, in monad `eps`, and hands the
  // resulting variables to `k`. Pure pieces are passed through unbound.
  Expr sequence(EffectSet eps, const std::vector<Piece>& pieces, const Type& result,
                const std::function<Expr(const std::vector<Expr>&)>& k) {
    std::vector<Expr> args;
    std::vector<std::string> names;
    for (const Piece& p : pieces) {
      if (p.effect.is_empty()) {
        args.push_back(p.term);
        names.emplace_back();
      } else {
        names.push_back(fresh_name("x"));
        args.push_back(var(names.back()));
      }
    }
    Expr body = k(args);
    for (std::size_t i = pieces.size(); i-- > 0;) {
      if (names[i].empty()) continue;
      const Piece& p = pieces[i];
      body = ex::app(bind(s_, eps, p.type, result), up(p, eps, p.type), ex::lam(names[i], p.type, body));
    }
    return body;
  }

  Expr try_catch(const Expr& e, const Derivation& d, const Type& tau) {
    const EffectSet eps = d.effect;
    Piece block{go(e->a, d.kids[0]), d.kids[0].effect, tau};
    Piece handler_piece{go(e->b, d.kids[1]), d.kids[1].effect, tau};
    EffectSet shape = normalize(block.effect | EffectSet::E());
    Expr m = up(block, shape, tau);
    Expr handler = up(handler_piece, eps, tau);
    std::string r = fresh_name("r"), u = fresh_name("u"), v = fresh_name("v");
    auto success = [&]() { return call(eta_or_null(eps, tau), var(v)); };
    if (shape == kE) return ex::unlabel(m, r, ex::match(var(r), u, handler, v, success()));
    std::string st = fresh_name("s");
    if (shape == kRE) {
      Expr inner = ex::unlabel(ex::app(m, var(st)), r,
                               ex::match(var(r), u, ex::app(handler, var(st)), v,
                                         ex::app(success(), var(st))));
      return ex::lam(st, sigma_of(s_), inner);
    }
    if (shape == kRWE) {
      std::string p = fresh_name("p");
      Expr after = ex::proj(2, var(p));
      Expr handled = ex::unlabel(
          ex::proj(1, var(p)), r,
          ex::match(var(r), u, ex::app(handler, after), v, ex::app(success(), after)));
      return ex::lam(st, sigma_of(s_),
                     ex::app(ex::lam(p, ty::prod(exn_type(s_, tau), sigma_of(s_)), handled),
                             ex::app(m, var(st))));
    }
    no_monad(shape);
  }

  const Setting& s_;
};

}  // namespace

Result<Captured> capture(const Setting& s, const Context& ctx, const Expr& e) {
  return capture_errors([&]() -> Captured {
    Context effect_ctx = pc_to_effect_context(s.policy, ctx);
    Derivation d = derive_effect(s, effect_ctx, e).value();
    Expr term = Capturer(s).go(e, d);
    Type want = monad_type(s, d.effect, pure_type(s, d.type));
    Result<Type> got = check_pure(s, pure_context(s, effect_ctx), term);
    if (!got.ok() || !type_equal(*got, want)) {
      std::string why = got.ok() ? "translation has type " + print_type(*got) + ", expected " + print_type(want)
                                 : std::string("translation rejected: ") + got.error().what();
      // Outside legal policies the pure monads need not protect l_exn.
      bool legal = s.mode() == Alphabet::Pnt || s.policy.lattice().flows(s.policy.l_exn(), s.policy.l_state());
      throw TypeError(legal ? TypeErrorKind::InternalIllTyped : TypeErrorKind::ElaborationUnsupported, why,
                      print_expr(e));
    }
    return Captured{term, d.type, d.effect};
  });
}

Expr map_label(Label l, const Expr& p, const std::string& x) {
  std::string inner = fresh_name(x);
  return ex::unlabel(ex::var(x), inner, ex::label(l, subst(p, x, ex::var(inner))));
}

}  // namespace sfl
