#include <algorithm>

#include "sfl/harness.hpp"

namespace sfl {

const char* to_string(GenSystem g) {
  switch (g) {
    case GenSystem::Pure: return "pure";
    case GenSystem::PcStateExn: return "pc-state-exn";
    case GenSystem::PcPnt: return "pc-pnt";
  }
  return "?";
}

std::vector<Expr> enumerate_values(const Type& t, std::size_t limit) {
  std::vector<Expr> out;
  switch (t->kind) {
    case TypeKind::Unit: out.push_back(ex::unit()); break;
    case TypeKind::Sum: {
      auto left = enumerate_values(t->a, limit), right = enumerate_values(t->b, limit);
      if (left.empty() || right.empty()) return {};
      for (const Expr& v : left) out.push_back(ex::inl(v, t));
      for (const Expr& v : right) out.push_back(ex::inr(v, t));
      break;
    }
    case TypeKind::Prod: {
      auto left = enumerate_values(t->a, limit), right = enumerate_values(t->b, limit);
      if (left.empty() || right.empty() || left.size() * right.size() > limit) return {};
      for (const Expr& a : left)
        for (const Expr& b : right) out.push_back(ex::pair(a, b));
      break;
    }
    case TypeKind::Labeled:
      for (const Expr& v : enumerate_values(t->a, limit)) out.push_back(ex::label(t->label, v));
      break;
    default: return {};
  }
  if (out.size() > limit) return {};
  return out;
}

ProgramGenerator::ProgramGenerator(Setting setting, GenSystem system, std::uint64_t seed)
    : s_(std::move(setting)), sys_(system), rng_(seed) {}

int ProgramGenerator::pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

bool ProgramGenerator::chance(double p) { return std::uniform_real_distribution<double>(0, 1)(rng_) < p; }

Label ProgramGenerator::random_label() {
  const auto& elems = s_.policy.lattice().elements();
  return elems[pick(static_cast<int>(elems.size()))];
}

std::string ProgramGenerator::binder() { return "a" + std::to_string(next_binder_++); }

bool ProgramGenerator::protects(Label l, const Type& t) const {
  return sys_ == GenSystem::Pure ? protects_pure(s_.policy, l, t) : protects_pc(s_.policy, l, t);
}

bool ProgramGenerator::var_usable(const Binding& b, Label pc) const {
  return !b.recursive || s_.policy.lattice().flows(pc, s_.policy.l_pnt());
}

Type ProgramGenerator::random_type(int depth, bool first_order) {
  bool state = sys_ == GenSystem::PcStateExn && s_.sigma;
  if (depth <= 0) {
    int k = pick(state ? 3 : 2);
    if (k == 0) return ty::unit();
    if (k == 1) return ty::bool_();
    return s_.sigma;
  }
  int k = pick(first_order ? 6 : 8);
  switch (k) {
    case 0: return ty::unit();
    case 1: return ty::bool_();
    case 2: return state ? s_.sigma : ty::labeled(random_label(), ty::bool_());
    case 3:
    case 4: return ty::labeled(random_label(), random_type(depth - 1, first_order));
    case 5:
      return chance(0.5) ? ty::prod(random_type(depth - 1, first_order), random_type(depth - 1, first_order))
                         : ty::sum(random_type(depth - 1, first_order), random_type(depth - 1, first_order));
    default: {
      Type a = random_type(depth - 1, true);
      Type b = random_type(depth - 1, false);
      if (sys_ == GenSystem::Pure) return chance(0.3) ? ty::lift(b) : ty::fun(a, b);
      return ty::fun_pc(a, random_label(), b);
    }
  }
}

Expr ProgramGenerator::gen(const Context& ctx, Label pc, const Type& t, int budget) {
  if (budget <= 1) return leaf(ctx, pc, t);
  if (chance(0.5))
    if (auto e = elim(ctx, pc, t, budget)) return *e;
  if (chance(0.15)) {
    std::vector<const Binding*> vars;
    for (const auto& b : ctx)
      if (type_equal(b.type, t) && var_usable(b, pc)) vars.push_back(&b);
    if (!vars.empty()) {
      count("Var");
      return ex::var(vars[pick(static_cast<int>(vars.size()))]->name);
    }
  }
  return intro(ctx, pc, t, budget);
}

Expr ProgramGenerator::leaf(const Context& ctx, Label pc, const Type& t) {
  std::vector<std::string> vars;
  // Later bindings shadow earlier ones with the same name.
  for (auto it = ctx.rbegin(); it != ctx.rend(); ++it) {
    bool shadowed = false;
    for (auto jt = ctx.rbegin(); jt != it; ++jt) shadowed |= jt->name == it->name;
    if (!shadowed && type_equal(it->type, t) && var_usable(*it, pc)) vars.push_back(it->name);
  }
  if (!vars.empty() && chance(0.5)) {
    count("Var");
    return ex::var(vars[pick(static_cast<int>(vars.size()))]);
  }
  if (sys_ == GenSystem::PcStateExn) {
    if (type_equal(t, s_.sigma) && chance(0.3)) {
      count("Read");
      return ex::read();
    }
    if (s_.policy.lattice().flows(pc, s_.policy.l_exn()) && chance(0.1)) {
      count("Throw");
      return ex::throw_(t);
    }
  }
  return intro(ctx, pc, t, 0);
}

Expr ProgramGenerator::intro(const Context& ctx, Label pc, const Type& t, int budget) {
  int rest = std::max(budget - 1, 0);
  switch (t->kind) {
    case TypeKind::Unit: count("Unit"); return ex::unit();
    case TypeKind::Sum:
      if (chance(0.5)) {
        count("Inl");
        return ex::inl(gen(ctx, pc, t->a, rest), t);
      }
      count("Inr");
      return ex::inr(gen(ctx, pc, t->b, rest), t);
    case TypeKind::Prod: {
      count("Pair");
      int left = rest > 0 ? pick(rest + 1) : 0;
      Expr a = gen(ctx, pc, t->a, left);
      return ex::pair(a, gen(ctx, pc, t->b, rest - left));
    }
    case TypeKind::Labeled: count("Label"); return ex::label(t->label, gen(ctx, pc, t->a, rest));
    case TypeKind::FunPure: {
      count("Lam");
      std::string x = binder();
      Context inner = ctx;
      inner.push_back({x, t->a, false});
      return ex::lam(x, t->a, gen(inner, pc, t->b, rest));
    }
    case TypeKind::FunPc: {
      count("Lam");
      std::string x = binder();
      Context inner = ctx;
      inner.push_back({x, t->a, false});
      return ex::lam_pc(x, t->a, t->label, gen(inner, t->label, t->b, rest));
    }
    case TypeKind::Lift: count("Lift"); return ex::lift(gen(ctx, pc, t->a, rest));
    case TypeKind::FunEff: break;
  }
  throw GenerationExhausted("no introduction form for " + print_type(t));
}

std::optional<Expr> ProgramGenerator::elim(const Context& ctx, Label pc, const Type& t, int budget) {
  const LabelLattice& lat = s_.policy.lattice();
  const bool pure = sys_ == GenSystem::Pure;
  const bool state = sys_ == GenSystem::PcStateExn;
  enum Rule { Match, Unlabel, App, Proj, Let, Write, Try, Fix, Seq };
  std::vector<Rule> rules{Match, Unlabel, App, Proj, Let};
  if (state && t->kind == TypeKind::Unit && lat.flows(pc, s_.policy.l_state())) rules.push_back(Write);
  if (state && protects(s_.policy.l_exn(), t)) rules.push_back(Try);
  if (sys_ == GenSystem::PcPnt && lat.flows(pc, s_.policy.l_pnt())) rules.push_back(Fix);
  if (pure && is_pointed(t)) {
    rules.push_back(Seq);
    if (allow_fix_) rules.push_back(Fix);
  }
  Rule rule = rules[pick(static_cast<int>(rules.size()))];
  int rest = budget - 1;
  auto split = [&](int parts) {
    std::vector<int> out(parts, 0);
    for (int i = 0; i < rest; ++i) ++out[pick(parts)];
    return out;
  };
  auto with = [&](const std::string& x, const Type& xt, bool rec = false) {
    Context inner = ctx;
    inner.push_back({x, xt, rec});
    return inner;
  };
  switch (rule) {
    case Match: {
      count("Match");
      Type scrut = ty::sum(random_type(1, true), random_type(0, true));
      if (chance(0.5)) scrut = ty::bool_();
      auto b = split(3);
      std::string x = binder(), y = binder();
      Expr e0 = gen(ctx, pc, scrut, b[0]);
      Expr e1 = gen(with(x, scrut->a), pc, t, b[1]);
      return ex::match(e0, x, e1, y, gen(with(y, scrut->b), pc, t, b[2]));
    }
    case Unlabel: {
      std::vector<Label> cands;
      for (Label l : lat.elements())
        if (protects(l, t)) cands.push_back(l);
      if (cands.empty()) return std::nullopt;
      count("Unlabel");
      Label l = cands[pick(static_cast<int>(cands.size()))];
      Type inner = random_type(1, true);
      auto b = split(2);
      std::string x = binder();
      Expr e1 = gen(ctx, pc, ty::labeled(l, inner), b[0]);
      return ex::unlabel(e1, x, gen(with(x, inner), pure ? pc : lat.join(pc, l), t, b[1]));
    }
    case App: {
      count("App");
      Type arg = random_type(1, true);
      Type f;
      if (pure) {
        f = ty::fun(arg, t);
      } else {
        auto ups = lat.up_set(pc);
        f = ty::fun_pc(arg, ups[pick(static_cast<int>(ups.size()))], t);
      }
      auto b = split(2);
      Expr fe = gen(ctx, pc, f, b[0]);
      return ex::app(fe, gen(ctx, pc, arg, b[1]));
    }
    case Proj: {
      count("Proj");
      Type other = random_type(1, true);
      if (chance(0.5)) return ex::proj(1, gen(ctx, pc, ty::prod(t, other), rest));
      return ex::proj(2, gen(ctx, pc, ty::prod(other, t), rest));
    }
    case Let: {
      count("Let");
      Type bound = random_type(1, true);
      auto b = split(2);
      std::string x = binder();
      Expr e1 = gen(ctx, pc, bound, b[0]);
      return ex::let(x, e1, gen(with(x, bound), pc, t, b[1]), bound);
    }
    case Write: count("Write"); return ex::write(gen(ctx, pc, s_.sigma, rest));
    case Try: {
      count("Try");
      auto b = split(2);
      Expr e1 = gen(ctx, pc, t, b[0]);
      return ex::try_catch(e1, gen(ctx, pc, t, b[1]));
    }
    case Fix: {
      count("Fix");
      std::string f = binder();
      return ex::fix(f, t, gen(with(f, t, true), pc, t, rest));
    }
    case Seq: {
      count("Seq");
      Type inner = random_type(1, true);
      auto b = split(2);
      std::string x = binder();
      Expr e1 = gen(ctx, pc, ty::lift(inner), b[0]);
      return ex::seq(x, e1, gen(with(x, inner), pc, t, b[1]));
    }
  }
  return std::nullopt;
}

Generated ProgramGenerator::generate(const Context& ctx, Label pc, const Type& want, int size) {
  Type t = want ? want : random_type(2, false);
  Expr e = gen(ctx, pc, t, size);
  if (sys_ == GenSystem::Pure) {
    Result<Type> r = check_pure(s_, ctx, e);
    if (!r.ok()) throw GenerationExhausted(std::string("generated program rejected: ") + r.error().what());
  } else {
    Result<Type> r = check_pc(s_, ctx, pc, e);
    if (!r.ok()) throw GenerationExhausted(std::string("generated program rejected: ") + r.error().what());
  }
  return {e, t, pc};
}

Generated ProgramGenerator::generate(const Context& ctx, int size) {
  Label pc = random_label();
  return generate(ctx, pc, nullptr, size);
}

Generated random_program(std::uint64_t seed, int size, GenSystem system, const Setting& s, const Context& ctx) {
  ProgramGenerator g(s, system, seed);
  return g.generate(ctx, size);
}

}  // namespace sfl
