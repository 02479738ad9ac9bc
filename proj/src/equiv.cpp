#include <algorithm>
#include <map>
#include <set>

#include "sfl/harness.hpp"

namespace sfl {

const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::Equivalent: return "equivalent";
    case VerdictKind::Distinguished: return "distinguished";
    case VerdictKind::Inconclusive: return "inconclusive";
  }
  return "?";
}

std::string Verdict::describe() const {
  std::string out = std::string(to_string(kind)) + " contexts=" + std::to_string(contexts) +
                    " runs=" + std::to_string(runs) + " timeouts=" + std::to_string(timeouts);
  if (kind == VerdictKind::Distinguished) {
    out += " witness=`" + print_expr(witness) + "`";
    if (state) out += " state=`" + print_expr(state) + "`";
    out += " observed " + observation;
  }
  return out;
}

namespace {

// Terms grouped by exact node count. Binders are named by depth so that
// alpha-equivalent contexts print alike.
class ContextEnumerator {
 public:
  ContextEnumerator(const Setting& s, const ContextSpec& spec)
      : s_(s), spec_(spec), pc_system_(spec.observation != Observation::Pure),
        state_(spec.observation == Observation::StateExn && s.sigma) {}

  std::vector<Expr> run() {
    std::vector<Type> targets{ty::labeled(spec_.attacker, ty::bool_())};
    // A lifted hole can only be consumed by seq, whose result is lifted.
    if (mentions_lift(spec_.hole_type)) targets.push_back(ty::lift(targets.front()));
    Context ctx{{kHole, spec_.hole_type, false}};
    std::vector<Expr> out;
    std::set<std::string> seen;
    for (std::size_t n = 1; n <= spec_.size_bound; ++n)
      for (const Type& target : targets)
        for (const Expr& e : terms(target, ctx, static_cast<int>(n), true))
          if (seen.insert(print_expr(e)).second) out.push_back(e);
    return out;
  }

 private:
  struct Neutral {
    Expr expr;
    Type type;
  };

  static std::string key(const Type& t, const Context& ctx, int size, bool hole) {
    std::string k = print_type(t) + "|" + std::to_string(size) + (hole ? "h" : "n");
    for (const auto& b : ctx) k += "|" + b.name + ":" + print_type(b.type);
    return k;
  }

  std::string binder(const Context& ctx) const { return "c" + std::to_string(ctx.size()); }

  Context with(const Context& ctx, const std::string& x, const Type& t) const {
    Context out = ctx;
    out.push_back({x, t, false});
    return out;
  }

  bool protects(Label l, const Type& t) const {
    return pc_system_ ? protects_pc(s_.policy, l, t) : protects_pure(s_.policy, l, t);
  }

  // Variables (the hole only when `hole`), read, projections, applications.
  const std::vector<Neutral>& neutrals(const Context& ctx, int size, bool hole) {
    std::string k = key(ty::unit(), ctx, size, hole) + "#n";
    auto it = neutral_memo_.find(k);
    if (it != neutral_memo_.end()) return it->second;
    std::vector<Neutral> out;
    if (size == 1) {
      for (const auto& b : ctx) {
        bool is_hole = b.name == kHole;
        if (is_hole == hole) out.push_back({ex::var(b.name), b.type});
      }
      if (state_ && !hole) out.push_back({ex::read(), s_.sigma});
    } else {
      for (const Neutral& n : neutrals(ctx, size - 1, hole))
        if (n.type->kind == TypeKind::Prod) {
          out.push_back({ex::proj(1, n.expr), n.type->a});
          out.push_back({ex::proj(2, n.expr), n.type->b});
        }
      for (int fs = 1; fs < size - 1; ++fs) {
        int as = size - 1 - fs;
        for (bool fh : hole_splits(hole)) {
          for (const Neutral& f : neutrals(ctx, fs, fh)) {
            if (!is_function(f.type)) continue;
            for (const Expr& a : terms(f.type->a, ctx, as, hole && !fh))
              out.push_back({ex::app(f.expr, a), f.type->b});
          }
        }
      }
    }
    return neutral_memo_.emplace(k, std::move(out)).first->second;
  }

  static std::vector<bool> hole_splits(bool hole) {
    return hole ? std::vector<bool>{true, false} : std::vector<bool>{false};
  }

  const std::vector<Expr>& terms(const Type& t, const Context& ctx, int size, bool hole) {
    std::string k = key(t, ctx, size, hole);
    auto it = memo_.find(k);
    if (it != memo_.end()) return it->second;
    std::vector<Expr> out;
    if (size >= 1) build(t, ctx, size, hole, out);
    return memo_.emplace(k, std::move(out)).first->second;
  }

  void build(const Type& t, const Context& ctx, int size, bool hole, std::vector<Expr>& out) {
    // Neutral terms of the right type.
    for (const Neutral& n : neutrals(ctx, size, hole))
      if (type_equal(n.type, t)) out.push_back(n.expr);
    if (size == 1) {
      if (!hole) {
        for (const Expr& v : enumerate_values(t, 8)) out.push_back(v);
        if (state_) out.push_back(ex::throw_(t));
      }
      if (t->kind == TypeKind::Unit || enumerate_values(t, 8).size() > 0) return;
    }
    int rest = size - 1;
    // Introductions of compound values; literals already cover closed ones.
    switch (t->kind) {
      case TypeKind::Sum:
        for (const Expr& e : terms(t->a, ctx, rest, hole)) out.push_back(ex::inl(e, t));
        for (const Expr& e : terms(t->b, ctx, rest, hole)) out.push_back(ex::inr(e, t));
        break;
      case TypeKind::Prod:
        for (int l = 1; l < rest; ++l)
          for (bool lh : hole_splits(hole))
            for (const Expr& a : terms(t->a, ctx, l, lh))
              for (const Expr& b : terms(t->b, ctx, rest - l, hole && !lh)) out.push_back(ex::pair(a, b));
        break;
      case TypeKind::Labeled:
        for (const Expr& e : terms(t->a, ctx, rest, hole)) out.push_back(ex::label(t->label, e));
        break;
      case TypeKind::Lift:
        for (const Expr& e : terms(t->a, ctx, rest, hole)) out.push_back(ex::lift(e));
        break;
      case TypeKind::FunPure:
      case TypeKind::FunPc: {
        std::string x = binder(ctx);
        for (const Expr& body : terms(t->b, with(ctx, x, t->a), rest, hole))
          out.push_back(t->kind == TypeKind::FunPc ? ex::lam_pc(x, t->a, t->label, body)
                                                   : ex::lam(x, t->a, body));
        break;
      }
      default: break;
    }
    // Eliminations of neutral scrutinees.
    for (int ns = 1; ns < rest; ++ns) {
      int body = rest - ns;
      for (bool nh : hole_splits(hole)) {
        for (const Neutral& n : neutrals(ctx, ns, nh)) {
          bool left = hole && !nh;
          if (n.type->kind == TypeKind::Sum) {
            std::string x = binder(ctx);
            for (int l = 1; l < body; ++l)
              for (bool lh : hole_splits(left))
                for (const Expr& a : terms(t, with(ctx, x, n.type->a), l, lh))
                  for (const Expr& b : terms(t, with(ctx, x, n.type->b), body - l, left && !lh))
                    out.push_back(ex::match(n.expr, x, a, x, b));
          }
          if (n.type->kind == TypeKind::Labeled && protects(n.type->label, t)) {
            std::string x = binder(ctx);
            for (const Expr& b : terms(t, with(ctx, x, n.type->a), body, left))
              out.push_back(ex::unlabel(n.expr, x, b));
          }
          if (n.type->kind == TypeKind::Lift && t->kind == TypeKind::Lift) {
            std::string x = binder(ctx);
            for (const Expr& b : terms(t, with(ctx, x, n.type->a), body, left))
              out.push_back(ex::seq(x, n.expr, b));
          }
          // Run the neutral for its effects, then continue.
          if (!is_value(n.expr)) {
            std::string x = binder(ctx);
            for (const Expr& b : terms(t, with(ctx, x, n.type), body, left))
              out.push_back(ex::let(x, n.expr, b, n.type));
          }
        }
      }
    }
    if (state_) {
      if (t->kind == TypeKind::Unit)
        for (const Expr& e : terms(s_.sigma, ctx, rest, hole)) out.push_back(ex::write(e));
      if (protects(s_.policy.l_exn(), t))
        for (int l = 1; l < rest; ++l)
          for (bool lh : hole_splits(hole))
            for (const Expr& a : terms(t, ctx, l, lh))
              for (const Expr& b : terms(t, ctx, rest - l, hole && !lh)) out.push_back(ex::try_catch(a, b));
    }
  }

  const Setting& s_;
  ContextSpec spec_;
  bool pc_system_;
  bool state_;
  std::map<std::string, std::vector<Expr>> memo_;
  std::map<std::string, std::vector<Neutral>> neutral_memo_;
};

}  // namespace

std::vector<Expr> enumerate_contexts(const Setting& s, const ContextSpec& spec) {
  return ContextEnumerator(s, spec).run();
}

Expr plug(const Expr& context, const Expr& e) { return subst(context, kHole, e); }

bool context_accepts(const Setting& s, Observation obs, const Expr& program) {
  if (obs == Observation::Pure) return check_pure(s, {}, program).ok();
  // Divergence is reachable from both the pure calculus with Lift and the
  // pc system with fix.
  if (obs == Observation::Pnt && check_pure(s, {}, program).ok()) return true;
  for (Label pc : s.policy.lattice().minimal_elements())
    if (check_pc(s, {}, pc, program).ok()) return true;
  return false;
}

namespace {

enum class Compare { Same, Differ, Timeout };

struct Observed {
  Compare result;
  std::string what;
};

Observed compare_runs(const Setting& s, const ContextSpec& spec, const Outcome& a, const Outcome& b) {
  const LabelLattice& lat = s.policy.lattice();
  auto differ = [&](const std::string& why) {
    return Observed{Compare::Differ, why + ": " + print_outcome(a) + " vs " + print_outcome(b)};
  };
  if (a.kind == OutcomeKind::Stuck || b.kind == OutcomeKind::Stuck) return differ("stuck");
  bool a_to = a.kind == OutcomeKind::Timeout, b_to = b.kind == OutcomeKind::Timeout;
  if (spec.observation == Observation::Pnt && lat.flows(s.policy.l_pnt(), spec.attacker)) {
    if (a_to && b_to) return {Compare::Same, ""};
    if (a_to != b_to) return differ("termination");
  }
  if (a_to || b_to) return {Compare::Timeout, ""};
  if (spec.observation != Observation::StateExn) {
    if (value_eq(a.value, b.value) != ValueEq::Equal) return differ("output");
    return {Compare::Same, ""};
  }
  if (lat.flows(s.policy.l_exn(), spec.attacker)) {
    if (a.kind != b.kind) return differ("output");
    if (a.value && value_eq(a.value, b.value) != ValueEq::Equal) return differ("output");
  }
  if (lat.flows(s.policy.l_state(), spec.attacker) && value_eq(a.state, b.state) != ValueEq::Equal)
    return differ("state");
  return {Compare::Same, ""};
}

}  // namespace

Verdict check_equiv(const Setting& s, const Expr& e1, const Expr& e2, const ContextSpec& spec,
                    const std::vector<Expr>& contexts, std::size_t fuel) {
  Verdict v;
  std::vector<std::optional<Expr>> states;
  if (spec.observation == Observation::StateExn) {
    for (const Expr& st : enumerate_values(s.sigma, 16)) states.emplace_back(st);
  } else {
    states.emplace_back(std::nullopt);
  }
  for (const Expr& c : contexts) {
    Expr p1 = plug(c, e1), p2 = plug(c, e2);
    if (!context_accepts(s, spec.observation, p1) || !context_accepts(s, spec.observation, p2)) continue;
    ++v.contexts;
    for (const auto& st : states) {
      Outcome a = run(p1, st, fuel), b = run(p2, st, fuel);
      v.runs += 2;
      // One-sided timeouts get a longer second chance before they count.
      if ((a.kind == OutcomeKind::Timeout) != (b.kind == OutcomeKind::Timeout)) {
        if (a.kind == OutcomeKind::Timeout) a = run(p1, st, fuel * 10);
        else b = run(p2, st, fuel * 10);
      }
      Observed o = compare_runs(s, spec, a, b);
      if (o.result == Compare::Timeout) ++v.timeouts;
      if (o.result == Compare::Differ) {
        v.kind = VerdictKind::Distinguished;
        v.witness = c;
        v.state = st ? *st : nullptr;
        v.observation = o.what;
        return v;
      }
    }
  }
  // No typed context means the bound says nothing.
  bool vacuous = v.contexts == 0;
  v.kind = v.timeouts > 0 || vacuous ? VerdictKind::Inconclusive : VerdictKind::Equivalent;
  return v;
}

namespace {

Verdict equiv_with(Observation obs, const Setting& s, const Expr& e1, const Expr& e2, Label attacker,
                   const Type& hole_type, std::size_t bound) {
  ContextSpec spec{hole_type, attacker, bound, obs};
  return check_equiv(s, e1, e2, spec, enumerate_contexts(s, spec));
}

}  // namespace

Verdict check_l_equiv(const Setting& s, const Expr& e1, const Expr& e2, Label attacker, const Type& hole_type,
                      std::size_t bound) {
  return equiv_with(Observation::Pure, s, e1, e2, attacker, hole_type, bound);
}

Verdict check_state_exn_equiv(const Setting& s, const Expr& e1, const Expr& e2, Label attacker,
                              const Type& hole_type, std::size_t bound) {
  return equiv_with(Observation::StateExn, s, e1, e2, attacker, hole_type, bound);
}

Verdict check_ts_equiv(const Setting& s, const Expr& e1, const Expr& e2, Label attacker, const Type& hole_type,
                       std::size_t bound) {
  return equiv_with(Observation::Pnt, s, e1, e2, attacker, hole_type, bound);
}

// ---------------------------------------------------------------- simulation

Outcome decode(const Setting& s, EffectSet eps, const Outcome& pure_run, const Expr& state) {
  if (pure_run.kind == OutcomeKind::Timeout || pure_run.kind == OutcomeKind::Stuck) return pure_run;
  Outcome o;
  o.steps = pure_run.steps;
  const Expr& v = pure_run.value;
  auto shape = [&](const char* want) -> DecodeShapeError {
    return DecodeShapeError(std::string("expected ") + want + " for " + eps.str() + ", got " + print_expr(v));
  };
  EffectSet n = normalize(eps);
  if (s.mode() == Alphabet::Pnt) {
    o.kind = OutcomeKind::Val;
    if (n.is_empty()) {
      o.value = v;
    } else {
      if (v->kind != ExprKind::LiftE) throw shape("lift");
      o.value = v->a;
    }
    return o;
  }
  auto with_state = [&](const Expr& value, const Expr& st) {
    o.kind = OutcomeKind::ValWithState;
    o.value = value;
    o.state = st;
    return o;
  };
  auto exn = [&](const Expr& labeled, const Expr& st) {
    if (labeled->kind != ExprKind::LabelE) throw shape("a labeled sum");
    const Expr& inner = labeled->a;
    if (inner->kind == ExprKind::Inl) {
      o.kind = OutcomeKind::Thrown;
      o.state = st;
      return o;
    }
    if (inner->kind == ExprKind::Inr) return with_state(inner->a, st);
    throw shape("an injection");
  };
  if (n.is_empty() || n == EffectSet::R()) return with_state(v, state);
  if (n == EffectSet::E() || n == EffectSet::RE()) return exn(v, state);
  if (v->kind != ExprKind::Pair) throw shape("a pair");
  if (n == EffectSet::RW()) return with_state(v->a, v->b);
  if (n == EffectSet::RWE()) return exn(v->a, v->b);
  throw shape("a known monad");
}

Outcome run_captured(const Setting& s, const Captured& c, const std::optional<Expr>& state, std::size_t fuel) {
  Expr term = c.term;
  if (normalize(c.effect).has(EffectSet::kR)) term = ex::app(term, *state);
  Outcome o = run(term, std::nullopt, fuel);
  return decode(s, c.effect, o, state ? *state : nullptr);
}

void Report::record(const std::string& id, bool ok, const std::string& detail) {
  ++cases;
  if (!ok) ++failures;
  if (!ok || lines.size() < 10000)
    lines.push_back(suite + " " + id + " " + (ok ? "pass" : "FAIL") + (detail.empty() ? "" : " " + detail));
}

void Report::skip(const std::string& id, const std::string& why) {
  ++skipped;
  if (lines.size() < 10000) lines.push_back(suite + " " + id + " skip " + why);
}

void Report::merge(const Report& other) {
  cases += other.cases;
  failures += other.failures;
  skipped += other.skipped;
  lines.insert(lines.end(), other.lines.begin(), other.lines.end());
}

std::string Report::summary() const {
  return suite + ": " + std::to_string(cases) + " cases, " + std::to_string(failures) + " failures, " +
         std::to_string(skipped) + " skipped";
}

Report check_simulation(const Setting& s, const Expr& e, const std::vector<Expr>& states, const std::string& id) {
  Report r;
  r.suite = "simulation";
  Result<Captured> c = capture(s, {}, e);
  if (!c.ok()) {
    r.record(id, false, std::string("capture failed: ") + c.error().what());
    return r;
  }
  std::vector<std::optional<Expr>> inputs;
  if (s.mode() == Alphabet::StateExn) {
    for (const Expr& st : states) inputs.emplace_back(st);
  } else {
    inputs.emplace_back(std::nullopt);
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto& st = inputs[i];
    std::string case_id = id + (st ? "/s" + std::to_string(i) : "");
    Outcome effectful = run(e, st);
    Outcome pure;
    try {
      pure = run_captured(s, *c, st);
      if ((effectful.kind == OutcomeKind::Timeout) != (pure.kind == OutcomeKind::Timeout)) {
        effectful = run(e, st, kDefaultFuel * 10);
        pure = run_captured(s, *c, st, kDefaultFuel * 10);
      }
    } catch (const DecodeShapeError& err) {
      r.record(case_id, false, err.what());
      continue;
    }
    if (effectful.kind == OutcomeKind::Timeout && pure.kind == OutcomeKind::Timeout) {
      r.record(case_id, true, "both diverge within fuel");
      continue;
    }
    ValueEq eq = outcome_eq(effectful, pure);
    if (eq == ValueEq::NotComparable) {
      r.skip(case_id, "function-valued result");
      continue;
    }
    r.record(case_id, eq == ValueEq::Equal,
             eq == ValueEq::Equal ? "" : print_outcome(effectful) + " vs " + print_outcome(pure));
  }
  return r;
}

}  // namespace sfl
