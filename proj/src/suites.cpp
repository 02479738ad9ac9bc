#include <algorithm>
#include <map>
#include <memory>
#include <set>

#include "sfl/harness.hpp"

namespace sfl {

namespace {

LatticePtr two_point() {
  static const LatticePtr lat = std::make_shared<const LabelLattice>(two_point_lattice());
  return lat;
}

LatticePtr diamond() {
  static const LatticePtr lat = std::make_shared<const LabelLattice>(LabelLattice::build(
      {"Low", "Left", "Right", "High"}, {{"Low", "Left"}, {"Low", "Right"}, {"Left", "High"}, {"Right", "High"}}));
  return lat;
}

Label L(const char* name) { return Label(name); }

Setting state_exn_setting(const LatticePtr& lat, Label l_state, Label l_exn, ComposeMode mode) {
  Setting s;
  s.policy = EffectPolicy::make(lat, Alphabet::StateExn, l_state, l_exn, std::nullopt, mode);
  s.sigma = ty::labeled(l_state, ty::bool_());
  return s;
}

Setting pnt_setting(const LatticePtr& lat, Label l_pnt) {
  Setting s;
  s.policy = EffectPolicy::make(lat, Alphabet::Pnt, lat->top(), lat->top(), l_pnt, ComposeMode::GlobalFlow);
  return s;
}

struct Named {
  std::string name;
  Setting setting;
};

// Legal policies cycled through by the generated-program suites.
std::vector<Named> settings_for(Alphabet a) {
  if (a == Alphabet::StateExn)
    return {
        {"2pt/Pub,Pub", state_exn_setting(two_point(), L("Pub"), L("Pub"), ComposeMode::GlobalFlow)},
        {"2pt/Sec,Pub", state_exn_setting(two_point(), L("Sec"), L("Pub"), ComposeMode::GlobalFlow)},
        {"2pt/Sec,Sec", state_exn_setting(two_point(), L("Sec"), L("Sec"), ComposeMode::GlobalFlow)},
        {"diamond/Left,Low", state_exn_setting(diamond(), L("Left"), L("Low"), ComposeMode::GlobalFlow)},
    };
  return {
      {"2pt/pnt=Pub", pnt_setting(two_point(), L("Pub"))},
      {"2pt/pnt=Sec", pnt_setting(two_point(), L("Sec"))},
      {"diamond/pnt=Left", pnt_setting(diamond(), L("Left"))},
  };
}

GenSystem gen_system(Alphabet a) { return a == Alphabet::StateExn ? GenSystem::PcStateExn : GenSystem::PcPnt; }

const char* mode_name(Alphabet a) { return a == Alphabet::StateExn ? "state-exn" : "pnt"; }

// Calls `body(setting, program, id)` for `count` generated closed programs
// per alphabet, cycling through the legal settings.
template <typename Body>
void for_generated(Report& r, const SuiteOptions& o, Body&& body, bool first_order = false) {
  for (Alphabet a : {Alphabet::StateExn, Alphabet::Pnt}) {
    auto settings = settings_for(a);
    std::vector<ProgramGenerator> gens;
    for (std::size_t k = 0; k < settings.size(); ++k)
      gens.emplace_back(settings[k].setting, gen_system(a), o.seed * 7919 + k + (a == Alphabet::Pnt ? 101 : 0));
    for (std::size_t i = 0; i < o.count; ++i) {
      std::size_t k = i % settings.size();
      std::string id = std::string(mode_name(a)) + "#" + std::to_string(i) + "[" + settings[k].name + "]";
      Generated g;
      try {
        ProgramGenerator& gen = gens[k];
        g = first_order ? gen.generate({}, gen.random_label(), gen.random_type(2, true), o.size)
                        : gen.generate({}, o.size);
      } catch (const GenerationExhausted& err) {
        r.record(id, false, err.what());
        continue;
      }
      body(settings[k].setting, g, id);
    }
  }
}

std::string show(const Generated& g) { return "`" + print_expr(g.expr) + "` at pc " + g.pc.name(); }

}  // namespace

Setting standard_setting(Alphabet mode, ComposeMode compose) {
  if (mode == Alphabet::Pnt) return pnt_setting(two_point(), L("Pub"));
  if (compose == ComposeMode::Partial) return state_exn_setting(two_point(), L("Pub"), L("Sec"), compose);
  return state_exn_setting(two_point(), L("Sec"), L("Pub"), compose);
}

Report suite_capture(const SuiteOptions& o) {
  Report r;
  r.suite = "capture";
  for_generated(r, o, [&](const Setting& s, const Generated& g, const std::string& id) {
    Result<Judgment> j = infer_effect(s, {}, g.expr);
    if (!j.ok()) return r.record(id, false, "effect inference failed on " + show(g) + ": " + j.error().what());
    Result<Captured> c = capture(s, {}, g.expr);
    if (!c.ok()) return r.record(id, false, std::string(c.error().what()) + " on " + show(g));
    Type want = monad_type(s, c->effect, pure_type(s, c->type));
    Result<Type> got = check_pure(s, {}, c->term);
    bool ok = got.ok() && type_equal(*got, want);
    r.record(id, ok, ok ? "" : "captured term has " + (got.ok() ? print_type(*got) : got.error().what()) +
                                   ", want " + print_type(want));
  });
  // Partial composition with l_exn above l_state: the translation may refuse.
  Setting partial = standard_setting(Alphabet::StateExn, ComposeMode::Partial);
  ProgramGenerator gen(partial, GenSystem::PcStateExn, o.seed * 31 + 5);
  for (std::size_t i = 0; i < o.count / 4; ++i) {
    std::string id = "partial#" + std::to_string(i);
    Generated g = gen.generate({}, o.size);
    Result<Judgment> j = infer_effect(partial, {}, g.expr);
    if (!j.ok()) {
      r.skip(id, std::string("no effect typing: ") + to_string(j.error().kind()));
      continue;
    }
    Result<Captured> c = capture(partial, {}, g.expr);
    if (!c.ok() && c.error().kind() == TypeErrorKind::ElaborationUnsupported) {
      r.skip(id, "translation unsupported under this policy");
      continue;
    }
    r.record(id, c.ok(), c.ok() ? "" : std::string(c.error().what()) + " on " + show(g));
  }
  return r;
}

Report suite_simulation(const SuiteOptions& o) {
  Report r;
  r.suite = "simulation";
  for_generated(r, o, [&](const Setting& s, const Generated& g, const std::string& id) {
    std::vector<Expr> states = s.sigma ? enumerate_values(s.sigma, 16) : std::vector<Expr>{};
    Report one = check_simulation(s, g.expr, states, id);
    for (std::string& line : one.lines)
      if (line.find(" FAIL") != std::string::npos) line += " on " + show(g);
    one.suite = r.suite;
    r.merge(one);
  }, true);
  return r;
}

Report suite_lemmas(const SuiteOptions& o) {
  Report r;
  r.suite = "lemmas";
  for_generated(r, o, [&](const Setting& s, const Generated& g, const std::string& id) {
    Result<Judgment> j = infer_effect(s, {}, g.expr);
    if (!j.ok()) return r.record(id, false, "effect inference failed on " + show(g) + ": " + j.error().what());
    EffectSet allowed = gamma(s.policy, g.pc);
    if (!j->effect.subset_of(allowed))
      return r.record(id, false, "effect " + j->effect.str() + " exceeds " + allowed.str() + " for " + show(g));
    const LabelLattice& lat = s.policy.lattice();
    if (s.mode() == Alphabet::Pnt && !lat.flows(g.pc, s.policy.l_pnt())) {
      Outcome out = run(g.expr, std::nullopt);
      if (out.kind != OutcomeKind::Val)
        return r.record(id, false, "expected termination, got " + print_outcome(out) + " for " + show(g));
    }
    r.record(id, true);
  });
  return r;
}

Report suite_pc_bounded(const SuiteOptions& o) {
  Report r;
  r.suite = "pc-bounded";
  for_generated(r, o, [&](const Setting& s, const Generated& g, const std::string& id) {
    Result<Judgment> j = infer_effect(s, {}, g.expr);
    if (!j.ok()) return r.record(id, false, "effect inference failed on " + show(g));
    Label bound = s.policy.effect_label(j->effect);
    bool ok = s.policy.lattice().flows(g.pc, bound);
    r.record(id, ok, ok ? "" : "pc " + g.pc.name() + " does not flow to " + bound.name() + " for " + show(g));
  });
  return r;
}

Report suite_galois(const SuiteOptions& o, const std::vector<LatticePtr>& lattices) {
  Report r;
  r.suite = "galois";
  auto check = [&](const std::string& id, const EffectPolicy& p) {
    GaloisReport g = check_galois(p);
    std::string detail;
    if (!g.pass) {
      const GaloisWitness& w = g.failures.front();
      detail = "witness " + w.label.name() + " / " + w.effects.str();
    }
    r.record(id, g.pass, detail);
  };
  for (std::size_t n = 0; n < lattices.size(); ++n) {
    const LatticePtr& lat = lattices[n];
    std::string name = "lattice" + std::to_string(n);
    for (Label st : lat->elements()) {
      for (Label ex : lat->elements()) {
        if (!lat->flows(ex, st)) continue;
        EffectPolicy p = EffectPolicy::make(lat, Alphabet::StateExn, st, ex, std::nullopt, ComposeMode::GlobalFlow);
        check(name + "/state=" + st.name() + ",exn=" + ex.name(), p);
      }
      EffectPolicy p = EffectPolicy::make(lat, Alphabet::Pnt, lat->top(), lat->top(), st, ComposeMode::GlobalFlow);
      check(name + "/pnt=" + st.name(), p);
    }
  }
  // Random lattices (bottom, top, random edges in between) with random
  // legal policies.
  std::mt19937_64 rng(o.seed);
  auto below = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  for (std::size_t i = 0; i < 100;) {
    int n = 3 + below(6);
    std::vector<std::string> names;
    for (int k = 0; k < n; ++k) names.push_back("r" + std::to_string(k));
    std::vector<std::pair<std::string, std::string>> edges;
    for (int k = 1; k < n - 1; ++k) {
      edges.emplace_back(names[0], names[k]);
      edges.emplace_back(names[k], names[n - 1]);
      for (int j = k + 1; j < n - 1; ++j)
        if (below(3) == 0) edges.emplace_back(names[k], names[j]);
    }
    if (n == 2 || edges.empty()) edges.emplace_back(names[0], names[n - 1]);
    LatticePtr lat;
    try {
      lat = std::make_shared<const LabelLattice>(LabelLattice::build(names, edges));
    } catch (const LoadError&) {
      continue;  // some pair lacks a least upper bound
    }
    const auto& elems = lat->elements();
    Label st = elems[below(static_cast<int>(elems.size()))];
    std::vector<Label> exns;
    for (Label l : elems)
      if (lat->flows(l, st)) exns.push_back(l);
    Label ex = exns[below(static_cast<int>(exns.size()))];
    std::string id = "random#" + std::to_string(i) + ":" + std::to_string(n) + "-elem";
    if (i % 2 == 0) {
      check(id + "/state=" + st.name() + ",exn=" + ex.name(),
            EffectPolicy::make(lat, Alphabet::StateExn, st, ex, std::nullopt, ComposeMode::GlobalFlow));
    } else {
      check(id + "/pnt=" + st.name(),
            EffectPolicy::make(lat, Alphabet::Pnt, lat->top(), lat->top(), st, ComposeMode::GlobalFlow));
    }
    ++i;
  }
  // Negative control: one effect label moved off the meet must be caught.
  EffectPolicy base = standard_setting(Alphabet::StateExn).policy;
  EffectSet victim = EffectSet::W();
  Label wrong = base.lattice().flows(base.effect_label(victim), Label("Pub")) ? Label("Sec") : Label("Pub");
  GaloisReport bad = check_galois(base.with_effect_label(victim, wrong));
  std::string detail = "corrupted " + victim.str() + " -> " + wrong.name();
  if (!bad.failures.empty())
    detail += ", witness " + bad.failures.front().label.name() + " / " + bad.failures.front().effects.str();
  r.record("negative-control", !bad.pass && !bad.failures.empty(), detail);
  return r;
}

Report suite_coproduct_demo(const LabelLattice& base) {
  Report r;
  r.suite = "coproduct";
  auto base_ptr = std::make_shared<const LabelLattice>(base);
  Label pub = base.minimal_elements().front();
  EffectPolicy base_policy =
      EffectPolicy::make(base_ptr, Alphabet::StateExn, base.top(), pub, std::nullopt, ComposeMode::GlobalFlow);

  auto lat = std::make_shared<const LabelLattice>(coproduct_with_top(base));
  EffectPolicy p = EffectPolicy::make(lat, Alphabet::StateExn, inl_label(pub), inl_label(pub), std::nullopt,
                                      ComposeMode::GlobalFlow);
  for (EffectSet eps : all_effect_sets(Alphabet::StateExn)) {
    Label hat = eps.is_empty() ? base.top() : base_policy.effect_label(eps);
    p = p.with_effect_label(eps, inr_label(hat));
  }
  std::unordered_map<std::uint32_t, Label> inject;
  for (Label l : base.elements()) inject[l.id()] = inl_label(l);
  p = p.with_injection(std::move(inject));

  Setting s{p, ty::labeled(inl_label(pub), ty::unit())};
  Label pc = inl_label(pub);
  Expr prog = ex::write(ex::label(pub, ex::unit()));
  std::string text = "`" + print_expr(prog) + "` at pc " + pc.name();

  Result<Type> typed = check_pc(s, {}, pc, prog);
  r.record("typed", typed.ok(), typed.ok() ? text : typed.error().what());
  Result<Judgment> j = infer_effect(s, {}, prog);
  if (!j.ok()) {
    r.record("effect", false, j.error().what());
    return r;
  }
  Label eff = p.effect_label(j->effect);
  bool up = lat->flows(pc, eff), down = lat->flows(eff, pc);
  r.record("incomparable", !up && !down,
           "pc " + pc.name() + ", effect " + j->effect.str() + " labeled " + eff.name() +
               ", pc flows to it: " + (up ? "yes" : "no") + ", it flows to pc: " + (down ? "yes" : "no"));

  // Same program under the ordinary policy on the base lattice.
  Setting plain{base_policy, ty::labeled(base.top(), ty::unit())};
  Expr prog2 = ex::write(ex::label(base.top(), ex::unit()));
  Result<Judgment> j2 = infer_effect(plain, {}, prog2);
  bool bounded = j2.ok() && base.flows(pub, base_policy.effect_label(j2->effect));
  r.record("standard-policy-bounded", bounded,
           j2.ok() ? "pc " + pub.name() + " flows to " + base_policy.effect_label(j2->effect).name()
                   : j2.error().what());
  return r;
}

namespace {

struct NiMode {
  const char* name;
  Observation obs;
  GenSystem gen;
  std::vector<Setting> settings;
};

std::vector<NiMode> ni_modes() {
  return {
      {"pure", Observation::Pure, GenSystem::Pure, {pnt_setting(two_point(), L("Pub"))}},
      {"state-exn",
       Observation::StateExn,
       GenSystem::PcStateExn,
       {state_exn_setting(two_point(), L("Pub"), L("Pub"), ComposeMode::GlobalFlow),
        state_exn_setting(two_point(), L("Sec"), L("Pub"), ComposeMode::GlobalFlow)}},
      {"pnt",
       Observation::Pnt,
       GenSystem::PcPnt,
       {pnt_setting(two_point(), L("Pub")), pnt_setting(two_point(), L("Sec"))}},
  };
}

}  // namespace

Report suite_ni(const SuiteOptions& o) {
  Report r;
  r.suite = "ni";
  const std::string x = "x";
  for (const NiMode& m : ni_modes()) {
    std::map<std::string, std::vector<Expr>> contexts;
    std::vector<ProgramGenerator> gens;
    for (std::size_t k = 0; k < m.settings.size(); ++k) gens.emplace_back(m.settings[k], m.gen, o.seed * 104729 + k);
    for (std::size_t i = 0; i < o.count; ++i) {
      std::size_t k = i % m.settings.size();
      const Setting& s = m.settings[k];
      ProgramGenerator& gen = gens[k];
      const LabelLattice& lat = s.policy.lattice();
      std::string id = std::string(m.name) + "#" + std::to_string(i);
      Label secret = lat.top();
      // A secret input with at least two values.
      Type input;
      std::vector<Expr> values;
      do {
        input = ty::labeled(secret, gen.random_type(1, true));
        values = enumerate_values(input, 16);
      } while (values.size() < 2);
      std::size_t a = std::uniform_int_distribution<std::size_t>(0, values.size() - 1)(gen.rng());
      std::size_t b = (a + 1 + std::uniform_int_distribution<std::size_t>(0, values.size() - 2)(gen.rng())) %
                      values.size();
      Type out = gen.random_type(1, true);
      Label pc = m.obs == Observation::Pure ? lat.minimal_elements().front() : gen.random_label();
      Generated g;
      try {
        g = gen.generate({{x, input, false}}, pc, out, o.size);
      } catch (const GenerationExhausted& err) {
        r.record(id, false, err.what());
        continue;
      }
      Expr e1 = subst(g.expr, x, values[a]), e2 = subst(g.expr, x, values[b]);
      for (Label atk : lat.elements()) {
        if (lat.flows(secret, atk)) continue;
        ContextSpec spec{out, atk, o.context_bound, m.obs};
        std::string key = print_type(out) + "@" + atk.name() + "/" + std::to_string(k);
        auto it = contexts.find(key);
        if (it == contexts.end()) it = contexts.emplace(key, enumerate_contexts(s, spec)).first;
        Verdict v = check_equiv(s, e1, e2, spec, it->second);
        std::string detail = "attacker " + atk.name() + ": " + v.describe();
        if (v.kind == VerdictKind::Distinguished)
          detail += " for `" + print_expr(g.expr) + "` with " + print_expr(values[a]) + " vs " +
                    print_expr(values[b]);
        r.record(id, v.kind != VerdictKind::Distinguished, detail);
      }
    }
  }
  return r;
}

Report suite_captured_seq(const SuiteOptions& o) {
  Report r;
  r.suite = "captured-seq";
  for (Alphabet a : {Alphabet::StateExn, Alphabet::Pnt}) {
    auto settings = settings_for(a);
    std::vector<ProgramGenerator> gens;
    for (std::size_t k = 0; k < settings.size(); ++k)
      gens.emplace_back(settings[k].setting, gen_system(a), o.seed * 15485863 + k);
    for (std::size_t i = 0; i < o.count; ++i) {
      std::size_t k = i % settings.size();
      const Setting& s = settings[k].setting;
      ProgramGenerator& gen = gens[k];
      std::string id = std::string(mode_name(a)) + "#" + std::to_string(i);
      Label pc = gen.random_label();
      Type t1 = gen.random_type(1, true), t2 = gen.random_type(1, true);
      const std::string x = "x";
      Generated p1, p2;
      try {
        p1 = gen.generate({}, pc, t1, o.size / 2);
        p2 = gen.generate({{x, t1, false}}, pc, t2, o.size / 2);
      } catch (const GenerationExhausted& err) {
        r.record(id, false, err.what());
        continue;
      }
      Expr whole = ex::let(x, p1.expr, p2.expr, t1);
      std::string text = "`" + print_expr(whole) + "`";
      Result<Captured> c1 = capture(s, {}, p1.expr);
      Result<Captured> c2 = capture(s, {{x, t1, false}}, p2.expr);
      Result<Captured> c = capture(s, {}, whole);
      if (!c1.ok() || !c2.ok() || !c.ok()) {
        r.record(id, false, "capture failed on " + text);
        continue;
      }
      EffectSet eps = c1->effect | c2->effect;
      if (normalize(eps) != normalize(c->effect)) {
        r.record(id, false, "effect " + c->effect.str() + " is not the union " + eps.str() + " for " + text);
        continue;
      }
      Expr seq = ex::app(sfl::bind(s, eps, t1, t2), ex::app(coerce(s, c1->effect, eps, t1), c1->term),
                         ex::lam(x, t1, ex::app(coerce(s, c2->effect, eps, t2), c2->term)));
      Result<Type> seq_type = check_pure(s, {}, seq);
      if (!seq_type.ok()) {
        r.record(id, false, std::string("sequenced term ill-typed: ") + seq_type.error().what());
        continue;
      }
      Captured composed{seq, t2, eps};
      std::vector<std::optional<Expr>> inputs;
      if (s.sigma) {
        for (const Expr& st : enumerate_values(s.sigma, 16)) inputs.emplace_back(st);
      } else {
        inputs.emplace_back(std::nullopt);
      }
      bool ok = true;
      std::string detail;
      for (const auto& st : inputs) {
        Outcome lhs = run_captured(s, *c, st), rhs = run_captured(s, composed, st);
        if (lhs.kind == OutcomeKind::Timeout && rhs.kind == OutcomeKind::Timeout) continue;
        if (outcome_eq(lhs, rhs) != ValueEq::Equal) {
          ok = false;
          detail = print_outcome(lhs) + " vs " + print_outcome(rhs) + " for " + text;
          break;
        }
      }
      r.record(id, ok, detail);
    }
  }
  return r;
}

Report suite_generator_coverage(const SuiteOptions& o) {
  Report r;
  r.suite = "generator";
  struct Want {
    GenSystem sys;
    Setting setting;
    std::vector<const char*> rules;
  };
  std::vector<const char*> common{"Unit", "Inl", "Inr", "Pair", "Label", "Lam", "Var", "Match", "Unlabel", "App",
                                  "Proj", "Let"};
  std::vector<Want> wants{
      {GenSystem::Pure, pnt_setting(two_point(), L("Pub")), {"Lift", "Seq", "Fix"}},
      {GenSystem::PcStateExn, standard_setting(Alphabet::StateExn), {"Read", "Write", "Throw", "Try"}},
      {GenSystem::PcPnt, standard_setting(Alphabet::Pnt), {"Fix"}},
  };
  for (Want& w : wants) {
    ProgramGenerator gen(w.setting, w.sys, o.seed);
    std::size_t made = 0;
    for (std::size_t i = 0; i < o.count; ++i) {
      try {
        gen.generate({}, o.size);
        ++made;
      } catch (const GenerationExhausted&) {
      }
    }
    std::string name = to_string(w.sys);
    r.record(name + "/accepted", made == o.count, std::to_string(made) + "/" + std::to_string(o.count));
    auto rules = common;
    rules.insert(rules.end(), w.rules.begin(), w.rules.end());
    for (const char* rule : rules) {
      auto it = gen.rule_counts().find(rule);
      std::size_t n = it == gen.rule_counts().end() ? 0 : it->second;
      r.record(name + "/" + rule, n > 0, std::to_string(n));
    }
  }
  return r;
}

}  // namespace sfl
