// Command-line front end: check, eval, translate, equiv, verify, demo.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "sfl/harness.hpp"

#ifndef SFL_LATTICE_DIR
#define SFL_LATTICE_DIR "lattices"
#endif

using namespace sfl;

namespace {

constexpr int kOk = 0, kFail = 1, kUsage = 2;

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string lattice_file;
  std::vector<std::string> policy;
};

LatticePtr load(const Globals& g) {
  if (g.lattice_file.empty()) return std::make_shared<const LabelLattice>(two_point_lattice());
  return std::make_shared<const LabelLattice>(load_lattice_file(g.lattice_file));
}

PolicySpec overrides(const Globals& g) {
  PolicySpec p;
  for (const std::string& kv : g.policy) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw Usage("--policy expects KEY=VALUE, got '" + kv + "'");
    std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
    if (k == "lState") p.l_state = v;
    else if (k == "lExn") p.l_exn = v;
    else if (k == "lPnt") p.l_pnt = v;
    else if (k == "mode") p.mode = v;
    else throw Usage("unknown policy key '" + k + "'");
  }
  return p;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Usage("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct Loaded {
  LatticePtr lat;
  Program program;
  Setting setting;
  Context ctx;
};

Loaded load_program(const Globals& g, const std::string& path) {
  Loaded l;
  l.lat = load(g);
  l.program = parse_program(slurp(path), l.lat.get());
  l.setting = setting_for(l.lat, l.program, overrides(g));
  l.ctx = make_context(l.program.context);
  return l;
}

Label parse_label(const LabelLattice& lat, const std::string& name) {
  Label l(name);
  if (!lat.contains(l)) throw Usage("unknown label '" + name + "'");
  return l;
}

int reject(const TypeError& e) {
  std::cout << "reject " << to_string(e.kind()) << ": " << e.detail();
  if (!e.where().empty()) std::cout << " in `" << e.where() << "`";
  std::cout << "\n";
  return kFail;
}

// ---------------------------------------------------------------- check

struct CheckArgs {
  std::string system = "pc";
  std::string pc, effect, file;
};

int cmd_check(const Globals& g, const CheckArgs& a) {
  Loaded l = load_program(g, a.file);
  const Setting& s = l.setting;
  const Expr& e = l.program.body;
  // The policy premises only concern the security systems.
  bool secure = a.system == "pc" || a.system == "effect";
  if (secure)
    if (auto err = validate_program(s, l.program)) return reject(*err);
  if (!secure) {
    Result<Type> t = a.system == "pure" ? check_pure(s, l.ctx, e) : check_plain(s, l.ctx, e);
    if (!t.ok()) return reject(t.error());
    std::cout << "accept " << print_type(*t) << "\n";
    return kOk;
  }
  if (a.system == "pc") {
    Label pc = a.pc.empty() ? l.lat->minimal_elements().front() : parse_label(*l.lat, a.pc);
    Result<Type> t = check_pc(s, l.ctx, pc, e);
    if (!t.ok()) return reject(t.error());
    std::cout << "accept " << print_type(*t) << " at pc " << pc.name() << "\n";
    return kOk;
  }
  if (!a.effect.empty()) {
    auto eps = parse_effect_set(a.effect);
    if (!eps) throw Usage("bad effect set '" + a.effect + "'");
    Result<Type> t = check_effect(s, l.ctx, e, *eps);
    if (!t.ok()) return reject(t.error());
    std::cout << "accept " << print_type(*t) << " ! " << eps->str() << "\n";
    return kOk;
  }
  Result<Judgment> j = infer_effect(s, l.ctx, e);
  if (!j.ok()) return reject(j.error());
  std::cout << "accept " << print_type(j->type) << " ! " << j->effect.str() << "\n";
  return kOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string state, file;
  std::size_t fuel = kDefaultFuel;
};

int cmd_eval(const Globals& g, const EvalArgs& a) {
  Loaded l = load_program(g, a.file);
  if (!l.ctx.empty()) throw Usage("eval needs a closed program");
  std::optional<Expr> state;
  if (l.program.mode == Alphabet::StateExn) {
    if (!a.state.empty()) {
      state = parse_expr(a.state, l.lat.get(), l.program.sigma);
    } else {
      auto values = enumerate_values(l.program.sigma);
      if (values.empty()) throw Usage("--state is required for this sigma");
      state = values.front();
    }
  } else if (!a.state.empty()) {
    throw Usage("--state only applies to state-exn programs");
  }
  Outcome o = run(l.program.body, state, a.fuel);
  std::cout << print_outcome(o) << " steps " << o.steps << "\n";
  if (o.kind == OutcomeKind::Stuck) std::cout << "reason " << o.reason << "\n";
  return o.kind == OutcomeKind::Timeout || o.kind == OutcomeKind::Stuck ? kFail : kOk;
}

// ---------------------------------------------------------------- translate

int cmd_translate(const Globals& g, const std::string& file) {
  Loaded l = load_program(g, file);
  if (auto err = validate_program(l.setting, l.program)) return reject(*err);
  Result<Captured> c = capture(l.setting, l.ctx, l.program.body);
  if (!c.ok()) return reject(c.error());
  std::cout << "term " << print_expr(c->term) << "\n";
  std::cout << "type " << print_type(monad_type(l.setting, c->effect, pure_type(l.setting, c->type))) << "\n";
  std::cout << "effect " << c->effect.str() << "\n";
  return kOk;
}

// ---------------------------------------------------------------- equiv

struct EquivArgs {
  std::string def, attacker, file1, file2;
  std::size_t bound = 7;
  std::size_t fuel = kDefaultFuel;
};

Type closed_type(const Loaded& l, Observation obs) {
  if (!l.ctx.empty()) throw Usage("equiv needs closed programs");
  if (obs == Observation::Pure) return check_pure(l.setting, {}, l.program.body).value();
  std::optional<TypeError> last;
  for (Label pc : l.lat->minimal_elements()) {
    Result<Type> t = check_pc(l.setting, {}, pc, l.program.body);
    if (t.ok()) return *t;
    last = t.error();
  }
  throw *last;
}

int cmd_equiv(const Globals& g, const EquivArgs& a) {
  Observation obs;
  if (a.def == "2.1" || a.def == "pure") obs = Observation::Pure;
  else if (a.def == "3.2" || a.def == "state-exn") obs = Observation::StateExn;
  else if (a.def == "4.1" || a.def == "pnt") obs = Observation::Pnt;
  else throw Usage("--def must be pure, state-exn or pnt (or 2.1, 3.2, 4.1)");
  // Only the typing of the programs and contexts matters here, not the
  // program-level policy premises: an illegal policy is how leaks are shown.
  Loaded l1 = load_program(g, a.file1), l2 = load_program(g, a.file2);
  Type t1, t2;
  try {
    t1 = closed_type(l1, obs);
    t2 = closed_type(l2, obs);
  } catch (const TypeError& e) {
    return reject(e);
  }
  if (!type_equal(t1, t2))
    throw Usage("programs have different types: " + print_type(t1) + " and " + print_type(t2));
  ContextSpec spec{t1, parse_label(*l1.lat, a.attacker), a.bound, obs};
  std::vector<Expr> contexts = enumerate_contexts(l1.setting, spec);
  Verdict v = check_equiv(l1.setting, l1.program.body, l2.program.body, spec, contexts, a.fuel);
  std::cout << v.describe() << "\n";
  return v.kind == VerdictKind::Equivalent ? kOk : kFail;
}

// ---------------------------------------------------------------- verify / demo

struct VerifyArgs {
  std::string suite;
  std::uint64_t seed = 1;
  std::size_t count = 0;  // 0: suite default
  std::string lattice_dir = SFL_LATTICE_DIR;
};

std::vector<LatticePtr> shipped_lattices(const std::string& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.path().extension() == ".lat") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<LatticePtr> out;
  for (const auto& f : files) out.push_back(std::make_shared<const LabelLattice>(load_lattice_file(f.string())));
  return out;
}

int print_report(const Report& r) {
  for (const std::string& line : r.lines) std::cout << line << "\n";
  std::cout << r.summary() << "\n";
  return r.pass() ? kOk : kFail;
}

int cmd_verify(const Globals& g, const VerifyArgs& a) {
  SuiteOptions o;
  o.seed = a.seed;
  auto count = [&](std::size_t def) { return a.count ? a.count : def; };
  const std::string& s = a.suite;
  if (s == "ni") return o.count = count(100), print_report(suite_ni(o));
  if (s == "lemmas") return o.count = count(1000), print_report(suite_lemmas(o));
  if (s == "simulation") return o.count = count(1000), print_report(suite_simulation(o));
  if (s == "capture") return o.count = count(1000), print_report(suite_capture(o));
  if (s == "pcbound") return o.count = count(1000), print_report(suite_pc_bounded(o));
  if (s == "captured-seq") return o.count = count(500), print_report(suite_captured_seq(o));
  if (s == "generator") return o.count = count(1000), print_report(suite_generator_coverage(o));
  if (s == "galois") {
    auto lattices = shipped_lattices(a.lattice_dir);
    if (!g.lattice_file.empty()) lattices.push_back(load(g));
    return print_report(suite_galois(o, lattices));
  }
  if (s == "coproduct-demo") return print_report(suite_coproduct_demo(*load(g)));
  throw Usage("unknown suite '" + s + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Security-typed effects: checkers, translation, evaluation and verification"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--lattice", g.lattice_file, "Lattice description file (default: Pub < Sec)");
  app.add_option("--policy", g.policy, "Policy overrides KEY=VAL (lState, lExn, lPnt, mode)");

  CheckArgs check;
  auto* c = app.add_subcommand("check", "Type-check a program");
  c->add_option("--system", check.system, "pure, plain, pc or effect")
      ->check(CLI::IsMember({"pure", "plain", "pc", "effect"}));
  c->add_option("--pc", check.pc, "Program counter label (pc system)");
  c->add_option("--effect", check.effect, "Check against this effect set instead of inferring");
  c->add_option("file", check.file)->required();

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Run a closed program");
  e->add_option("--state", eval.state, "Initial state value");
  e->add_option("--fuel", eval.fuel, "Step limit");
  e->add_option("file", eval.file)->required();

  std::string translate_file;
  auto* t = app.add_subcommand("translate", "Translate into the pure calculus");
  t->add_option("file", translate_file)->required();

  EquivArgs equiv;
  auto* q = app.add_subcommand("equiv", "Bounded contextual equivalence");
  q->add_option("--def", equiv.def, "Observation: pure, state-exn or pnt (alias 2.1, 3.2, 4.1)")->required();
  q->add_option("--attacker", equiv.attacker, "Attacker label")->required();
  q->add_option("--bound", equiv.bound, "Context size bound");
  q->add_option("--fuel", equiv.fuel, "Step limit per run");
  q->add_option("file1", equiv.file1)->required();
  q->add_option("file2", equiv.file2)->required();

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "Run a verification suite");
  v->add_option("suite", verify.suite,
                "ni, lemmas, simulation, capture, galois, pcbound, coproduct-demo, captured-seq, generator")
      ->required();
  v->add_option("--seed", verify.seed);
  v->add_option("--count", verify.count);
  v->add_option("--lattice-dir", verify.lattice_dir, "Directory of shipped .lat files (galois)");

  std::string demo_name;
  auto* d = app.add_subcommand("demo", "Run a demonstration");
  d->add_option("name", demo_name, "coproduct")->required()->check(CLI::IsMember({"coproduct"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err) == 0 ? kOk : kUsage;
  }

  try {
    if (*c) return cmd_check(g, check);
    if (*e) return cmd_eval(g, eval);
    if (*t) return cmd_translate(g, translate_file);
    if (*q) return cmd_equiv(g, equiv);
    if (*v) return cmd_verify(g, verify);
    if (*d) return print_report(suite_coproduct_demo(*load(g)));
  } catch (const Usage& err) {
    std::cerr << "sfl: " << err.what() << "\n";
    return kUsage;
  } catch (const ParseError& err) {
    std::cerr << "sfl: parse error " << err.what() << "\n";
    return kUsage;
  } catch (const LoadError& err) {
    std::cerr << "sfl: " << err.what() << "\n";
    return kUsage;
  } catch (const PolicyError& err) {
    std::cerr << "sfl: policy: " << err.what() << "\n";
    return kUsage;
  } catch (const UnknownLabel& err) {
    std::cerr << "sfl: " << err.what() << "\n";
    return kUsage;
  } catch (const TypeError& err) {
    return reject(err);
  }
  return kUsage;
}
