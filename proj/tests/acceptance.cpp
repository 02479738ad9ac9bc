// Acceptance run: one PASS/FAIL line per criterion, with its wall time.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "sfl/harness.hpp"

using namespace sfl;

namespace {

const std::string kRoot = SFL_SOURCE_DIR;

struct Check {
  bool ok = true;
  std::string detail;
  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void report(const Report& r) {
    expect(r.pass(), r.summary());
    if (detail.empty()) detail = r.summary();
    for (const auto& line : r.lines)
      if (line.find(" FAIL ") != std::string::npos) std::printf("  %s\n", line.c_str());
  }
};

std::vector<LatticePtr> shipped_lattices() {
  std::vector<std::string> files;
  for (const auto& f : std::filesystem::directory_iterator(kRoot + "/lattices"))
    if (f.path().extension() == ".lat") files.push_back(f.path().string());
  std::sort(files.begin(), files.end());
  std::vector<LatticePtr> out;
  for (const auto& f : files) out.push_back(std::make_shared<const LabelLattice>(load_lattice_file(f)));
  return out;
}

Program load(const LabelLattice& lat, const std::string& name) {
  std::ifstream in(kRoot + "/corpus/" + name + ".sfl");
  std::stringstream text;
  text << in.rdbuf();
  return parse_program(text.str(), &lat);
}

// The write-after-throw program with exceptions at `exn` and state at `st`.
Program program_one(const LabelLattice& lat, Label st, Label exn) {
  std::string L = exn.name();
  std::string text = "mode state-exn\npolicy lState=" + st.name() + " lExn=" + L +
                     "\nsigma L[" + st.name() + "] (unit + unit)\nvar h : L[" + L +
                     "] (unit + unit)\nvar s : sigma\nbody\n"
                     "let v = unlabel h as x in match x with | inl a -> throw : L[" + L +
                     "] unit | inr b -> label[" + L + "] () in write s\n";
  return parse_program(text, &lat);
}

void criterion_golden(Check& c) {
  auto two = std::make_shared<const LabelLattice>(two_point_lattice());
  Label pub("Pub"), sec("Sec");

  // Exception leak: plain accepts, pc rejects at every pc below l_exn.
  Program leak = load(*two, "exn_leak");
  Setting ls = setting_for(two, leak);
  Context lctx = make_context(leak.context);
  c.expect(check_plain(ls, lctx, leak.body).ok(), "exn_leak rejected by plain");
  for (Label pc : two->elements()) {
    if (!two->flows(pc, ls.policy.l_exn())) continue;
    Result<Type> r = check_pc(ls, lctx, pc, leak.body);
    c.expect(!r.ok(), "exn_leak accepted at pc " + pc.name());
  }

  // Program (1) on every shipped lattice and label pair.
  std::size_t rejected = 0, accepted = 0;
  for (const LatticePtr& lat : shipped_lattices()) {
    for (Label st : lat->elements()) {
      for (Label exn : lat->elements()) {
        Program p = program_one(*lat, st, exn);
        Setting s;
        try {
          s = setting_for(lat, p);
        } catch (const PolicyError&) {
          continue;
        }
        Context ctx = make_context(p.context);
        bool legal = lat->flows(exn, st);
        // The judgment the translation needs for the exception tag.
        Type sigma = s.sigma;
        Context tag = make_context({{"t", ty::labeled(exn, ty::bool_())}, {"s", sigma}});
        Expr unlabel_tag = ex::unlabel(ex::var("t"), "x", ex::pair(ex::label(exn, ex::var("x")), ex::var("s")));
        Result<Type> judged = check_pure(s, tag, unlabel_tag);
        std::string id = st.name() + "/" + exn.name();
        if (legal) {
          c.expect(!validate_program(s, p).has_value(), "legal policy rejected " + id);
          c.expect(check_pc(s, ctx, lat->minimal_elements().front(), p.body).ok(), "program one rejected under " + id);
          c.expect(judged.ok(), "tag unlabel rejected under " + id);
          ++accepted;
        } else {
          auto err = validate_program(s, p);
          c.expect(err && err->kind() == TypeErrorKind::ProtectionFail, "program one accepted under " + id);
          c.expect(!judged.ok() && judged.error().kind() == TypeErrorKind::ProtectionFail,
                   "tag unlabel accepted under " + id);
          ++rejected;
        }
      }
    }
  }

  Program rot = load(*two, "read_or_throw");
  Setting rs = setting_for(two, rot);
  Result<Judgment> j = infer_effect(rs, make_context(rot.context), rot.body);
  c.expect(j.ok() && j->effect == EffectSet::RE(), "read-or-throw effect");

  Program lr = load(*two, "labeled_read");
  Setting lrs = setting_for(two, lr);
  Result<Judgment> j2 = infer_effect(lrs, make_context(lr.context), lr.body);
  c.expect(j2.ok() && j2->effect == EffectSet::R(), "labeled-read effect");
  c.expect(check_effect(lrs, make_context(lr.context), lr.body, EffectSet::R()).ok(), "labeled-read at {R}");

  if (c.ok)
    c.detail = "program one rejected under " + std::to_string(rejected) + " illegal policies, accepted under " +
               std::to_string(accepted) + " legal ones";
}

void criterion_galois(Check& c) {
  SuiteOptions o;
  Report r = suite_galois(o, shipped_lattices());
  bool control = false;
  for (const auto& line : r.lines)
    if (line.find("negative-control pass") != std::string::npos && line.find("witness") != std::string::npos)
      control = true;
  c.report(r);
  c.expect(control, "negative control found no witness");
}

void criterion_pc_bounded(Check& c) {
  SuiteOptions o;
  o.count = 1000;
  Report r = suite_pc_bounded(o);
  r.merge(suite_coproduct_demo(two_point_lattice()));
  c.report(r);
}

void criterion_ni(Check& c) {
  SuiteOptions o;
  o.count = 100;
  o.context_bound = 7;
  Report r = suite_ni(o);
  std::size_t inconclusive = 0;
  for (const auto& line : r.lines)
    if (line.find(" inconclusive ") != std::string::npos) ++inconclusive;
  c.report(r);
  c.detail += ", " + std::to_string(inconclusive) + " inconclusive";
}

int run_criterion(int n, const char* name, double limit_s, const std::function<void(Check&)>& body) {
  auto t0 = std::chrono::steady_clock::now();
  Check c;
  try {
    body(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > limit_s) c.expect(false, "took longer than " + std::to_string(static_cast<int>(limit_s)) + " s");
  std::printf("criterion %d %-16s %s %8.2fs  %s\n", n, name, c.ok ? "PASS" : "FAIL", secs, c.detail.c_str());
  std::fflush(stdout);
  return c.ok ? 0 : 1;
}

Report with_count(Report (*suite)(const SuiteOptions&), std::size_t count) {
  SuiteOptions o;
  o.count = count;
  return suite(o);
}

}  // namespace

int main() {
  int failed = 0;
  failed += run_criterion(1, "golden", 1, criterion_golden);
  failed += run_criterion(2, "capture", 60, [](Check& c) { c.report(with_count(suite_capture, 1000)); });
  failed += run_criterion(3, "simulation", 300, [](Check& c) { c.report(with_count(suite_simulation, 1000)); });
  failed += run_criterion(4, "pc-lemmas", 300, [](Check& c) { c.report(with_count(suite_lemmas, 1000)); });
  failed += run_criterion(5, "galois", 60, criterion_galois);
  failed += run_criterion(6, "pc-bounded", 300, criterion_pc_bounded);
  failed += run_criterion(7, "noninterference", 600, criterion_ni);
  failed += run_criterion(8, "captured-seq", 300, [](Check& c) { c.report(with_count(suite_captured_seq, 500)); });
  std::printf("%d of 8 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
