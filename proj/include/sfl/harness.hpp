#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "sfl/elaborate.hpp"
#include "sfl/eval.hpp"
#include "sfl/typecheck.hpp"

namespace sfl {

// ---------------------------------------------------------------- values

// Every closed value of a first-order type, in a fixed order; empty when the
// type is not first-order or has more than `limit` values.
std::vector<Expr> enumerate_values(const Type& t, std::size_t limit = 64);

// ---------------------------------------------------------------- generator

enum class GenSystem { Pure, PcStateExn, PcPnt };
const char* to_string(GenSystem g);

class GenerationExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Generated {
  Expr expr;
  Type type;
  Label pc;  // pc systems only
};

// Builds typing derivations top-down, so every program it emits is accepted
// by the checker of its system. Deterministic per seed.
class ProgramGenerator {
 public:
  ProgramGenerator(Setting setting, GenSystem system, std::uint64_t seed);

  // A program of type `want` (random when null) at `pc` under `ctx`.
  Generated generate(const Context& ctx, Label pc, const Type& want, int size);
  // Picks the pc at random too.
  Generated generate(const Context& ctx, int size);

  // Small random type; first-order types contain no arrows.
  Type random_type(int depth, bool first_order);
  Label random_label();
  std::mt19937_64& rng() { return rng_; }
  // Pure programs only; fix is always available to the pnt pc system.
  void set_allow_fix(bool allow) { allow_fix_ = allow; }

  // Typing rules used so far, by name.
  const std::map<std::string, std::size_t>& rule_counts() const { return counts_; }

 private:
  Expr gen(const Context& ctx, Label pc, const Type& t, int budget);
  Expr leaf(const Context& ctx, Label pc, const Type& t);
  Expr intro(const Context& ctx, Label pc, const Type& t, int budget);
  std::optional<Expr> elim(const Context& ctx, Label pc, const Type& t, int budget);
  bool protects(Label l, const Type& t) const;
  bool var_usable(const Binding& b, Label pc) const;
  std::string binder();
  int pick(int n);
  bool chance(double p);
  void count(const char* rule) { ++counts_[rule]; }

  Setting s_;
  GenSystem sys_;
  std::mt19937_64 rng_;
  std::map<std::string, std::size_t> counts_;
  int next_binder_ = 0;
  bool allow_fix_ = true;
};

// One checked program; throws GenerationExhausted if the generator could not
// produce an accepted program.
Generated random_program(std::uint64_t seed, int size, GenSystem system, const Setting& s,
                         const Context& ctx = {});

// ---------------------------------------------------------------- equivalence

inline const char* const kHole = "hole";

enum class Observation { Pure, StateExn, Pnt };

struct ContextSpec {
  Type hole_type;
  Label attacker;
  std::size_t size_bound = 7;  // AST nodes; literal values and the hole count 1
  Observation observation = Observation::Pure;
};

// Closed contexts mentioning `hole` exactly once whose result type is
// L[attacker](unit + unit), or Lift of it when the hole type mentions Lift,
// when the hole has `hole_type`. Deduplicated,
// ordered by size then text. Not yet filtered by the pc discipline; see
// context_accepts.
std::vector<Expr> enumerate_contexts(const Setting& s, const ContextSpec& spec);

// C[e]; e must be closed.
Expr plug(const Expr& context, const Expr& e);

// Typing of a plugged program: the pure checker for pure observations, the
// pc checker at some minimal pc for state-exn, either one for pnt.
bool context_accepts(const Setting& s, Observation obs, const Expr& program);

enum class VerdictKind { Equivalent, Distinguished, Inconclusive };
const char* to_string(VerdictKind k);

struct Verdict {
  VerdictKind kind = VerdictKind::Equivalent;
  std::size_t contexts = 0;  // contexts whose plugged programs typed
  std::size_t runs = 0;
  std::size_t timeouts = 0;
  Expr witness;              // Distinguished: the context
  Expr state;                // Distinguished: the initial state
  std::string observation;   // Distinguished: the two observed outcomes
  std::string describe() const;
};

// Compares e1 and e2 under every accepted context and every state.
// Inconclusive when a run timed out or no context typed.
Verdict check_equiv(const Setting& s, const Expr& e1, const Expr& e2, const ContextSpec& spec,
                    const std::vector<Expr>& contexts, std::size_t fuel = kDefaultFuel);

Verdict check_l_equiv(const Setting& s, const Expr& e1, const Expr& e2, Label attacker,
                      const Type& hole_type, std::size_t bound = 7);
Verdict check_state_exn_equiv(const Setting& s, const Expr& e1, const Expr& e2, Label attacker,
                              const Type& hole_type, std::size_t bound = 7);
Verdict check_ts_equiv(const Setting& s, const Expr& e1, const Expr& e2, Label attacker,
                       const Type& hole_type, std::size_t bound = 7);

// ---------------------------------------------------------------- simulation

class DecodeShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reads an effectful outcome back from the value of a monadic program that
// was already applied to `state` (when its monad takes one).
Outcome decode(const Setting& s, EffectSet eps, const Outcome& pure_run, const Expr& state);

// Applies a captured term to the state when its monad takes one and runs it.
Outcome run_captured(const Setting& s, const Captured& c, const std::optional<Expr>& state,
                     std::size_t fuel = kDefaultFuel);

// ---------------------------------------------------------------- reports

struct Report {
  std::string suite;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::size_t skipped = 0;
  std::vector<std::string> lines;  // "suite case verdict detail"
  bool pass() const { return failures == 0 && cases > 0; }
  void record(const std::string& id, bool ok, const std::string& detail = "");
  void skip(const std::string& id, const std::string& why);
  void merge(const Report& other);
  std::string summary() const;
};

// Closed state-exn program: effectful run vs decoded captured run, for every
// state. Function-valued results are skipped.
Report check_simulation(const Setting& s, const Expr& e, const std::vector<Expr>& states,
                        const std::string& id = "program");

struct SuiteOptions {
  std::uint64_t seed = 1;
  std::size_t count = 1000;
  int size = 14;
  std::size_t context_bound = 7;
};

// The shared setting of a suite: two-point lattice, legal policy.
Setting standard_setting(Alphabet mode, ComposeMode compose = ComposeMode::GlobalFlow);

Report suite_capture(const SuiteOptions& o);        // capture output passes check_pure
Report suite_simulation(const SuiteOptions& o);     // effectful vs decoded pure runs
Report suite_lemmas(const SuiteOptions& o);         // effect bounds from the pc
Report suite_galois(const SuiteOptions& o, const std::vector<LatticePtr>& lattices);
Report suite_pc_bounded(const SuiteOptions& o);
Report suite_coproduct_demo(const LabelLattice& base);
Report suite_ni(const SuiteOptions& o);             // the three noninterference instances
Report suite_captured_seq(const SuiteOptions& o);
Report suite_generator_coverage(const SuiteOptions& o);

}  // namespace sfl
