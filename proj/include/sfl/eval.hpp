#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

#include "sfl/syntax.hpp"

namespace sfl {

inline constexpr std::size_t kDefaultFuel = 10000;

// A closed non-value normal form that is not a top-level throw.
class StuckStep : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One call-by-value step of the pure calculus; nullopt iff e is a value.
std::optional<Expr> step_pure(const Expr& e);

struct MachineConfig {
  Expr expr;
  Expr state;
};

// One step of the state and exception machine; nullopt iff the expression is
// a value or a bare throw.
std::optional<MachineConfig> step_state(const MachineConfig& c);

enum class OutcomeKind { Val, Thrown, ValWithState, Timeout, Stuck };
const char* to_string(OutcomeKind k);

struct Outcome {
  OutcomeKind kind = OutcomeKind::Stuck;
  Expr value;          // Val, ValWithState
  Expr state;          // Thrown, ValWithState
  std::size_t steps = 0;
  std::string reason;  // Stuck, or a Timeout from nesting depth
};

// Runs the state machine when `state` is given, the pure stepper otherwise.
Outcome run(const Expr& e, const std::optional<Expr>& state, std::size_t fuel = kDefaultFuel);

std::string print_outcome(const Outcome& o);

enum class ValueEq { Equal, Different, NotComparable };

// Structural equality; NotComparable when either side holds a lambda.
ValueEq value_eq(const Expr& a, const Expr& b);

// Same outcome class and equal components; NotComparable propagates.
ValueEq outcome_eq(const Outcome& a, const Outcome& b);

}  // namespace sfl
