#include "sfl/eval.hpp"

namespace sfl {

const char* to_string(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::Val: return "value";
    case OutcomeKind::Thrown: return "thrown";
    case OutcomeKind::ValWithState: return "value";
    case OutcomeKind::Timeout: return "timeout";
    case OutcomeKind::Stuck: return "stuck";
  }
  return "?";
}

namespace {

// TooDeep: the redex sits below kMaxDepth evaluation contexts.
enum class Status { Value, Stepped, Raised, Stuck, TooDeep };

constexpr int kMaxDepth = 2000;

struct StepResult {
  Status status;
  Expr expr;  // Stepped: the reduct
  std::string reason;
};

StepResult value() { return {Status::Value, nullptr, {}}; }
StepResult stepped(Expr e) { return {Status::Stepped, std::move(e), {}}; }
StepResult raised() { return {Status::Raised, nullptr, {}}; }
StepResult stuck(const std::string& why, const Expr& at) {
  return {Status::Stuck, nullptr, why + ": " + print_expr(at)};
}

// `state` is null in the pure calculus.
class Stepper {
 public:
  explicit Stepper(Expr* state) : state_(state) {}

  StepResult step(const Expr& e) {
    if (depth_ >= kMaxDepth) return {Status::TooDeep, nullptr, "term nested too deeply"};
    ++depth_;
    StepResult r = step_at(e);
    --depth_;
    return r;
  }

 private:
  StepResult step_at(const Expr& e) {
    switch (e->kind) {
      case ExprKind::Var: return stuck("free variable", e);
      case ExprKind::Unit:
      case ExprKind::Lam: return value();
      case ExprKind::Pair: {
        if (auto r = sub(e, 0); r.status != Status::Value) return r;
        return sub(e, 1);
      }
      case ExprKind::Inl:
      case ExprKind::Inr:
      case ExprKind::LabelE:
      case ExprKind::LiftE: return sub(e, 0);
      case ExprKind::Proj: {
        if (auto r = sub(e, 0); r.status != Status::Value) return r;
        if (e->a->kind != ExprKind::Pair) return stuck("projection of a non-pair", e);
        return stepped(e->index == 1 ? e->a->a : e->a->b);
      }
      case ExprKind::Match: {
        if (auto r = sub(e, 0); r.status != Status::Value) return r;
        if (e->a->kind == ExprKind::Inl) return stepped(subst(e->b, e->x, e->a->a));
        if (e->a->kind == ExprKind::Inr) return stepped(subst(e->c, e->y, e->a->a));
        return stuck("match on a non-injection", e);
      }
      case ExprKind::App: {
        if (auto r = sub(e, 0); r.status != Status::Value) return r;
        if (auto r = sub(e, 1); r.status != Status::Value) return r;
        if (e->a->kind != ExprKind::Lam) return stuck("application of a non-function", e);
        return stepped(subst(e->a->a, e->a->x, e->b));
      }
      case ExprKind::Unlabel: {
        if (auto r = sub(e, 0); r.status != Status::Value) return r;
        if (e->a->kind != ExprKind::LabelE) return stuck("unlabel of a non-labeled value", e);
        return stepped(subst(e->b, e->x, e->a->a));
      }
      case ExprKind::Seq: {
        if (auto r = sub(e, 0); r.status != Status::Value) return r;
        if (e->a->kind != ExprKind::LiftE) return stuck("seq of a non-lift", e);
        return stepped(subst(e->b, e->x, e->a->a));
      }
      case ExprKind::Let: {
        if (auto r = sub(e, 0); r.status != Status::Value) return r;
        return stepped(subst(e->b, e->x, e->a));
      }
      case ExprKind::Fix: return stepped(subst(e->a, e->x, e));
      case ExprKind::Read:
        if (!state_) return stuck("read outside the state machine", e);
        return stepped(*state_);
      case ExprKind::Write: {
        if (!state_) return stuck("write outside the state machine", e);
        if (auto r = sub(e, 0); r.status != Status::Value) return r;
        *state_ = e->a;
        return stepped(ex::unit());
      }
      case ExprKind::Throw:
        if (!state_) return stuck("throw outside the state machine", e);
        return raised();
      case ExprKind::TryCatch: {
        if (!state_) return stuck("try outside the state machine", e);
        StepResult r = step(e->a);
        switch (r.status) {
          case Status::Value: return stepped(e->a);
          case Status::Stepped: return stepped(rebuild(e, r.expr, e->b, e->c));
          case Status::Stuck:
          case Status::TooDeep: return r;
          case Status::Raised:
            if (e->a->kind == ExprKind::Throw) return stepped(e->b);
            // Collapse the throw context inside the try block first.
            return stepped(rebuild(e, throw_of(e->a), e->b, e->c));
        }
        return r;
      }
    }
    return stuck("unknown expression", e);
  }

  // Steps subterm `which` (0 = a, 1 = b) in place.
  StepResult sub(const Expr& e, int which) {
    const Expr& child = which == 0 ? e->a : e->b;
    StepResult r = step(child);
    if (r.status == Status::Stepped)
      r.expr = which == 0 ? rebuild(e, r.expr, e->b, e->c) : rebuild(e, e->a, r.expr, e->c);
    return r;
  }

  Expr* state_;
  int depth_ = 0;

 public:
  // The throw sitting in evaluation position of a raised term.
  static Expr throw_of(const Expr& e) {
    if (e->kind == ExprKind::Throw) return e;
    // Evaluation order: the raised child is the first non-value one.
    if (e->a && !is_value(e->a)) return throw_of(e->a);
    return throw_of(e->b);
  }
};

}  // namespace

std::optional<Expr> step_pure(const Expr& e) {
  StepResult r = Stepper(nullptr).step(e);
  switch (r.status) {
    case Status::Value: return std::nullopt;
    case Status::Stepped: return r.expr;
    case Status::Raised:
    case Status::Stuck:
    case Status::TooDeep: throw StuckStep(r.reason);
  }
  return std::nullopt;
}

std::optional<MachineConfig> step_state(const MachineConfig& c) {
  Expr state = c.state;
  StepResult r = Stepper(&state).step(c.expr);
  switch (r.status) {
    case Status::Value: return std::nullopt;
    case Status::Stepped: return MachineConfig{r.expr, state};
    case Status::Raised:
      if (c.expr->kind == ExprKind::Throw) return std::nullopt;
      return MachineConfig{Stepper::throw_of(c.expr), state};
    case Status::Stuck:
    case Status::TooDeep: throw StuckStep(r.reason);
  }
  return std::nullopt;
}

Outcome run(const Expr& e, const std::optional<Expr>& state, std::size_t fuel) {
  Outcome o;
  Expr cur = e;
  Expr st = state ? *state : nullptr;
  Stepper stepper(state ? &st : nullptr);
  while (true) {
    StepResult r = stepper.step(cur);
    if (r.status == Status::Value) {
      o.kind = state ? OutcomeKind::ValWithState : OutcomeKind::Val;
      o.value = cur;
      o.state = st;
      return o;
    }
    if (r.status == Status::TooDeep) {
      // Treated like running out of fuel.
      o.kind = OutcomeKind::Timeout;
      o.reason = r.reason;
      return o;
    }
    if (r.status == Status::Stuck) {
      o.kind = OutcomeKind::Stuck;
      o.reason = r.reason;
      return o;
    }
    if (r.status == Status::Raised && cur->kind == ExprKind::Throw) {
      o.kind = OutcomeKind::Thrown;
      o.state = st;
      return o;
    }
    if (o.steps == fuel) {
      o.kind = OutcomeKind::Timeout;
      return o;
    }
    ++o.steps;
    cur = r.status == Status::Raised ? Stepper::throw_of(cur) : r.expr;
  }
}

std::string print_outcome(const Outcome& o) {
  switch (o.kind) {
    case OutcomeKind::Val: return "value " + print_expr(o.value);
    case OutcomeKind::ValWithState:
      return "value " + print_expr(o.value) + " state " + print_expr(o.state);
    case OutcomeKind::Thrown: return "thrown state " + print_expr(o.state);
    case OutcomeKind::Timeout: return "timeout";
    case OutcomeKind::Stuck: return "stuck " + o.reason;
  }
  return "?";
}

namespace {

bool has_lambda(const Expr& e) {
  if (!e) return false;
  return e->kind == ExprKind::Lam || has_lambda(e->a) || has_lambda(e->b) || has_lambda(e->c);
}

// Injection annotations are ignored: the two sides may come from different
// calculi.
bool same_value(const Expr& a, const Expr& b) {
  if (!a || !b) return a == b;
  if (a->kind != b->kind || a->index != b->index) return false;
  if (a->kind == ExprKind::LabelE && a->label != b->label) return false;
  return same_value(a->a, b->a) && same_value(a->b, b->b) && same_value(a->c, b->c);
}

}  // namespace

ValueEq value_eq(const Expr& a, const Expr& b) {
  if (has_lambda(a) || has_lambda(b)) return ValueEq::NotComparable;
  return same_value(a, b) ? ValueEq::Equal : ValueEq::Different;
}

ValueEq outcome_eq(const Outcome& a, const Outcome& b) {
  if (a.kind != b.kind) return ValueEq::Different;
  ValueEq r = ValueEq::Equal;
  auto merge = [&](ValueEq x) {
    if (x == ValueEq::NotComparable || r == ValueEq::NotComparable) r = ValueEq::NotComparable;
    else if (x == ValueEq::Different) r = ValueEq::Different;
  };
  if (a.value && b.value) merge(value_eq(a.value, b.value));
  if (a.state && b.state) merge(value_eq(a.state, b.state));
  return r;
}

}  // namespace sfl
