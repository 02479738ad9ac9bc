#pragma once

#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sfl/effects.hpp"
#include "sfl/labels.hpp"

namespace sfl {

// ---------------------------------------------------------------- types

enum class TypeKind : std::uint8_t { Unit, Sum, Prod, FunPure, FunPc, FunEff, Labeled, Lift };

struct TypeNode;
using Type = std::shared_ptr<const TypeNode>;

struct TypeNode {
  TypeKind kind = TypeKind::Unit;
  Type a, b;       // Sum/Prod/Fun*: both; Labeled/Lift: a
  Label label;     // Labeled: the label; FunPc: latent pc
  EffectSet eff;   // FunEff: latent effect
};

namespace ty {
Type unit();
Type sum(Type a, Type b);
Type prod(Type a, Type b);
Type fun(Type a, Type b);
Type fun_pc(Type a, Label pc, Type b);
Type fun_eff(Type a, EffectSet eps, Type b);
Type labeled(Label l, Type t);
Type lift(Type t);
Type bool_();  // unit + unit
}  // namespace ty

bool type_equal(const Type& a, const Type& b);
bool is_function(const Type& t);
// No arrow or Lift anywhere inside.
bool is_first_order(const Type& t);
bool mentions_lift(const Type& t);
std::size_t type_size(const Type& t);

std::string print_type(const Type& t);

// ---------------------------------------------------------------- expressions

enum class ExprKind : std::uint8_t {
  Var, Unit, Pair, Proj, Inl, Inr, Match, Lam, App, LabelE, Unlabel,
  Read, Write, Throw, TryCatch, Fix, LiftE, Seq, Let
};

// Optional latent annotation on a lambda arrow.
enum class Latent : std::uint8_t { None, Pc, Eff };

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprKind kind = ExprKind::Unit;
  std::string x;        // Var name; binder of Lam/Unlabel/Fix/Seq/Let; Match left binder
  std::string y;        // Match right binder
  int index = 0;        // Proj: 1 or 2
  Type annot;           // Inl/Inr/Throw: result type; Lam/Fix: binder type; Let: optional
  Label label;          // LabelE; Lam latent pc
  Latent latent = Latent::None;
  EffectSet latent_eff;
  Expr a, b, c;         // subterms in source order
};

namespace ex {
Expr var(std::string name);
Expr unit();
Expr pair(Expr a, Expr b);
Expr proj(int i, Expr e);
Expr inl(Expr e, Type sum);
Expr inr(Expr e, Type sum);
Expr match(Expr e, std::string x, Expr e1, std::string y, Expr e2);
Expr lam(std::string x, Type t, Expr body);
Expr lam_pc(std::string x, Type t, Label pc, Expr body);
Expr lam_eff(std::string x, Type t, EffectSet eps, Expr body);
Expr app(Expr f, Expr arg);
Expr app(Expr f, Expr a1, Expr a2);
Expr label(Label l, Expr e);
Expr unlabel(Expr e1, std::string x, Expr e2);
Expr read();
Expr write(Expr e);
Expr throw_(Type t);
Expr try_catch(Expr e1, Expr e2);
Expr fix(std::string f, Type t, Expr body);
Expr lift(Expr e);
Expr seq(std::string x, Expr e1, Expr e2);
Expr let(std::string x, Expr e1, Expr e2, Type annot = nullptr);
}  // namespace ex

// Copy of a node with replaced subterms.
Expr rebuild(const Expr& e, Expr a, Expr b, Expr c);
Expr with_latent(const Expr& lam, Latent latent, Label pc, EffectSet eps);

bool expr_equal(const Expr& a, const Expr& b);
bool is_value(const Expr& e);
std::size_t expr_size(const Expr& e);
std::set<std::string> free_vars(const Expr& e);
bool occurs_free(const std::string& x, const Expr& e);

// Capture-avoiding substitution e[v/x].
Expr subst(const Expr& e, const std::string& x, const Expr& v);

// Let(x, T, e1, e2) becomes (fun (x:T) -> e2) e1. Every Let must carry its
// binder type; see annotate_lets in typecheck.
Expr desugar(const Expr& e);
bool contains_let(const Expr& e);

std::string print_expr(const Expr& e);

// Fresh names: base with any `'N` suffix replaced by a new counter value.
std::string fresh_name(const std::string& base);
void reset_fresh_names();

// ---------------------------------------------------------------- programs

struct PolicySpec {
  std::optional<std::string> l_state, l_exn, l_pnt, mode;
};

struct Program {
  Alphabet mode = Alphabet::StateExn;
  Type sigma;  // state-exn only
  std::vector<std::pair<std::string, Type>> context;
  Expr body;
  PolicySpec policy;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int col, const std::string& msg)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
        line_(line),
        col_(col) {}
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_, col_;
};

// `lat` may be null, which skips label validation. `sigma` resolves the
// `sigma` type alias.
Type parse_type(std::string_view text, const LabelLattice* lat = nullptr, Type sigma = nullptr);
Expr parse_expr(std::string_view text, const LabelLattice* lat = nullptr, Type sigma = nullptr);
Program parse_program(std::string_view text, const LabelLattice* lat = nullptr);
std::string print_program(const Program& p);

}  // namespace sfl
