#include "sfl/syntax.hpp"

#include <atomic>
#include <cctype>
#include <sstream>

namespace sfl {

// ---------------------------------------------------------------- types

namespace ty {

namespace {
Type make(TypeKind k, Type a = nullptr, Type b = nullptr, Label l = Label(), EffectSet eps = {}) {
  auto n = std::make_shared<TypeNode>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  n->label = l;
  n->eff = eps;
  return n;
}
}  // namespace

Type unit() {
  static const Type u = make(TypeKind::Unit);
  return u;
}
Type sum(Type a, Type b) { return make(TypeKind::Sum, std::move(a), std::move(b)); }
Type prod(Type a, Type b) { return make(TypeKind::Prod, std::move(a), std::move(b)); }
Type fun(Type a, Type b) { return make(TypeKind::FunPure, std::move(a), std::move(b)); }
Type fun_pc(Type a, Label pc, Type b) { return make(TypeKind::FunPc, std::move(a), std::move(b), pc); }
Type fun_eff(Type a, EffectSet eps, Type b) {
  return make(TypeKind::FunEff, std::move(a), std::move(b), Label(), eps);
}
Type labeled(Label l, Type t) { return make(TypeKind::Labeled, std::move(t), nullptr, l); }
Type lift(Type t) { return make(TypeKind::Lift, std::move(t)); }
Type bool_() {
  static const Type b = sum(unit(), unit());
  return b;
}

}  // namespace ty

bool type_equal(const Type& a, const Type& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case TypeKind::Unit: return true;
    case TypeKind::Sum:
    case TypeKind::Prod:
    case TypeKind::FunPure: return type_equal(a->a, b->a) && type_equal(a->b, b->b);
    case TypeKind::FunPc:
      return a->label == b->label && type_equal(a->a, b->a) && type_equal(a->b, b->b);
    case TypeKind::FunEff:
      return a->eff == b->eff && type_equal(a->a, b->a) && type_equal(a->b, b->b);
    case TypeKind::Labeled: return a->label == b->label && type_equal(a->a, b->a);
    case TypeKind::Lift: return type_equal(a->a, b->a);
  }
  return false;
}

bool is_function(const Type& t) {
  return t->kind == TypeKind::FunPure || t->kind == TypeKind::FunPc || t->kind == TypeKind::FunEff;
}

bool is_first_order(const Type& t) {
  switch (t->kind) {
    case TypeKind::Unit: return true;
    case TypeKind::Sum:
    case TypeKind::Prod: return is_first_order(t->a) && is_first_order(t->b);
    case TypeKind::Labeled: return is_first_order(t->a);
    default: return false;
  }
}

bool mentions_lift(const Type& t) {
  if (!t) return false;
  if (t->kind == TypeKind::Lift) return true;
  return mentions_lift(t->a) || mentions_lift(t->b);
}

std::size_t type_size(const Type& t) {
  if (!t) return 0;
  return 1 + type_size(t->a) + type_size(t->b);
}

namespace {

int type_level(const Type& t) {
  switch (t->kind) {
    case TypeKind::FunPure:
    case TypeKind::FunPc:
    case TypeKind::FunEff: return 0;
    case TypeKind::Sum: return 1;
    case TypeKind::Prod: return 2;
    default: return 3;
  }
}

void print_type_at(std::ostream& os, const Type& t, int level) {
  bool paren = type_level(t) < level;
  if (paren) os << "(";
  switch (t->kind) {
    case TypeKind::Unit: os << "unit"; break;
    case TypeKind::Sum:
      print_type_at(os, t->a, 1);
      os << " + ";
      print_type_at(os, t->b, 2);
      break;
    case TypeKind::Prod:
      print_type_at(os, t->a, 2);
      os << " * ";
      print_type_at(os, t->b, 3);
      break;
    case TypeKind::FunPure:
      print_type_at(os, t->a, 1);
      os << " -> ";
      print_type_at(os, t->b, 0);
      break;
    case TypeKind::FunPc:
      print_type_at(os, t->a, 1);
      os << " ->[pc " << t->label.name() << "] ";
      print_type_at(os, t->b, 0);
      break;
    case TypeKind::FunEff:
      print_type_at(os, t->a, 1);
      os << " ->[eff " << t->eff.str() << "] ";
      print_type_at(os, t->b, 0);
      break;
    case TypeKind::Labeled:
      os << "L[" << t->label.name() << "] ";
      print_type_at(os, t->a, 3);
      break;
    case TypeKind::Lift:
      os << "Lift ";
      print_type_at(os, t->a, 3);
      break;
  }
  if (paren) os << ")";
}

}  // namespace

std::string print_type(const Type& t) {
  std::ostringstream os;
  print_type_at(os, t, 0);
  return os.str();
}

// ---------------------------------------------------------------- expressions

namespace ex {

namespace {
std::shared_ptr<ExprNode> node(ExprKind k) {
  auto n = std::make_shared<ExprNode>();
  n->kind = k;
  return n;
}
}  // namespace

Expr var(std::string name) {
  auto n = node(ExprKind::Var);
  n->x = std::move(name);
  return n;
}
Expr unit() {
  static const Expr u = node(ExprKind::Unit);
  return u;
}
Expr pair(Expr a, Expr b) {
  auto n = node(ExprKind::Pair);
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}
Expr proj(int i, Expr e) {
  auto n = node(ExprKind::Proj);
  n->index = i;
  n->a = std::move(e);
  return n;
}
Expr inl(Expr e, Type sum) {
  auto n = node(ExprKind::Inl);
  n->a = std::move(e);
  n->annot = std::move(sum);
  return n;
}
Expr inr(Expr e, Type sum) {
  auto n = node(ExprKind::Inr);
  n->a = std::move(e);
  n->annot = std::move(sum);
  return n;
}
Expr match(Expr e, std::string x, Expr e1, std::string y, Expr e2) {
  auto n = node(ExprKind::Match);
  n->a = std::move(e);
  n->x = std::move(x);
  n->b = std::move(e1);
  n->y = std::move(y);
  n->c = std::move(e2);
  return n;
}
Expr lam(std::string x, Type t, Expr body) {
  auto n = node(ExprKind::Lam);
  n->x = std::move(x);
  n->annot = std::move(t);
  n->a = std::move(body);
  return n;
}
Expr lam_pc(std::string x, Type t, Label pc, Expr body) {
  auto n = node(ExprKind::Lam);
  n->x = std::move(x);
  n->annot = std::move(t);
  n->a = std::move(body);
  n->latent = Latent::Pc;
  n->label = pc;
  return n;
}
Expr lam_eff(std::string x, Type t, EffectSet eps, Expr body) {
  auto n = node(ExprKind::Lam);
  n->x = std::move(x);
  n->annot = std::move(t);
  n->a = std::move(body);
  n->latent = Latent::Eff;
  n->latent_eff = eps;
  return n;
}
Expr app(Expr f, Expr arg) {
  auto n = node(ExprKind::App);
  n->a = std::move(f);
  n->b = std::move(arg);
  return n;
}
Expr app(Expr f, Expr a1, Expr a2) { return app(app(std::move(f), std::move(a1)), std::move(a2)); }
Expr label(Label l, Expr e) {
  auto n = node(ExprKind::LabelE);
  n->label = l;
  n->a = std::move(e);
  return n;
}
Expr unlabel(Expr e1, std::string x, Expr e2) {
  auto n = node(ExprKind::Unlabel);
  n->a = std::move(e1);
  n->x = std::move(x);
  n->b = std::move(e2);
  return n;
}
Expr read() {
  static const Expr r = node(ExprKind::Read);
  return r;
}
Expr write(Expr e) {
  auto n = node(ExprKind::Write);
  n->a = std::move(e);
  return n;
}
Expr throw_(Type t) {
  auto n = node(ExprKind::Throw);
  n->annot = std::move(t);
  return n;
}
Expr try_catch(Expr e1, Expr e2) {
  auto n = node(ExprKind::TryCatch);
  n->a = std::move(e1);
  n->b = std::move(e2);
  return n;
}
Expr fix(std::string f, Type t, Expr body) {
  auto n = node(ExprKind::Fix);
  n->x = std::move(f);
  n->annot = std::move(t);
  n->a = std::move(body);
  return n;
}
Expr lift(Expr e) {
  auto n = node(ExprKind::LiftE);
  n->a = std::move(e);
  return n;
}
Expr seq(std::string x, Expr e1, Expr e2) {
  auto n = node(ExprKind::Seq);
  n->x = std::move(x);
  n->a = std::move(e1);
  n->b = std::move(e2);
  return n;
}
Expr let(std::string x, Expr e1, Expr e2, Type annot) {
  auto n = node(ExprKind::Let);
  n->x = std::move(x);
  n->a = std::move(e1);
  n->b = std::move(e2);
  n->annot = std::move(annot);
  return n;
}

}  // namespace ex

Expr rebuild(const Expr& e, Expr a, Expr b, Expr c) {
  if (a == e->a && b == e->b && c == e->c) return e;
  auto n = std::make_shared<ExprNode>(*e);
  n->a = std::move(a);
  n->b = std::move(b);
  n->c = std::move(c);
  return n;
}

Expr with_latent(const Expr& lam, Latent latent, Label pc, EffectSet eps) {
  auto n = std::make_shared<ExprNode>(*lam);
  n->latent = latent;
  n->label = latent == Latent::Pc ? pc : Label();
  n->latent_eff = latent == Latent::Eff ? eps : EffectSet();
  return n;
}

bool expr_equal(const Expr& a, const Expr& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  if (a->x != b->x || a->y != b->y || a->index != b->index || a->label != b->label ||
      a->latent != b->latent || a->latent_eff != b->latent_eff)
    return false;
  if ((a->annot == nullptr) != (b->annot == nullptr)) return false;
  if (a->annot && !type_equal(a->annot, b->annot)) return false;
  return expr_equal(a->a, b->a) && expr_equal(a->b, b->b) && expr_equal(a->c, b->c);
}

bool is_value(const Expr& e) {
  switch (e->kind) {
    case ExprKind::Unit:
    case ExprKind::Lam: return true;
    case ExprKind::Pair: return is_value(e->a) && is_value(e->b);
    case ExprKind::Inl:
    case ExprKind::Inr:
    case ExprKind::LabelE:
    case ExprKind::LiftE: return is_value(e->a);
    default: return false;
  }
}

std::size_t expr_size(const Expr& e) {
  if (!e) return 0;
  return 1 + expr_size(e->a) + expr_size(e->b) + expr_size(e->c);
}

namespace {

void collect_free(const Expr& e, std::set<std::string>& bound, std::set<std::string>& out) {
  if (!e) return;
  auto under = [&](const std::string& x, const Expr& body) {
    bool added = bound.insert(x).second;
    collect_free(body, bound, out);
    if (added) bound.erase(x);
  };
  switch (e->kind) {
    case ExprKind::Var:
      if (!bound.count(e->x)) out.insert(e->x);
      return;
    case ExprKind::Match:
      collect_free(e->a, bound, out);
      under(e->x, e->b);
      under(e->y, e->c);
      return;
    case ExprKind::Lam:
    case ExprKind::Fix: under(e->x, e->a); return;
    case ExprKind::Unlabel:
    case ExprKind::Seq:
    case ExprKind::Let:
      collect_free(e->a, bound, out);
      under(e->x, e->b);
      return;
    default:
      collect_free(e->a, bound, out);
      collect_free(e->b, bound, out);
      collect_free(e->c, bound, out);
  }
}

}  // namespace

std::set<std::string> free_vars(const Expr& e) {
  std::set<std::string> bound, out;
  collect_free(e, bound, out);
  return out;
}

bool occurs_free(const std::string& x, const Expr& e) {
  if (!e) return false;
  switch (e->kind) {
    case ExprKind::Var: return e->x == x;
    case ExprKind::Match:
      return occurs_free(x, e->a) || (e->x != x && occurs_free(x, e->b)) ||
             (e->y != x && occurs_free(x, e->c));
    case ExprKind::Lam:
    case ExprKind::Fix: return e->x != x && occurs_free(x, e->a);
    case ExprKind::Unlabel:
    case ExprKind::Seq:
    case ExprKind::Let: return occurs_free(x, e->a) || (e->x != x && occurs_free(x, e->b));
    default: return occurs_free(x, e->a) || occurs_free(x, e->b) || occurs_free(x, e->c);
  }
}

namespace {

std::atomic<unsigned> g_fresh{0};

Expr rename_var(const Expr& body, const std::string& from, const std::string& to) {
  return subst(body, from, ex::var(to));
}

Expr subst_in(const Expr& e, const std::string& x, const Expr& v, const std::set<std::string>& fv);

// Substitutes under a binder, renaming it when it would capture.
std::pair<std::string, Expr> subst_binder(const std::string& binder, const Expr& body,
                                          const std::string& x, const Expr& v,
                                          const std::set<std::string>& fv) {
  if (binder == x) return {binder, body};
  if (fv.count(binder) && occurs_free(x, body)) {
    std::string fresh = fresh_name(binder);
    Expr renamed = rename_var(body, binder, fresh);
    return {fresh, subst_in(renamed, x, v, fv)};
  }
  return {binder, subst_in(body, x, v, fv)};
}

Expr with_binder(const Expr& e, const std::string& binder, Expr a, Expr b, Expr c) {
  Expr out = rebuild(e, std::move(a), std::move(b), std::move(c));
  if (out->x == binder) return out;
  auto n = std::make_shared<ExprNode>(*out);
  n->x = binder;
  return n;
}

Expr subst_in(const Expr& e, const std::string& x, const Expr& v, const std::set<std::string>& fv) {
  if (!e) return e;
  switch (e->kind) {
    case ExprKind::Var: return e->x == x ? v : e;
    case ExprKind::Unit:
    case ExprKind::Read:
    case ExprKind::Throw: return e;
    case ExprKind::Match: {
      Expr s = subst_in(e->a, x, v, fv);
      auto [bx, e1] = subst_binder(e->x, e->b, x, v, fv);
      auto [by, e2] = subst_binder(e->y, e->c, x, v, fv);
      Expr out = rebuild(e, s, e1, e2);
      if (bx == e->x && by == e->y) return out;
      auto n = std::make_shared<ExprNode>(*out);
      n->x = bx;
      n->y = by;
      return n;
    }
    case ExprKind::Lam:
    case ExprKind::Fix: {
      auto [bx, body] = subst_binder(e->x, e->a, x, v, fv);
      return with_binder(e, bx, body, nullptr, nullptr);
    }
    case ExprKind::Unlabel:
    case ExprKind::Seq:
    case ExprKind::Let: {
      Expr first = subst_in(e->a, x, v, fv);
      auto [bx, body] = subst_binder(e->x, e->b, x, v, fv);
      return with_binder(e, bx, first, body, nullptr);
    }
    default:
      return rebuild(e, subst_in(e->a, x, v, fv), subst_in(e->b, x, v, fv), subst_in(e->c, x, v, fv));
  }
}

}  // namespace

Expr subst(const Expr& e, const std::string& x, const Expr& v) {
  if (v->kind == ExprKind::Var) return subst_in(e, x, v, {v->x});
  return subst_in(e, x, v, free_vars(v));
}

Expr desugar(const Expr& e) {
  if (!e) return e;
  Expr a = desugar(e->a), b = desugar(e->b), c = desugar(e->c);
  if (e->kind == ExprKind::Let) {
    if (!e->annot) throw std::logic_error("desugar: let-binding of '" + e->x + "' has no binder type");
    return ex::app(ex::lam(e->x, e->annot, b), a);
  }
  return rebuild(e, a, b, c);
}

bool contains_let(const Expr& e) {
  if (!e) return false;
  return e->kind == ExprKind::Let || contains_let(e->a) || contains_let(e->b) || contains_let(e->c);
}

std::string fresh_name(const std::string& base) {
  std::string stem = base;
  auto q = stem.find('\'');
  if (q != std::string::npos) stem.erase(q);
  if (stem.empty() || stem == "_") stem = "v";
  return stem + "'" + std::to_string(++g_fresh);
}

void reset_fresh_names() { g_fresh = 0; }

// ---------------------------------------------------------------- expression printer

namespace {

// 0: anything; 1: application chain; 2: prefix operand.
int expr_level(const Expr& e) {
  switch (e->kind) {
    case ExprKind::App: return 1;
    case ExprKind::Proj:
    case ExprKind::Write:
    case ExprKind::LiftE:
    case ExprKind::LabelE:
    case ExprKind::Var:
    case ExprKind::Unit:
    case ExprKind::Pair:
    case ExprKind::Read: return 2;
    default: return 0;
  }
}

void print_at(std::ostream& os, const Expr& e, int level);

void print_latent(std::ostream& os, const Expr& e) {
  switch (e->latent) {
    case Latent::None: os << " -> "; break;
    case Latent::Pc: os << " ->[pc " << e->label.name() << "] "; break;
    case Latent::Eff: os << " ->[eff " << e->latent_eff.str() << "] "; break;
  }
}

void print_at(std::ostream& os, const Expr& e, int level) {
  bool paren = expr_level(e) < level;
  if (paren) os << "(";
  switch (e->kind) {
    case ExprKind::Var: os << e->x; break;
    case ExprKind::Unit: os << "()"; break;
    case ExprKind::Read: os << "read"; break;
    case ExprKind::Pair:
      os << "(";
      print_at(os, e->a, 0);
      os << ", ";
      print_at(os, e->b, 0);
      os << ")";
      break;
    case ExprKind::Proj:
      os << (e->index == 1 ? "fst " : "snd ");
      print_at(os, e->a, 2);
      break;
    case ExprKind::Write:
      os << "write ";
      print_at(os, e->a, 2);
      break;
    case ExprKind::LiftE:
      os << "lift ";
      print_at(os, e->a, 2);
      break;
    case ExprKind::LabelE:
      os << "label[" << e->label.name() << "] ";
      print_at(os, e->a, 2);
      break;
    case ExprKind::App:
      print_at(os, e->a, 1);
      os << " ";
      print_at(os, e->b, 2);
      break;
    case ExprKind::Inl:
    case ExprKind::Inr:
      os << (e->kind == ExprKind::Inl ? "inl " : "inr ");
      print_at(os, e->a, 1);
      os << " : " << print_type(e->annot);
      break;
    case ExprKind::Throw: os << "throw : " << print_type(e->annot); break;
    case ExprKind::Match:
      os << "match ";
      print_at(os, e->a, 0);
      os << " with inl " << e->x << " -> ";
      print_at(os, e->b, 1);
      os << " | inr " << e->y << " -> ";
      print_at(os, e->c, 0);
      break;
    case ExprKind::Lam:
      os << "fun (" << e->x << " : " << print_type(e->annot) << ")";
      print_latent(os, e);
      print_at(os, e->a, 0);
      break;
    case ExprKind::Unlabel:
      os << "unlabel ";
      print_at(os, e->a, 0);
      os << " as " << e->x << " in ";
      print_at(os, e->b, 0);
      break;
    case ExprKind::TryCatch:
      os << "try ";
      print_at(os, e->a, 0);
      os << " catch ";
      print_at(os, e->b, 0);
      break;
    case ExprKind::Fix:
      os << "fix " << e->x << " : " << print_type(e->annot) << " = ";
      print_at(os, e->a, 0);
      break;
    case ExprKind::Seq:
      os << "seq " << e->x << " = ";
      print_at(os, e->a, 0);
      os << " in ";
      print_at(os, e->b, 0);
      break;
    case ExprKind::Let:
      os << "let " << e->x;
      if (e->annot) os << " : " << print_type(e->annot);
      os << " = ";
      print_at(os, e->a, 0);
      os << " in ";
      print_at(os, e->b, 0);
      break;
  }
  if (paren) os << ")";
}

}  // namespace

std::string print_expr(const Expr& e) {
  std::ostringstream os;
  print_at(os, e, 0);
  return os.str();
}

// ---------------------------------------------------------------- parser

namespace {

enum class Tok { Ident, LParen, RParen, Comma, Colon, Arrow, LBrack, RBrack, Pipe, Eq, Star, Plus, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1, col = 1;
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

const std::set<std::string>& keywords() {
  static const std::set<std::string> k = {
      "fun", "let", "in", "seq", "unlabel", "as", "match", "with", "inl", "inr", "fix", "try",
      "catch", "throw", "read", "write", "fst", "snd", "lift", "label", "unit", "Lift", "L", "sigma"};
  return k;
}

class Parser {
 public:
  Parser(std::string_view text, const LabelLattice* lat, Type sigma, int line0 = 1)
      : src_(text), lat_(lat), sigma_(std::move(sigma)), line_(line0) {}

  Type type() { return arrow_type(); }

  Expr expr() {
    const Token& t = peek();
    if (t.kind == Tok::Ident) {
      const std::string& w = t.text;
      if (w == "fun") return fun_expr();
      if (w == "let" || w == "seq") return let_expr(w == "let");
      if (w == "unlabel") return unlabel_expr();
      if (w == "match") return match_expr();
      if (w == "fix") return fix_expr();
      if (w == "try") return try_expr();
      if (w == "inl" || w == "inr") return inj_expr(w == "inl");
      if (w == "throw") {
        next();
        expect(Tok::Colon, "':'");
        return ex::throw_(type());
      }
    }
    return app_expr();
  }

  void expect_end() {
    if (peek().kind != Tok::End) fail(peek(), "unexpected '" + peek().text + "'");
  }

 private:
  std::string_view src_;
  const LabelLattice* lat_;
  Type sigma_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  std::optional<Token> ahead_;

  [[noreturn]] void fail(const Token& t, const std::string& msg) {
    throw ParseError(t.line, t.col, msg);
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  Token lex() {
    skip_space();
    Token t;
    t.line = line_;
    t.col = col_;
    if (pos_ >= src_.size()) return t;
    char c = src_[pos_];
    if (is_ident_start(c)) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && is_ident_char(src_[pos_])) advance();
      t.kind = Tok::Ident;
      t.text = std::string(src_.substr(start, pos_ - start));
      return t;
    }
    if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
      advance();
      advance();
      t.kind = Tok::Arrow;
      t.text = "->";
      return t;
    }
    advance();
    t.text = std::string(1, c);
    switch (c) {
      case '(': t.kind = Tok::LParen; break;
      case ')': t.kind = Tok::RParen; break;
      case ',': t.kind = Tok::Comma; break;
      case ':': t.kind = Tok::Colon; break;
      case '[': t.kind = Tok::LBrack; break;
      case ']': t.kind = Tok::RBrack; break;
      case '|': t.kind = Tok::Pipe; break;
      case '=': t.kind = Tok::Eq; break;
      case '*': t.kind = Tok::Star; break;
      case '+': t.kind = Tok::Plus; break;
      default: fail(t, std::string("unexpected character '") + c + "'");
    }
    return t;
  }

  const Token& peek() {
    if (!ahead_) ahead_ = lex();
    return *ahead_;
  }

  Token next() {
    Token t = peek();
    ahead_.reset();
    return t;
  }

  Token expect(Tok k, const char* what) {
    Token t = next();
    if (t.kind != k) fail(t, std::string("expected ") + what + ", found '" + t.text + "'");
    return t;
  }

  void expect_word(const char* w) {
    Token t = next();
    if (t.kind != Tok::Ident || t.text != w)
      fail(t, std::string("expected '") + w + "', found '" + t.text + "'");
  }

  bool at_word(const char* w) {
    const Token& t = peek();
    return t.kind == Tok::Ident && t.text == w;
  }

  std::string binder() {
    Token t = next();
    if (t.kind != Tok::Ident || keywords().count(t.text))
      fail(t, "expected a variable name, found '" + t.text + "'");
    return t.text;
  }

  // Raw text up to the next ']' (consumed). Caller has consumed '['.
  std::string raw_bracket() {
    if (ahead_) throw std::logic_error("raw_bracket with lookahead");
    Token at;
    at.line = line_;
    at.col = col_;
    std::string out;
    while (pos_ < src_.size() && src_[pos_] != ']') {
      out += src_[pos_];
      advance();
    }
    if (pos_ >= src_.size()) fail(at, "unterminated '['");
    advance();
    auto b = out.find_first_not_of(" \t");
    auto e = out.find_last_not_of(" \t");
    if (b == std::string::npos) fail(at, "empty label");
    return out.substr(b, e - b + 1);
  }

  Label label_ref(const std::string& name) {
    Label l(name);
    if (lat_ && !lat_->contains(l)) throw UnknownLabel(name);
    return l;
  }

  // '[' already consumed. Reads `pc L]` or `eff {..}]`.
  void latent(Latent& kind, Label& pc, EffectSet& eps) {
    std::string body = raw_bracket();
    std::istringstream ss(body);
    std::string head;
    ss >> head;
    std::string rest;
    std::getline(ss, rest);
    auto b = rest.find_first_not_of(" \t");
    rest = b == std::string::npos ? "" : rest.substr(b);
    Token at;
    at.line = line_;
    at.col = col_;
    if (head == "pc") {
      if (rest.empty()) fail(at, "missing pc label");
      kind = Latent::Pc;
      pc = label_ref(rest);
    } else if (head == "eff") {
      auto parsed = parse_effect_set(rest);
      if (!parsed) fail(at, "bad effect set '" + rest + "'");
      kind = Latent::Eff;
      eps = *parsed;
    } else {
      fail(at, "expected 'pc' or 'eff' annotation");
    }
  }

  // ---- types

  Type arrow_type() {
    Type lhs = sum_type();
    if (peek().kind != Tok::Arrow) return lhs;
    next();
    Latent kind = Latent::None;
    Label pc;
    EffectSet eps;
    if (peek().kind == Tok::LBrack) {
      next();
      latent(kind, pc, eps);
    }
    Type rhs = arrow_type();
    switch (kind) {
      case Latent::Pc: return ty::fun_pc(lhs, pc, rhs);
      case Latent::Eff: return ty::fun_eff(lhs, eps, rhs);
      default: return ty::fun(lhs, rhs);
    }
  }

  Type sum_type() {
    Type t = prod_type();
    while (peek().kind == Tok::Plus) {
      next();
      t = ty::sum(t, prod_type());
    }
    return t;
  }

  Type prod_type() {
    Type t = prefix_type();
    while (peek().kind == Tok::Star) {
      next();
      t = ty::prod(t, prefix_type());
    }
    return t;
  }

  Type prefix_type() {
    Token t = next();
    if (t.kind == Tok::Ident) {
      if (t.text == "L") {
        expect(Tok::LBrack, "'['");
        Label l = label_ref(raw_bracket());
        return ty::labeled(l, prefix_type());
      }
      if (t.text == "Lift") return ty::lift(prefix_type());
      if (t.text == "unit") return ty::unit();
      if (t.text == "sigma") {
        if (!sigma_) fail(t, "'sigma' used before the state type is declared");
        return sigma_;
      }
    }
    if (t.kind == Tok::LParen) {
      Type inner = arrow_type();
      expect(Tok::RParen, "')'");
      return inner;
    }
    fail(t, "expected a type, found '" + t.text + "'");
  }

  // ---- expressions

  Expr fun_expr() {
    next();
    expect(Tok::LParen, "'('");
    std::string x = binder();
    expect(Tok::Colon, "':'");
    Type t = type();
    expect(Tok::RParen, "')'");
    expect(Tok::Arrow, "'->'");
    Latent kind = Latent::None;
    Label pc;
    EffectSet eps;
    if (peek().kind == Tok::LBrack) {
      next();
      latent(kind, pc, eps);
    }
    Expr body = expr();
    switch (kind) {
      case Latent::Pc: return ex::lam_pc(x, t, pc, body);
      case Latent::Eff: return ex::lam_eff(x, t, eps, body);
      default: return ex::lam(x, t, body);
    }
  }

  Expr let_expr(bool is_let) {
    next();
    std::string x = binder();
    Type annot;
    if (is_let && peek().kind == Tok::Colon) {
      next();
      annot = type();
    }
    expect(Tok::Eq, "'='");
    Expr e1 = expr();
    expect_word("in");
    Expr e2 = expr();
    return is_let ? ex::let(x, e1, e2, annot) : ex::seq(x, e1, e2);
  }

  Expr unlabel_expr() {
    next();
    Expr e1 = expr();
    expect_word("as");
    std::string x = binder();
    expect_word("in");
    return ex::unlabel(e1, x, expr());
  }

  Expr match_expr() {
    next();
    Expr e = expr();
    expect_word("with");
    if (peek().kind == Tok::Pipe) next();
    expect_word("inl");
    std::string x = binder();
    expect(Tok::Arrow, "'->'");
    Expr e1 = expr();
    expect(Tok::Pipe, "'|'");
    expect_word("inr");
    std::string y = binder();
    expect(Tok::Arrow, "'->'");
    Expr e2 = expr();
    return ex::match(e, x, e1, y, e2);
  }

  Expr fix_expr() {
    next();
    std::string f = binder();
    expect(Tok::Colon, "':'");
    Type t = type();
    expect(Tok::Eq, "'='");
    return ex::fix(f, t, expr());
  }

  Expr try_expr() {
    next();
    Expr e1 = expr();
    expect_word("catch");
    return ex::try_catch(e1, expr());
  }

  Expr inj_expr(bool left) {
    next();
    Expr e = expr();
    expect(Tok::Colon, "':'");
    Type t = type();
    return left ? ex::inl(e, t) : ex::inr(e, t);
  }

  bool starts_prefix() {
    const Token& t = peek();
    if (t.kind == Tok::LParen) return true;
    if (t.kind != Tok::Ident) return false;
    if (t.text == "read" || t.text == "fst" || t.text == "snd" || t.text == "write" ||
        t.text == "lift" || t.text == "label")
      return true;
    return !keywords().count(t.text);
  }

  Expr app_expr() {
    Expr f = prefix_expr();
    while (starts_prefix()) f = ex::app(f, prefix_expr());
    return f;
  }

  Expr prefix_expr() {
    const Token& t = peek();
    if (t.kind == Tok::Ident) {
      if (t.text == "fst" || t.text == "snd") {
        int i = t.text == "fst" ? 1 : 2;
        next();
        return ex::proj(i, prefix_expr());
      }
      if (t.text == "write") {
        next();
        return ex::write(prefix_expr());
      }
      if (t.text == "lift") {
        next();
        return ex::lift(prefix_expr());
      }
      if (t.text == "label") {
        next();
        expect(Tok::LBrack, "'['");
        Label l = label_ref(raw_bracket());
        return ex::label(l, prefix_expr());
      }
    }
    return atom_expr();
  }

  Expr atom_expr() {
    Token t = next();
    if (t.kind == Tok::LParen) {
      if (peek().kind == Tok::RParen) {
        next();
        return ex::unit();
      }
      Expr first = expr();
      if (peek().kind == Tok::Comma) {
        next();
        Expr second = expr();
        expect(Tok::RParen, "')'");
        return ex::pair(first, second);
      }
      expect(Tok::RParen, "')'");
      return first;
    }
    if (t.kind == Tok::Ident) {
      if (t.text == "read") return ex::read();
      if (!keywords().count(t.text)) return ex::var(t.text);
    }
    fail(t, "expected an expression, found '" + (t.kind == Tok::End ? std::string("end of input") : t.text) + "'");
  }
};

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Type parse_type(std::string_view text, const LabelLattice* lat, Type sigma) {
  Parser p(text, lat, std::move(sigma));
  Type t = p.type();
  p.expect_end();
  return t;
}

Expr parse_expr(std::string_view text, const LabelLattice* lat, Type sigma) {
  Parser p(text, lat, std::move(sigma));
  Expr e = p.expr();
  p.expect_end();
  return e;
}

Program parse_program(std::string_view text, const LabelLattice* lat) {
  Program prog;
  bool saw_mode = false;
  std::string src(text);
  std::size_t pos = 0;
  int line = 0;
  while (pos <= src.size()) {
    std::size_t eol = src.find('\n', pos);
    if (eol == std::string::npos) eol = src.size();
    std::string raw = src.substr(pos, eol - pos);
    ++line;
    std::size_t line_start = pos;
    pos = eol + 1;
    std::string s = raw;
    if (auto h = s.find('#'); h != std::string::npos) s.erase(h);
    s = trim(s);
    if (s.empty()) {
      if (eol >= src.size()) break;
      continue;
    }
    std::istringstream ls(s);
    std::string kw;
    ls >> kw;
    std::string rest;
    std::getline(ls, rest);
    rest = trim(rest);
    if (kw == "mode") {
      if (rest == "state-exn") prog.mode = Alphabet::StateExn;
      else if (rest == "pnt") prog.mode = Alphabet::Pnt;
      else throw ParseError(line, 1, "mode must be state-exn or pnt");
      saw_mode = true;
    } else if (kw == "policy") {
      std::istringstream ps(rest);
      for (std::string kv; ps >> kv;) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw ParseError(line, 1, "policy entries are KEY=VALUE");
        std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
        if (k == "lState") prog.policy.l_state = v;
        else if (k == "lExn") prog.policy.l_exn = v;
        else if (k == "lPnt") prog.policy.l_pnt = v;
        else if (k == "mode") prog.policy.mode = v;
        else throw ParseError(line, 1, "unknown policy key '" + k + "'");
      }
    } else if (kw == "sigma") {
      prog.sigma = Parser(rest, lat, nullptr, line).type();
    } else if (kw == "var") {
      auto colon = rest.find(':');
      if (colon == std::string::npos) throw ParseError(line, 1, "expected `var NAME : TYPE`");
      std::string name = trim(rest.substr(0, colon));
      if (name.empty() || !is_ident_start(name[0]) || keywords().count(name))
        throw ParseError(line, 1, "bad variable name '" + name + "'");
      Type t = parse_type(rest.substr(colon + 1), lat, prog.sigma);
      prog.context.emplace_back(name, t);
    } else if (kw == "body") {
      std::size_t body_at = src.find("body", line_start) + 4;
      Parser p(std::string_view(src).substr(body_at), lat, prog.sigma, line);
      prog.body = p.expr();
      p.expect_end();
      break;
    } else {
      throw ParseError(line, 1, "unknown directive '" + kw + "'");
    }
    if (eol >= src.size()) break;
  }
  if (!saw_mode) throw ParseError(1, 1, "missing `mode` line");
  if (!prog.body) throw ParseError(line, 1, "missing `body`");
  if (prog.mode == Alphabet::StateExn && !prog.sigma)
    throw ParseError(1, 1, "state-exn programs need a `sigma` line");
  return prog;
}

std::string print_program(const Program& p) {
  std::ostringstream os;
  os << "mode " << to_string(p.mode) << "\n";
  const auto& ps = p.policy;
  if (ps.l_state || ps.l_exn || ps.l_pnt || ps.mode) {
    os << "policy";
    if (ps.l_state) os << " lState=" << *ps.l_state;
    if (ps.l_exn) os << " lExn=" << *ps.l_exn;
    if (ps.l_pnt) os << " lPnt=" << *ps.l_pnt;
    if (ps.mode) os << " mode=" << *ps.mode;
    os << "\n";
  }
  if (p.sigma) os << "sigma " << print_type(p.sigma) << "\n";
  for (const auto& [name, t] : p.context) os << "var " << name << " : " << print_type(t) << "\n";
  os << "body\n" << print_expr(p.body) << "\n";
  return os.str();
}

}  // namespace sfl
