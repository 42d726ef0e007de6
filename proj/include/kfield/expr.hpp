#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kfield/errors.hpp"

namespace kfield {

enum class Op : std::uint8_t {
  Const,
  Var,
  Neg,
  Sin,
  Cos,
  Tan,
  Atan,
  Exp,
  Log,
  Sqrt,
  Tanh,
  Add,
  Sub,
  Mul,
  Div,
  Pow
};

int arity(Op op);
const char* op_name(Op op);

// Immutable expression tree. Copies share nodes.
class Expr {
 public:
  Expr();  // constant 0
  Expr(double c);  // NOLINT(google-explicit-constructor)

  static Expr constant(double c);
  static Expr var(std::string name);
  // Raw constructors; no folding.
  static Expr unary(Op op, Expr a);
  static Expr binary(Op op, Expr a, Expr b);

  Op op() const;
  double value() const;  // Const only
  const std::string& name() const;  // Var only
  const Expr& arg(int i) const;

  bool is_const() const { return op() == Op::Const; }
  bool is_const(double c) const { return is_const() && value() == c; }
  bool is_var() const { return op() == Op::Var; }

  bool same(const Expr& o) const;  // structural equality

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// Folding constructors (constant folding and 0/1 identities, one level).
Expr operator-(const Expr& a);
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr pow(const Expr& a, const Expr& b);
Expr apply(Op fn, const Expr& a);  // unary function with folding
Expr sum(const std::vector<Expr>& terms);

using Assignment = std::map<std::string, double>;

Expr parse(std::string_view text);
std::string print(const Expr& e);
double eval(const Expr& e, const Assignment& a);
Expr diff(const Expr& e, const std::string& var);
Expr simplify(const Expr& e);
Expr substitute(const Expr& e, const std::map<std::string, Expr>& repl);
std::set<std::string> free_variables(const Expr& e);
bool depends_on(const Expr& e, const std::string& var);
bool depends_on_any(const Expr& e, const std::vector<std::string>& vars);
bool is_identifier(std::string_view s);
std::size_t node_count(const Expr& e);

// Scalar semantics shared by the tree walker and the compiled form.
double apply_unary(Op op, double a);
double apply_binary(Op op, double a, double b);

// Postfix program over a fixed variable slot order. "pi" falls back to
// M_PI when it has no slot.
class Compiled {
 public:
  Compiled() = default;
  Compiled(const Expr& e, const std::vector<std::string>& slots);

  double operator()(const double* vals) const;
  double operator()(std::span<const double> vals) const { return (*this)(vals.data()); }
  bool constant() const { return code_.size() == 1 && code_[0].op == Op::Const; }

 private:
  struct Instr {
    Op op;
    int slot;
    double c;
  };
  std::vector<Instr> code_;
  std::size_t depth_ = 0;
};

}  // namespace kfield
