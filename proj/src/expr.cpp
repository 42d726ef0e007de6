#include "kfield/expr.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <numbers>
#include <unordered_map>

namespace kfield {

struct Expr::Node {
  Op op;
  double c = 0.0;
  std::string name;
  std::vector<Expr> kids;
};

namespace {

const std::unordered_map<std::string_view, Op>& function_table() {
  static const std::unordered_map<std::string_view, Op> t = {
      {"sin", Op::Sin},   {"cos", Op::Cos}, {"tan", Op::Tan},   {"atan", Op::Atan},
      {"exp", Op::Exp},   {"log", Op::Log}, {"sqrt", Op::Sqrt}, {"tanh", Op::Tanh},
  };
  return t;
}

}  // namespace

int arity(Op op) {
  if (op == Op::Const || op == Op::Var) return 0;
  if (op >= Op::Add) return 2;
  return 1;
}

const char* op_name(Op op) {
  switch (op) {
    case Op::Const: return "const";
    case Op::Var: return "var";
    case Op::Neg: return "neg";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Tan: return "tan";
    case Op::Atan: return "atan";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    case Op::Tanh: return "tanh";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Pow: return "pow";
  }
  return "?";
}

// ---- construction ---------------------------------------------------------

Expr::Expr() : Expr(0.0) {}

Expr::Expr(double c) {
  if (!std::isfinite(c)) throw DomainError("non-finite constant");
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->c = c == 0.0 ? 0.0 : c;  // drop signed zero
  node_ = std::move(n);
}

Expr Expr::constant(double c) { return Expr(c); }

Expr Expr::var(std::string name) {
  if (!is_identifier(name)) throw SyntaxError(0, "identifier, got '" + name + "'");
  auto n = std::make_shared<Node>();
  n->op = Op::Var;
  n->name = std::move(name);
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::unary(Op op, Expr a) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->kids = {std::move(a)};
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::binary(Op op, Expr a, Expr b) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->kids = {std::move(a), std::move(b)};
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Op Expr::op() const { return node_->op; }
double Expr::value() const { return node_->c; }
const std::string& Expr::name() const { return node_->name; }
const Expr& Expr::arg(int i) const { return node_->kids[static_cast<std::size_t>(i)]; }

bool Expr::same(const Expr& o) const {
  if (node_ == o.node_) return true;
  if (op() != o.op()) return false;
  switch (arity(op())) {
    case 0: return op() == Op::Const ? value() == o.value() : name() == o.name();
    case 1: return arg(0).same(o.arg(0));
    default: return arg(0).same(o.arg(0)) && arg(1).same(o.arg(1));
  }
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  if (!alpha(s[0])) return false;
  for (char c : s)
    if (!alpha(c) && !(c >= '0' && c <= '9')) return false;
  return true;
}

// ---- scalar semantics -----------------------------------------------------

namespace {

double ipow(double b, long e) {
  bool inv = e < 0;
  unsigned long u = inv ? static_cast<unsigned long>(-e) : static_cast<unsigned long>(e);
  double r = 1.0;
  while (u) {
    if (u & 1UL) r *= b;
    b *= b;
    u >>= 1;
  }
  return inv ? 1.0 / r : r;
}

}  // namespace

double apply_unary(Op op, double a) {
  switch (op) {
    case Op::Neg: return -a;
    case Op::Sin: return std::sin(a);
    case Op::Cos: return std::cos(a);
    case Op::Tan: return std::tan(a);
    case Op::Atan: return std::atan(a);
    case Op::Exp: return std::exp(a);
    case Op::Log:
      if (!(a > 0.0)) throw DomainError("log of nonpositive value");
      return std::log(a);
    case Op::Sqrt:
      if (a < 0.0) throw DomainError("sqrt of negative value");
      return std::sqrt(a);
    case Op::Tanh: return std::tanh(a);
    default: throw DomainError("not a unary op");
  }
}

double apply_binary(Op op, double a, double b) {
  switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div:
      if (b == 0.0) throw DomainError("division by zero");
      return a / b;
    case Op::Pow: {
      if (a == 0.0 && b < 0.0) throw DomainError("0 raised to a negative power");
      if (b == std::trunc(b) && std::fabs(b) <= 64.0) return ipow(a, static_cast<long>(b));
      if (a < 0.0) throw DomainError("negative base with non-integer exponent");
      return std::pow(a, b);
    }
    default: throw DomainError("not a binary op");
  }
}

// ---- folding constructors -------------------------------------------------

namespace {

bool try_fold_unary(Op op, const Expr& a, Expr& out) {
  if (!a.is_const()) return false;
  try {
    double v = apply_unary(op, a.value());
    if (!std::isfinite(v)) return false;
    out = Expr(v);
    return true;
  } catch (const DomainError&) {
    return false;
  }
}

bool try_fold_binary(Op op, const Expr& a, const Expr& b, Expr& out) {
  if (!a.is_const() || !b.is_const()) return false;
  try {
    double v = apply_binary(op, a.value(), b.value());
    if (!std::isfinite(v)) return false;
    out = Expr(v);
    return true;
  } catch (const DomainError&) {
    return false;
  }
}

}  // namespace

Expr operator-(const Expr& a) {
  Expr r;
  if (try_fold_unary(Op::Neg, a, r)) return r;
  if (a.op() == Op::Neg) return a.arg(0);
  return Expr::unary(Op::Neg, a);
}

Expr operator+(const Expr& a, const Expr& b) {
  Expr r;
  if (try_fold_binary(Op::Add, a, b, r)) return r;
  if (a.is_const(0.0)) return b;
  if (b.is_const(0.0)) return a;
  return Expr::binary(Op::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  Expr r;
  if (try_fold_binary(Op::Sub, a, b, r)) return r;
  if (b.is_const(0.0)) return a;
  if (a.is_const(0.0)) return -b;
  return Expr::binary(Op::Sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  Expr r;
  if (try_fold_binary(Op::Mul, a, b, r)) return r;
  if (a.is_const(0.0) || b.is_const(0.0)) return Expr(0.0);
  if (a.is_const(1.0)) return b;
  if (b.is_const(1.0)) return a;
  if (a.is_const(-1.0)) return -b;
  if (b.is_const(-1.0)) return -a;
  if (b.is_const() && !a.is_const()) return b * a;  // constants to the left
  if (a.op() == Op::Neg && b.op() == Op::Neg) return a.arg(0) * b.arg(0);
  if (a.is_const() && b.op() == Op::Mul && b.arg(0).is_const()) {
    double c = a.value() * b.arg(0).value();
    if (std::isfinite(c)) return Expr(c) * b.arg(1);
  }
  return Expr::binary(Op::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  Expr r;
  if (try_fold_binary(Op::Div, a, b, r)) return r;
  if (b.is_const(1.0)) return a;
  if (b.is_const(-1.0)) return -a;
  if (a.is_const(0.0)) return Expr(0.0);
  return Expr::binary(Op::Div, a, b);
}

Expr pow(const Expr& a, const Expr& b) {
  Expr r;
  if (try_fold_binary(Op::Pow, a, b, r)) return r;
  if (b.is_const(1.0)) return a;
  if (b.is_const(0.0)) return Expr(1.0);
  if (a.is_const(1.0)) return Expr(1.0);
  return Expr::binary(Op::Pow, a, b);
}

Expr apply(Op fn, const Expr& a) {
  if (fn == Op::Neg) return -a;
  Expr r;
  if (try_fold_unary(fn, a, r)) return r;
  return Expr::unary(fn, a);
}

Expr sum(const std::vector<Expr>& terms) {
  Expr acc(0.0);
  for (const auto& t : terms) acc = acc + t;
  return acc;
}

namespace {

// e = c * rest, pulling numeric factors out of a product chain.
std::pair<double, Expr> split_coefficient(const Expr& e) {
  switch (e.op()) {
    case Op::Const: return {e.value(), Expr(1.0)};
    case Op::Neg: {
      auto [c, r] = split_coefficient(e.arg(0));
      return {-c, r};
    }
    case Op::Mul: {
      auto [c1, r1] = split_coefficient(e.arg(0));
      auto [c2, r2] = split_coefficient(e.arg(1));
      return {c1 * c2, r1 * r2};
    }
    case Op::Div: {
      auto [c, r] = split_coefficient(e.arg(0));
      auto [cd, rd] = split_coefficient(e.arg(1));
      if (cd == 0.0) return {1.0, e};
      return {c / cd, rd.is_const(1.0) ? r : r / rd};
    }
    default: return {1.0, e};
  }
}

Expr fold_coefficient(const Expr& e) {
  auto [c, r] = split_coefficient(e);
  if (!std::isfinite(c)) return e;
  if (c == 1.0) return r;
  if (c == -1.0) return -r;
  return Expr(c) * r;
}

}  // namespace

Expr simplify(const Expr& e) {
  switch (arity(e.op())) {
    case 0: return e;
    case 1: {
      Expr r = apply(e.op(), simplify(e.arg(0)));
      return r.op() == Op::Neg ? fold_coefficient(r) : r;
    }
    default: break;
  }
  Expr a = simplify(e.arg(0)), b = simplify(e.arg(1));
  switch (e.op()) {
    case Op::Add:
      if (b.op() == Op::Neg) return a - b.arg(0);
      if (b.op() == Op::Mul && b.arg(0).is_const() && b.arg(0).value() < 0.0)
        return a - Expr(-b.arg(0).value()) * b.arg(1);
      return a + b;
    case Op::Sub:
      if (print(a) == print(b)) return Expr(0.0);
      if (b.op() == Op::Neg) return a + b.arg(0);
      return a - b;
    case Op::Mul: return fold_coefficient(a * b);
    case Op::Div: return fold_coefficient(a / b);
    default: return pow(a, b);
  }
}

// ---- parser ---------------------------------------------------------------

namespace {

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  Expr run() {
    skip();
    if (pos_ >= s_.size()) throw SyntaxError(pos_, "expression");
    Expr e = expr();
    skip();
    if (pos_ < s_.size()) throw SyntaxError(pos_, "operator or end of input");
    return e;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r'))
      ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expr() {
    Expr e = term();
    for (;;) {
      if (eat('+')) e = Expr::binary(Op::Add, e, term());
      else if (eat('-')) e = Expr::binary(Op::Sub, e, term());
      else return e;
    }
  }

  Expr term() {
    Expr e = unary();
    for (;;) {
      if (eat('*')) e = Expr::binary(Op::Mul, e, unary());
      else if (eat('/')) e = Expr::binary(Op::Div, e, unary());
      else return e;
    }
  }

  Expr unary() {
    if (eat('-')) return Expr::unary(Op::Neg, unary());
    if (eat('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (eat('^')) return Expr::binary(Op::Pow, base, unary());
    return base;
  }

  Expr primary() {
    skip();
    if (pos_ >= s_.size()) throw SyntaxError(pos_, "operand");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      if (!eat(')')) throw SyntaxError(pos_, "')'");
      return e;
    }
    if ((c >= '0' && c <= '9') || c == '.') return number();
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') {
      std::size_t start = pos_;
      auto idc = [](char ch) {
        return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == '_';
      };
      while (pos_ < s_.size() && idc(s_[pos_])) ++pos_;
      std::string_view id = s_.substr(start, pos_ - start);
      std::size_t after = pos_;
      if (eat('(')) {
        auto it = function_table().find(id);
        if (it == function_table().end())
          throw UnknownFunction("unknown function '" + std::string(id) + "' at offset " +
                                std::to_string(start));
        Expr arg = expr();
        if (!eat(')')) throw SyntaxError(pos_, "')'");
        return Expr::unary(it->second, arg);
      }
      pos_ = after;
      return Expr::var(std::string(id));
    }
    throw SyntaxError(pos_, "operand");
  }

  Expr number() {
    std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9') ++pos_;
    };
    digits();
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ == start + 1 && s_[start] == '.') throw SyntaxError(start, "number");
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      std::size_t dstart = pos_;
      digits();
      if (pos_ == dstart) pos_ = save;  // "2e" is 2 followed by identifier e
    }
    std::string text(s_.substr(start, pos_ - start));
    if (text.front() == '.') text.insert(text.begin(), '0');
    double v = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || !std::isfinite(v)) throw SyntaxError(start, "finite number");
    return Expr(v);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text) { return Parser(text).run(); }

// ---- printer --------------------------------------------------------------

namespace {

int prec(const Expr& e) {
  switch (e.op()) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    case Op::Const: return e.value() < 0.0 ? 3 : 5;
    default: return 5;
  }
}

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void emit(const Expr& e, std::string& out);

void emit_wrapped(const Expr& e, bool wrap, std::string& out) {
  if (wrap) out += '(';
  emit(e, out);
  if (wrap) out += ')';
}

void emit(const Expr& e, std::string& out) {
  switch (e.op()) {
    case Op::Const: out += fmt_double(e.value()); return;
    case Op::Var: out += e.name(); return;
    case Op::Neg:
      out += '-';
      emit_wrapped(e.arg(0), prec(e.arg(0)) < 3, out);
      return;
    case Op::Pow:
      emit_wrapped(e.arg(0), prec(e.arg(0)) <= 4, out);
      out += '^';
      emit_wrapped(e.arg(1), prec(e.arg(1)) < 4, out);
      return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      int p = prec(e);
      const char* sym = e.op() == Op::Add ? " + " : e.op() == Op::Sub ? " - " : e.op() == Op::Mul ? "*" : "/";
      emit_wrapped(e.arg(0), prec(e.arg(0)) < p, out);
      out += sym;
      emit_wrapped(e.arg(1), prec(e.arg(1)) <= p, out);
      return;
    }
    default:
      out += op_name(e.op());
      out += '(';
      emit(e.arg(0), out);
      out += ')';
      return;
  }
}

}  // namespace

std::string print(const Expr& e) {
  std::string out;
  emit(e, out);
  return out;
}

// ---- evaluation -----------------------------------------------------------

double eval(const Expr& e, const Assignment& a) {
  switch (e.op()) {
    case Op::Const: return e.value();
    case Op::Var: {
      auto it = a.find(e.name());
      if (it != a.end()) return it->second;
      if (e.name() == "pi") return std::numbers::pi;
      throw UnboundVariable(e.name());
    }
    default: break;
  }
  if (arity(e.op()) == 1) return apply_unary(e.op(), eval(e.arg(0), a));
  double l = eval(e.arg(0), a);
  return apply_binary(e.op(), l, eval(e.arg(1), a));
}

Compiled::Compiled(const Expr& e, const std::vector<std::string>& slots) {
  std::unordered_map<std::string, int> index;
  for (std::size_t i = 0; i < slots.size(); ++i) index.emplace(slots[i], static_cast<int>(i));
  std::size_t d = 0;
  std::function<void(const Expr&)> gen = [&](const Expr& x) {
    switch (x.op()) {
      case Op::Const:
        code_.push_back({Op::Const, -1, x.value()});
        ++d;
        break;
      case Op::Var: {
        auto it = index.find(x.name());
        if (it != index.end()) code_.push_back({Op::Var, it->second, 0.0});
        else if (x.name() == "pi") code_.push_back({Op::Const, -1, std::numbers::pi});
        else throw UnboundVariable(x.name());
        ++d;
        break;
      }
      default:
        gen(x.arg(0));
        if (arity(x.op()) == 2) gen(x.arg(1));
        code_.push_back({x.op(), -1, 0.0});
        if (arity(x.op()) == 2) --d;
        break;
    }
    depth_ = std::max(depth_, d);
  };
  gen(e);
}

double Compiled::operator()(const double* vals) const {
  double small[64];
  std::vector<double> big;
  double* st = small;
  if (depth_ > 64) {
    big.resize(depth_);
    st = big.data();
  }
  std::size_t sp = 0;
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::Const: st[sp++] = in.c; break;
      case Op::Var: st[sp++] = vals[in.slot]; break;
      case Op::Add: --sp; st[sp - 1] = st[sp - 1] + st[sp]; break;
      case Op::Sub: --sp; st[sp - 1] = st[sp - 1] - st[sp]; break;
      case Op::Mul: --sp; st[sp - 1] = st[sp - 1] * st[sp]; break;
      case Op::Neg: st[sp - 1] = -st[sp - 1]; break;
      case Op::Div:
      case Op::Pow:
        --sp;
        st[sp - 1] = apply_binary(in.op, st[sp - 1], st[sp]);
        break;
      default: st[sp - 1] = apply_unary(in.op, st[sp - 1]); break;
    }
  }
  return code_.empty() ? 0.0 : st[0];
}

// ---- differentiation ------------------------------------------------------

Expr diff(const Expr& e, const std::string& v) {
  switch (e.op()) {
    case Op::Const: return Expr(0.0);
    case Op::Var: return Expr(e.name() == v ? 1.0 : 0.0);
    default: break;
  }
  const Expr& u = e.arg(0);
  Expr du = diff(u, v);
  switch (e.op()) {
    case Op::Neg: return -du;
    case Op::Sin: return apply(Op::Cos, u) * du;
    case Op::Cos: return -(apply(Op::Sin, u) * du);
    case Op::Tan: return du / pow(apply(Op::Cos, u), Expr(2.0));
    case Op::Atan: return du / (Expr(1.0) + pow(u, Expr(2.0)));
    case Op::Exp: return apply(Op::Exp, u) * du;
    case Op::Log: return du / u;
    case Op::Sqrt: return du / (Expr(2.0) * apply(Op::Sqrt, u));
    case Op::Tanh: return (Expr(1.0) - pow(apply(Op::Tanh, u), Expr(2.0))) * du;
    default: break;
  }
  const Expr& w = e.arg(1);
  Expr dw = diff(w, v);
  switch (e.op()) {
    case Op::Add: return du + dw;
    case Op::Sub: return du - dw;
    case Op::Mul: return du * w + u * dw;
    case Op::Div:
      if (dw.is_const(0.0)) return du / w;
      return (du * w - u * dw) / pow(w, Expr(2.0));
    default: break;
  }
  // pow
  if (dw.is_const(0.0) && !depends_on(w, v)) return w * pow(u, w - Expr(1.0)) * du;
  if (du.is_const(0.0) && !depends_on(u, v)) return e * apply(Op::Log, u) * dw;
  return e * (dw * apply(Op::Log, u) + w * du / u);
}

// ---- utilities ------------------------------------------------------------

Expr substitute(const Expr& e, const std::map<std::string, Expr>& repl) {
  switch (e.op()) {
    case Op::Const: return e;
    case Op::Var: {
      auto it = repl.find(e.name());
      return it == repl.end() ? e : it->second;
    }
    default: break;
  }
  Expr a = substitute(e.arg(0), repl);
  if (arity(e.op()) == 1) return apply(e.op(), a);
  Expr b = substitute(e.arg(1), repl);
  switch (e.op()) {
    case Op::Add: return a + b;
    case Op::Sub: return print(a) == print(b) ? Expr(0.0) : a - b;
    case Op::Mul: return a * b;
    case Op::Div: return a / b;
    default: return pow(a, b);
  }
}

namespace {
void collect(const Expr& e, std::set<std::string>& out) {
  if (e.op() == Op::Var) out.insert(e.name());
  for (int i = 0; i < arity(e.op()); ++i) collect(e.arg(i), out);
}
}  // namespace

std::set<std::string> free_variables(const Expr& e) {
  std::set<std::string> out;
  collect(e, out);
  return out;
}

bool depends_on(const Expr& e, const std::string& var) {
  if (e.op() == Op::Var) return e.name() == var;
  for (int i = 0; i < arity(e.op()); ++i)
    if (depends_on(e.arg(i), var)) return true;
  return false;
}

bool depends_on_any(const Expr& e, const std::vector<std::string>& vars) {
  auto fv = free_variables(e);
  for (const auto& v : vars)
    if (fv.count(v)) return true;
  return false;
}

std::size_t node_count(const Expr& e) {
  std::size_t n = 1;
  for (int i = 0; i < arity(e.op()); ++i) n += node_count(e.arg(i));
  return n;
}

}  // namespace kfield
