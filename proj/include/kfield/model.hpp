#pragma once

#include <span>
#include <string>
#include <vector>

#include "kfield/expr.hpp"

namespace kfield {

enum class Kind { Hamiltonian, Lagrangian };
enum class Formalism { KSymplectic, KCosymplectic };

const char* to_string(Kind k);
const char* to_string(Formalism f);

struct CoordFrame {
  int k = 1;
  int n = 1;
  std::vector<std::string> x;               // [a]
  std::vector<std::string> q;               // [i]
  std::vector<std::vector<std::string>> p;  // [a][i]
  std::vector<std::vector<std::string>> v;  // [i][a]

  static CoordFrame standard(int k, int n);

  // x (cosymplectic only), q, then p or v flattened alpha-major.
  std::vector<std::string> coordinates(Kind kind, bool cosymplectic) const;
  int dim(bool cosymplectic) const { return (cosymplectic ? k : 0) + n * (k + 1); }
  const std::string& vel(int i, int a) const { return v[i][a]; }
  void check() const;  // SchemaError on size or name problems
};

struct SystemDef {
  std::string name;
  CoordFrame frame;
  Kind kind = Kind::Hamiltonian;
  Formalism formalism = Formalism::KSymplectic;
  Expr expression;
  Assignment params;

  bool cosymplectic() const { return formalism == Formalism::KCosymplectic; }
  int k() const { return frame.k; }
  int n() const { return frame.n; }
  int dim() const { return frame.dim(cosymplectic()); }
  std::vector<std::string> coordinates() const { return frame.coordinates(kind, cosymplectic()); }
  // coordinates followed by parameter names; the slot order used for compiling
  std::vector<std::string> slots() const;
  // coordinate values followed by parameter values
  std::vector<double> point(std::span<const double> coords) const;
  // fiber name (p^a_i or v^i_a) at flattened slot (a,i)
  const std::string& fiber(int a, int i) const { return kind == Kind::Hamiltonian ? frame.p[a][i] : frame.v[i][a]; }
  int offset_q() const { return cosymplectic() ? k() : 0; }
  int offset_fiber() const { return offset_q() + n(); }
};

// Throws FreeVariableError / FormalismError / SchemaError.
void validate_system(const SystemDef& s);
SystemDef load_system(const std::string& json_text);
std::string print_system(const SystemDef& s);

// Components of a k-vector field in adapted coordinates. fiber[a][b][i] is the
// component of X_a along p^b_i (hamiltonian) or v^i_b (lagrangian).
struct KVectorField {
  int k = 0;
  int n = 0;
  bool has_base = false;
  std::vector<std::vector<Expr>> base;                 // [a][b]
  std::vector<std::vector<Expr>> config;               // [a][i]
  std::vector<std::vector<std::vector<Expr>>> fiber;   // [a][b][i]

  static KVectorField zero(int k, int n, bool has_base);
  KVectorField operator+(const KVectorField& o) const;
  // X_a as a length-d component vector in coordinate order
  std::vector<Expr> components(int a) const;
};

void validate_field(const KVectorField& X, const SystemDef& s);

}  // namespace kfield
