#include <cmath>
#include <random>

#include "doctest.h"
#include "kfield/gallery.hpp"
#include "kfield/hamiltonian.hpp"
#include "kfield/model.hpp"

using namespace kfield;

namespace {

const char* kSineGordon = R"J({"name": "sine_gordon", "kind": "lagrangian", "formalism": "k-symplectic",
  "k": 2, "n": 1, "expression": "0.5*(v1^2 - a^2*v2^2) - Omega^2*(1 - cos(q))",
  "params": {"a": 1.0, "Omega": 1.0}})J";

}  // namespace

TEST_CASE("load_system: sine-gordon") {
  SystemDef s = load_system(kSineGordon);
  CHECK(s.k() == 2);
  CHECK(s.n() == 1);
  CHECK(s.kind == Kind::Lagrangian);
  CHECK(s.coordinates() == std::vector<std::string>{"q", "v1", "v2"});
  CHECK(s.params.at("Omega") == 1.0);
}

TEST_CASE("load_system: schema and formalism errors") {
  std::string bad = kSineGordon;
  bad.replace(bad.find("cos(q)"), 6, "cos(x1)");
  CHECK_THROWS_AS(load_system(bad), FormalismError);
  CHECK_THROWS_AS(load_system(R"J({"name":"h","kind":"hamiltonian","formalism":"k-symplectic","k":1,"n":1,
    "expression":"0.5*p1^2 + z","params":{}})J"), FreeVariableError);
  CHECK_THROWS_AS(load_system(R"J({"name":"h","kind":"hamiltonian","formalism":"k-symplectic","k":1,"n":1,
    "expression":"0.5*v1^2","params":{}})J"), FreeVariableError);
  CHECK_THROWS_AS(load_system(R"J({"name":"h","kind":"hamiltonian","k":1,"n":1,"expression":"p1"})J"), SchemaError);
  CHECK_THROWS_AS(load_system(R"J({"name":"h","kind":"hamiltonian","formalism":"k-symplectic","k":1,"n":1,
    "expression":"p1","params":{},"extra":1})J"), SchemaError);
  CHECK_THROWS_AS(load_system("{not json"), SchemaError);
}

TEST_CASE("load_system: k=1 mechanics frame") {
  SystemDef s = load_system(R"J({"name":"particle","kind":"hamiltonian","formalism":"k-symplectic",
    "k":1,"n":1,"expression":"0.5*p1^2","params":{}})J");
  CHECK(s.dim() == 2);
  CHECK(s.coordinates() == std::vector<std::string>{"q", "p1"});
}

TEST_CASE("coordinate naming") {
  CoordFrame f = CoordFrame::standard(2, 2);
  CHECK(f.p[1][0] == "p21");
  CHECK(f.v[0][1] == "v12");
  CoordFrame big = CoordFrame::standard(10, 2);
  CHECK(big.p[9][1] == "p_10_2");
  CHECK(big.v[1][9] == "v_2_10");
  CHECK(CoordFrame::standard(1, 3).p[0][2] == "p3");
  CHECK(CoordFrame::standard(2, 2).coordinates(Kind::Hamiltonian, true) ==
        std::vector<std::string>{"x1", "x2", "q1", "q2", "p11", "p12", "p21", "p22"});
}

TEST_CASE("validate_field") {
  SystemDef s = gallery::instantiate("electrostatic");
  CHECK_NOTHROW(validate_field(KVectorField::zero(3, 1, false), s));
  CHECK_NOTHROW(validate_field(gauge_solution(s), s));
  KVectorField X = KVectorField::zero(3, 1, false);
  X.config[0][0] = parse("z");
  CHECK_THROWS_AS(validate_field(X, s), FreeVariableError);
  CHECK_THROWS_AS(validate_field(KVectorField::zero(2, 1, false), s), SchemaError);
}

TEST_CASE("print_system round trip over the gallery") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (const auto& name : gallery::names()) {
    for (const auto& form : gallery::info(name).forms) {
      SystemDef s = gallery::instantiate(name, {}, form == "hamiltonian" ? Kind::Hamiltonian : Kind::Lagrangian);
      SystemDef t = load_system(print_system(s));
      CHECK(t.coordinates() == s.coordinates());
      CHECK(t.params == s.params);
      for (int r = 0; r < 5; ++r) {
        Assignment at = s.params;
        for (const auto& c : s.coordinates()) at[c] = u(rng);
        double a = eval(s.expression, at), b = eval(t.expression, at);
        CHECK(std::fabs(a - b) <= 1e-12 * (1.0 + std::fabs(a)));
      }
    }
  }
}
