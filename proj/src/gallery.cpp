#include "kfield/gallery.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <numbers>

#include "json.hpp"

namespace kfield::gallery {

namespace {

using ojson = nlohmann::ordered_json;
constexpr double kPi = std::numbers::pi;

// Resolved parameters plus the shape they imply.
struct Ctx {
  int k = 1, n = 1;
  Assignment p;
  CoordFrame f;
  double operator[](const std::string& nm) const { return p.at(nm); }
};

using Builder = std::function<std::string(const Ctx&)>;
using SolFn = std::function<AnalyticSolution(const Ctx&)>;

struct Entry {
  EntryInfo meta;
  std::function<std::pair<int, int>(const Assignment&)> shape;       // (k, n) from shape params
  std::function<Assignment(int k)> extras;                            // per-axis params and defaults
  std::function<void(const Ctx&)> check;                              // BadParam
  Builder hamiltonian, lagrangian;
  std::vector<std::pair<std::string, SolFn>> solutions;
};

std::string num(int v) { return std::to_string(v); }

// "t0 + t1 + ..." over a = 0..k-1
std::string join(int k, const std::function<std::string(int)>& term, const char* sep = " + ") {
  std::string s;
  for (int a = 0; a < k; ++a) s += (a ? sep : "") + term(a);
  return s;
}

Grid box(std::vector<Axis> axes) { return Grid{std::move(axes)}; }
Grid cube(int k, double lo, double hi, int count) { return Grid{std::vector<Axis>(static_cast<std::size_t>(k), {lo, hi, count})}; }

void need(bool ok, const std::string& msg) {
  if (!ok) throw BadParam(msg);
}

// Minkowski sign for axis a: x1 is time-like.
double eta(int a) { return a == 0 ? -1.0 : 1.0; }
std::string eta_sum(const Ctx& c, bool momenta) {
  return join(c.k, [&](int a) {
    const std::string& nm = momenta ? c.f.p[a][0] : c.f.v[0][a];
    return (a == 0 ? "-" : "") + nm + "^2";
  });
}

// ---- solutions -----------------------------------------------------------

AnalyticSolution plane_wave_kg(const Ctx& c, double two_f_minus_m2) {
  need(c.k >= 2, "plane_wave needs k >= 2");
  double kap = c["kappa"], w2 = kap * kap + two_f_minus_m2;
  need(w2 >= 0.0, "plane_wave needs kappa^2 + 2f - m^2 >= 0");
  double w = std::sqrt(w2);
  int k = c.k;
  AnalyticSolution s;
  s.name = "plane_wave";
  s.description = "cos(omega*x1 - kappa*x2), omega^2 = kappa^2 + 2f - m^2";
  s.validity = "all x; periodic in x2 when kappa = 1 on [0, 2pi]";
  s.psi = [=](std::span<const double> x, std::span<double> o) { o[0] = std::cos(w * x[0] - kap * x[1]); };
  s.gradient = [=](std::span<const double> x, std::span<double> o) {
    double sn = std::sin(w * x[0] - kap * x[1]);
    for (int a = 0; a < k; ++a) o[a] = 0.0;
    o[0] = -w * sn;
    o[1] = kap * sn;
  };
  s.momenta = [=](std::span<const double> x, std::span<double> o) {
    double sn = std::sin(w * x[0] - kap * x[1]);
    for (int a = 0; a < k; ++a) o[a] = 0.0;
    o[0] = eta(0) * -w * sn;
    o[1] = eta(1) * kap * sn;
  };
  std::vector<Axis> ax(static_cast<std::size_t>(k), {0.0, 2 * kPi, 17});
  ax[0] = {0.0, 1.0, 17};
  s.domain = box(ax);
  return s;
}

Entry electrostatic() {
  Entry e;
  e.meta = {"electrostatic", "Poisson equation for the electrostatic potential, charge density r",
            {"hamiltonian", "lagrangian"}, Formalism::KSymplectic, {{"r", 1.0}}, {}, {"quadratic"},
            {"laplace", "electrostatic_cosym"}, {}, {Recipe::Elliptic, 0, Boundary::Dirichlet, "quadratic"}};
  e.shape = [](const Assignment&) { return std::pair{3, 1}; };
  e.hamiltonian = [](const Ctx&) { return std::string("4*pi*r*q + 0.5*(p1^2 + p2^2 + p3^2)"); };
  e.lagrangian = [](const Ctx&) { return std::string("0.5*(v1^2 + v2^2 + v3^2) - 4*pi*r*q"); };
  e.solutions.push_back({"quadratic", [](const Ctx& c) {
    double A = -2.0 * kPi * c["r"] / 3.0;
    AnalyticSolution s;
    s.name = "quadratic";
    s.description = "-(2 pi r / 3)(x1^2 + x2^2 + x3^2)";
    s.validity = "all x";
    s.psi = [=](auto x, auto o) { o[0] = A * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); };
    s.gradient = [=](auto x, auto o) {
      for (int a = 0; a < 3; ++a) o[a] = 2 * A * x[a];
    };
    s.momenta = s.gradient;
    s.domain = cube(3, -1.0, 1.0, 9);
    return s;
  }});
  return e;
}

Entry electrostatic_cosym() {
  Entry e;
  e.meta = {"electrostatic_cosym",
            "electrostatics with charge density r + s*x1 and a constant diagonal metric (g1, g2, g3)",
            {"hamiltonian"}, Formalism::KCosymplectic,
            {{"r", 1.0}, {"s", 0.5}, {"g1", 1.0}, {"g2", 1.0}, {"g3", 1.0}}, {}, {"cubic"},
            {"electrostatic"}, {}, {Recipe::None, 0, Boundary::Dirichlet, ""}};
  e.shape = [](const Assignment&) { return std::pair{3, 1}; };
  e.check = [](const Ctx& c) {
    for (const char* g : {"g1", "g2", "g3"}) need(c[g] > 0.0, std::string(g) + " must be positive");
  };
  e.hamiltonian = [](const Ctx&) {
    return std::string("4*pi*(r + s*x1)*sqrt(g1*g2*g3)*q + (g1*p1^2 + g2*p2^2 + g3*p3^2)/(2*sqrt(g1*g2*g3))");
  };
  e.solutions.push_back({"cubic", [](const Ctx& c) {
    double g[3] = {c["g1"], c["g2"], c["g3"]};
    double rg = std::sqrt(g[0] * g[1] * g[2]);
    double A = -2.0 * kPi * c["r"] / (1 / g[0] + 1 / g[1] + 1 / g[2]);
    double B = -2.0 * kPi * c["s"] * g[0] / 3.0;
    AnalyticSolution s;
    s.name = "cubic";
    s.description = "A|x|^2 + B x1^3 with sum_a psi_aa / g_a = -4 pi (r + s x1)";
    s.validity = "all x";
    s.psi = [=](auto x, auto o) { o[0] = A * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) + B * x[0] * x[0] * x[0]; };
    s.gradient = [=](auto x, auto o) {
      for (int a = 0; a < 3; ++a) o[a] = 2 * A * x[a];
      o[0] += 3 * B * x[0] * x[0];
    };
    s.momenta = [=](auto x, auto o) {
      for (int a = 0; a < 3; ++a) o[a] = rg * 2 * A * x[a] / g[a];
      o[0] += rg * 3 * B * x[0] * x[0] / g[0];
    };
    s.domain = cube(3, -1.0, 1.0, 9);
    return s;
  }});
  return e;
}

Entry wave() {
  Entry e;
  e.meta = {"wave", "linear wave equation in n space dimensions, speed c; time is the last axis",
            {"hamiltonian", "lagrangian"}, Formalism::KSymplectic, {{"n", 1.0}, {"c", 1.0}}, {"n"},
            {"dalembert"}, {}, {}, {Recipe::Hyperbolic, -1, Boundary::Periodic, "dalembert"}};
  e.shape = [](const Assignment& p) { return std::pair{static_cast<int>(p.at("n")) + 1, 1}; };
  e.check = [](const Ctx& c) { need(c["c"] != 0.0, "c must be nonzero"); };
  e.hamiltonian = [](const Ctx& c) {
    int n = c.k - 1;
    return "0.5*(" + c.f.p[n][0] + "^2 - (" + join(n, [&](int a) { return c.f.p[a][0] + "^2"; }) + ")/c^2)";
  };
  e.lagrangian = [](const Ctx& c) {
    int n = c.k - 1;
    return "0.5*(" + c.f.v[0][n] + "^2 - c^2*(" + join(n, [&](int a) { return c.f.v[0][a] + "^2"; }) + "))";
  };
  e.solutions.push_back({"dalembert", [](const Ctx& c) {
    double sp = c["c"];
    int k = c.k, T = k - 1;
    AnalyticSolution s;
    s.name = "dalembert";
    s.description = "sin(x1 - c t), t the last axis";
    s.validity = "all x; 2pi-periodic in space";
    s.psi = [=](auto x, auto o) { o[0] = std::sin(x[0] - sp * x[T]); };
    s.gradient = [=](auto x, auto o) {
      double cs = std::cos(x[0] - sp * x[T]);
      for (int a = 0; a < k; ++a) o[a] = 0.0;
      o[0] = cs;
      o[T] = -sp * cs;
    };
    s.momenta = [=](auto x, auto o) {
      double cs = std::cos(x[0] - sp * x[T]);
      for (int a = 0; a < k; ++a) o[a] = 0.0;
      o[0] = -sp * sp * cs;
      o[T] = -sp * cs;
    };
    std::vector<Axis> ax(static_cast<std::size_t>(k), {0.0, 2 * kPi, 33});
    ax[static_cast<std::size_t>(T)] = {0.0, 1.0, 33};
    s.domain = box(ax);
    return s;
  }});
  return e;
}

Entry laplace() {
  Entry e;
  e.meta = {"laplace", "Laplace equation in n dimensions (k = n)", {"hamiltonian", "lagrangian"},
            Formalism::KSymplectic, {{"n", 2.0}}, {"n"}, {"quadratic", "linear"}, {"electrostatic"}, {},
            {Recipe::Elliptic, 0, Boundary::Dirichlet, "quadratic"}};
  e.shape = [](const Assignment& p) { return std::pair{static_cast<int>(p.at("n")), 1}; };
  e.hamiltonian = [](const Ctx& c) { return "0.5*(" + join(c.k, [&](int a) { return c.f.p[a][0] + "^2"; }) + ")"; };
  e.lagrangian = [](const Ctx& c) { return "0.5*(" + join(c.k, [&](int a) { return c.f.v[0][a] + "^2"; }) + ")"; };
  e.solutions.push_back({"quadratic", [](const Ctx& c) {
    if (c.k < 2) throw UnknownSolution("laplace/quadratic needs n >= 2");
    int k = c.k;
    AnalyticSolution s;
    s.name = "quadratic";
    s.description = "x1^2 - x2^2";
    s.validity = "all x";
    s.psi = [](auto x, auto o) { o[0] = x[0] * x[0] - x[1] * x[1]; };
    s.gradient = [=](auto x, auto o) {
      for (int a = 0; a < k; ++a) o[a] = 0.0;
      o[0] = 2 * x[0];
      o[1] = -2 * x[1];
    };
    s.momenta = s.gradient;
    s.domain = cube(k, 0.0, 1.0, 17);
    return s;
  }});
  e.solutions.push_back({"linear", [](const Ctx& c) {
    int k = c.k;
    AnalyticSolution s;
    s.name = "linear";
    s.description = "x1 + 2 x2 + ... + k xk";
    s.validity = "all x";
    s.psi = [=](auto x, auto o) {
      o[0] = 0.0;
      for (int a = 0; a < k; ++a) o[0] += (a + 1) * x[a];
    };
    s.gradient = [=](auto, auto o) {
      for (int a = 0; a < k; ++a) o[a] = a + 1;
    };
    s.momenta = s.gradient;
    s.domain = cube(k, 0.0, 1.0, 17);
    return s;
  }});
  return e;
}

Entry sine_gordon() {
  Entry e;
  e.meta = {"sine_gordon", "Sine-Gordon equation; x1 is time-like, a the wave speed",
            {"lagrangian", "hamiltonian"}, Formalism::KSymplectic,
            {{"a", 1.0}, {"Omega", 1.0}, {"speed", 0.5}}, {}, {"kink"}, {"ginzburg_landau"}, {},
            {Recipe::Hyperbolic, 0, Boundary::Dirichlet, "kink"}};
  e.shape = [](const Assignment&) { return std::pair{2, 1}; };
  e.check = [](const Ctx& c) { need(c["a"] != 0.0, "a must be nonzero"); };
  e.lagrangian = [](const Ctx&) { return std::string("0.5*(v1^2 - a^2*v2^2) - Omega^2*(1 - cos(q))"); };
  e.hamiltonian = [](const Ctx&) { return std::string("0.5*(p1^2 - p2^2/a^2) - Omega^2*cos(q)"); };
  e.solutions.push_back({"kink", [](const Ctx& c) {
    double a = c["a"], om = c["Omega"], v = c["speed"];
    need(v * v < a * a, "kink needs speed^2 < a^2");
    double kap = om / std::sqrt(a * a - v * v);
    AnalyticSolution s;
    s.name = "kink";
    s.description = "4 atan(exp(kappa (x2 - speed x1))), kappa = Omega / sqrt(a^2 - speed^2)";
    s.validity = "all x";
    s.psi = [=](auto x, auto o) { o[0] = 4.0 * std::atan(std::exp(kap * (x[1] - v * x[0]))); };
    s.gradient = [=](auto x, auto o) {
      double d = 2.0 * kap / std::cosh(kap * (x[1] - v * x[0]));
      o[0] = -v * d;
      o[1] = d;
    };
    s.momenta = [=](auto x, auto o) {
      double d = 2.0 * kap / std::cosh(kap * (x[1] - v * x[0]));
      o[0] = -v * d;
      o[1] = -a * a * d;
    };
    s.domain = box({{0.0, 1.0, 33}, {-6.0, 6.0, 33}});
    return s;
  }});
  return e;
}

Entry ginzburg_landau() {
  Entry e;
  e.meta = {"ginzburg_landau", "Ginzburg-Landau (phi^4) equation; x1 is time-like",
            {"lagrangian", "hamiltonian"}, Formalism::KSymplectic, {{"a", 1.0}, {"lambda", 1.0}, {"w", 0.5}},
            {}, {"kink"}, {"sine_gordon"}, {}, {Recipe::Hyperbolic, 0, Boundary::Dirichlet, "kink"}};
  e.shape = [](const Assignment&) { return std::pair{2, 1}; };
  e.check = [](const Ctx& c) { need(c["a"] != 0.0, "a must be nonzero"); };
  e.lagrangian = [](const Ctx&) { return std::string("0.5*(v1^2 - a^2*v2^2) + lambda*(q^2 - 1)^2"); };
  e.hamiltonian = [](const Ctx&) { return std::string("0.5*(p1^2 - p2^2/a^2) - lambda*(q^2 - 1)^2"); };
  e.solutions.push_back({"kink", [](const Ctx& c) {
    double a = c["a"], lam = c["lambda"], w = c["w"];
    need(lam > 0.0 && a * a * w * w < 1.0, "kink needs lambda > 0 and a^2 w^2 < 1");
    double kap = std::sqrt(2.0 * lam / (1.0 - a * a * w * w));
    AnalyticSolution s;
    s.name = "kink";
    s.description = "tanh(kappa (x1 - w x2)), kappa = sqrt(2 lambda / (1 - a^2 w^2))";
    s.validity = "all x";
    s.psi = [=](auto x, auto o) { o[0] = std::tanh(kap * (x[0] - w * x[1])); };
    s.gradient = [=](auto x, auto o) {
      double c2 = std::cosh(kap * (x[0] - w * x[1]));
      double d = kap / (c2 * c2);
      o[0] = d;
      o[1] = -w * d;
    };
    s.momenta = [=](auto x, auto o) {
      double c2 = std::cosh(kap * (x[0] - w * x[1]));
      double d = kap / (c2 * c2);
      o[0] = d;
      o[1] = a * a * w * d;
    };
    s.domain = box({{0.0, 0.5, 33}, {-2.0, 2.0, 33}});
    return s;
  }});
  return e;
}

Entry quadratic() {
  Entry e;
  e.meta = {"quadratic",
            "quadratic system with constant diagonal metrics g_a (one per axis) and V = m^2 |q|^2 / 2",
            {"hamiltonian", "lagrangian"}, Formalism::KSymplectic,
            {{"k", 2.0}, {"n", 2.0}, {"m", 1.0}, {"g1", 1.0}, {"g2", 2.0}}, {"k", "n"}, {"cosine"}, {}, {},
            {Recipe::Elliptic, 0, Boundary::Dirichlet, "cosine"}};
  e.shape = [](const Assignment& p) { return std::pair{static_cast<int>(p.at("k")), static_cast<int>(p.at("n"))}; };
  e.extras = [](int k) {
    Assignment a;
    for (int i = 1; i <= k; ++i) a["g" + num(i)] = i;
    return a;
  };
  e.check = [](const Ctx& c) {
    for (int a = 1; a <= c.k; ++a) need(c["g" + num(a)] != 0.0, "g" + num(a) + " must be nonzero");
  };
  e.hamiltonian = [](const Ctx& c) {
    std::string kin = join(c.k, [&](int a) {
      return "(" + join(c.n, [&](int i) { return c.f.p[a][i] + "^2"; }) + ")/(2*g" + num(a + 1) + ")";
    });
    return kin + " + 0.5*m^2*(" + join(c.n, [&](int i) { return c.f.q[i] + "^2"; }) + ")";
  };
  e.lagrangian = [](const Ctx& c) {
    std::string kin = join(c.k, [&](int a) {
      return "0.5*g" + num(a + 1) + "*(" + join(c.n, [&](int i) { return c.f.v[i][a] + "^2"; }) + ")";
    });
    return kin + " - 0.5*m^2*(" + join(c.n, [&](int i) { return c.f.q[i] + "^2"; }) + ")";
  };
  e.solutions.push_back({"cosine", [](const Ctx& c) {
    need(c["g1"] > 0.0, "cosine needs g1 > 0");
    int k = c.k, n = c.n;
    double w = c["m"] / std::sqrt(c["g1"]);
    std::vector<double> g;
    for (int a = 1; a <= k; ++a) g.push_back(c["g" + num(a)]);
    AnalyticSolution s;
    s.name = "cosine";
    s.description = "every component cos(m x1 / sqrt(g1))";
    s.validity = "all x";
    s.psi = [=](auto x, auto o) {
      for (int i = 0; i < n; ++i) o[i] = std::cos(w * x[0]);
    };
    s.gradient = [=](auto x, auto o) {
      for (int j = 0; j < k * n; ++j) o[j] = 0.0;
      for (int i = 0; i < n; ++i) o[i] = -w * std::sin(w * x[0]);
    };
    s.momenta = [=](auto x, auto o) {
      for (int j = 0; j < k * n; ++j) o[j] = 0.0;
      for (int i = 0; i < n; ++i) o[i] = -g[0] * w * std::sin(w * x[0]);
    };
    s.domain = cube(k, 0.0, 1.0, 17);
    return s;
  }});
  return e;
}

Entry navier() {
  Entry e;
  e.meta = {"navier", "linear elasticity in the plane (Lame constants lambda, mu)", {"lagrangian"},
            Formalism::KSymplectic, {{"lambda", 1.0}, {"mu", 1.0}}, {}, {"linear"}, {}, {},
            {Recipe::Elliptic, 0, Boundary::Dirichlet, "linear"}};
  e.shape = [](const Assignment&) { return std::pair{2, 2}; };
  e.lagrangian = [](const Ctx&) {
    return std::string("(0.5*lambda + mu)*(v11^2 + v22^2) + 0.5*mu*(v12^2 + v21^2) + (lambda + mu)*v11*v22");
  };
  e.solutions.push_back({"linear", [](const Ctx&) {
    AnalyticSolution s;
    s.name = "linear";
    s.description = "(x1, -x2)";
    s.validity = "all x";
    s.psi = [](auto x, auto o) {
      o[0] = x[0];
      o[1] = -x[1];
    };
    // [a*n+i]
    s.gradient = [](auto, auto o) {
      o[0] = 1.0;
      o[1] = 0.0;
      o[2] = 0.0;
      o[3] = -1.0;
    };
    s.domain = cube(2, 0.0, 1.0, 17);
    return s;
  }});
  return e;
}

Entry minimal_surface() {
  Entry e;
  e.meta = {"minimal_surface", "minimal surface graphs over the plane", {"lagrangian"}, Formalism::KSymplectic,
            {}, {}, {"plane", "catenoid"}, {}, {}, {Recipe::Elliptic, 0, Boundary::Dirichlet, "plane"}};
  e.shape = [](const Assignment&) { return std::pair{2, 1}; };
  e.lagrangian = [](const Ctx&) { return std::string("sqrt(1 + v1^2 + v2^2)"); };
  e.solutions.push_back({"plane", [](const Ctx&) {
    AnalyticSolution s;
    s.name = "plane";
    s.description = "0.3 x1 + 0.7 x2";
    s.validity = "all x";
    s.psi = [](auto x, auto o) { o[0] = 0.3 * x[0] + 0.7 * x[1]; };
    s.gradient = [](auto, auto o) {
      o[0] = 0.3;
      o[1] = 0.7;
    };
    s.domain = cube(2, 0.0, 1.0, 17);
    return s;
  }});
  e.solutions.push_back({"catenoid", [](const Ctx&) {
    AnalyticSolution s;
    s.name = "catenoid";
    s.description = "acosh(sqrt(x1^2 + x2^2)), the upper half of a catenoid";
    s.validity = "x1^2 + x2^2 > 1";
    s.psi = [](auto x, auto o) { o[0] = std::acosh(std::hypot(x[0], x[1])); };
    s.gradient = [](auto x, auto o) {
      double r = std::hypot(x[0], x[1]), d = r * std::sqrt(r * r - 1.0);
      o[0] = x[0] / d;
      o[1] = x[1] / d;
    };
    s.domain = box({{1.5, 2.5, 17}, {-0.5, 0.5, 17}});
    return s;
  }});
  return e;
}

Entry scalar_field(bool cosym) {
  Entry e;
  e.meta = {cosym ? "scalar_field_cosym" : "scalar_field",
            "scalar field on Minkowski space, F(q) = f q^2; x1 is time-like",
            {"hamiltonian", "lagrangian"}, cosym ? Formalism::KCosymplectic : Formalism::KSymplectic,
            {{"k", 4.0}, {"m", 1.0}, {"f", 1.0}, {"kappa", 1.0}}, {"k"}, {"plane_wave"},
            {cosym ? "scalar_field" : "scalar_field_cosym", "klein_gordon", "scalar_field_hj"}, {},
            {Recipe::Hyperbolic, 0, Boundary::Periodic, "plane_wave"}};
  e.shape = [](const Assignment& p) { return std::pair{static_cast<int>(p.at("k")), 1}; };
  e.hamiltonian = [](const Ctx& c) { return "0.5*(" + eta_sum(c, true) + ") - (f*q^2 - 0.5*m^2*q^2)"; };
  e.lagrangian = [](const Ctx& c) { return "(f*q^2 - 0.5*m^2*q^2) + 0.5*(" + eta_sum(c, false) + ")"; };
  e.solutions.push_back({"plane_wave", [](const Ctx& c) {
    return plane_wave_kg(c, 2 * c["f"] - c["m"] * c["m"]);
  }});
  return e;
}

Entry klein_gordon() {
  Entry e;
  e.meta = {"klein_gordon", "Klein-Gordon equation, the scalar field with F = m^2 q^2",
            {"hamiltonian", "lagrangian"}, Formalism::KSymplectic, {{"k", 4.0}, {"m", 1.0}, {"kappa", 1.0}},
            {"k"}, {"plane_wave"}, {"scalar_field"}, {}, {Recipe::Hyperbolic, 0, Boundary::Periodic, "plane_wave"}};
  e.shape = [](const Assignment& p) { return std::pair{static_cast<int>(p.at("k")), 1}; };
  e.hamiltonian = [](const Ctx& c) { return "0.5*(" + eta_sum(c, true) + ") - 0.5*m^2*q^2"; };
  e.lagrangian = [](const Ctx& c) { return "0.5*m^2*q^2 + 0.5*(" + eta_sum(c, false) + ")"; };
  e.solutions.push_back({"plane_wave", [](const Ctx& c) { return plane_wave_kg(c, c["m"] * c["m"]); }});
  return e;
}

Entry scalar_field_hj() {
  Entry e;
  e.meta = {"scalar_field_hj", "massless-potential scalar field used for the Hamilton-Jacobi example",
            {"hamiltonian"}, Formalism::KCosymplectic,
            {{"k", 4.0}, {"m", 1.0}, {"f", 0.5}, {"C0", 4.0}, {"C1", 1.0}, {"C2", 1.0}, {"C3", 0.0}, {"C4", 0.0}},
            {"k"}, {"rational"}, {"scalar_field"}, {"0.5*C1*q^2", "0.5*C2*q^2", "0.5*C3*q^2", "0.5*C4*q^2"},
            {Recipe::None, 0, Boundary::Dirichlet, ""}};
  e.shape = [](const Assignment& p) { return std::pair{static_cast<int>(p.at("k")), 1}; };
  e.extras = [](int k) {
    Assignment a;
    for (int i = 1; i <= k; ++i) a["C" + num(i)] = i <= 2 ? 1.0 : 0.0;
    return a;
  };
  e.hamiltonian = [](const Ctx& c) { return "0.5*(" + eta_sum(c, true) + ") - (f*q^2 - 0.5*m^2*q^2)"; };
  e.solutions.push_back({"rational", [](const Ctx& c) {
    int k = c.k;
    std::vector<double> C;  // signed coefficients of the denominator
    for (int a = 1; a <= k; ++a) C.push_back((a == 1 ? 1.0 : -1.0) * c["C" + num(a)]);
    std::vector<double> Cp;
    for (int a = 1; a <= k; ++a) Cp.push_back(c["C" + num(a)]);
    double C0 = c["C0"];
    auto den = [=](std::span<const double> x) {
      double d = C0;
      for (int a = 0; a < k; ++a) d += C[a] * x[a];
      return d;
    };
    AnalyticSolution s;
    s.name = "rational";
    s.description = "2 / (C1 x1 - C2 x2 - ... - Ck xk + C0)";
    s.validity = "away from the zero set of the denominator";
    s.psi = [=](auto x, auto o) { o[0] = 2.0 / den(x); };
    s.gradient = [=](auto x, auto o) {
      double d = den(x);
      for (int a = 0; a < k; ++a) o[a] = -2.0 * C[a] / (d * d);
    };
    s.momenta = [=](auto x, auto o) {
      double p = 2.0 / den(x);
      for (int a = 0; a < k; ++a) o[a] = 0.5 * Cp[a] * p * p;
    };
    s.domain = cube(k, 0.0, 1.0, 17);
    return s;
  }});
  return e;
}

Entry vibrating_string() {
  Entry e;
  e.meta = {"vibrating_string", "vibrating string with density sigma and tension tau",
            {"hamiltonian", "lagrangian"}, Formalism::KSymplectic,
            {{"sigma", 1.0}, {"tau", 1.0}, {"a", 1.0}, {"b", 1.0}, {"C", 1.0}}, {}, {"exp"}, {"wave"},
            {"a*q", "b*q"}, {Recipe::None, 0, Boundary::Dirichlet, ""}};
  e.shape = [](const Assignment&) { return std::pair{2, 1}; };
  e.check = [](const Ctx& c) { need(c["sigma"] != 0.0 && c["tau"] != 0.0, "sigma and tau must be nonzero"); };
  e.hamiltonian = [](const Ctx&) { return std::string("0.5*(p1^2/sigma - p2^2/tau)"); };
  e.lagrangian = [](const Ctx&) { return std::string("0.5*(sigma*v1^2 - tau*v2^2)"); };
  e.solutions.push_back({"exp", [](const Ctx& c) {
    double a = c["a"], b = c["b"], sg = c["sigma"], ta = c["tau"], C = c["C"];
    double u = a / sg, w = -b / ta;
    AnalyticSolution s;
    s.name = "exp";
    s.description = "C exp((a/sigma) x1 - (b/tau) x2)";
    s.validity = "all x; solves the field equations when tau a^2 = sigma b^2";
    s.psi = [=](auto x, auto o) { o[0] = C * std::exp(u * x[0] + w * x[1]); };
    s.gradient = [=](auto x, auto o) {
      double p = C * std::exp(u * x[0] + w * x[1]);
      o[0] = u * p;
      o[1] = w * p;
    };
    s.momenta = [=](auto x, auto o) {
      double p = C * std::exp(u * x[0] + w * x[1]);
      o[0] = a * p;
      o[1] = b * p;
    };
    s.domain = cube(2, 0.0, 1.0, 65);
    return s;
  }});
  return e;
}

Entry maxwell_vacuum() {
  Entry e;
  e.meta = {"maxwell_vacuum", "source-free electromagnetic potential A on Minkowski space (singular Lagrangian)",
            {"lagrangian"}, Formalism::KSymplectic, {}, {}, {"plane_wave"}, {}, {},
            {Recipe::None, 0, Boundary::Dirichlet, ""}};
  e.shape = [](const Assignment&) { return std::pair{4, 4}; };
  e.lagrangian = [](const Ctx&) {
    return std::string(
        "0.5*((v21 - v12)^2 + (v31 - v13)^2 + (v32 - v23)^2 - (v41 - v14)^2 - (v42 - v24)^2 - (v43 - v34)^2)");
  };
  e.solutions.push_back({"plane_wave", [](const Ctx&) {
    AnalyticSolution s;
    s.name = "plane_wave";
    s.description = "A = (0, sin(x1 - x4), 0, 0)";
    s.validity = "all x";
    s.psi = [](auto x, auto o) {
      o[0] = o[2] = o[3] = 0.0;
      o[1] = std::sin(x[0] - x[3]);
    };
    s.gradient = [](auto x, auto o) {
      for (int j = 0; j < 16; ++j) o[j] = 0.0;
      double c = std::cos(x[0] - x[3]);
      o[0 * 4 + 1] = c;
      o[3 * 4 + 1] = -c;
    };
    s.domain = cube(4, 0.0, 1.0, 9);
    return s;
  }});
  return e;
}

Entry harmonic_map_flat() {
  Entry e;
  e.meta = {"harmonic_map_flat", "harmonic maps between flat spaces", {"lagrangian"}, Formalism::KCosymplectic,
            {{"k", 2.0}, {"n", 2.0}}, {"k", "n"}, {"quadratic", "linear"}, {"laplace"}, {},
            {Recipe::Elliptic, 0, Boundary::Dirichlet, "quadratic"}};
  e.shape = [](const Assignment& p) { return std::pair{static_cast<int>(p.at("k")), static_cast<int>(p.at("n"))}; };
  e.lagrangian = [](const Ctx& c) {
    return "0.5*(" + join(c.k, [&](int a) { return join(c.n, [&](int i) { return c.f.v[i][a] + "^2"; }); }) + ")";
  };
  e.solutions.push_back({"quadratic", [](const Ctx& c) {
    if (c.k < 2) throw UnknownSolution("harmonic_map_flat/quadratic needs k >= 2");
    int k = c.k, n = c.n;
    AnalyticSolution s;
    s.name = "quadratic";
    s.description = "component i: x1^2 - x2^2 + i x1 x2";
    s.validity = "all x";
    s.psi = [=](auto x, auto o) {
      for (int i = 0; i < n; ++i) o[i] = x[0] * x[0] - x[1] * x[1] + (i + 1) * x[0] * x[1];
    };
    s.gradient = [=](auto x, auto o) {
      for (int j = 0; j < k * n; ++j) o[j] = 0.0;
      for (int i = 0; i < n; ++i) {
        o[i] = 2 * x[0] + (i + 1) * x[1];
        o[n + i] = -2 * x[1] + (i + 1) * x[0];
      }
    };
    s.domain = cube(k, 0.0, 1.0, 17);
    return s;
  }});
  e.solutions.push_back({"linear", [](const Ctx& c) {
    int k = c.k, n = c.n;
    AnalyticSolution s;
    s.name = "linear";
    s.description = "component i: sum_a (a + i) x_a";
    s.validity = "all x";
    s.psi = [=](auto x, auto o) {
      for (int i = 0; i < n; ++i) {
        o[i] = 0.0;
        for (int a = 0; a < k; ++a) o[i] += (a + i + 1) * x[a];
      }
    };
    s.gradient = [=](auto, auto o) {
      for (int a = 0; a < k; ++a)
        for (int i = 0; i < n; ++i) o[a * n + i] = a + i + 1;
    };
    s.domain = cube(k, 0.0, 1.0, 17);
    return s;
  }});
  return e;
}

const std::vector<Entry>& registry() {
  static const std::vector<Entry> r = [] {
    std::vector<Entry> v{electrostatic(),  electrostatic_cosym(), wave(),           laplace(),
                         sine_gordon(),    ginzburg_landau(),     quadratic(),      navier(),
                         minimal_surface(), scalar_field(false),  scalar_field(true), klein_gordon(),
                         scalar_field_hj(), vibrating_string(),   maxwell_vacuum(), harmonic_map_flat()};
    return v;
  }();
  return r;
}

const Entry& find(const std::string& name) {
  for (const auto& e : registry())
    if (e.meta.name == name) return e;
  throw UnknownEntry("unknown gallery entry '" + name + "'");
}

Ctx resolve(const Entry& e, const Assignment& user) {
  Assignment shape_p;
  for (const auto& nm : e.meta.shape) {
    auto it = user.find(nm);
    double v = it != user.end() ? it->second : e.meta.defaults.at(nm);
    if (!(v >= 1.0 && v <= 16.0) || v != std::floor(v))
      throw BadParam("shape parameter '" + nm + "' must be an integer in [1, 16]");
    shape_p[nm] = v;
  }
  Ctx c;
  std::tie(c.k, c.n) = e.shape(shape_p);
  c.f = CoordFrame::standard(c.k, c.n);

  Assignment all = e.meta.defaults;
  if (e.extras) {
    // per-axis parameters follow k; drop the ones past it
    for (auto it = all.begin(); it != all.end();) {
      bool per_axis = false;
      for (const auto& [nm, v] : e.extras(16)) per_axis |= nm == it->first;
      it = per_axis ? all.erase(it) : std::next(it);
    }
    for (const auto& [nm, v] : e.extras(c.k)) all[nm] = v;
  }
  for (const auto& [nm, v] : user) {
    if (!all.count(nm)) throw BadParam("unknown parameter '" + nm + "' for " + e.meta.name);
    if (!std::isfinite(v)) throw BadParam("parameter '" + nm + "' is not finite");
    all[nm] = v;
  }
  c.p = all;
  if (e.check) e.check(c);
  return c;
}

}  // namespace

std::vector<std::string> names() {
  std::vector<std::string> out;
  for (const auto& e : registry()) out.push_back(e.meta.name);
  return out;
}

const EntryInfo& info(const std::string& name) { return find(name).meta; }

SystemDef instantiate(const std::string& name, const Assignment& params) {
  const Entry& e = find(name);
  return instantiate(name, params, e.meta.forms.front() == "hamiltonian" ? Kind::Hamiltonian : Kind::Lagrangian);
}

SystemDef instantiate(const std::string& name, const Assignment& params, Kind form) {
  const Entry& e = find(name);
  const Builder& b = form == Kind::Hamiltonian ? e.hamiltonian : e.lagrangian;
  if (!b) throw UnknownEntry(name + " has no " + to_string(form) + " form");
  Ctx c = resolve(e, params);
  SystemDef s;
  s.name = name;
  s.frame = c.f;
  s.kind = form;
  s.formalism = e.meta.formalism;
  s.expression = parse(b(c));
  for (const auto& [nm, v] : c.p)
    if (std::find(e.meta.shape.begin(), e.meta.shape.end(), nm) == e.meta.shape.end()) s.params[nm] = v;
  validate_system(s);
  return s;
}

AnalyticSolution analytic_solution(const std::string& name, const std::string& which, const Assignment& params) {
  const Entry& e = find(name);
  for (const auto& [nm, fn] : e.solutions)
    if (nm == which) return fn(resolve(e, params));
  throw UnknownSolution("no analytic solution '" + which + "' for " + name);
}

GridSection sample(const AnalyticSolution& sol, const Grid& g, int n) {
  return sample_section(g, n, sol.psi, sol.momenta);
}

std::string list_json() {
  ojson arr = ojson::array();
  for (const auto& e : registry()) {
    const EntryInfo& m = e.meta;
    Ctx c = resolve(e, {});
    ojson j;
    j["name"] = m.name;
    j["description"] = m.description;
    j["formalism"] = to_string(m.formalism);
    j["forms"] = m.forms;
    j["k"] = c.k;
    j["n"] = c.n;
    j["defaults"] = c.p;
    j["shape_params"] = m.shape;
    j["solutions"] = m.solutions;
    j["see_also"] = m.see_also;
    if (!m.gamma.empty()) j["gamma"] = m.gamma;
    ojson r;
    r["kind"] = m.recipe.kind == Recipe::Hyperbolic ? "hyperbolic" : m.recipe.kind == Recipe::Elliptic ? "elliptic" : "none";
    if (m.recipe.kind == Recipe::Hyperbolic) {
      r["time_axis"] = m.recipe.time_axis < 0 ? c.k - 1 : m.recipe.time_axis;
      r["boundary"] = m.recipe.boundary == Boundary::Periodic ? "periodic" : "dirichlet";
    }
    if (!m.recipe.solution.empty()) r["data"] = m.recipe.solution;
    j["recipe"] = r;
    arr.push_back(j);
  }
  return arr.dump(2) + "\n";
}

}  // namespace kfield::gallery
