#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "kfield/cosymplectic.hpp"
#include "kfield/gallery.hpp"
#include "kfield/hamiltonian.hpp"
#include "kfield/hamjac.hpp"
#include "kfield/lagrangian.hpp"
#include "kfield/legendre.hpp"
#include "kfield/structures.hpp"

namespace kfield::cli {

namespace {

using nlohmann::json;

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Opts {
  std::string system, params, form, grid, out, section, solution, gamma, W, q0, point, box, file;
  std::string gallery_name;
  bool json = false, cosym = false, order = false;
  double tol = -1.0;
  int steps = -1, k = 1, n = 1, samples = 100, max_iters = 20000;
};

std::string num(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.10g", v);
  return b;
}

std::string scalar_text(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_float()) return num(j.get<double>());
  return j.dump();
}

bool flat(const json& j) {
  for (const auto& e : j)
    if (e.is_structured()) return false;
  return true;
}

std::string joined(const json& arr) {
  std::string s;
  for (const auto& e : arr) s += (s.empty() ? "" : ", ") + scalar_text(e);
  return s;
}

void render(const json& j, std::ostream& o, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  for (const auto& [key, v] : j.items()) {
    if (!v.is_structured()) {
      o << pad << key << ": " << scalar_text(v) << "\n";
    } else if (v.is_array() && flat(v)) {
      o << pad << key << ": " << joined(v) << "\n";
    } else if (v.is_object()) {
      o << pad << key << ":\n";
      render(v, o, indent + 2);
    } else {
      o << pad << key << ":\n";
      for (const auto& e : v) {
        if (e.is_object()) {
          o << pad << "  -\n";
          render(e, o, indent + 4);
        } else if (e.is_array() && flat(e)) {
          o << pad << "  " << joined(e) << "\n";
        } else {
          o << pad << "  " << e.dump() << "\n";
        }
      }
    }
  }
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Usage("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void spill(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text)) throw Usage("cannot write " + path);
}

double to_number(const std::string& t) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw Usage("not a number: '" + t + "'");
  }
  if (used != t.size()) throw Usage("not a number: '" + t + "'");
  return v;
}

// Split at commas outside parentheses.
std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::string cur;
  int depth = 0;
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty() || !parts.empty()) parts.push_back(cur);
  return parts;
}

std::vector<double> numbers(const std::string& text) {
  std::vector<double> v;
  for (const auto& t : split_list(text)) v.push_back(to_number(t));
  return v;
}

Assignment parse_params(const std::string& text) {
  Assignment a;
  if (text.empty()) return a;
  for (const auto& item : split_list(text)) {
    auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw Usage("bad --params item '" + item + "', expected name=value");
    a[item.substr(0, eq)] = to_number(item.substr(eq + 1));
  }
  return a;
}

struct Loaded {
  SystemDef s;
  Assignment given;  // --params as typed
  bool from_gallery = false;
};

Kind form_of(const std::string& f) {
  if (f == "hamiltonian") return Kind::Hamiltonian;
  if (f == "lagrangian") return Kind::Lagrangian;
  throw Usage("--form must be hamiltonian or lagrangian");
}

// A system file, or else the name of a gallery entry (".json" optional).
// prefer picks the gallery form when --form is absent and the entry has it.
Loaded load(const Opts& o, std::optional<Kind> prefer = std::nullopt) {
  Loaded L;
  L.given = parse_params(o.params);
  namespace fs = std::filesystem;
  if (fs::is_regular_file(o.system)) {
    L.s = load_system(slurp(o.system));
    for (const auto& [name, v] : L.given) {
      if (!L.s.params.count(name)) throw BadParam("system has no parameter '" + name + "'");
      L.s.params[name] = v;
    }
    validate_system(L.s);
    return L;
  }
  std::string name = o.system;
  if (fs::path(name).extension() == ".json") name = fs::path(name).stem().string();
  auto all = gallery::names();
  if (std::find(all.begin(), all.end(), name) == all.end())
    throw Usage("no system file or gallery entry named '" + o.system + "'");
  const auto& forms = gallery::info(name).forms;
  std::optional<Kind> kind;
  if (!o.form.empty()) kind = form_of(o.form);
  else if (prefer && std::find(forms.begin(), forms.end(), to_string(*prefer)) != forms.end()) kind = prefer;
  L.s = kind ? gallery::instantiate(name, L.given, *kind) : gallery::instantiate(name, L.given);
  L.from_gallery = true;
  return L;
}

// Parameters for the gallery entry behind a loaded system.
Assignment entry_params(const Loaded& L, const gallery::EntryInfo& info) {
  if (L.from_gallery) return L.given;
  Assignment a;
  for (const auto& [name, v] : L.s.params)
    if (info.defaults.count(name)) a[name] = v;
  return a;
}

const gallery::EntryInfo& entry_of(const SystemDef& s, const std::string& what) {
  try {
    return gallery::info(s.name);
  } catch (const UnknownEntry&) {
    throw Usage(what + " needs a system named after a gallery entry; '" + s.name + "' is not one");
  }
}

// The lagrangian twin of a gallery system, for the grid solvers.
SystemDef lagrangian_form(const Loaded& L, const gallery::EntryInfo& info) {
  if (L.s.kind == Kind::Lagrangian) return L.s;
  if (std::find(info.forms.begin(), info.forms.end(), "lagrangian") == info.forms.end())
    throw Usage("entry '" + info.name + "' has no lagrangian form to solve");
  return gallery::instantiate(info.name, entry_params(L, info), Kind::Lagrangian);
}

json header(const SystemDef& s) {
  return {{"system", s.name},
          {"kind", to_string(s.kind)},
          {"formalism", to_string(s.formalism)},
          {"k", s.k()},
          {"n", s.n()}};
}

std::vector<double> zeros_at(const SystemDef& s) {
  return s.point(std::vector<double>(static_cast<std::size_t>(s.dim()), 0.0));
}

Grid parse_grid(const std::string& spec) {
  Grid g = Grid::parse(spec);
  g.check();
  return g;
}

PointFn along(const gallery::AnalyticSolution& sol, int k, int n, int axis) {
  return [=](std::span<const double> x, std::span<double> out) {
    std::vector<double> g(static_cast<std::size_t>(k * n));
    sol.gradient(x, g);
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = g[static_cast<std::size_t>(axis * n + i)];
  };
}

double grid_error(const GridSection& sec, const gallery::AnalyticSolution& sol) {
  double e = 0.0;
  std::vector<double> v(static_cast<std::size_t>(sec.n));
  for (std::size_t f = 0; f < sec.grid.size(); ++f) {
    sol.psi(sec.grid.point(f), v);
    for (int i = 0; i < sec.n; ++i) e = std::max(e, std::fabs(sec.psi[static_cast<std::size_t>(i)][f] - v[static_cast<std::size_t>(i)]));
  }
  return e;
}

json residual_json(const ResidualReport& r) {
  json j = json::object();
  for (const auto& f : r.families) j[f.name] = {{"max", f.max}, {"l2", f.l2}};
  return j;
}

Grid refined(const Grid& g) {
  Grid r = g;
  for (auto& a : r.axes) a.count = 2 * a.count - 1;
  return r;
}

double observed_order(double coarse, double fine) { return std::log2(coarse / fine); }

// ---- subcommands; each returns its exit code and fills the report

int derive(const Opts& o, json& r) {
  Loaded L = load(o);
  const SystemDef& s = L.s;
  r = header(s);
  json eqs = json::array();
  if (s.kind == Kind::Hamiltonian) {
    std::vector<std::vector<Expr>> vel;
    std::vector<Expr> trace;
    if (s.cosymplectic()) {
      CosymHdwSystem d = derive_cosym(s);
      vel = d.velocity;
      trace = d.trace;
      json reeb = json::array();
      for (int a = 0; a < s.k(); ++a) reeb.push_back("R" + std::to_string(a + 1) + "(H) = " + print(d.reeb[a]));
      r["reeb"] = reeb;
    } else {
      HdwSystem d = derive_hdw(s);
      vel = d.velocity;
      trace = d.trace;
    }
    for (int a = 0; a < s.k(); ++a)
      for (int i = 0; i < s.n(); ++i)
        eqs.push_back("d" + s.frame.q[i] + "/d" + s.frame.x[a] + " = " + print(simplify(vel[a][i])));
    for (int i = 0; i < s.n(); ++i) {
      std::string lhs;
      for (int a = 0; a < s.k(); ++a) lhs += (a ? " + d" : "d") + s.frame.p[a][i] + "/d" + s.frame.x[a];
      eqs.push_back(lhs + " = " + print(simplify(trace[i])));
    }
  } else {
    ElEquations e = el_equations(s);
    for (const auto& lhs : e.lhs) eqs.push_back(print(lhs) + " = 0");
    json notation = json::array();
    for (int i = 0; i < s.n(); ++i)
      for (int a = 0; a < s.k(); ++a) notation.push_back(s.frame.vel(i, a) + " = d" + s.frame.q[i] + "/d" + s.frame.x[a]);
    for (int i = 0; i < s.n(); ++i)
      for (int a = 0; a < s.k(); ++a)
        for (int b = a; b < s.k(); ++b)
          notation.push_back(e.second[i][a][b] + " = d2" + s.frame.q[i] + "/d" + s.frame.x[a] + "d" + s.frame.x[b]);
    r["notation"] = notation;
    LagrangianDerived d = derive_lagrangian(s);
    r["energy"] = print(simplify(d.energy));
    Regularity reg = regularity_of(hessian_at(s, d, zeros_at(s)));
    r["hessian_det_at_origin"] = reg.det;
    r["regular_at_origin"] = reg.regular;
  }
  r["equations"] = eqs;
  return 0;
}

int check_structure(const Opts& o, json& r) {
  std::vector<TwoForm> forms;
  std::vector<OneForm> etas;
  std::vector<int> V;
  bool cosym = o.cosym;
  if (!o.file.empty()) {
    json in;
    try {
      in = json::parse(slurp(o.file));
    } catch (const json::parse_error& e) {
      throw Usage(o.file + ": " + e.what());
    }
    auto matrix = [](const json& m) {
      Eigen::MatrixXd A(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m.at(0).size()));
      for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m[i].size(); ++j)
          A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m[i][j].get<double>();
      return A;
    };
    try {
      for (const auto& m : in.at("omegas")) forms.push_back(matrix(m));
      if (in.contains("etas")) {
        cosym = true;
        for (const auto& e : in["etas"]) {
          auto v = e.get<std::vector<double>>();
          etas.push_back(Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
        }
      }
      V = in.at("V").get<std::vector<int>>();
    } catch (const json::exception& e) {
      throw SchemaError(std::string("structure file: ") + e.what());
    }
  } else {
    if (o.k < 1 || o.n < 1) throw Usage("--k and --n must be positive");
    CanonicalStructure c = canonical_forms(o.k, o.n, o.cosym);
    forms = c.omegas;
    etas = c.etas;
    V = c.V;
  }
  StructureReport rep = verify_structure(forms, cosym ? &etas : nullptr, V);
  r = {{"cosymplectic", rep.cosymplectic},
       {"dimensions_ok", rep.dimensions_ok},
       {"vanishes_on_V", rep.vanishes_on_V},
       {"kernel_intersection_dim", rep.kernel_intersection_dim},
       {"pass", rep.pass}};
  if (cosym) {
    r["eta_vanishes_on_V"] = rep.eta_vanishes_on_V;
    r["eta_wedge_nonzero"] = rep.eta_wedge_nonzero;
    r["ker_omega_dim"] = rep.ker_omega_dim;
    if (rep.pass) {
      json reeb = json::array();
      for (Eigen::Index a = 0; a < rep.reeb.rows(); ++a) {
        std::vector<double> row(static_cast<std::size_t>(rep.reeb.cols()));
        for (Eigen::Index j = 0; j < rep.reeb.cols(); ++j) {
          double v = rep.reeb(a, j);
          row[static_cast<std::size_t>(j)] = std::fabs(v) < 1e-15 ? 0.0 : v;
        }
        reeb.push_back(row);
      }
      r["reeb"] = reeb;
    }
  }
  return rep.pass ? 0 : 1;
}

SampleBox parse_box(const std::string& text, int d) {
  if (text.empty()) return SampleBox::cube(d);
  auto v = numbers(text);
  if (v.size() == 2 && v[0] < v[1]) return SampleBox::cube(d, v[0], v[1]);
  throw Usage("--box expects lo,hi");
}

int check_solution(const Opts& o, json& r) {
  Loaded L = load(o);
  const SystemDef& s = L.s;
  r = header(s);
  if (!o.section.empty() || !o.solution.empty()) {
    const double tol = o.tol < 0 ? 1e-8 : o.tol;
    r["tol"] = tol;
    if (!o.section.empty()) {
      GridSection sec = read_csv(slurp(o.section));
      ResidualReport rep = residual_on_grid(sec, s);
      r["source"] = o.section;
      r["residual"] = residual_json(rep);
      r["max_residual"] = rep.max();
      r["pass"] = rep.max() <= tol;
      return rep.max() <= tol ? 0 : 1;
    }
    const auto& info = entry_of(s, "--solution");
    auto sol = gallery::analytic_solution(info.name, o.solution, entry_params(L, info));
    Grid g = o.grid.empty() ? sol.domain : parse_grid(o.grid);
    double e1 = residual_on_grid(gallery::sample(sol, g, s.n()), s).max();
    r["solution"] = o.solution;
    r["max_residual"] = e1;
    bool pass = e1 <= tol;
    if (o.order) {
      double e2 = residual_on_grid(gallery::sample(sol, refined(g), s.n()), s).max();
      r["max_residual_refined"] = e2;
      if (e2 > tol) {
        double p = observed_order(e1, e2);
        r["order"] = p;
        pass = p >= 1.7;
      } else {
        pass = true;
      }
    }
    r["pass"] = pass;
    return pass ? 0 : 1;
  }
  if (s.kind != Kind::Hamiltonian) throw FormalismError("check-solution without a section needs a hamiltonian system");
  const double tol = o.tol < 0 ? 1e-10 : o.tol;
  SampleBox box = parse_box(o.box, s.dim());
  KVectorField X = gauge_solution(s);
  SolutionReport rep = s.cosymplectic() ? check_cosym_solution(X, s, &box, tol, o.samples)
                                        : check_solution(X, s, &box, tol, o.samples);
  r["field"] = "gauge";
  r["tol"] = tol;
  r["is_solution"] = rep.is_solution;
  r["max_defect"] = rep.max_defect;
  r["integrability_defect"] = rep.integrability_defect;
  r["samples"] = rep.samples;
  return rep.is_solution ? 0 : 1;
}

int solve(const Opts& o, json& r, std::ostream& err) {
  Loaded L = load(o);
  const auto& info = entry_of(L.s, "solve");
  if (info.recipe.kind == gallery::Recipe::None) throw Usage("entry '" + info.name + "' has no solver recipe");
  SystemDef s = lagrangian_form(L, info);
  auto sol = gallery::analytic_solution(info.name, o.solution.empty() ? info.recipe.solution : o.solution,
                                        entry_params(L, info));
  Grid g = o.grid.empty() ? sol.domain : parse_grid(o.grid);
  if (g.k() != s.k()) throw Usage("grid has " + std::to_string(g.k()) + " axes, system needs " + std::to_string(s.k()));
  r = header(s);
  r["solution"] = sol.name;
  GridSection sec;
  if (info.recipe.kind == gallery::Recipe::Hyperbolic) {
    int t = info.recipe.time_axis < 0 ? s.k() + info.recipe.time_axis : info.recipe.time_axis;
    if (o.steps > 0) g.axes[static_cast<std::size_t>(t)].count = o.steps + 1;
    HyperbolicOptions opt{t, info.recipe.boundary, 0.9, nullptr};
    if (opt.boundary == Boundary::Dirichlet) opt.dirichlet = sol.psi;
    r["method"] = "leapfrog";
    r["time_axis"] = t;
    r["steps"] = g.axes[static_cast<std::size_t>(t)].count - 1;
    r["cfl"] = cfl_number(s, g, t);
    sec = evolve_hyperbolic(s, sol.psi, along(sol, s.k(), s.n(), t), g, opt);
  } else {
    const double tol = o.tol < 0 ? 1e-10 : o.tol;
    RelaxResult rr = relax_elliptic(s, sol.psi, g, tol, o.max_iters);
    r["method"] = "gauss-seidel";
    r["tol"] = tol;
    r["sweeps"] = rr.sweeps;
    sec = rr.section;
  }
  r["grid"] = json::array();
  for (const auto& a : g.axes) r["grid"].push_back(num(a.min) + ":" + num(a.max) + ":" + std::to_string(a.count));
  r["max_error"] = grid_error(sec, sol);
  r["max_residual"] = residual_on_grid(sec, s).max();
  if (!o.out.empty()) {
    spill(o.out, write_csv(sec));
    r["out"] = o.out;
  }
  (void)err;
  return 0;
}

int legendre(const Opts& o, json& r) {
  Loaded L = load(o, Kind::Lagrangian);
  const SystemDef& s = L.s;
  if (s.kind != Kind::Lagrangian) throw FormalismError("legendre needs a lagrangian system");
  r = header(s);
  LegendreMap m = legendre_forward(s);
  CoordFrame pf = CoordFrame::standard(s.k(), s.n());
  json mom = json::array();
  for (int a = 0; a < s.k(); ++a)
    for (int i = 0; i < s.n(); ++i) mom.push_back(pf.p[a][i] + " = " + print(simplify(m.momenta[a][i])));
  r["momenta"] = mom;
  Regularity reg = regularity_of(hessian_at(s, m.derived, zeros_at(s)));
  r["hessian_det_at_origin"] = reg.det;
  r["regular_at_origin"] = reg.regular;
  if (auto h = induced_system(s)) r["hamiltonian"] = print(simplify(h->expression));
  if (o.point.empty()) return 0;

  auto coords = numbers(o.point);
  if (static_cast<int>(coords.size()) != s.dim())
    throw Usage("--point needs " + std::to_string(s.dim()) + " values (" + std::to_string(s.dim()) + " coordinates)");
  const auto slots = s.slots();
  const auto at = s.point(coords);
  const int k = s.k(), n = s.n(), oq = s.offset_q(), of = s.offset_fiber();
  std::vector<double> p, q(coords.begin() + oq, coords.begin() + of), x(coords.begin(), coords.begin() + oq);
  for (int a = 0; a < k; ++a)
    for (int i = 0; i < n; ++i) p.push_back(Compiled(m.momenta[a][i], slots)(at.data()));
  Regularity here = regularity_of(hessian_at(s, m.derived, at));
  r["point"] = coords;
  r["p"] = p;
  r["regular"] = here.regular;
  if (!here.regular) return 1;
  std::vector<double> guess(static_cast<std::size_t>(k * n), 0.0);
  auto v = legendre_invert(m, q, p, guess, x);
  double rt = 0.0;
  for (int a = 0; a < k; ++a)
    for (int i = 0; i < n; ++i)
      rt = std::max(rt, std::fabs(v[static_cast<std::size_t>(a * n + i)] - coords[static_cast<std::size_t>(of + a * n + i)]));
  r["v_recovered"] = v;
  r["roundtrip_error"] = rt;
  double pb = pullback_check(s, coords);
  r["pullback_defect"] = pb;
  const double tol = o.tol < 0 ? 1e-8 : o.tol;
  r["tol"] = tol;
  return rt <= tol && pb <= tol ? 0 : 1;
}

int hamjac(const Opts& o, json& r) {
  Loaded L = load(o, Kind::Hamiltonian);
  const SystemDef& s = L.s;
  const int k = s.k(), n = s.n();
  std::string gamma = o.gamma;
  if (gamma.empty()) {
    auto all = gallery::names();
    if (std::find(all.begin(), all.end(), s.name) != all.end())
      for (const auto& g : gallery::info(s.name).gamma) gamma += (gamma.empty() ? "" : ",") + g;
    if (gamma.empty()) throw Usage("hamjac needs --gamma");
  }
  auto parts = split_list(gamma);
  if (static_cast<int>(parts.size()) != k * n)
    throw ShapeMismatch("--gamma needs " + std::to_string(k * n) + " entries (k*n, alpha-major)");
  ClosedSectionSpec g;
  for (int a = 0; a < k; ++a) {
    g.gamma.emplace_back();
    for (int i = 0; i < n; ++i) g.gamma.back().push_back(parse(parts[static_cast<std::size_t>(a * n + i)]));
  }
  if (!o.W.empty()) {
    std::vector<Expr> W;
    for (const auto& w : split_list(o.W)) W.push_back(parse(w));
    if (static_cast<int>(W.size()) != k) throw ShapeMismatch("--W needs " + std::to_string(k) + " entries");
    g.W = W;
  }
  const double tol = o.tol < 0 ? 1e-10 : o.tol;
  SampleBox box = parse_box(o.box, s.offset_fiber());
  HjDefect d = hj_defect(s, g, &box, o.samples);
  r = header(s);
  r["gamma"] = parts;
  r["closedness"] = d.closedness;
  r["hj"] = d.hj;
  if (g.W) r["hj_potential"] = d.hj_potential;
  r["tol"] = tol;
  const bool pass = d.closedness <= tol && d.hj <= tol;
  r["pass"] = pass;
  if (!pass) return 1;

  ProjectedField Z = project_field(s, g);
  json comps = json::array();
  for (int a = 0; a < k; ++a)
    for (int i = 0; i < n; ++i) comps.push_back("Z" + std::to_string(a + 1) + "^" + s.frame.q[i] + " = " + print(simplify(Z.comps[a][i])));
  r["projected"] = comps;
  Grid grid;
  if (o.grid.empty()) {
    for (int a = 0; a < k; ++a) grid.axes.push_back({0.0, 1.0, 33});
  } else {
    grid = parse_grid(o.grid);
  }
  if (grid.k() != k) throw Usage("grid needs " + std::to_string(k) + " axes");
  std::vector<double> q0 = o.q0.empty() ? std::vector<double>(static_cast<std::size_t>(n), 1.0) : numbers(o.q0);
  if (static_cast<int>(q0.size()) != n) throw Usage("--q0 needs " + std::to_string(n) + " values");
  ProjectedSection ps = integrate_projected(Z, q0, grid, o.steps > 0 ? o.steps : 1);
  r["commutativity_defect"] = ps.commutativity_defect;
  ResidualReport lift = verify_lift(s, g, ps.section);
  r["lift_residual"] = residual_json(lift);
  r["lift_max_residual"] = lift.max();
  if (o.order) {
    double fine = verify_lift(s, g, integrate_projected(Z, q0, refined(grid), o.steps > 0 ? o.steps : 1).section).max();
    r["lift_max_residual_refined"] = fine;
    if (fine > 0.0) r["lift_order"] = observed_order(lift.max(), fine);
  }
  if (!o.out.empty()) {
    spill(o.out, write_csv(ps.section));
    r["out"] = o.out;
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"k-symplectic and k-cosymplectic field theory toolkit"};
  app.name("kfield");
  app.require_subcommand(1);
  Opts o;

  auto common = [&](CLI::App* c, bool tol) {
    c->add_option("system", o.system, "system JSON file or gallery entry name")->required();
    c->add_option("--params", o.params, "parameter overrides k=v[,...]");
    c->add_option("--form", o.form, "gallery form: hamiltonian or lagrangian");
    c->add_flag("--json", o.json, "JSON report");
    c->add_option("--out", o.out, "write the report (or a CSV section) to FILE");
    if (tol) c->add_option("--tol", o.tol, "pass tolerance");
  };

  auto* derive_cmd = app.add_subcommand("derive", "field equations of a system");
  common(derive_cmd, false);

  auto* cs = app.add_subcommand("check-structure", "verify k-symplectic or k-cosymplectic axioms");
  cs->add_option("file", o.file, "JSON with omegas, etas (optional) and V; canonical forms otherwise");
  cs->add_option("--k", o.k, "number of forms")->check(CLI::PositiveNumber);
  cs->add_option("--n", o.n, "configuration dimension")->check(CLI::PositiveNumber);
  cs->add_flag("--cosymplectic", o.cosym, "use the k-cosymplectic model");
  cs->add_flag("--json", o.json, "JSON report");
  cs->add_option("--out", o.out, "write the report to FILE");

  auto* sol_cmd = app.add_subcommand("check-solution", "check a solution: gauge field, CSV section or gallery solution");
  common(sol_cmd, true);
  sol_cmd->add_option("--section", o.section, "CSV section to check on its grid");
  sol_cmd->add_option("--solution", o.solution, "gallery analytic solution sampled on --grid");
  sol_cmd->add_option("--grid", o.grid, "min:max:count[,...]");
  sol_cmd->add_option("--samples", o.samples, "Halton samples for the gauge check")->check(CLI::PositiveNumber);
  sol_cmd->add_option("--box", o.box, "sample box lo,hi");
  sol_cmd->add_flag("--order", o.order, "also refine the grid and report the observed order");

  auto* solve_cmd = app.add_subcommand("solve", "solve a gallery entry on a grid");
  common(solve_cmd, true);
  solve_cmd->add_option("--grid", o.grid, "min:max:count[,...]");
  solve_cmd->add_option("--steps", o.steps, "time steps (hyperbolic)")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--solution", o.solution, "analytic solution supplying the data");
  solve_cmd->add_option("--max-iters", o.max_iters, "Gauss-Seidel sweep limit")->check(CLI::PositiveNumber);

  auto* leg = app.add_subcommand("legendre", "Legendre map and induced Hamiltonian");
  common(leg, true);
  leg->add_option("--point", o.point, "coordinates (x,) q, v at which to run the map both ways");

  auto* hj = app.add_subcommand("hamjac", "Hamilton-Jacobi check, integration and lift");
  common(hj, true);
  hj->add_option("--gamma", o.gamma, "gamma entries, k*n expressions alpha-major");
  hj->add_option("--W", o.W, "potentials W^a, k expressions");
  hj->add_option("--grid", o.grid, "integration grid min:max:count[,...]");
  hj->add_option("--q0", o.q0, "corner value");
  hj->add_option("--steps", o.steps, "RK4 substeps per cell")->check(CLI::PositiveNumber);
  hj->add_option("--samples", o.samples, "sample count for the defects")->check(CLI::PositiveNumber);
  hj->add_option("--box", o.box, "sample box lo,hi");
  hj->add_flag("--order", o.order, "also integrate on a refined grid and report the lift order");

  auto* gal = app.add_subcommand("gallery", "built-in systems");
  gal->require_subcommand(1);
  auto* gl = gal->add_subcommand("list", "list entries");
  gl->add_flag("--json", o.json, "JSON output");
  auto* gs = gal->add_subcommand("show", "print an entry as a system file");
  gs->add_option("name", o.gallery_name, "entry")->required();
  gs->add_option("--params", o.params, "parameters k=v[,...]");
  gs->add_option("--form", o.form, "hamiltonian or lagrangian");
  gs->add_option("--out", o.out, "write to FILE");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gl->parsed()) {
      if (o.json) {
        out << json::parse(gallery::list_json()).dump(2) << "\n";
      } else {
        for (const auto& name : gallery::names()) {
          const auto& info = gallery::info(name);
          std::string forms;
          for (const auto& f : info.forms) forms += (forms.empty() ? "" : ",") + f;
          out << name << " [" << forms << "] " << info.description << "\n";
        }
      }
      return 0;
    }
    if (gs->parsed()) {
      Assignment p = parse_params(o.params);
      SystemDef s = o.form.empty() ? gallery::instantiate(o.gallery_name, p)
                                   : gallery::instantiate(o.gallery_name, p, form_of(o.form));
      std::string text = print_system(s);
      if (o.out.empty()) {
        out << text << (text.ends_with("\n") ? "" : "\n");
      } else {
        spill(o.out, text);
      }
      return 0;
    }

    json r;
    int code = 0;
    bool writes_csv = false;
    if (derive_cmd->parsed()) code = derive(o, r);
    else if (cs->parsed()) code = check_structure(o, r);
    else if (sol_cmd->parsed()) code = check_solution(o, r);
    else if (solve_cmd->parsed()) code = solve(o, r, err), writes_csv = true;
    else if (leg->parsed()) code = legendre(o, r);
    else if (hj->parsed()) code = hamjac(o, r), writes_csv = true;

    if (!o.out.empty() && !writes_csv) spill(o.out, r.dump(2) + "\n");
    if (o.json) {
      out << r.dump(2) << "\n";
    } else {
      render(r, out, 0);
    }
    return code;
  } catch (const Usage& e) {
    err << "kfield: " << e.what() << "\n";
    return 2;
  } catch (const NoConvergence& e) {
    err << "kfield: " << e.what() << "\n";
    return 1;
  } catch (const StepFailure& e) {
    err << "kfield: " << e.what() << "\n";
    return 1;
  } catch (const NonFinite& e) {
    err << "kfield: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "kfield: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace kfield::cli
