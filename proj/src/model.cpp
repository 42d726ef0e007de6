#include "kfield/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"

namespace kfield {

using ojson = nlohmann::ordered_json;

const char* to_string(Kind k) { return k == Kind::Hamiltonian ? "hamiltonian" : "lagrangian"; }
const char* to_string(Formalism f) { return f == Formalism::KSymplectic ? "k-symplectic" : "k-cosymplectic"; }

CoordFrame CoordFrame::standard(int k, int n) {
  if (k < 1 || n < 1) throw SchemaError("k and n must be >= 1");
  CoordFrame f;
  f.k = k;
  f.n = n;
  auto s = [](int v) { return std::to_string(v); };
  bool compact = k <= 9 && n <= 9;
  for (int a = 1; a <= k; ++a) f.x.push_back("x" + s(a));
  for (int i = 1; i <= n; ++i) f.q.push_back(n == 1 ? "q" : "q" + s(i));
  f.p.assign(k, std::vector<std::string>(n));
  f.v.assign(n, std::vector<std::string>(k));
  for (int a = 1; a <= k; ++a) {
    for (int i = 1; i <= n; ++i) {
      std::string pn, vn;
      if (n == 1) {
        pn = "p" + s(a);
        vn = "v" + s(a);
      } else if (k == 1) {
        pn = "p" + s(i);
        vn = "v" + s(i);
      } else if (compact) {
        pn = "p" + s(a) + s(i);
        vn = "v" + s(i) + s(a);
      } else {
        pn = "p_" + s(a) + "_" + s(i);
        vn = "v_" + s(i) + "_" + s(a);
      }
      f.p[a - 1][i - 1] = pn;
      f.v[i - 1][a - 1] = vn;
    }
  }
  return f;
}

std::vector<std::string> CoordFrame::coordinates(Kind kind, bool cosymplectic) const {
  std::vector<std::string> out;
  if (cosymplectic) out.insert(out.end(), x.begin(), x.end());
  out.insert(out.end(), q.begin(), q.end());
  for (int a = 0; a < k; ++a)
    for (int i = 0; i < n; ++i) out.push_back(kind == Kind::Hamiltonian ? p[a][i] : v[i][a]);
  return out;
}

void CoordFrame::check() const {
  if (k < 1 || n < 1) throw SchemaError("k and n must be >= 1");
  auto ku = static_cast<std::size_t>(k), nu = static_cast<std::size_t>(n);
  if (x.size() != ku || q.size() != nu || p.size() != ku || v.size() != nu)
    throw SchemaError("name lists do not match (k, n)");
  for (const auto& r : p)
    if (r.size() != nu) throw SchemaError("momentum names must be k lists of n");
  for (const auto& r : v)
    if (r.size() != ku) throw SchemaError("velocity names must be n lists of k");
  std::set<std::string> seen;
  auto add = [&](const std::string& nm) {
    if (!is_identifier(nm)) throw SchemaError("invalid name '" + nm + "'");
    if (nm == "pi") throw SchemaError("'pi' is reserved");
    if (!seen.insert(nm).second) throw SchemaError("duplicate name '" + nm + "'");
  };
  for (const auto& nm : x) add(nm);
  for (const auto& nm : q) add(nm);
  for (const auto& r : p)
    for (const auto& nm : r) add(nm);
  for (const auto& r : v)
    for (const auto& nm : r) add(nm);
}

std::vector<std::string> SystemDef::slots() const {
  auto out = coordinates();
  for (const auto& [nm, val] : params) out.push_back(nm);
  return out;
}

std::vector<double> SystemDef::point(std::span<const double> coords) const {
  std::vector<double> out(coords.begin(), coords.end());
  for (const auto& [nm, val] : params) out.push_back(val);
  return out;
}

void validate_system(const SystemDef& s) {
  s.frame.check();
  std::set<std::string> xs(s.frame.x.begin(), s.frame.x.end()), ps, vs;
  for (const auto& r : s.frame.p) ps.insert(r.begin(), r.end());
  for (const auto& r : s.frame.v) vs.insert(r.begin(), r.end());
  auto coords = s.coordinates();
  std::set<std::string> allowed(coords.begin(), coords.end());
  for (const auto& [nm, val] : s.params) {
    if (!is_identifier(nm)) throw SchemaError("invalid parameter name '" + nm + "'");
    if (xs.count(nm) || ps.count(nm) || vs.count(nm) ||
        std::find(s.frame.q.begin(), s.frame.q.end(), nm) != s.frame.q.end())
      throw SchemaError("parameter '" + nm + "' shadows a coordinate");
    if (!std::isfinite(val)) throw SchemaError("parameter '" + nm + "' is not finite");
    allowed.insert(nm);
  }
  allowed.insert("pi");
  for (const auto& v : free_variables(s.expression)) {
    if (allowed.count(v)) continue;
    if (xs.count(v)) throw FormalismError("k-symplectic expression depends on base coordinate '" + v + "'");
    if (ps.count(v)) throw FreeVariableError("lagrangian expression uses momentum '" + v + "'");
    if (vs.count(v)) throw FreeVariableError("hamiltonian expression uses velocity '" + v + "'");
    throw FreeVariableError("unknown variable '" + v + "'");
  }
}

namespace {

std::vector<std::string> str_list(const ojson& j, const char* what) {
  if (!j.is_array()) throw SchemaError(std::string("names.") + what + " must be an array");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) throw SchemaError(std::string("names.") + what + " entries must be strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::vector<std::vector<std::string>> str_table(const ojson& j, const char* what) {
  if (!j.is_array()) throw SchemaError(std::string("names.") + what + " must be an array of arrays");
  std::vector<std::vector<std::string>> out;
  for (const auto& r : j) out.push_back(str_list(r, what));
  return out;
}

}  // namespace

SystemDef load_system(const std::string& json_text) {
  ojson j;
  try {
    j = ojson::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("system must be a JSON object");
  static const std::set<std::string> known = {"name", "kind", "formalism", "k", "n", "expression", "params", "names"};
  for (const auto& [key, val] : j.items())
    if (!known.count(key)) throw SchemaError("unexpected field '" + key + "'");
  for (const char* req : {"name", "kind", "formalism", "k", "n", "expression"})
    if (!j.contains(req)) throw SchemaError(std::string("missing field '") + req + "'");

  SystemDef s;
  if (!j["name"].is_string()) throw SchemaError("name must be a string");
  s.name = j["name"].get<std::string>();
  std::string kind = j["kind"].is_string() ? j["kind"].get<std::string>() : "";
  if (kind == "hamiltonian") s.kind = Kind::Hamiltonian;
  else if (kind == "lagrangian") s.kind = Kind::Lagrangian;
  else throw SchemaError("kind must be \"hamiltonian\" or \"lagrangian\"");
  std::string form = j["formalism"].is_string() ? j["formalism"].get<std::string>() : "";
  if (form == "k-symplectic") s.formalism = Formalism::KSymplectic;
  else if (form == "k-cosymplectic") s.formalism = Formalism::KCosymplectic;
  else throw SchemaError("formalism must be \"k-symplectic\" or \"k-cosymplectic\"");
  if (!j["k"].is_number_integer() || !j["n"].is_number_integer()) throw SchemaError("k and n must be integers");
  int k = j["k"].get<int>(), n = j["n"].get<int>();
  if (k < 1 || n < 1) throw SchemaError("k and n must be >= 1");
  s.frame = CoordFrame::standard(k, n);
  if (j.contains("names")) {
    const auto& nm = j["names"];
    if (!nm.is_object()) throw SchemaError("names must be an object");
    for (const auto& [key, val] : nm.items()) {
      if (key == "x") s.frame.x = str_list(val, "x");
      else if (key == "q") s.frame.q = str_list(val, "q");
      else if (key == "p") s.frame.p = str_table(val, "p");
      else if (key == "v") s.frame.v = str_table(val, "v");
      else throw SchemaError("unexpected names field '" + key + "'");
    }
  }
  if (j.contains("params")) {
    if (!j["params"].is_object()) throw SchemaError("params must be an object");
    for (const auto& [key, val] : j["params"].items()) {
      if (!val.is_number()) throw SchemaError("parameter '" + key + "' must be a number");
      s.params[key] = val.get<double>();
    }
  }
  if (!j["expression"].is_string()) throw SchemaError("expression must be a string");
  s.expression = parse(j["expression"].get<std::string>());
  validate_system(s);
  return s;
}

std::string print_system(const SystemDef& s) {
  ojson j;
  j["name"] = s.name;
  j["kind"] = to_string(s.kind);
  j["formalism"] = to_string(s.formalism);
  j["k"] = s.k();
  j["n"] = s.n();
  j["expression"] = print(s.expression);
  j["params"] = ojson::object();
  for (const auto& [nm, val] : s.params) j["params"][nm] = val;
  j["names"]["x"] = s.frame.x;
  j["names"]["q"] = s.frame.q;
  j["names"]["p"] = s.frame.p;
  j["names"]["v"] = s.frame.v;
  return j.dump(2);
}

// ---- k-vector fields ------------------------------------------------------

KVectorField KVectorField::zero(int k, int n, bool has_base) {
  KVectorField X;
  X.k = k;
  X.n = n;
  X.has_base = has_base;
  auto ku = static_cast<std::size_t>(k), nu = static_cast<std::size_t>(n);
  if (has_base) X.base.assign(ku, std::vector<Expr>(ku, Expr(0.0)));
  X.config.assign(ku, std::vector<Expr>(nu, Expr(0.0)));
  X.fiber.assign(ku, std::vector<std::vector<Expr>>(ku, std::vector<Expr>(nu, Expr(0.0))));
  return X;
}

KVectorField KVectorField::operator+(const KVectorField& o) const {
  if (k != o.k || n != o.n || has_base != o.has_base) throw SchemaError("k-vector field shapes differ");
  KVectorField r = *this;
  for (int a = 0; a < k; ++a) {
    if (has_base)
      for (int b = 0; b < k; ++b) r.base[a][b] = base[a][b] + o.base[a][b];
    for (int i = 0; i < n; ++i) r.config[a][i] = config[a][i] + o.config[a][i];
    for (int b = 0; b < k; ++b)
      for (int i = 0; i < n; ++i) r.fiber[a][b][i] = fiber[a][b][i] + o.fiber[a][b][i];
  }
  return r;
}

std::vector<Expr> KVectorField::components(int a) const {
  std::vector<Expr> out;
  if (has_base) out.insert(out.end(), base[a].begin(), base[a].end());
  out.insert(out.end(), config[a].begin(), config[a].end());
  for (int b = 0; b < k; ++b) out.insert(out.end(), fiber[a][b].begin(), fiber[a][b].end());
  return out;
}

void validate_field(const KVectorField& X, const SystemDef& s) {
  auto ku = static_cast<std::size_t>(s.k()), nu = static_cast<std::size_t>(s.n());
  bool shapes = X.k == s.k() && X.n == s.n() && X.has_base == s.cosymplectic() && X.config.size() == ku &&
                X.fiber.size() == ku && (!X.has_base || X.base.size() == ku);
  for (std::size_t a = 0; shapes && a < ku; ++a) {
    shapes = X.config[a].size() == nu && X.fiber[a].size() == ku && (!X.has_base || X.base[a].size() == ku);
    for (std::size_t b = 0; shapes && b < ku; ++b) shapes = X.fiber[a][b].size() == nu;
  }
  if (!shapes) throw SchemaError("k-vector field shape does not match the system frame");
  auto sl = s.slots();
  std::set<std::string> allowed(sl.begin(), sl.end());
  allowed.insert("pi");
  for (int a = 0; a < X.k; ++a)
    for (const auto& c : X.components(a))
      for (const auto& v : free_variables(c))
        if (!allowed.count(v)) throw FreeVariableError("field component uses unknown variable '" + v + "'");
}

}  // namespace kfield
