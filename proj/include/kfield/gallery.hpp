#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kfield/fields.hpp"
#include "kfield/model.hpp"

namespace kfield::gallery {

struct AnalyticSolution {
  std::string name;
  std::string description;
  std::string validity;  // where the formula is meant to be used
  PointFn psi;           // n values
  PointFn gradient;      // k*n values, [a*n+i] = d psi^i / dx^a
  PointFn momenta;       // k*n values alpha-major; null when not defined
  Grid domain;           // documented test domain
};

enum class Recipe { None, Hyperbolic, Elliptic };

struct SolverRecipe {
  Recipe kind = Recipe::None;
  int time_axis = 0;  // negative counts from the last axis
  Boundary boundary = Boundary::Dirichlet;
  std::string solution;  // analytic solution that supplies the data
};

struct EntryInfo {
  std::string name;
  std::string description;
  std::vector<std::string> forms;  // "hamiltonian", "lagrangian"
  Formalism formalism;
  Assignment defaults;               // includes shape parameters
  std::vector<std::string> shape;    // parameters that set k or n
  std::vector<std::string> solutions;
  std::vector<std::string> see_also;
  std::vector<std::string> gamma;    // a closed section for hamjac, when the entry has one
  SolverRecipe recipe;
};

std::vector<std::string> names();
const EntryInfo& info(const std::string& name);  // UnknownEntry

// Default form is the first of info(name).forms. BadParam for unknown or
// invalid parameters; UnknownEntry when the entry lacks the requested form.
SystemDef instantiate(const std::string& name, const Assignment& params = {});
SystemDef instantiate(const std::string& name, const Assignment& params, Kind form);

AnalyticSolution analytic_solution(const std::string& name, const std::string& which,
                                   const Assignment& params = {});

// Section sampled from an analytic solution (momenta included when known).
GridSection sample(const AnalyticSolution& sol, const Grid& g, int n);

// JSON for `gallery list`.
std::string list_json();

}  // namespace kfield::gallery
