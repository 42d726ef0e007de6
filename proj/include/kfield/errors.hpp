#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kfield {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define KFIELD_ERROR(Name)        \
  struct Name : Error {           \
    using Error::Error;           \
  }

// expr
struct SyntaxError : Error {
  SyntaxError(std::size_t off, std::string expect)
      : Error("syntax error at offset " + std::to_string(off) + ": expected " + expect),
        offset(off),
        expected(std::move(expect)) {}
  std::size_t offset;
  std::string expected;
};
KFIELD_ERROR(UnknownFunction);
KFIELD_ERROR(DomainError);
struct UnboundVariable : Error {
  explicit UnboundVariable(const std::string& n) : Error("unbound variable '" + n + "'"), name(n) {}
  std::string name;
};

// model
KFIELD_ERROR(SchemaError);
KFIELD_ERROR(FreeVariableError);
KFIELD_ERROR(FormalismError);

// structures
KFIELD_ERROR(DimensionMismatch);
KFIELD_ERROR(NoUniqueReeb);
KFIELD_ERROR(PreconditionError);

// legendre / solvers
KFIELD_ERROR(SingularHessian);
KFIELD_ERROR(NoConvergence);

// hamjac
KFIELD_ERROR(ShapeMismatch);
KFIELD_ERROR(StepFailure);

// fields
KFIELD_ERROR(GridTooSmall);
KFIELD_ERROR(MissingField);
KFIELD_ERROR(CflViolation);
KFIELD_ERROR(NonFinite);

// gallery
KFIELD_ERROR(UnknownEntry);
KFIELD_ERROR(BadParam);
KFIELD_ERROR(UnknownSolution);

#undef KFIELD_ERROR

}  // namespace kfield
