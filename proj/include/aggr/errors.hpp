#pragma once

#include <stdexcept>
#include <string>

namespace aggr {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct IndexError : Error { using Error::Error; };
struct InfeasibleError : Error { using Error::Error; };
struct SolverError : Error { using Error::Error; };
struct DegenerateError : Error { using Error::Error; };
struct LengthMismatchError : Error { using Error::Error; };
struct LinAlgError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace aggr
