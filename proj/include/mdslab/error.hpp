#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mdslab {

enum class ErrorKind {
  // validation
  AsymmetricMatrix,
  NegativeDistance,
  NonzeroDiagonal,
  TriangleViolation,
  BadWeights,
  PointOffManifold,
  GridUnsupported,
  DimensionMismatch,
  NonUniformWeights,
  MarginalMismatch,
  TooLarge,
  InvalidArgument,
  ParseError,
  IoFailure,
  UnknownCommand,
  // numerical
  NoConvergence,
  ToleranceNotReached,
  QuadratureNotConverged,
};

std::string_view to_string(ErrorKind kind);

/// True for failures of an iterative numerical method, false for bad input.
bool is_numerical(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mdslab
