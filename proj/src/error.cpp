#include "mdslab/error.hpp"

namespace mdslab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::AsymmetricMatrix: return "AsymmetricMatrix";
    case ErrorKind::NegativeDistance: return "NegativeDistance";
    case ErrorKind::NonzeroDiagonal: return "NonzeroDiagonal";
    case ErrorKind::TriangleViolation: return "TriangleViolation";
    case ErrorKind::BadWeights: return "BadWeights";
    case ErrorKind::PointOffManifold: return "PointOffManifold";
    case ErrorKind::GridUnsupported: return "GridUnsupported";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonUniformWeights: return "NonUniformWeights";
    case ErrorKind::MarginalMismatch: return "MarginalMismatch";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::UnknownCommand: return "UnknownCommand";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::ToleranceNotReached: return "ToleranceNotReached";
    case ErrorKind::QuadratureNotConverged: return "QuadratureNotConverged";
  }
  return "Unknown";
}

bool is_numerical(ErrorKind kind) {
  return kind == ErrorKind::NoConvergence ||
         kind == ErrorKind::ToleranceNotReached ||
         kind == ErrorKind::QuadratureNotConverged;
}

}  // namespace mdslab
