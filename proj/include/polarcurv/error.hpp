#pragma once

#include <stdexcept>
#include <string>

namespace polarcurv {

enum class ErrorCode {
  // mesh-core
  NonManifold,
  InconsistentOrientation,
  DegenerateTriangle,
  IndexOutOfRange,
  BoundaryEdge,
  BoundaryVertex,
  ParseError,
  NonTriangleFace,
  IoError,
  // surface-gen
  PointOffSurface,
  InvalidGrid,
  InvalidParams,
  InvalidDomain,
  // polar-dual
  NonUnitNormal,
  SingularSystem,
  UndefinedNeighbor,
  // curvature
  TooFewVertices,
  StarPointOutsideKernel,
  NotSimple,
  NotRegularEnough,
  NonFinite,
  DegeneratePolyline,
  Unclassifiable,
  // correspondence
  EmptyOverlap,
  UnlocatedPoint,
  // energy
  BadEpsilon,
  SharpEdge,
  // normal-fit
  ZeroAccumulation,
  NonRegularBlock,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonManifold: return "NonManifold";
    case ErrorCode::InconsistentOrientation: return "InconsistentOrientation";
    case ErrorCode::DegenerateTriangle: return "DegenerateTriangle";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::BoundaryEdge: return "BoundaryEdge";
    case ErrorCode::BoundaryVertex: return "BoundaryVertex";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonTriangleFace: return "NonTriangleFace";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::PointOffSurface: return "PointOffSurface";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::InvalidDomain: return "InvalidDomain";
    case ErrorCode::NonUnitNormal: return "NonUnitNormal";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::UndefinedNeighbor: return "UndefinedNeighbor";
    case ErrorCode::TooFewVertices: return "TooFewVertices";
    case ErrorCode::StarPointOutsideKernel: return "StarPointOutsideKernel";
    case ErrorCode::NotSimple: return "NotSimple";
    case ErrorCode::NotRegularEnough: return "NotRegularEnough";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DegeneratePolyline: return "DegeneratePolyline";
    case ErrorCode::Unclassifiable: return "Unclassifiable";
    case ErrorCode::EmptyOverlap: return "EmptyOverlap";
    case ErrorCode::UnlocatedPoint: return "UnlocatedPoint";
    case ErrorCode::BadEpsilon: return "BadEpsilon";
    case ErrorCode::SharpEdge: return "SharpEdge";
    case ErrorCode::ZeroAccumulation: return "ZeroAccumulation";
    case ErrorCode::NonRegularBlock: return "NonRegularBlock";
  }
  return "Unknown";
}

/// Every failure raised by the library. `line()` is nonzero only for parse errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, int line = 0, int column = 0)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        line_(line),
        column_(column) {}

  ErrorCode code() const noexcept { return code_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  ErrorCode code_;
  int line_;
  int column_;
};

}  // namespace polarcurv
