#pragma once

#include <stdexcept>
#include <string>

namespace orbistab {

/// Base class for all numeric failures raised by the library.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateTangent : NumericError {
  using NumericError::NumericError;
};

struct MissingJacobian : NumericError {
  using NumericError::NumericError;
};

struct ProjectionAmbiguous : NumericError {
  using NumericError::NumericError;
};

struct NewtonDiverged : NumericError {
  using NumericError::NumericError;
};

struct FocalPointReached : NumericError {
  using NumericError::NumericError;
};

struct RankDeficient : NumericError {
  using NumericError::NumericError;
};

struct IntegrationFailure : NumericError {
  using NumericError::NumericError;
};

struct NotConverged : NumericError {
  NotConverged(const std::string& msg, double gap)
      : NumericError(msg), periodicity_gap(gap) {}
  double periodicity_gap;
};

struct BlowUp : NumericError {
  BlowUp(const std::string& msg, double s)
      : NumericError(msg), escape_location(s) {}
  double escape_location;
};

struct LeftTube : NumericError {
  LeftTube(const std::string& msg, double t)
      : NumericError(msg), event_time(t) {}
  double event_time;
};

struct InsufficientData : NumericError {
  using NumericError::NumericError;
};

}  // namespace orbistab
