#pragma once

#include <stdexcept>
#include <string>

namespace hsheat {

// Base class for all input-validation failures raised by the library.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NegativeOffDiagonal : ValidationError {
  int row, col;
  NegativeOffDiagonal(int i, int j, double v)
      : ValidationError("generator entry (" + std::to_string(i) + "," +
                        std::to_string(j) + ") = " + std::to_string(v) +
                        " is negative off the diagonal"),
        row(i), col(j) {}
};

struct RowSumNonzero : ValidationError {
  int row;
  RowSumNonzero(int i, double s)
      : ValidationError("generator row " + std::to_string(i) +
                        " sums to " + std::to_string(s) + ", expected 0"),
        row(i) {}
};

struct NotIrreducible : ValidationError {
  int state;
  NotIrreducible(int i)
      : ValidationError("positive-rate digraph is not strongly connected "
                        "(state " + std::to_string(i) + " unreachable or absorbing)"),
        state(i) {}
};

struct SingularSystem : ValidationError {
  using ValidationError::ValidationError;
};

struct TimeOutOfRange : ValidationError {
  using ValidationError::ValidationError;
};

struct DimensionMismatch : ValidationError {
  using ValidationError::ValidationError;
};

struct InvalidLength : ValidationError {
  using ValidationError::ValidationError;
};

struct AllCoefficientsBelowThreshold : ValidationError {
  using ValidationError::ValidationError;
};

struct ModeOutOfRange : ValidationError {
  using ValidationError::ValidationError;
};

struct PointOutsideDomain : ValidationError {
  using ValidationError::ValidationError;
};

struct ZeroInitialData : ValidationError {
  using ValidationError::ValidationError;
};

struct NonpositiveRates : ValidationError {
  using ValidationError::ValidationError;
};

struct NonpositiveP : ValidationError {
  using ValidationError::ValidationError;
};

struct NonpositiveQ : ValidationError {
  using ValidationError::ValidationError;
};

struct PowerIterationStalled : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AgreementFailure : std::runtime_error {
  double direct, eigen;
  AgreementFailure(double d, double e)
      : std::runtime_error("variational sup " + std::to_string(d) +
                           " disagrees with principal eigenvalue " +
                           std::to_string(e)),
        direct(d), eigen(e) {}
};

}  // namespace hsheat
