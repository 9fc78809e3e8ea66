#pragma once

#include <stdexcept>
#include <string>

namespace wtmpc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

/// Raised when an H-representation describes a non-compact set.
class UnboundedDirection : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NotSchurStable : public Error {
 public:
  using Error::Error;
};

class OriginNotInSupport : public Error {
 public:
  using Error::Error;
};

class RiccatiDivergence : public Error {
 public:
  using Error::Error;
};

class EmptyPool : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class GammaOutOfRange : public Error {
 public:
  using Error::Error;
};

class CenterOutsideSupport : public Error {
 public:
  using Error::Error;
};

class SolverFailure : public Error {
 public:
  using Error::Error;
};

class AdapterUnavailable : public Error {
 public:
  using Error::Error;
};

class MalformedProgram : public Error {
 public:
  using Error::Error;
};

class NoInvariantSet : public Error {
 public:
  using Error::Error;
};

class ConfigInvalid : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// The receding-horizon problem has no feasible point at the measured state.
class Infeasible : public Error {
 public:
  explicit Infeasible(const std::string& what) : Error(what) {}
};

/// A controller reported infeasibility during a closed-loop simulation.
class ControllerInfeasible : public Error {
 public:
  ControllerInfeasible(int step, const std::string& what)
      : Error("controller infeasible at step " + std::to_string(step) + ": " +
              what),
        step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

}  // namespace wtmpc
