#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace lanepareto {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid scenario document or parameter set. `field()` is the dotted key of
// the offending entry, e.g. "bounds.v_min".
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// A car-following update was asked to act on a non-positive gap.
class CollisionError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class WarmupError : public Error {
 public:
  WarmupError(const std::string& what, double worst_residual)
      : Error(what), worst_residual_(worst_residual) {}
  double worst_residual() const { return worst_residual_; }

 private:
  double worst_residual_;
};

class TrackingFailure : public Error {
 public:
  TrackingFailure(const std::string& what, int tick)
      : Error(what), tick_(tick) {}
  int tick() const { return tick_; }

 private:
  int tick_;
};

}  // namespace lanepareto
