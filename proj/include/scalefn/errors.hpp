#pragma once

#include <stdexcept>
#include <string>

namespace scalefn {

// Base class for every failure raised by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid process or distribution parameters, malformed descriptors.
class config_error : public error {
 public:
  using error::error;
};

// Non-finite intermediate values, failed root brackets.
class numeric_range_error : public error {
 public:
  using error::error;
};

class truncation_error : public error {
 public:
  truncation_error(const std::string& what, int order, double residual)
      : error(what), order_(order), residual_(residual) {}
  int order() const { return order_; }
  double residual() const { return residual_; }

 private:
  int order_;
  double residual_;
};

class resource_error : public error {
 public:
  resource_error(const std::string& what, double required, double available)
      : error(what), required_(required), available_(available) {}
  double required() const { return required_; }
  double available() const { return available_; }

 private:
  double required_;
  double available_;
};

// Precondition on the arguments of an oracle or evaluator is not met.
class domain_error : public error {
 public:
  using error::error;
};

class unsupported_smoothness_error : public error {
 public:
  using error::error;
};

// A lattice-only operation was handed a non-lattice distribution.
class distribution_type_error : public error {
 public:
  using error::error;
};

}  // namespace scalefn
