#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dcgl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Failure category. Maps one-to-one onto the C API status codes and the
/// CLI exit codes (usage 2, data 3, numeric 4).
enum class ErrorKind { usage, data, numeric, io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace dcgl
