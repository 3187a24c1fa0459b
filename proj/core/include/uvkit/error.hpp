#pragma once

#include <stdexcept>
#include <string>

namespace uvkit {

/// Broad failure class; the CLI maps each kind to a distinct exit status.
enum class ErrorKind {
  input,      // malformed or unsupported input data
  numerical,  // solver failure, NaN, divergence
  invariant,  // internal invariant violated
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void throw_input(const std::string& what);
[[noreturn]] void throw_numerical(const std::string& what);
[[noreturn]] void throw_invariant(const std::string& what);

/// Process exit status for an error kind: 1 input, 2 numerical, 3 invariant.
int exit_code(ErrorKind kind) noexcept;

}  // namespace uvkit
