#include "uvkit/error.hpp"

namespace uvkit {

void throw_input(const std::string& what) { throw Error(ErrorKind::input, what); }
void throw_numerical(const std::string& what) { throw Error(ErrorKind::numerical, what); }
void throw_invariant(const std::string& what) { throw Error(ErrorKind::invariant, what); }

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::input:
      return 1;
    case ErrorKind::numerical:
      return 2;
    case ErrorKind::invariant:
      return 3;
  }
  return 3;
}

}  // namespace uvkit
