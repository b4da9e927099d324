#include "resistograph/error.hpp"

namespace resistograph {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::parse:
      return "parse";
    case ErrorKind::data:
      return "data";
    case ErrorKind::solver:
      return "solver";
    case ErrorKind::numeric:
      return "numeric";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(what), kind_(kind) {}

}  // namespace resistograph
