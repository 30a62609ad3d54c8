#pragma once

#include <stdexcept>
#include <string>

namespace pvqa {

enum class Errc {
  invalid_argument,
  shape_mismatch,
  parse_error,
  validation,
  bad_magic,
  truncated,
  unsupported_version,
  checksum_mismatch,
  io_failure,
  provider_unavailable,
  degenerate,
  insufficient_data,
};

const char* to_string(Errc code);

// Every failure raised by the library carries a machine-readable code; the
// CLI maps codes onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool condition, Errc code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace pvqa
