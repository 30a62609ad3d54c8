#include "pvqa/error.hpp"

#include <iostream>
#include <mutex>

#include "pvqa/log.hpp"

namespace pvqa {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid argument";
    case Errc::shape_mismatch: return "shape mismatch";
    case Errc::parse_error: return "parse error";
    case Errc::validation: return "validation error";
    case Errc::bad_magic: return "bad magic";
    case Errc::truncated: return "truncated file";
    case Errc::unsupported_version: return "unsupported version";
    case Errc::checksum_mismatch: return "checksum mismatch";
    case Errc::io_failure: return "I/O failure";
    case Errc::provider_unavailable: return "provider unavailable";
    case Errc::degenerate: return "degenerate input";
    case Errc::insufficient_data: return "insufficient data";
  }
  return "unknown error";
}

namespace log {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

Sink& current_sink() {
  static Sink sink = [](const std::string& msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return sink;
}

}  // namespace

Sink set_warning_sink(Sink sink) {
  std::lock_guard lock(sink_mutex());
  Sink previous = std::move(current_sink());
  current_sink() = std::move(sink);
  return previous;
}

void warn(const std::string& message) {
  std::lock_guard lock(sink_mutex());
  if (current_sink()) current_sink()(message);
}

}  // namespace log
}  // namespace pvqa
