#pragma once

#include <functional>
#include <string>

namespace pvqa::log {

using Sink = std::function<void(const std::string&)>;

// Replaces the warning sink and returns the previous one. The default sink
// writes "warning: <msg>" to stderr.
Sink set_warning_sink(Sink sink);

void warn(const std::string& message);

// Installs a sink for the lifetime of the object (tests use this to capture
// warnings).
class ScopedSink {
 public:
  explicit ScopedSink(Sink sink) : previous_(set_warning_sink(std::move(sink))) {}
  ~ScopedSink() { set_warning_sink(std::move(previous_)); }
  ScopedSink(const ScopedSink&) = delete;
  ScopedSink& operator=(const ScopedSink&) = delete;

 private:
  Sink previous_;
};

}  // namespace pvqa::log
