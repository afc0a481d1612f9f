#pragma once
// Minimal warning channel. Modules report dropped/coerced/flagged items here;
// the harness points the sink at the episode log, tests capture it, and the
// default goes to stderr.

#include <cstdio>
#include <functional>
#include <string>
#include <utility>

namespace guardrail::log {

using Sink = std::function<void(const std::string&)>;

inline Sink& sink_ref() {
  static Sink sink;
  return sink;
}

inline void set_sink(Sink sink) { sink_ref() = std::move(sink); }

inline void warn(const std::string& message) {
  if (sink_ref()) {
    sink_ref()(message);
  } else {
    std::fprintf(stderr, "[guardrail] warning: %s\n", message.c_str());
  }
}

// Scoped sink override; restores the previous sink on destruction.
class ScopedSink {
 public:
  explicit ScopedSink(Sink sink) : previous_(sink_ref()) { sink_ref() = std::move(sink); }
  ~ScopedSink() { sink_ref() = std::move(previous_); }
  ScopedSink(const ScopedSink&) = delete;
  ScopedSink& operator=(const ScopedSink&) = delete;

 private:
  Sink previous_;
};

}  // namespace guardrail::log
