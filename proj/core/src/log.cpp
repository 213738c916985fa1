#include "pompkit/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace pompkit::log {

namespace {

Level from_env() {
  const char* env = std::getenv("PK_LOG");
  if (!env) return Level::Warn;
  const std::string v(env);
  if (v == "debug") return Level::Debug;
  if (v == "info") return Level::Info;
  if (v == "warn") return Level::Warn;
  if (v == "error") return Level::Error;
  if (v == "off") return Level::Off;
  return Level::Warn;
}

std::atomic<int>& threshold() {
  static std::atomic<int> value{static_cast<int>(from_env())};
  return value;
}

const char* tag(Level level) {
  switch (level) {
    case Level::Debug: return "debug";
    case Level::Info: return "info";
    case Level::Warn: return "warn";
    case Level::Error: return "error";
    case Level::Off: break;
  }
  return "";
}

}  // namespace

Level level() { return static_cast<Level>(threshold().load()); }

void set_level(Level level) { threshold().store(static_cast<int>(level)); }

void write(Level lvl, std::string_view message) {
  if (static_cast<int>(lvl) < threshold().load() || lvl == Level::Off) return;
  static std::mutex mutex;
  std::lock_guard lock(mutex);
  std::cerr << "[pomp-kit " << tag(lvl) << "] " << message << '\n';
}

}  // namespace pompkit::log
