#pragma once
//
// Minimal stderr logger. Verbosity comes from the POINTHOLE_LOG environment
// variable: error | warn | info | debug (default warn).
//

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string_view>

namespace pointhole::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

inline Level threshold() {
  static const Level level = [] {
    const char* env = std::getenv("POINTHOLE_LOG");
    if (env == nullptr) return Level::warn;
    const std::string_view v(env);
    if (v == "error") return Level::error;
    if (v == "info") return Level::info;
    if (v == "debug") return Level::debug;
    return Level::warn;
  }();
  return level;
}

template <typename... Args>
void write(Level level, const Args&... args) {
  if (static_cast<int>(level) > static_cast<int>(threshold())) return;
  static std::mutex mutex;
  static constexpr std::string_view tags[] = {"error", "warn", "info", "debug"};
  std::ostringstream line;
  line << "[pointhole:" << tags[static_cast<int>(level)] << "] ";
  (line << ... << args);
  std::lock_guard lock(mutex);
  std::cerr << line.str() << '\n';
}

template <typename... Args> void error(const Args&... a) { write(Level::error, a...); }
template <typename... Args> void warn(const Args&... a) { write(Level::warn, a...); }
template <typename... Args> void info(const Args&... a) { write(Level::info, a...); }
template <typename... Args> void debug(const Args&... a) { write(Level::debug, a...); }

}  // namespace pointhole::log
