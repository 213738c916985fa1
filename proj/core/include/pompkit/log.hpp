#pragma once

#include <string_view>

namespace pompkit::log {

enum class Level { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

/// Current threshold. Initialised from the PK_LOG environment variable
/// (debug|info|warn|error|off), default warn.
Level level();
void set_level(Level level);

void write(Level level, std::string_view message);

inline void debug(std::string_view m) { write(Level::Debug, m); }
inline void info(std::string_view m) { write(Level::Info, m); }
inline void warn(std::string_view m) { write(Level::Warn, m); }
inline void error(std::string_view m) { write(Level::Error, m); }

}  // namespace pompkit::log
