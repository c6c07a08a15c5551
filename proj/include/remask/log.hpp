#pragma once

#include <string>

namespace remask::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

// Reads REMASK_LOG_LEVEL once; defaults to warn.
Level level();
void set_level(Level level);

void error(const std::string & msg);
void warn(const std::string & msg);
void info(const std::string & msg);
void debug(const std::string & msg);

} // namespace remask::log
