#pragma once

#include <string_view>

namespace ifl::log {

enum class Level { debug, info, warn, error, off };

/// Reads IFL_LOG (debug|info|warn|error|off) and applies it. Default: warn.
void init_from_env();
void set_level(Level level);

void debug(std::string_view message);
void info(std::string_view message);
void warn(std::string_view message);
void error(std::string_view message);

}  // namespace ifl::log
