#include "remask/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <string_view>

namespace remask::log {

namespace {

Level level_from_env() {
    const char * env = std::getenv("REMASK_LOG_LEVEL");
    if (!env) {
        return Level::warn;
    }
    const std::string_view v(env);
    if (v == "error") return Level::error;
    if (v == "info")  return Level::info;
    if (v == "debug") return Level::debug;
    return Level::warn;
}

std::atomic<int> & current() {
    static std::atomic<int> lvl{static_cast<int>(level_from_env())};
    return lvl;
}

spdlog::logger & logger() {
    static std::shared_ptr<spdlog::logger> instance = [] {
        auto l = spdlog::stderr_color_mt("remask");
        l->set_pattern("[%H:%M:%S.%e] [%l] %v");
        l->set_level(spdlog::level::trace);
        return l;
    }();
    return *instance;
}

bool enabled(Level l) { return static_cast<int>(l) <= current().load(); }

} // namespace

Level level() { return static_cast<Level>(current().load()); }
void set_level(Level l) { current().store(static_cast<int>(l)); }

void error(const std::string & msg) { if (enabled(Level::error)) logger().error(msg); }
void warn(const std::string & msg)  { if (enabled(Level::warn))  logger().warn(msg); }
void info(const std::string & msg)  { if (enabled(Level::info))  logger().info(msg); }
void debug(const std::string & msg) { if (enabled(Level::debug)) logger().debug(msg); }

} // namespace remask::log
