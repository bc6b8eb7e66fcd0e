#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace tabfuse {

enum class LogLevel { off = 0, error = 1, warn = 2, info = 3, debug = 4 };

// Level comes from the TABFUSE_LOG environment variable; defaults to warn.
inline LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("TABFUSE_LOG");
        if (!env) return LogLevel::warn;
        if (std::strcmp(env, "off") == 0) return LogLevel::off;
        if (std::strcmp(env, "error") == 0) return LogLevel::error;
        if (std::strcmp(env, "warn") == 0) return LogLevel::warn;
        if (std::strcmp(env, "info") == 0) return LogLevel::info;
        if (std::strcmp(env, "debug") == 0) return LogLevel::debug;
        return LogLevel::warn;
    }();
    return level;
}

inline void log_msg(LogLevel level, const std::string& msg) {
    if (static_cast<int>(level) > static_cast<int>(log_level())) return;
    const char* tag = level == LogLevel::error  ? "error"
                      : level == LogLevel::warn ? "warn"
                      : level == LogLevel::info ? "info"
                                                : "debug";
    std::fprintf(stderr, "[tabfuse %s] %s\n", tag, msg.c_str());
}

inline void log_info(const std::string& msg) { log_msg(LogLevel::info, msg); }
inline void log_warn(const std::string& msg) { log_msg(LogLevel::warn, msg); }
inline void log_debug(const std::string& msg) { log_msg(LogLevel::debug, msg); }

} // namespace tabfuse
