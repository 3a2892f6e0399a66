// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdlib>
#include <iostream>
#include <string>
#include <string_view>

namespace corpusforge {

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

/// Log level comes from CORPUSFORGE_LOG (debug|info|warn|error|off), default warn.
inline LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("CORPUSFORGE_LOG");
        if (!env) return LogLevel::Warn;
        const std::string_view v{env};
        if (v == "debug") return LogLevel::Debug;
        if (v == "info") return LogLevel::Info;
        if (v == "warn") return LogLevel::Warn;
        if (v == "error") return LogLevel::Error;
        if (v == "off") return LogLevel::Off;
        return LogLevel::Warn;
    }();
    return level;
}

inline void log(LogLevel lvl, std::string_view msg) {
    if (lvl < log_level()) return;
    static constexpr const char* kTag[] = {"debug", "info", "warn", "error"};
    std::cerr << "[corpusforge:" << kTag[static_cast<int>(lvl)] << "] " << msg << '\n';
}

inline void log_debug(std::string_view msg) { log(LogLevel::Debug, msg); }
inline void log_info(std::string_view msg) { log(LogLevel::Info, msg); }
inline void log_warn(std::string_view msg) { log(LogLevel::Warn, msg); }
inline void log_error(std::string_view msg) { log(LogLevel::Error, msg); }

}  // namespace corpusforge
