#ifndef SWARM_LOG_HPP
#define SWARM_LOG_HPP

#include <cstdlib>
#include <iostream>
#include <string>

namespace swarm {

// Verbosity from SWARM_LTL_LOG: error, warn (default), info, debug.
inline int log_level() {
    static const int level = [] {
        const char* env = std::getenv("SWARM_LTL_LOG");
        if (env == nullptr) return 1;
        std::string s(env);
        if (s == "error") return 0;
        if (s == "warn") return 1;
        if (s == "info") return 2;
        if (s == "debug") return 3;
        return 1;
    }();
    return level;
}

inline void log_at(int level, const char* tag, const std::string& msg) {
    if (log_level() >= level) std::cerr << "[" << tag << "] " << msg << "\n";
}

}  // namespace swarm

#define SWARM_LOG_ERROR(msg) ::swarm::log_at(0, "error", (msg))
#define SWARM_LOG_WARN(msg) ::swarm::log_at(1, "warn", (msg))
#define SWARM_LOG_INFO(msg) ::swarm::log_at(2, "info", (msg))
#define SWARM_LOG_DEBUG(msg) ::swarm::log_at(3, "debug", (msg))

#endif
