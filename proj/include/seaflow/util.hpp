#pragma once

#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace seaflow {

// Worker cap: SEAFLOW_THREADS if set, otherwise 1 (sequential). Parallelism
// is opt-in so default runs are byte-reproducible regardless of hardware.
inline int max_threads() {
    if (const char* env = std::getenv("SEAFLOW_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return 1;
}

// Chunked parallel map over [0, n). fn must only write state owned by its
// index (or a per-thread slot); chunk boundaries are deterministic.
inline void parallel_for(int n, const std::function<void(int)>& fn) {
    int workers = std::min(max_threads(), n > 0 ? n : 1);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (int i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

inline LogLevel& log_level() {
    static LogLevel level = LogLevel::warn;
    return level;
}

inline void log(LogLevel lvl, const std::string& msg) {
    if (lvl > log_level()) return;
    static const char* names[] = {"error", "warn", "info", "debug"};
    std::fprintf(stderr, "[%s] %s\n", names[static_cast<int>(lvl)], msg.c_str());
}

}  // namespace seaflow
