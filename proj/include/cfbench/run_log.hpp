#pragma once

#include <mutex>
#include <ostream>
#include <string>
#include <vector>

namespace cfbench {

// Append-only run log. Lines are kept for inspection and optionally echoed.
class RunLog {
public:
    RunLog() = default;
    explicit RunLog(std::ostream* echo) : echo_(echo) {}

    void info(const std::string& line) { append("info: " + line); }
    void warn(const std::string& line) { append("warning: " + line); }

    std::vector<std::string> lines() const {
        std::lock_guard lock(mutex_);
        return lines_;
    }

    bool contains(const std::string& needle) const;

private:
    void append(std::string line);

    mutable std::mutex mutex_;
    std::vector<std::string> lines_;
    std::ostream* echo_ = nullptr;
};

}  // namespace cfbench
