#include "cfbench/run_log.hpp"

namespace cfbench {

bool RunLog::contains(const std::string& needle) const {
    std::lock_guard lock(mutex_);
    for (const auto& l : lines_)
        if (l.find(needle) != std::string::npos) return true;
    return false;
}

void RunLog::append(std::string line) {
    std::lock_guard lock(mutex_);
    if (echo_) *echo_ << line << '\n';
    lines_.push_back(std::move(line));
}

}  // namespace cfbench
