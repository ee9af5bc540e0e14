#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace herdlab {

// Raised by config parsing/validation. Carries every issue found, not just
// the first; what() joins them line by line.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> issues)
        : std::runtime_error(join(issues)), issues_(std::move(issues)) {}

    explicit ConfigError(std::string issue)
        : ConfigError(std::vector<std::string>{std::move(issue)}) {}

    const std::vector<std::string>& issues() const noexcept { return issues_; }

private:
    static std::string join(const std::vector<std::string>& issues) {
        std::string out;
        for (const auto& s : issues) {
            if (!out.empty()) out += '\n';
            out += s;
        }
        return out;
    }

    std::vector<std::string> issues_;
};

} // namespace herdlab
