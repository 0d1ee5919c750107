#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace quori {

// Input violates a documented invariant. `key` names the offending
// parameter when there is one.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& what, std::string key = {})
        : std::runtime_error(what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

// Malformed text input. Line numbers are 1-based; 0 means "whole document".
class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& what, int line)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

struct LimitViolation {
    std::string bound;  // e.g. "turret_rate"
    double value = 0.0;
    double limit = 0.0;

    // How far past the bound the value is (always > 0 for a violation).
    double margin() const { return (value < 0 ? -value : value) - limit; }
};

using LimitReport = std::vector<LimitViolation>;

inline std::string describe(const LimitReport& report) {
    std::string out;
    for (const auto& v : report) {
        if (!out.empty()) out += "; ";
        out += v.bound + " |" + std::to_string(v.value) + "| > " + std::to_string(v.limit);
    }
    return out;
}

// A command exceeds a platform bound. Carries the full report.
class limit_error : public validation_error {
public:
    explicit limit_error(LimitReport report)
        : validation_error("limit violation: " + describe(report),
                           report.empty() ? std::string{} : report.front().bound),
          report_(std::move(report)) {}

    const LimitReport& report() const noexcept { return report_; }

private:
    LimitReport report_;
};

}  // namespace quori
