#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace rfsl {

// Runtime error carrying a stable machine-readable category
// (e.g. "quadrature-overflow") next to the human-readable detail.
class error : public std::runtime_error {
public:
    error(std::string category, std::string detail)
        : std::runtime_error(category + ": " + detail), category_(std::move(category)),
          detail_(std::move(detail)) {}

    const std::string& category() const noexcept { return category_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string category_;
    std::string detail_;
};

[[noreturn]] inline void fail(std::string category, const std::string& detail) {
    throw error(std::move(category), detail);
}

} // namespace rfsl
