#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ergodyn {

// Thrown when a computation would exceed its configured memory or
// enumeration budget.
class capacity_error : public std::runtime_error {
public:
    explicit capacity_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an iteration exceeds its step budget; carries the number of
// steps consumed so the caller can diagnose the run.
class budget_error : public std::runtime_error {
public:
    budget_error(const std::string& what, std::uint64_t steps)
        : std::runtime_error(what + " (steps consumed: " + std::to_string(steps) + ")"),
          steps_consumed(steps) {}
    std::uint64_t steps_consumed;
};

}  // namespace ergodyn
