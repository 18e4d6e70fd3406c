#pragma once

#include <stdexcept>
#include <string>

namespace backstep {

/// Raised when an operation is called outside its documented preconditions.
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Successive approximation did not reach the requested tolerance.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, double achieved_update)
        : std::runtime_error(what), achieved_update_(achieved_update) {}

    double achieved_update() const noexcept { return achieved_update_; }

private:
    double achieved_update_;
};

// Throws ContractError(message) unless cond holds.
inline void require(bool cond, const std::string& message) {
    if (!cond) throw ContractError(message);
}

}  // namespace backstep
