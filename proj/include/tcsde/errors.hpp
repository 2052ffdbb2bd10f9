#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace tcsde {

/// Invalid parameters or inconsistent configuration. CLI exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A requested allocation exceeds the configured cap.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite state or degenerate statistic. CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    static constexpr std::uint64_t kNoIndex = ~std::uint64_t{0};

    explicit NumericalError(const std::string& what, std::uint64_t step = kNoIndex,
                            std::uint64_t realization = kNoIndex)
        : std::runtime_error(what), step_(step), realization_(realization) {}

    std::uint64_t step() const { return step_; }
    std::uint64_t realization() const { return realization_; }

private:
    std::uint64_t step_;
    std::uint64_t realization_;
};

}  // namespace tcsde
