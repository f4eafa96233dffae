#ifndef SSIM_ERROR_HPP
#define SSIM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ssim {

/// Base class for all simulator errors.
class SimError : public std::runtime_error {
public:
    explicit SimError(const std::string& what) : std::runtime_error(what) {}
};

/// Scenario/config content is invalid. Maps to CLI exit code 2.
class ConfigError : public SimError {
public:
    explicit ConfigError(const std::string& what) : SimError(what) {}
};

/// A model was evaluated outside its domain or a run failed. Exit code 3.
class RuntimeError : public SimError {
public:
    explicit RuntimeError(const std::string& what) : SimError(what) {}
};

/// Commanded torque exceeds the combined actuator authority.
/// Carries the fraction of the command that is achievable.
class SaturationError : public RuntimeError {
public:
    SaturationError(const std::string& what, double achievable_fraction)
        : RuntimeError(what), achievable_fraction_(achievable_fraction) {}

    double achievable_fraction() const { return achievable_fraction_; }

private:
    double achievable_fraction_;
};

}  // namespace ssim

#endif  // SSIM_ERROR_HPP
