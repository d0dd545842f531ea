#pragma once

#include <stdexcept>
#include <string>

namespace anthrofit {

// Error taxonomy shared by the library and the CLI exit codes.
enum class ErrorKind {
    input,       // malformed files, inconsistent dimensions, bad arguments
    numerical,   // solver failures, non-finite values
    undefined,   // a measurement cannot be evaluated on the given mesh
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

class InputError : public Error {
public:
    explicit InputError(std::string message) : Error(ErrorKind::input, std::move(message)) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(std::string message) : Error(ErrorKind::numerical, std::move(message)) {}
};

// Carries the name of the measurement spec that could not be evaluated.
class MeasurementUndefined : public Error {
public:
    MeasurementUndefined(std::string spec_name, std::string message)
        : Error(ErrorKind::undefined, "measurement '" + spec_name + "': " + message),
          spec_name_(std::move(spec_name)) {}
    const std::string& spec_name() const { return spec_name_; }

private:
    std::string spec_name_;
};

} // namespace anthrofit
