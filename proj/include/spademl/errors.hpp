#ifndef SPADEML_ERRORS_HPP
#define SPADEML_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace spademl {

// Error categories map onto CLI exit codes: config=1, data=2, numeric=3.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericalGuardError : std::runtime_error {
    explicit NumericalGuardError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace spademl

#endif
