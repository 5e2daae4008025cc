#pragma once

#include <stdexcept>
#include <string>

namespace mcal {

// Error categories map 1:1 onto CLI exit codes (config=2, data=3, numeric=4).
enum class ErrorKind { Config, Data, Numeric };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string msg) : std::runtime_error(std::move(msg)), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(std::string msg) : Error(ErrorKind::Config, std::move(msg)) {}
};

struct DataError : Error {
    explicit DataError(std::string msg) : Error(ErrorKind::Data, std::move(msg)) {}
};

struct NumericError : Error {
    explicit NumericError(std::string msg) : Error(ErrorKind::Numeric, std::move(msg)) {}
};

}  // namespace mcal
