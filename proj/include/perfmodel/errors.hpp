#pragma once

#include <stdexcept>
#include <string>

namespace perfmodel {

// Error classes map to distinct CLI exit codes:
//   std::invalid_argument / config_error -> configuration error
//   data_error                           -> malformed or invalid input data
//   numeric_error                        -> non-finite values, aborted searches

class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace perfmodel
