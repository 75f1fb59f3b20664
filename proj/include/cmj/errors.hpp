#pragma once

#include <stdexcept>
#include <string>

namespace cmj {

/// Invalid model parameters or an operation applied outside its domain.
class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Bad experiment configuration. `key()` is the dotted path that failed.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace cmj
