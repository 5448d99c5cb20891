#pragma once

#include <stdexcept>
#include <string>

namespace lorasim {

// Invalid or inconsistent configuration (duplicate channels, missing energy table rows, ...).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// UCB statistics were requested for an arm that has never been played.
class UndefinedArmError : public ContractError {
public:
    using ContractError::ContractError;
};

}  // namespace lorasim
