// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace evsched {

/// Base class for every error raised by the scheduling engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller-supplied argument violates an operation's precondition.
class InputError : public Error {
public:
    using Error::Error;
};

/// Queue or buffer history is missing or inconsistent.
class StateError : public Error {
public:
    using Error::Error;
};

/// Experiment or generator configuration is invalid.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// The scenario admits no schedule meeting the stated requirements.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

} // namespace evsched
