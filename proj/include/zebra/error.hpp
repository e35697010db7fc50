// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace zebra {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A clue or herring references an attribute that does not exist.
struct ReferentialError : Error {
    using Error::Error;
};

/// A clue violates arity, distinctness, bounds or size requirements.
struct MalformedClueError : Error {
    using Error::Error;
};

/// Theme bundle failed to parse or validate.
struct ThemeError : Error {
    using Error::Error;
};

/// Theme pools are too small for the requested size or herring count.
struct InsufficientThemeError : ThemeError {
    using ThemeError::ThemeError;
};

/// Puzzle generation could not finish within its proposal budget,
/// or a precondition (e.g. unique input to pruning) was violated.
struct GenerationError : Error {
    using Error::Error;
};

/// Dataset I/O, corruption or schema mismatch.
struct DatasetError : Error {
    using Error::Error;
};

/// Evaluation harness configuration problems.
struct EvalError : Error {
    using Error::Error;
};

} // namespace zebra
