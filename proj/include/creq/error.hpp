// Copyright 2026 The creq Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CREQ_ERROR_HPP
#define CREQ_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace creq {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input that violates a documented contract (schema, invariant, precondition).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A record in a line- or row-oriented file failed to parse or validate.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : ValidationError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A statistic is mathematically undefined for the given input (e.g. zero marginal).
class UndefinedError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Files that cannot be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace creq

#endif  // CREQ_ERROR_HPP
