// Copyright 2026 The Causal Retrieval Authors
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

#ifndef CAUSAL_ERROR_HPP_
#define CAUSAL_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace causal {

// Base of every error raised by the library. The CLI maps subclasses onto
// process exit codes (2 usage/config, 3 data format, 4 numeric failure).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad flags, inconsistent dimensions, or otherwise invalid configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (JSONL lines, duplicate ids, ...).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Binary file does not start with the expected magic bytes.
class MagicError : public FormatError {
 public:
  using FormatError::FormatError;
};

// Binary file ends before the declared payload is complete.
class TruncatedError : public FormatError {
 public:
  using FormatError::FormatError;
};

// Binary file header disagrees with its own payload.
class IntegrityError : public FormatError {
 public:
  using FormatError::FormatError;
};

// NaN/Inf where a finite value is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace causal

#endif  // CAUSAL_ERROR_HPP_
