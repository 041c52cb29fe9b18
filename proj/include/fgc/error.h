// Copyright 2026 The FGC Authors. All Rights Reserved.
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
// =============================================================================

#ifndef FGC_ERROR_H_
#define FGC_ERROR_H_

#include <stdexcept>
#include <string>

namespace fgc {

// Bad arguments or violated preconditions. Maps to CLI exit code 1 when the
// arguments came from the command line, 2 when they came from data.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input data (non-finite values, bad tensor files).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Base for every wire-format decoding failure.
class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class CorruptHeaderError : public FormatError {
 public:
  using FormatError::FormatError;
};

class TruncatedPayloadError : public FormatError {
 public:
  using FormatError::FormatError;
};

class BitmapMismatchError : public FormatError {
 public:
  using FormatError::FormatError;
};

// Training blew up; carries a human-readable diagnostic.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fgc

#endif  // FGC_ERROR_H_
