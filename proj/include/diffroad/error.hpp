// Copyright 2026 The DiffRoad Authors
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

#ifndef DIFFROAD__ERROR_HPP_
#define DIFFROAD__ERROR_HPP_

#include <stdexcept>
#include <string>

namespace diffroad
{

enum class ErrorKind {
  kInvalidArgument,
  kConfig,
  kOutOfRange,
  kIo,
  kParse,
  kNetwork,
  kVersion,    // checkpoint magic / version mismatch
  kTruncated,  // checkpoint shorter than declared
  kIntegrity,  // manifest and data disagree
  kNumeric,    // non-finite value in a numeric loop
  kContract,
  kXmlSyntax,
  kMissingAttribute,
  kUnsupportedElement,
  kContinuity,
  kStage,
};

const char * to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library. `retryable()` is set for transient
/// conditions such as network failures.
class Error : public std::runtime_error
{
public:
  Error(ErrorKind kind, const std::string & message, bool retryable = false)
  : std::runtime_error(message), kind_(kind), retryable_(retryable)
  {
  }

  ErrorKind kind() const noexcept { return kind_; }
  bool retryable() const noexcept { return retryable_; }

private:
  ErrorKind kind_;
  bool retryable_;
};

}  // namespace diffroad

#endif  // DIFFROAD__ERROR_HPP_
