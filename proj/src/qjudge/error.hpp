// Copyright 2026 The qjudge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QJUDGE_ERROR_HPP_
#define QJUDGE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace qjudge {

// Validation errors are caused by bad inputs (malformed files, incompatible
// kinds, out-of-range arguments). Runtime errors are failures during an
// otherwise valid computation (divergence, I/O).
enum class ErrorKind { kValidation, kRuntime, kIo };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error ValidationError(const std::string& message) {
  return Error(ErrorKind::kValidation, message);
}

inline Error RuntimeError(const std::string& message) {
  return Error(ErrorKind::kRuntime, message);
}

inline Error IoError(const std::string& message) {
  return Error(ErrorKind::kIo, message);
}

}  // namespace qjudge

#endif  // QJUDGE_ERROR_HPP_
