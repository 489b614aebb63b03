// Copyright 2026 The splitrank Authors.
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

#pragma once

#include <stdexcept>
#include <string>

namespace splitrank {

// Error taxonomy. Every failure that crosses a module boundary is one of
// these; the wire layer maps them to structured {type:"error"} responses.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// Caller passed something invalid (bad token id, dimension mismatch, ...).
class InputError : public Error {
 public:
  explicit InputError(const std::string& message) : Error("bad_request", message) {}
};

// A file on disk is corrupt, truncated, or not in the expected format.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& message) : Error("format", message) {}
};

// Model/index/dictionary version ids disagree.
class VersionError : public Error {
 public:
  explicit VersionError(const std::string& message) : Error("version_mismatch", message) {}
};

// Training diverged (non-finite loss).
class TrainingError : public Error {
 public:
  explicit TrainingError(const std::string& message) : Error("training", message) {}
};

// Socket-level failure: connect/read/write/timeout.
class NetError : public Error {
 public:
  explicit NetError(const std::string& message) : Error("unavailable", message) {}
  NetError(std::string code, const std::string& message) : Error(std::move(code), message) {}
};

}  // namespace splitrank
