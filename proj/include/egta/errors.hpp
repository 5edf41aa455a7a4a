// Copyright 2026 The egta-sim Authors
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

#ifndef EGTA_ERRORS_HPP_
#define EGTA_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace egta {

// Invalid or inconsistent configuration (bad values, wrong counts, missing
// files named by a config).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed game (dimension mismatch, empty action set, non-finite payoff).
class InvalidGameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Text that should carry a structured value but does not. The offending text
// is kept so callers can log it or retry.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& what, std::string offending)
      : std::runtime_error(what), offending_text_(std::move(offending)) {}
  const std::string& offending_text() const { return offending_text_; }

 private:
  std::string offending_text_;
};

class TemplateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Endpoint unreachable, timed out, or returned an error status after all
// retries.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unrecoverable failure inside a simulation year; carries the context.
class RunError : public std::runtime_error {
 public:
  RunError(const std::string& what, int year, int household)
      : std::runtime_error(what), year_(year), household_(household) {}
  int year() const { return year_; }
  // 1-based household index, or 0 when the failure is not household-specific.
  int household() const { return household_; }

 private:
  int year_;
  int household_;
};

}  // namespace egta

#endif  // EGTA_ERRORS_HPP_
