// Copyright 2026 The DualTOD Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dualtod {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

// Malformed input text; `line` is 1-based, 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }
  const char* kind() const noexcept override { return "parse_error"; }

 private:
  std::size_t line_;
};

// Well-formed input that violates the ontology or a structural invariant.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& dialogue_id, const std::string& field_path,
              const std::string& what)
      : Error(dialogue_id + ":" + field_path + ": " + what),
        dialogue_id_(dialogue_id),
        field_path_(field_path) {}
  const std::string& dialogue_id() const noexcept { return dialogue_id_; }
  const std::string& field_path() const noexcept { return field_path_; }
  const char* kind() const noexcept override { return "schema_violation"; }

 private:
  std::string dialogue_id_;
  std::string field_path_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config_error"; }
};

class PreconditionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "precondition"; }
};

class NumericError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "numeric_error"; }
};

}  // namespace dualtod
