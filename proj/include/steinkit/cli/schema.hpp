// Copyright 2026 The steinkit Authors.
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

#ifndef STEINKIT_CLI_SCHEMA_HPP
#define STEINKIT_CLI_SCHEMA_HPP

#include <string>
#include <vector>

#include <json.hpp>

namespace steinkit::cli {

// Validates the subset of JSON Schema used by the config schema: type,
// properties, required, additionalProperties (boolean), enum, minimum,
// maximum, exclusiveMinimum, exclusiveMaximum, items, minItems, anyOf and
// local $ref into #/definitions.
class SchemaValidator {
 public:
  explicit SchemaValidator(nlohmann::json schema);

  /// Violations as "<json pointer>: <message>"; empty when valid.
  [[nodiscard]] std::vector<std::string> validate(const nlohmann::json& doc) const;

 private:
  void check(const nlohmann::json& node, const nlohmann::json& schema, const std::string& path,
             std::vector<std::string>& errors) const;
  [[nodiscard]] const nlohmann::json& resolve(const nlohmann::json& schema) const;

  nlohmann::json root_;
};

/// Validator for the embedded config schema.
const SchemaValidator& config_validator();

/// The embedded config schema text.
const char* config_schema_text();

}  // namespace steinkit::cli

#endif  // STEINKIT_CLI_SCHEMA_HPP
