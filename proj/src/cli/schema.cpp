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

#include "steinkit/cli/schema.hpp"

#include <steinkit/schema_text.hpp>

namespace steinkit::cli {
namespace {

using nlohmann::json;

bool has_type(const json& node, const std::string& type) {
  if (type == "object") return node.is_object();
  if (type == "array") return node.is_array();
  if (type == "string") return node.is_string();
  if (type == "boolean") return node.is_boolean();
  if (type == "null") return node.is_null();
  if (type == "integer") return node.is_number_integer();
  if (type == "number") return node.is_number();
  return false;
}

std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }

}  // namespace

SchemaValidator::SchemaValidator(json schema) : root_(std::move(schema)) {}

const json& SchemaValidator::resolve(const json& schema) const {
  const json* s = &schema;
  while (s->contains("$ref")) {
    const std::string ref = (*s)["$ref"].get<std::string>();
    const std::string prefix = "#/definitions/";
    if (ref.rfind(prefix, 0) != 0 || !root_["definitions"].contains(ref.substr(prefix.size()))) {
      throw std::logic_error("unresolvable schema reference " + ref);
    }
    s = &root_["definitions"][ref.substr(prefix.size())];
  }
  return *s;
}

std::vector<std::string> SchemaValidator::validate(const json& doc) const {
  std::vector<std::string> errors;
  check(doc, root_, "", errors);
  return errors;
}

void SchemaValidator::check(const json& node, const json& raw, const std::string& path,
                            std::vector<std::string>& errors) const {
  const json& schema = resolve(raw);
  const std::string where = path.empty() ? "/" : path;

  if (schema.contains("anyOf")) {
    for (const json& option : schema["anyOf"]) {
      std::vector<std::string> sub;
      check(node, option, path, sub);
      if (sub.empty()) {
        return;
      }
    }
    errors.push_back(where + ": matches none of the allowed forms");
    return;
  }

  if (schema.contains("type")) {
    const json& t = schema["type"];
    bool ok = false;
    if (t.is_array()) {
      for (const json& name : t) {
        ok = ok || has_type(node, name.get<std::string>());
      }
    } else {
      ok = has_type(node, t.get<std::string>());
    }
    if (!ok) {
      errors.push_back(where + ": expected type " + t.dump());
      return;
    }
  }

  if (schema.contains("enum")) {
    bool found = false;
    for (const json& v : schema["enum"]) {
      found = found || v == node;
    }
    if (!found) {
      errors.push_back(where + ": value " + node.dump() + " not in " + schema["enum"].dump());
    }
  }

  if (node.is_number()) {
    const double v = node.get<double>();
    if (schema.contains("minimum") && v < schema["minimum"].get<double>()) {
      errors.push_back(where + ": below minimum " + schema["minimum"].dump());
    }
    if (schema.contains("maximum") && v > schema["maximum"].get<double>()) {
      errors.push_back(where + ": above maximum " + schema["maximum"].dump());
    }
    if (schema.contains("exclusiveMinimum") && v <= schema["exclusiveMinimum"].get<double>()) {
      errors.push_back(where + ": must exceed " + schema["exclusiveMinimum"].dump());
    }
    if (schema.contains("exclusiveMaximum") && v >= schema["exclusiveMaximum"].get<double>()) {
      errors.push_back(where + ": must be below " + schema["exclusiveMaximum"].dump());
    }
  }

  if (node.is_array()) {
    if (schema.contains("minItems") && node.size() < schema["minItems"].get<std::size_t>()) {
      errors.push_back(where + ": needs at least " + schema["minItems"].dump() + " items");
    }
    if (schema.contains("items")) {
      for (std::size_t i = 0; i < node.size(); ++i) {
        check(node[i], schema["items"], child(path, std::to_string(i)), errors);
      }
    }
  }

  if (node.is_object()) {
    if (schema.contains("required")) {
      for (const json& key : schema["required"]) {
        if (!node.contains(key.get<std::string>())) {
          errors.push_back(where + ": missing required key \"" + key.get<std::string>() + "\"");
        }
      }
    }
    const json empty = json::object();
    const json& props = schema.contains("properties") ? schema["properties"] : empty;
    const bool closed = schema.contains("additionalProperties") &&
                        schema["additionalProperties"].is_boolean() &&
                        !schema["additionalProperties"].get<bool>();
    for (const auto& [key, value] : node.items()) {
      if (props.contains(key)) {
        check(value, props[key], child(path, key), errors);
      } else if (closed) {
        errors.push_back(where + ": unknown key \"" + key + "\"");
      }
    }
  }
}

const char* config_schema_text() { return kConfigSchema; }

const SchemaValidator& config_validator() {
  static const SchemaValidator validator(json::parse(kConfigSchema));
  return validator;
}

}  // namespace steinkit::cli
