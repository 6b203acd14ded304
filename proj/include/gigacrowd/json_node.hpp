#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gigacrowd/errors.hpp"

namespace gigacrowd {

// Read-only cursor into a JSON document that remembers its path so parse
// errors can name the offending field, e.g. "tracks[3].keyframes[0].box.w".
class JsonNode {
 public:
  JsonNode(const nlohmann::json& value, std::string path) : value_(value), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const nlohmann::json& raw() const { return value_; }

  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorKind::Parse, (path_.empty() ? std::string("<root>") : path_) + ": " + what);
  }

  bool has(const char* key) const { return value_.is_object() && value_.contains(key); }

  JsonNode at(const char* key) const {
    if (!value_.is_object()) error("expected an object");
    auto it = value_.find(key);
    if (it == value_.end()) JsonNode(value_, join(key)).error("missing field");
    return JsonNode(*it, join(key));
  }

  std::vector<JsonNode> items() const {
    if (!value_.is_array()) error("expected an array");
    std::vector<JsonNode> out;
    out.reserve(value_.size());
    for (std::size_t i = 0; i < value_.size(); ++i)
      out.emplace_back(value_[i], path_ + "[" + std::to_string(i) + "]");
    return out;
  }

  double number() const {
    if (!value_.is_number()) error("expected a number");
    return value_.get<double>();
  }

  int integer() const {
    if (!value_.is_number_integer()) error("expected an integer");
    return value_.get<int>();
  }

  bool boolean() const {
    if (!value_.is_boolean()) error("expected a boolean");
    return value_.get<bool>();
  }

  std::string string() const {
    if (!value_.is_string()) error("expected a string");
    return value_.get<std::string>();
  }

  template <typename E>
  E enumeration(std::optional<E> (*parse)(std::string_view) noexcept) const {
    const std::string s = string();
    auto v = parse(s);
    if (!v) error("unknown value \"" + s + "\"");
    return *v;
  }

 private:
  std::string join(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const nlohmann::json& value_;
  std::string path_;
};

}  // namespace gigacrowd
