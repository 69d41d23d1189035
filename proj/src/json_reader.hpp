#pragma once

#include <set>
#include <string>

#include "json.hpp"

#include "bevreg/errors.hpp"

namespace bevreg::io::detail {

// Reads keys from a JSON object and rejects keys that were never consumed,
// so a misspelled setting fails loudly instead of silently keeping a default.
class StrictObject {
 public:
  StrictObject(const nlohmann::ordered_json& j, std::string context) : j_(j), context_(std::move(context)) {
    if (!j_.is_object()) throw ConfigError(context_ + ": expected a JSON object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  template <class T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).template get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(context_ + "." + key + ": " + e.what());
    }
  }

  const nlohmann::ordered_json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError(context_ + ": unknown key '" + key + "'");
    }
  }

  const std::string& context() const { return context_; }

 private:
  const nlohmann::ordered_json& j_;
  std::string context_;
  std::set<std::string> seen_;
};

}  // namespace bevreg::io::detail
