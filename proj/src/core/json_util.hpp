#pragma once

#include <string>
#include <vector>

#include "core/common.hpp"
#include "json.hpp"

namespace cadet {

using json = nlohmann::json;

inline json parse_json(const std::string& text, const std::string& ctx) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) raise(ErrorKind::invalid_argument, ctx + ": invalid JSON");
  return j;
}

// Strict-schema guard: every present key must be in `allowed`.
inline void check_keys(const json& j, const std::vector<std::string>& allowed,
                       const std::string& ctx) {
  if (!j.is_object()) raise(ErrorKind::invalid_argument, ctx + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& k : allowed) {
      if (it.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) raise(ErrorKind::invalid_argument, ctx + ": unknown config key \"" + it.key() + "\"");
  }
}

template <class T>
void assign_if(const json& j, const char* key, T& target) {
  if (j.contains(key)) {
    try {
      target = j.at(key).get<T>();
    } catch (const json::exception&) {
      raise(ErrorKind::invalid_argument, std::string("config key \"") + key + "\" has wrong type");
    }
  }
}

}  // namespace cadet
