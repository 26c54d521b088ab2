// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace pdr::io {

using Json = nlohmann::json;

/// Rejects non-objects and keys outside `allowed`, naming `context`.
inline void check_keys(const Json& j, std::initializer_list<std::string_view> allowed, std::string_view context) {
  if (!j.is_object()) throw std::invalid_argument(std::string(context) + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw std::invalid_argument(std::string(context) + ": unknown key '" + key + "'");
  }
}

/// Overwrites `field` with j[key] when present.
template <typename V>
void read_opt(const Json& j, std::string_view key, V& field, std::string_view context) {
  const auto it = j.find(std::string(key));
  if (it == j.end()) return;
  try {
    field = it->template get<V>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string(context) + "." + std::string(key) + ": " + e.what());
  }
}

}  // namespace pdr::io
