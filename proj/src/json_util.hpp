#pragma once

#include <fmt/format.h>

#include <json.hpp>

#include <optional>
#include <set>
#include <string>

#include "mouseleak/error.hpp"

namespace mouseleak::detail {

/// Typed, strict access to a JSON object: reads record the keys they touch
/// and finish() rejects anything left over.
class JsonReader {
 public:
  JsonReader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw Error(ErrorCode::Schema, fmt::format("{}: expected an object", path_));
    }
  }
  // Holds a reference; the document must outlive the reader.
  JsonReader(nlohmann::json&&, std::string) = delete;

  template <typename T>
  std::optional<T> opt(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return std::nullopt;
    try {
      return it->template get<T>();
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorCode::Schema, fmt::format("{}.{}: wrong type", path_, key));
    }
  }

  template <typename T>
  T req(const std::string& key) {
    auto v = opt<T>(key);
    if (!v) throw Error(ErrorCode::Schema, fmt::format("{}.{}: missing", path_, key));
    return *v;
  }

  template <typename T>
  void get_to(const std::string& key, T& out) {
    if (auto v = opt<T>(key)) out = *v;
  }

  std::optional<JsonReader> child(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return std::nullopt;
    return JsonReader(*it, path_ + "." + key);
  }

  const nlohmann::json* raw(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const std::string& path() const { return path_; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw Error(ErrorCode::Schema, fmt::format("{}: unknown key '{}'", path_, it.key()));
      }
    }
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace mouseleak::detail
