#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "arggen/error.hpp"

namespace arggen::detail {

using nlohmann::json;

// Field access that turns schema violations into InvalidRecord errors.
template <typename T>
T require(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorCode::InvalidRecord, std::string("missing field '") + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::InvalidRecord, std::string("field '") + key + "' has the wrong type");
  }
}

json parse_json(std::string_view text, std::size_t line_number);
json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& value);

// Calls `fn(line, line_number)` for every non-blank line.
void for_each_line(std::istream& in, const std::function<void(std::string_view, std::size_t)>& fn);

// Writes through a temporary file and renames, so readers never see a
// partially written artifact.
void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace arggen::detail
