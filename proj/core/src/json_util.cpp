#include "json_util.hpp"

#include <fstream>
#include <sstream>

namespace arggen::detail {

json parse_json(std::string_view text, std::size_t line_number) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(line_number, e.what());
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_json(buffer.str(), 1);
}

void write_json_file(const std::filesystem::path& path, const json& value) {
  write_text_file(path, value.dump(2) + "\n");
}

void for_each_line(std::istream& in, const std::function<void(std::string_view, std::size_t)>& fn) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    fn(line, number);
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << contents;
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace arggen::detail
