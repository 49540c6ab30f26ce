#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "tribunal/domain.hpp"

namespace testing_support {

inline std::string data_path(const std::string& name) { return std::string(TRIBUNAL_TEST_DATA) + "/" + name; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline tribunal::Case two_match_case() {
  std::string text = read_file(data_path("two_match_case.json"));
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  return tribunal::parse_case(text);
}

}  // namespace testing_support
