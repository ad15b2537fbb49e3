#pragma once

#include <string>
#include <string_view>

namespace velvet {

/// Whole-file read; throws IoError naming the path.
std::string read_file(const std::string& path);

/// Truncating write; throws IoError naming the path.
void write_file(const std::string& path, std::string_view contents);

}  // namespace velvet
