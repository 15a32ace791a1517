#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace rfts {

// 17 significant digits, so a parse recovers the same double.
std::string format_double(double v);

// Writes through a temporary file and renames, so readers never see a
// partially written file.
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace rfts
