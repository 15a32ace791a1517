#include "rfts/io.hpp"

#include <cstdio>
#include <fstream>

#include "rfts/error.hpp"

namespace rfts {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open for writing: " + tmp.string());
    os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!os) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace rfts
