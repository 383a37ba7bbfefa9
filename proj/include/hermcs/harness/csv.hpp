#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <vector>

#include "hermcs/error.hpp"

namespace hermcs::harness {

/// Shortest round-trip text for a double; stable across runs.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_cell(double v) { return format_number(v); }
inline std::string format_cell(int v) { return std::to_string(v); }
inline std::string format_cell(long v) { return std::to_string(v); }
inline std::string format_cell(unsigned long v) { return std::to_string(v); }
inline std::string format_cell(unsigned long long v) { return std::to_string(v); }
inline std::string format_cell(bool v) { return v ? "true" : "false"; }
inline std::string format_cell(std::string_view v) { return std::string(v); }
inline std::string format_cell(const char* v) { return std::string(v); }
inline std::string format_cell(const std::string& v) { return v; }

/// One CSV file: a `# ...` metadata line, the header row, then data rows.
/// Trailing `# ...` comment lines carry summaries.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::string_view metadata,
            std::initializer_list<std::string_view> header)
      : path_(path) {
    if (path.has_parent_path()) {
      std::error_code ec;
      std::filesystem::create_directories(path.parent_path(), ec);
    }
    out_.open(path, std::ios::out | std::ios::trunc | std::ios::binary);
    if (!out_) throw IoError("cannot open output file " + path.string());
    out_ << "# " << metadata << '\n';
    bool first = true;
    for (auto h : header) {
      out_ << (first ? "" : ",") << h;
      first = false;
    }
    out_ << '\n';
    columns_ = header.size();
  }

  template <class... Cells>
  void row(const Cells&... cells) {
    static_assert(sizeof...(Cells) > 0);
    if (sizeof...(Cells) != columns_) throw IoError("row width does not match header in " + path_.string());
    bool first = true;
    ((out_ << (first ? "" : ",") << format_cell(cells), first = false), ...);
    out_ << '\n';
    check();
  }

  void comment(std::string_view text) {
    out_ << "# " << text << '\n';
    check();
  }

  [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

 private:
  void check() {
    if (!out_) throw IoError("write failed for " + path_.string());
  }

  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_ = 0;
};

}  // namespace hermcs::harness
