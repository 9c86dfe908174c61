#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <zlib.h>

#include "sfirg/errors.hpp"
#include "sfirg/graphs.hpp"
#include "sfirg/weights.hpp"

// CSV conventions: UTF-8, comma-delimited, header row, LF endings, floats
// with 17 significant digits.

namespace sfirg::io {

inline std::string fmt(double v) { return detail::format_double(v); }
inline std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }
inline const char* fmt(bool b) { return b ? "1" : "0"; }

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

// Writes the whole buffer; ".gz" paths are gzip-compressed.
inline void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.extension() == ".gz") {
    gzFile f = gzopen(path.string().c_str(), "wb");
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    const int written = content.empty() ? 0 : gzwrite(f, content.data(), static_cast<unsigned>(content.size()));
    const int rc = gzclose(f);
    if ((!content.empty() && written <= 0) || rc != Z_OK) throw IoError("write failed: " + path.string());
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

// ".gz" paths are decompressed.
inline std::string read_file(const std::filesystem::path& path) {
  if (path.extension() == ".gz") {
    gzFile f = gzopen(path.string().c_str(), "rb");
    if (!f) throw IoError("cannot open " + path.string());
    std::string out;
    char buf[1 << 16];
    int got = 0;
    while ((got = gzread(f, buf, sizeof buf)) > 0) out.append(buf, static_cast<std::size_t>(got));
    const bool failed = got < 0;
    gzclose(f);
    if (failed) throw IoError("corrupt gzip stream: " + path.string());
    return out;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Numeric column of a headed CSV. Picks `column` if present, otherwise the
// only column of a single-column file.
inline std::vector<double> read_numeric_column(const std::filesystem::path& path, std::string_view column) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  const auto header = split(trim(line), ',');
  std::size_t col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i)
    if (trim(header[i]) == column) col = i;
  if (col == header.size()) {
    if (header.size() != 1) throw ParseError(path.string() + ": no '" + std::string(column) + "' column");
    col = 0;
  }
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto fields = split(t, ',');
    if (fields.size() != header.size())
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                       " fields");
    values.push_back(detail::parse_double(trim(fields[col]), path.string() + ":" + std::to_string(lineno)));
  }
  if (values.empty()) throw ParseError(path.string() + ": no data rows");
  return values;
}

inline std::string weights_csv(const WeightVector& w) {
  std::string s = "weight\n";
  for (double x : w.sorted()) s += fmt(x) + "\n";
  return s;
}

// node is the 1-based weight-rank label.
inline std::string degrees_csv(std::span<const std::uint64_t> d) {
  std::string s = "node,degree\n";
  for (std::size_t i = 0; i < d.size(); ++i) s += std::to_string(i + 1) + "," + std::to_string(d[i]) + "\n";
  return s;
}

inline std::string edges_csv(std::span<const Edge> edges) {
  std::string s = "i,j,multiplicity\n";
  for (const Edge& e : edges)
    s += std::to_string(e.i + 1) + "," + std::to_string(e.j + 1) + "," + std::to_string(e.multiplicity) + "\n";
  return s;
}

}  // namespace sfirg::io
