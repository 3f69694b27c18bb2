#pragma once

// Deterministic text artifacts: CSV tables that round-trip doubles exactly,
// a stable content digest for config identity, and wall-clock stamps for
// run manifests.  Nothing here feeds back into the numerics.

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"

namespace lagflow {

// 17 significant digits always round-trip an IEEE double through text.
inline std::string format_full(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline std::string render_csv(const CsvTable& t) {
  std::ostringstream out;
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (i) out << ',';
    out << t.header[i];
  }
  out << '\n';
  for (const auto& row : t.rows) {
    if (row.size() != t.header.size())
      throw invalid_input("render_csv: row width does not match the header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << format_full(row[i]);
    }
    out << '\n';
  }
  return out.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw invalid_input("write_text_file: cannot open " + path);
  out << content;
  if (!out) throw invalid_input("write_text_file: write failed on " + path);
}

inline void write_csv(const std::string& path, const CsvTable& t) {
  write_text_file(path, render_csv(t));
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw invalid_input("read_text_file: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// FNV-1a, 64 bit: stable across platforms, used to fingerprint config bytes.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= std::uint64_t(c);
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

// Wall-clock stamp for manifests only; reports must stay byte-identical
// across reruns and never include one.
inline std::string iso8601_utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string(buf);
}

}  // namespace lagflow
