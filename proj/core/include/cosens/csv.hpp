#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace cosens {

// Minimal RFC-4180 table: quoted fields, doubled-quote escapes, CR/LF line
// endings, and embedded newlines inside quoted fields are all accepted.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  // Index of a header column, or npos if absent.
  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

// 17-significant-digit formatting; round-trips doubles exactly and keeps
// report files byte-stable across runs.
std::string format_double(double v);

// Strict numeric parse; throws a data error naming `context` on failure.
double parse_double(const std::string& cell, const std::string& context);

}  // namespace cosens
