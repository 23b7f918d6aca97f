#include "ruelle/io.hpp"

#include <cstdio>

#include "ruelle/errors.hpp"

namespace ruelle::io {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     const std::vector<std::string>& columns)
    : out_(path, std::ios::binary), columns_(columns.size()) {
  if (!out_) throw UsageError("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out_ << ',';
    out_ << columns[i];
  }
  out_ << '\n';
}

CsvWriter::~CsvWriter() = default;

void CsvWriter::cell(double v) { cell(format_double(v)); }

void CsvWriter::cell(std::size_t v) { cell(std::to_string(v)); }

void CsvWriter::cell(const std::string& v) {
  if (filled_) out_ << ',';
  out_ << v;
  if (++filled_ > columns_)
    throw UsageError("CSV row holds more cells than declared columns");
}

void CsvWriter::end_row() {
  if (filled_ != columns_)
    throw UsageError("CSV row is missing cells");
  out_ << '\n';
  filled_ = 0;
}

void write_manifest(const std::filesystem::path& path,
                    const nlohmann::json& manifest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open " + path.string() + " for writing");
  out << manifest.dump(2) << '\n';
}

std::string word_to_string(const std::vector<std::uint32_t>& word) {
  std::string s;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (i) s += '-';
    s += std::to_string(word[i]);
  }
  return s;
}

}  // namespace ruelle::io
