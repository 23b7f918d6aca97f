#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace ruelle::io {

// Fixed numeric formatting shared by every CSV column: 17 significant
// digits, '.' decimal point, '\n' line ends. Reruns with identical inputs
// produce byte-identical files.
std::string format_double(double v);

/// Column-ordered CSV writer.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path,
            const std::vector<std::string>& columns);
  ~CsvWriter();

  void cell(double v);
  void cell(std::size_t v);
  void cell(const std::string& v);
  void end_row();

 private:
  std::ofstream out_;
  std::size_t columns_;
  std::size_t filled_ = 0;
};

void write_manifest(const std::filesystem::path& path,
                    const nlohmann::json& manifest);

std::string word_to_string(const std::vector<std::uint32_t>& word);

}  // namespace ruelle::io
