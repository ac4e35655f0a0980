#pragma once

#include "hwave/spectral.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hwave::io {

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

/// UTF-8 CSV with a header row and ',' separators; doubles are written in
/// shortest round-trip form.
class CsvWriter {
 public:
  using Cell = std::variant<double, long long, std::string>;

  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);
  void row(const std::vector<Cell>& cells);
  std::size_t rows() const { return rows_; }

 private:
  std::ofstream out_;
  std::size_t columns_;
  std::size_t rows_ = 0;
};

/// Binary SpectralField ("HWSF", little-endian): magic, version, backend,
/// grid description, coefficient count, interleaved (re, im) doubles.
void write_field(const std::filesystem::path& path, const SpectralField& field);
SpectralField read_field(const std::filesystem::path& path);

/// SHA-1 of "blob <size>\0" + bytes (the git blob hash), lower-case hex.
std::string git_blob_hash(std::string_view bytes);
std::string git_blob_hash_file(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);

}  // namespace hwave::io
