#include "hcal/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace hcal {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 17);
  if (ec != std::errc{}) return "nan";
  return std::string(buf.data(), end);
}

void CsvWriter::comment(std::string_view key, std::string_view value) {
  out_ << "# " << key << ": " << value << '\n';
}

void CsvWriter::header(std::initializer_list<std::string_view> columns) {
  bool first = true;
  for (auto c : columns) {
    if (!first) out_ << ',';
    first = false;
    out_ << c;
  }
  out_ << '\n';
}

void CsvWriter::header(const std::vector<std::string>& columns) {
  bool first = true;
  for (const auto& c : columns) {
    if (!first) out_ << ',';
    first = false;
    out_ << c;
  }
  out_ << '\n';
}

void write_metadata(CsvWriter& csv, const CsvMetadata& metadata) {
  for (const auto& [key, value] : metadata) csv.comment(key, value);
}

}  // namespace hcal
