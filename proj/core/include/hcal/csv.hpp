#pragma once

// Minimal CSV emitter: `#`-prefixed metadata lines, one header row, then
// rows whose floating-point cells carry 17 significant digits so that the
// files round-trip and compare byte-for-byte between reruns.

#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

namespace hcal {

std::string format_double(double value);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void comment(std::string_view key, std::string_view value);
  void header(std::initializer_list<std::string_view> columns);
  void header(const std::vector<std::string>& columns);

  template <typename... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((write_cell(cells, first)), ...);
    out_ << '\n';
  }

 private:
  template <typename T>
  void write_cell(const T& v, bool& first) {
    if (!first) out_ << ',';
    first = false;
    if constexpr (std::is_floating_point_v<T>) {
      out_ << format_double(static_cast<double>(v));
    } else if constexpr (std::is_integral_v<T>) {
      out_ << std::to_string(v);
    } else {
      out_ << std::string_view(v);
    }
  }

  std::ostream& out_;
};

/// Ordered key/value pairs written as `# key: value` lines.
using CsvMetadata = std::vector<std::pair<std::string, std::string>>;

void write_metadata(CsvWriter& csv, const CsvMetadata& metadata);

}  // namespace hcal
