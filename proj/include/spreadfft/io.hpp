#pragma once

#include <string>
#include <utility>
#include <vector>

#include "spreadfft/fft_pricer.hpp"

namespace spreadfft {

inline constexpr const char* kArtifactVersion = "1.0.0";

// Shortest representation that round-trips a double exactly.
std::string fmt17(double v);

// Tabular result with leading "# key: value" metadata comment lines. The
// resolved run configuration is echoed there so every output file is
// self-describing.
struct Table {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

std::string to_csv(const Table& t);
Table parse_csv(const std::string& text);

// Panel snapshot, little-endian, magic "SPRDFFT1". Values are stored
// bit-exactly; a round trip reproduces the panel verbatim.
void write_panel_binary(const PricePanel& panel, const std::string& path);
PricePanel read_panel_binary(const std::string& path);

}  // namespace spreadfft
