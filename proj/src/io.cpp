#include "spreadfft/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace spreadfft {

static_assert(std::endian::native == std::endian::little,
              "panel snapshots are defined little-endian");

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string to_csv(const Table& t) {
  std::ostringstream os;
  for (const auto& [k, v] : t.meta) os << "# " << k << ": " << v << "\n";
  for (size_t i = 0; i < t.columns.size(); ++i)
    os << t.columns[i] << (i + 1 < t.columns.size() ? "," : "");
  os << "\n";
  for (const auto& row : t.rows) {
    for (size_t i = 0; i < row.size(); ++i)
      os << row[i] << (i + 1 < row.size() ? "," : "");
    os << "\n";
  }
  return os.str();
}

Table parse_csv(const std::string& text) {
  Table t;
  std::istringstream is(text);
  std::string line;
  bool header_done = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      if (!body.empty() && body[0] == ' ') body.erase(0, 1);
      const size_t sep = body.find(": ");
      if (sep == std::string::npos)
        t.meta.emplace_back(body, "");
      else
        t.meta.emplace_back(body.substr(0, sep), body.substr(sep + 2));
      continue;
    }
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (!header_done) {
      t.columns = std::move(cells);
      header_done = true;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

namespace {

constexpr char kMagic[8] = {'S', 'P', 'R', 'D', 'F', 'F', 'T', '1'};
constexpr uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw DomainError("panel snapshot: truncated file");
  return v;
}

}  // namespace

void write_panel_binary(const PricePanel& panel, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("panel snapshot: cannot open " + path + " for writing");
  os.write(kMagic, sizeof(kMagic));
  put(os, kVersion);
  put(os, static_cast<int32_t>(panel.lat.N));
  put(os, panel.lat.eta);
  put(os, panel.eps.eps1);
  put(os, panel.eps.eps2);
  put(os, panel.shift[0]);
  put(os, panel.shift[1]);
  put(os, panel.r);
  put(os, panel.T);
  put(os, panel.trust_c);
  put(os, panel.max_imag_residue);
  put(os, panel.min_raw_value);
  const uint32_t tag_len = static_cast<uint32_t>(panel.model.size());
  put(os, tag_len);
  os.write(panel.model.data(), tag_len);
  const uint64_t count = panel.values.size();
  put(os, count);
  os.write(reinterpret_cast<const char*>(panel.values.data()),
           static_cast<std::streamsize>(count * sizeof(double)));
  if (!os) throw Error("panel snapshot: write failed for " + path);
}

PricePanel read_panel_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("panel snapshot: cannot open " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw DomainError("panel snapshot: bad magic");
  if (get<uint32_t>(is) != kVersion)
    throw DomainError("panel snapshot: unsupported version");
  PricePanel panel;
  panel.lat.N = get<int32_t>(is);
  panel.lat.eta = get<double>(is);
  panel.eps.eps1 = get<double>(is);
  panel.eps.eps2 = get<double>(is);
  panel.shift[0] = get<double>(is);
  panel.shift[1] = get<double>(is);
  panel.r = get<double>(is);
  panel.T = get<double>(is);
  panel.trust_c = get<double>(is);
  panel.max_imag_residue = get<double>(is);
  panel.min_raw_value = get<double>(is);
  const uint32_t tag_len = get<uint32_t>(is);
  if (tag_len > 256) throw DomainError("panel snapshot: implausible tag");
  panel.model.resize(tag_len);
  is.read(panel.model.data(), tag_len);
  const uint64_t count = get<uint64_t>(is);
  if (count != static_cast<uint64_t>(panel.lat.N) * panel.lat.N)
    throw DomainError("panel snapshot: value count mismatch");
  panel.values.resize(count);
  is.read(reinterpret_cast<char*>(panel.values.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!is) throw DomainError("panel snapshot: truncated values");
  return panel;
}

}  // namespace spreadfft
