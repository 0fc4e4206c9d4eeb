#include "fedmr/csvio.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fedmr/config.hpp"

namespace fedmr {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  out.push_back(cell);
  return out;
}

}  // namespace

std::string csv_num(double v) {
  // snprintf follows the global C locale; nothing in this program calls
  // setlocale, so the decimal point stays '.'.
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvTable::CsvTable(const std::string& manifest_hash,
                   const std::vector<std::string>& header)
    : ncols_(header.size()) {
  if (header.empty()) throw PreconditionError("csv table: empty header");
  text_ = "# fedmr-csv v1\n# manifest " + manifest_hash + "\n";
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) text_ += ',';
    text_ += header[i];
  }
  text_ += '\n';
}

void CsvTable::row(const std::vector<std::string>& cells) {
  if (cells.size() != ncols_)
    throw PreconditionError("csv table: row width differs from header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    text_ += cells[i];
  }
  text_ += '\n';
}

void CsvTable::num_row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(csv_num(v));
  row(cells);
}

const std::vector<double>& CsvData::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return columns[i];
  throw ConfigError("csv: no column named '" + name + "'");
}

CsvData read_csv(const std::string& text) {
  CsvData data;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string tag = "# manifest ";
      if (line.rfind(tag, 0) == 0) data.manifest_hash = line.substr(tag.size());
      continue;
    }
    if (!have_header) {
      data.header = split(line, ',');
      data.columns.assign(data.header.size(), {});
      have_header = true;
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != data.header.size())
      throw ConfigError("csv: row width differs from header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      char* end = nullptr;
      const double v = std::strtod(cells[i].c_str(), &end);
      // non-numeric cells (labels) parse as nan so numeric columns stay usable
      data.columns[i].push_back(end != cells[i].c_str() && *end == '\0'
                                    ? v
                                    : std::nan(""));
    }
  }
  if (!have_header) throw ConfigError("csv: no header row");
  return data;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw ConfigError("short write to '" + path + "'");
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fedmr
