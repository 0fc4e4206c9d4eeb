#ifndef FEDMR_CSVIO_HPP
#define FEDMR_CSVIO_HPP

#include <string>
#include <vector>

namespace fedmr {

// %.17g via the C locale, so files parse the same everywhere.
std::string csv_num(double v);

// Result table, schema v1: a schema line, the manifest hash, a header row,
// then data rows. The whole table lives in one string so a single writer
// owns each output file regardless of how many workers filled the sweep.
class CsvTable {
 public:
  CsvTable(const std::string& manifest_hash,
           const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);
  void num_row(const std::vector<double>& values);
  const std::string& text() const { return text_; }

 private:
  std::size_t ncols_;
  std::string text_;
};

// Parses a v1 table (or any #-commented numeric CSV with a header row).
struct CsvData {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
  std::string manifest_hash;  // empty when the file carries none
  const std::vector<double>& column(const std::string& name) const;
};
CsvData read_csv(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// FNV-1a over the bytes, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace fedmr

#endif
