#ifndef ADSCAN_CSV_HPP
#define ADSCAN_CSV_HPP

#include <string>
#include <vector>

namespace adscan {
namespace csv {

// Minimal RFC 4180-style CSV. Fields containing commas, quotes or newlines
// are double-quoted on write; both quoted and bare fields parse back.

std::string escape(const std::string& field);
std::string join_row(const std::vector<std::string>& fields);

// Splits one logical line (no embedded newlines) into fields.
std::vector<std::string> split_row(const std::string& line);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Reads a whole file; first row is the header. Quoted fields may span lines.
Table read_file(const std::string& path);
void write_file(const std::string& path, const Table& table);

// Shortest round-trip decimal rendering of a double.
std::string format_double(double v);

}  // namespace csv
}  // namespace adscan

#endif  // ADSCAN_CSV_HPP
