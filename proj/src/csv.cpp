#include "cmatch/csv.hpp"

#include <fstream>
#include <sstream>

#include "cmatch/errors.hpp"

namespace cmatch {

int CsvTable::col(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

namespace {

std::vector<std::string> parse_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return out;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CSV file: " + path);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV file: " + path);
  t.header = parse_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = parse_line(line);
    if (row.size() != t.header.size())
      throw DataError("CSV row width mismatch in " + path + " (expected " +
                      std::to_string(t.header.size()) + ", got " +
                      std::to_string(row.size()) + ")");
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write CSV file: " + path);
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) out << ',';
    out << csv_quote(header[i]);
  }
  out << '\n';
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << csv_quote(row[i]);
    }
    out << '\n';
  }
}

}  // namespace cmatch
