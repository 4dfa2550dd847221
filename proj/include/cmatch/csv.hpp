#pragma once

#include <string>
#include <vector>

namespace cmatch {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index for a header name, -1 if absent.
  int col(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::string csv_quote(const std::string& field);

}  // namespace cmatch
