#pragma once

#include <string>
#include <vector>

namespace exo::csv {

struct Table {
  std::vector<std::string> comments;  // lines starting with '#', without the marker
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 if absent
};

Table read(const std::string& path);
std::vector<std::string> split(const std::string& line, char sep = ',');
double to_double(const std::string& s);

}  // namespace exo::csv
