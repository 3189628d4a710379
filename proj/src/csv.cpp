#include "exo/csv.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace exo::csv {

int Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double to_double(const std::string& s) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || errno == ERANGE) throw std::runtime_error("not a number: '" + s + "'");
  return v;
}

Table read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Table t;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.comments.push_back(line.substr(line.size() > 1 && line[1] == ' ' ? 2 : 1));
      continue;
    }
    if (t.header.empty()) {
      t.header = split(line);
      continue;
    }
    auto row = split(line);
    if (row.size() != t.header.size())
      throw std::runtime_error(path + ": row has " + std::to_string(row.size()) + " fields, header has " +
                               std::to_string(t.header.size()));
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw std::runtime_error(path + ": missing header row");
  return t;
}

}  // namespace exo::csv
