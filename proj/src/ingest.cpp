#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>

#include "cumulants/cli.hpp"

namespace cumulants {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line, char delimiter) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delimiter, start);
    out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

SampleBatch ingest_delimited(std::istream& in, char delimiter) {
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    header = split(line, delimiter);
    break;
  }
  if (header.empty()) throw DataError("input has no header row");
  for (const auto& h : header)
    if (h.empty()) throw DataError("empty column name in header");

  std::vector<std::vector<double>> cells(header.size());
  long row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split(line, delimiter);
    if (fields.size() != header.size())
      throw DataError("row " + std::to_string(row) + " has " + std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(header.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string& f = fields[c];
      double v = 0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || ec != std::errc() || ptr != f.data() + f.size())
        throw DataError("non-numeric value '" + f + "' in row " + std::to_string(row) + ", column '" + header[c] + "'");
      if (!std::isfinite(v))
        throw DataError("non-finite value in row " + std::to_string(row) + ", column '" + header[c] + "'");
      cells[c].push_back(v);
    }
  }
  if (row == 0) throw DataError("input has no data rows");

  std::map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < header.size(); ++c) index[header[c]] = c;
  std::vector<Column> columns;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& h = header[c];
    if (ends_with(h, "_re") || ends_with(h, "_im")) {
      const std::string base = h.substr(0, h.size() - 3);
      const bool is_re = ends_with(h, "_re");
      const std::string partner = base + (is_re ? "_im" : "_re");
      const auto it = index.find(partner);
      if (it == index.end()) throw DataError("column '" + h + "' has no matching '" + partner + "'");
      if (!is_re) continue;
      columns.push_back({base, cells[c], cells[it->second]});
    } else {
      columns.push_back({h, cells[c], {}});
    }
  }
  return SampleBatch(std::move(columns));
}

SampleBatch ingest_file(const std::string& path, char delimiter) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return ingest_delimited(in, delimiter);
}

}  // namespace cumulants
