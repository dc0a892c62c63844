#include "sgev/io.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>
#include <unordered_set>

#include "sgev/errors.hpp"

namespace sgev {

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token, const std::string& where) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = first + token.size();
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last) {
    throw ParseError(where + ": not a number: '" + std::string(token) + "'");
  }
  if (!std::isfinite(value)) {
    throw ParseError(where + ": non-finite value '" + std::string(token) + "'");
  }
  return value;
}

void atomic_write_text(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
  std::error_code ec;
  if (!dir.empty()) fs::create_directories(dir, ec);
  fs::path tmp = dir / (target.filename().string() + ".tmp." +
                        std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("rename failed for " + path + ": " + ec.message());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

TimeSeriesPanel read_panel_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);

  TimeSeriesPanel panel;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line[0] == '#') continue;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (!have_header) {
      std::unordered_set<std::string> seen;
      for (std::size_t c = 0; c < fields.size(); ++c) {
        const std::string name = trim(fields[c]);
        if (name.empty()) {
          throw ParseError(path + ":" + std::to_string(line_no) + ": empty header name in column " +
                           std::to_string(c + 1));
        }
        if (!seen.insert(name).second) {
          throw ParseError(path + ":" + std::to_string(line_no) + ": duplicate header name '" +
                           name + "' in column " + std::to_string(c + 1));
        }
        panel.names.push_back(name);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != panel.names.size()) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(panel.names.size()) + " cells, found " +
                       std::to_string(fields.size()));
    }
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string token = trim(fields[c]);
      if (token.empty()) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": empty cell in column " +
                         std::to_string(c + 1));
      }
      row[c] = parse_double(token, path + ":" + std::to_string(line_no) + ":col" +
                                       std::to_string(c + 1));
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError(path + ": no header row");
  if (rows.empty()) throw ParseError(path + ": no data rows");

  panel.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(panel.names.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      panel.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return panel;
}

std::string panel_to_csv(const TimeSeriesPanel& panel,
                         const std::vector<std::pair<std::string, std::string>>& meta) {
  validate_panel(panel);
  std::string out;
  for (const auto& [key, value] : meta) {
    out += "# " + key + " = " + value + "\n";
  }
  for (Eigen::Index c = 0; c < panel.series(); ++c) {
    if (c > 0) out += ',';
    out += panel.names[static_cast<std::size_t>(c)];
  }
  out += '\n';
  for (Eigen::Index r = 0; r < panel.steps(); ++r) {
    for (Eigen::Index c = 0; c < panel.series(); ++c) {
      if (c > 0) out += ',';
      out += format_double(panel.values(r, c));
    }
    out += '\n';
  }
  return out;
}

void write_panel_csv(const std::string& path, const TimeSeriesPanel& panel,
                     const std::vector<std::pair<std::string, std::string>>& meta) {
  atomic_write_text(path, panel_to_csv(panel, meta));
}

TimeSeriesPanel TimeSeriesPanel::window(Eigen::Index first, Eigen::Index count) const {
  if (first < 0 || count < 1 || first + count > steps()) {
    throw DimensionError("panel window [" + std::to_string(first) + ", " +
                         std::to_string(first + count) + ") out of range for " +
                         std::to_string(steps()) + " steps");
  }
  TimeSeriesPanel out;
  out.names = names;
  out.values = values.middleRows(first, count);
  out.t0 = t0 + static_cast<double>(first) * interval;
  out.interval = interval;
  return out;
}

void validate_panel(const TimeSeriesPanel& panel) {
  if (panel.values.cols() != static_cast<Eigen::Index>(panel.names.size())) {
    throw DimensionError("panel has " + std::to_string(panel.values.cols()) +
                         " columns but " + std::to_string(panel.names.size()) + " names");
  }
  if (panel.values.rows() == 0 || panel.values.cols() == 0) {
    throw DimensionError("panel is empty");
  }
  if (!panel.values.allFinite()) {
    throw DegenerateDataError("panel contains non-finite values");
  }
}

}  // namespace sgev
