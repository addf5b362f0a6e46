#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "nplda/cli/cli.hpp"
#include "nplda/errors.hpp"

namespace nplda::cli {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(field);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& raw, std::size_t line, std::size_t column) {
  const std::string s = trim(raw);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  // Underflow to a subnormal or zero is accepted; overflow is not.
  const bool overflow = errno == ERANGE && std::abs(v) > 1.0;
  if (s.empty() || end != s.c_str() + s.size() || overflow || !std::isfinite(v)) {
    throw DomainError("CSV line " + std::to_string(line) + ", column " + std::to_string(column) +
                      ": '" + s + "' is not a finite number");
  }
  return v;
}

std::string format(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ptrdiff_t label_column(const CsvTable& table) {
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (table.header[i] == "label") return static_cast<std::ptrdiff_t>(i);
  }
  return -1;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_line(line);
    if (!have_header) {
      for (auto& f : fields) table.header.push_back(trim(f));
      if (line_no == 1 && !table.header.empty() && table.header[0].rfind("\xEF\xBB\xBF", 0) == 0) {
        table.header[0].erase(0, 3);
      }
      for (const auto& h : table.header) {
        if (h.empty()) throw DomainError("CSV header: empty column name");
      }
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw DomainError("CSV line " + std::to_string(line_no) + ": expected " +
                        std::to_string(table.header.size()) + " fields, got " +
                        std::to_string(fields.size()));
    }
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) row[c] = parse_number(fields[c], line_no, c + 1);
    rows.push_back(std::move(row));
  }
  table.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open '" + path + "'");
  return read_csv(in);
}

void write_csv(std::ostream& out, const CsvTable& table) {
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    out << (c ? "," : "") << table.header[c];
  }
  out << "\n";
  for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
      out << (c ? "," : "") << format(table.values(r, c));
    }
    out << "\n";
  }
}

data::LabeledDataset to_labeled(const CsvTable& table) {
  const auto lc = label_column(table);
  if (lc < 0) throw DomainError("CSV: no 'label' column");
  if (table.header.size() < 2) throw DomainError("CSV: no feature columns");
  const Eigen::Index n = table.values.rows();
  Matrix x(n, static_cast<Eigen::Index>(table.header.size() - 1));
  std::vector<std::uint8_t> y(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < n; ++r) {
    const double label = table.values(r, lc);
    if (label != 0.0 && label != 1.0) {
      throw DomainError("CSV data row " + std::to_string(r + 1) + ": label must be 0 or 1");
    }
    y[static_cast<std::size_t>(r)] = static_cast<std::uint8_t>(label);
    Eigen::Index k = 0;
    for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
      if (c != lc) x(r, k++) = table.values(r, c);
    }
  }
  return data::LabeledDataset(std::move(x), std::move(y));
}

Matrix to_features(const CsvTable& table) {
  const auto lc = label_column(table);
  if (lc < 0) return table.values;
  Matrix x(table.values.rows(), table.values.cols() - 1);
  Eigen::Index k = 0;
  for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
    if (c != lc) x.col(k++) = table.values.col(c);
  }
  return x;
}

}  // namespace nplda::cli
