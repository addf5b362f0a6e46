#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nplda/data/dataset.hpp"

namespace nplda::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 2,
  kFeasibility = 3,
  kNumerical = 4,
};

struct CsvTable {
  std::vector<std::string> header;
  Matrix values;  ///< rows x header.size()
};

/// Comma-separated, header line required, every field numeric. A completely
/// empty stream yields an empty table. Throws DomainError naming the line of
/// the first malformed record.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

/// Header plus rows, numbers written with 17 significant digits.
void write_csv(std::ostream& out, const CsvTable& table);

/// Splits off the `label` column (0/1) from the feature columns.
data::LabeledDataset to_labeled(const CsvTable& table);
/// Feature columns only; a `label` column, if present, is dropped.
Matrix to_features(const CsvTable& table);

/// Entry point of the `nplda` executable.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nplda::cli
