#pragma once

#include <optional>
#include <string>
#include <vector>

namespace deriloss::svg {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t column(const std::string& name) const;  // throws ConfigError
};

/// Header plus rows; lines starting with '#' are skipped. Throws Io when
/// there is no header or no data row.
CsvTable parse_csv(const std::string& text);

struct PlotOptions {
  std::string title;
  std::optional<std::string> x_column;  // default: first column
  std::optional<std::string> y_column;  // default: m, else E, else second column
};

/// Line plot of one CSV column against another. An axis is logarithmic when
/// all of its values are positive and span at least two decades.
std::string plot_csv(const std::string& csv_text, const PlotOptions& options = {});

}  // namespace deriloss::svg
