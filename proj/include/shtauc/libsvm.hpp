#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "shtauc/dataset.hpp"
#include "shtauc/errors.hpp"

namespace shtauc {

/// Result of a libsvm load. `mapped_binary_labels` flags that the file used
/// {0,1} labels, which were mapped to {-1,+1}.
struct LibsvmData {
  Dataset data;
  bool mapped_binary_labels = false;
};

/// Parses "label idx:val idx:val ..." lines with 1-based indices into a
/// dense Dataset. Labels may be {+1,-1} or {0,1} (the latter mapped to
/// {-1,+1}). The dimension is the largest index observed, or d_hint if
/// larger. Malformed lines are rejected with their line number.
inline LibsvmData load_libsvm(const std::string& path, std::size_t d_hint = 0) {
  std::ifstream in(path);
  if (!in) throw argument_error("cannot open dataset file: " + path);

  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
  std::vector<std::int8_t> labels;
  bool saw_zero_one = false;
  bool saw_signed = false;
  std::size_t max_index = 0;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // Strip trailing comments and whitespace-only lines.
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;  // blank line

    double label_value = 0.0;
    try {
      std::size_t used = 0;
      label_value = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw parse_error(line_no, "unparseable label '" + token + "'");
    }
    std::int8_t label = 0;
    if (label_value == 1.0) {
      label = 1;
    } else if (label_value == -1.0) {
      label = -1;
      saw_signed = true;
    } else if (label_value == 0.0) {
      label = -1;
      saw_zero_one = true;
    } else {
      throw label_error(line_no, "label must be +1/-1 or 0/1, got '" + token + "'");
    }

    std::vector<std::pair<std::size_t, double>> entries;
    while (fields >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos || colon == 0 ||
          colon + 1 == token.size()) {
        throw parse_error(line_no, "malformed feature '" + token + "'");
      }
      std::size_t index = 0;
      double value = 0.0;
      try {
        std::size_t used = 0;
        const long long raw = std::stoll(token.substr(0, colon), &used);
        if (used != colon || raw < 1) throw std::invalid_argument(token);
        index = static_cast<std::size_t>(raw);
        value = std::stod(token.substr(colon + 1), &used);
        if (used != token.size() - colon - 1) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw parse_error(line_no, "malformed feature '" + token + "'");
      }
      max_index = std::max(max_index, index);
      entries.emplace_back(index - 1, value);
    }
    rows.push_back(std::move(entries));
    labels.push_back(label);
  }

  if (rows.empty()) throw degenerate_data_error("dataset file is empty: " + path);
  if (saw_zero_one && saw_signed) {
    throw label_error(0, "file mixes {0,1} and {-1,+1} label conventions");
  }

  const std::size_t d = std::max(max_index, d_hint);
  if (d == 0) throw degenerate_data_error("dataset has no features: " + path);
  std::vector<double> features(rows.size() * d, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& [j, value] : rows[i]) features[i * d + j] = value;
  }
  return LibsvmData{
      Dataset(rows.size(), d, std::move(features), std::move(labels)),
      saw_zero_one};
}

/// Writes the dataset in libsvm format (1-based indices, nonzeros only).
/// Values are rendered with 17 significant digits so a reload reproduces
/// them exactly; pass the dataset's d as d_hint when reloading, since
/// trailing all-zero columns are not representable in the format.
inline void save_libsvm(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw argument_error("cannot open output file: " + path);
  char buffer[64];
  for (std::size_t i = 0; i < data.n(); ++i) {
    out << (data.label(i) == 1 ? "+1" : "-1");
    auto x = data.row(i);
    for (std::size_t j = 0; j < data.d(); ++j) {
      if (x[j] == 0.0) continue;
      std::snprintf(buffer, sizeof(buffer), " %zu:%.17g", j + 1, x[j]);
      out << buffer;
    }
    out << '\n';
  }
  if (!out) throw argument_error("failed writing dataset file: " + path);
}

}  // namespace shtauc
