#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shtauc {

/// Invalid caller-supplied value (bad k, empty block, ...).
struct argument_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Index or size mismatch between containers.
struct dimension_error : argument_error {
  using argument_error::argument_error;
};

/// Dataset cannot support the requested operation (e.g. a class is empty).
struct degenerate_data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Metric is undefined on the given input (e.g. AUC with one class).
struct undefined_metric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A formula was evaluated outside its domain of validity.
struct domain_error : std::domain_error {
  using std::domain_error::domain_error;
};

/// Text input that cannot be parsed; carries the 1-based line number.
struct parse_error : std::runtime_error {
  std::size_t line;
  parse_error(std::size_t line_no, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + what),
        line(line_no) {}
};

/// Label outside the accepted {+1,-1} (or mappable {0,1}) alphabet.
struct label_error : parse_error {
  using parse_error::parse_error;
};

/// Training blew up; carries the iteration at which it was detected.
struct divergence_error : std::runtime_error {
  std::size_t iteration;
  divergence_error(std::size_t iter, const std::string& what)
      : std::runtime_error("iteration " + std::to_string(iter) + ": " + what),
        iteration(iter) {}
};

}  // namespace shtauc
