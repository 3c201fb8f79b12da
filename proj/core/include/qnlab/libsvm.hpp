#pragma once

#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qnlab/linalg.hpp"
#include "qnlab/objectives.hpp"

namespace qnlab {

struct SparseSample {
  int label = 1;  // +1 or -1
  std::vector<std::pair<Index, double>> features;  // 1-based, strictly increasing
};

struct LibsvmData {
  std::vector<SparseSample> samples;
  Index dim = 0;
};

class LibsvmParseError : public std::runtime_error {
 public:
  LibsvmParseError(std::size_t line, const std::string& msg);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Reads "label idx:val idx:val ..." lines. Text after '#' is ignored, blank
/// lines are skipped. Labels 1/+1 map to +1, -1/0 to -1. Indices must be
/// strictly increasing; "qid:" fields are rejected. dim is expected_dim when
/// given (larger indices are an error), else the largest index seen.
LibsvmData parse_libsvm(std::istream& in, std::optional<Index> expected_dim = std::nullopt);
LibsvmData load_libsvm(const std::string& path, std::optional<Index> expected_dim = std::nullopt);

/// Dense d×n sample matrix for the logistic objective.
LogisticObjective logistic_from_libsvm(const LibsvmData& data, double gamma,
                                       double self_concordance = 0.0);

}  // namespace qnlab
