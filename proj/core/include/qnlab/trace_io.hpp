#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qnlab/solvers.hpp"

namespace qnlab {

/// Fixed trace columns. Absent metrics are empty fields.
inline constexpr const char* kTraceHeader = "k,grad_norm,lambda,sigma,tau,r,envelope,elapsed_s";
inline constexpr const char* kSummaryHeader = "k,count,grad_norm,lambda,sigma,tau,r,envelope";

using TraceMeta = std::vector<std::pair<std::string, std::string>>;

struct TraceRow {
  IterationRecord rec;
  std::optional<double> envelope;
};

/// A CSV trace: a '#'-prefixed "key=value" metadata block, the header row,
/// then one row per step.
struct TraceFile {
  TraceMeta meta;
  std::vector<TraceRow> rows;

  std::optional<std::string> meta_value(const std::string& key) const;
};

class TraceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// %.17g, which round-trips every double.
std::string format_double(double v);

/// elapsed_s is written only when `timing` is set so that data rows are
/// reproducible byte for byte.
void write_trace(std::ostream& os, const TraceFile& trace, bool timing = false);
TraceFile read_trace(std::istream& is);
TraceFile load_trace(const std::string& path);

struct SummaryRow {
  Index k = 0;
  Index count = 0;
  std::optional<double> grad_norm, lambda, sigma, tau, r, envelope;
};

/// Per-step means over all traces having a row (and a value) at that step.
std::vector<SummaryRow> summarize(const std::vector<TraceFile>& traces);
void write_summary(std::ostream& os, const TraceMeta& meta, const std::vector<SummaryRow>& rows);

}  // namespace qnlab
