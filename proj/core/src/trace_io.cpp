#include "qnlab/trace_io.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>

namespace qnlab {

std::optional<std::string> TraceFile::meta_value(const std::string& key) const {
  for (const auto& [k, v] : meta)
    if (k == key) return v;
  return std::nullopt;
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

namespace {

void put(std::ostream& os, const std::optional<double>& v) {
  if (v) os << format_double(*v);
}

void write_meta(std::ostream& os, const TraceMeta& meta) {
  for (const auto& [k, v] : meta) os << "# " << k << '=' << v << '\n';
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> field(const std::string& s, std::size_t line) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw TraceFormatError("trace line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

void write_trace(std::ostream& os, const TraceFile& trace, bool timing) {
  write_meta(os, trace.meta);
  os << kTraceHeader << '\n';
  for (const TraceRow& row : trace.rows) {
    const IterationRecord& r = row.rec;
    os << r.k << ',';
    put(os, r.grad_norm);
    os << ',';
    put(os, r.lambda);
    os << ',';
    put(os, r.sigma);
    os << ',';
    put(os, r.tau);
    os << ',';
    put(os, r.r);
    os << ',';
    put(os, row.envelope);
    os << ',';
    if (timing) os << format_double(r.elapsed_s);
    os << '\n';
  }
}

TraceFile read_trace(std::istream& is) {
  TraceFile out;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      if (!body.empty() && body[0] == ' ') body.erase(0, 1);
      const std::size_t eq = body.find('=');
      if (eq == std::string::npos) continue;
      out.meta.emplace_back(body.substr(0, eq), body.substr(eq + 1));
      continue;
    }
    if (!header_seen) {
      if (line != kTraceHeader) throw TraceFormatError("trace: unexpected header '" + line + "'");
      header_seen = true;
      continue;
    }
    const auto f = split_fields(line);
    if (f.size() != 8) {
      throw TraceFormatError("trace line " + std::to_string(lineno) + ": expected 8 fields");
    }
    TraceRow row;
    const auto k = field(f[0], lineno);
    if (!k || *k < 0 || *k != static_cast<double>(static_cast<Index>(*k))) {
      throw TraceFormatError("trace line " + std::to_string(lineno) + ": bad step index");
    }
    row.rec.k = static_cast<Index>(*k);
    row.rec.grad_norm = field(f[1], lineno);
    row.rec.lambda = field(f[2], lineno);
    row.rec.sigma = field(f[3], lineno);
    row.rec.tau = field(f[4], lineno);
    row.rec.r = field(f[5], lineno);
    row.envelope = field(f[6], lineno);
    row.rec.elapsed_s = field(f[7], lineno).value_or(0.0);
    out.rows.push_back(row);
  }
  if (!header_seen) throw TraceFormatError("trace: missing header row");
  return out;
}

TraceFile load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TraceFormatError("cannot open trace '" + path + "'");
  return read_trace(in);
}

std::vector<SummaryRow> summarize(const std::vector<TraceFile>& traces) {
  struct Acc {
    Index count = 0;
    std::array<double, 6> sum{};
    std::array<Index, 6> n{};
  };
  std::map<Index, Acc> acc;
  for (const TraceFile& t : traces) {
    for (const TraceRow& row : t.rows) {
      Acc& a = acc[row.rec.k];
      ++a.count;
      const std::array<std::optional<double>, 6> vals{row.rec.grad_norm, row.rec.lambda,
                                                      row.rec.sigma,     row.rec.tau,
                                                      row.rec.r,         row.envelope};
      for (std::size_t i = 0; i < vals.size(); ++i) {
        if (vals[i]) {
          a.sum[i] += *vals[i];
          ++a.n[i];
        }
      }
    }
  }
  std::vector<SummaryRow> out;
  for (const auto& [k, a] : acc) {
    SummaryRow s;
    s.k = k;
    s.count = a.count;
    std::array<std::optional<double>*, 6> dst{&s.grad_norm, &s.lambda, &s.sigma,
                                              &s.tau,       &s.r,      &s.envelope};
    for (std::size_t i = 0; i < dst.size(); ++i) {
      if (a.n[i] > 0) *dst[i] = a.sum[i] / static_cast<double>(a.n[i]);
    }
    out.push_back(s);
  }
  return out;
}

void write_summary(std::ostream& os, const TraceMeta& meta, const std::vector<SummaryRow>& rows) {
  write_meta(os, meta);
  os << kSummaryHeader << '\n';
  for (const SummaryRow& s : rows) {
    os << s.k << ',' << s.count << ',';
    put(os, s.grad_norm);
    os << ',';
    put(os, s.lambda);
    os << ',';
    put(os, s.sigma);
    os << ',';
    put(os, s.tau);
    os << ',';
    put(os, s.r);
    os << ',';
    put(os, s.envelope);
    os << '\n';
  }
}

}  // namespace qnlab
