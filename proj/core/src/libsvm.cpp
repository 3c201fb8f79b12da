#include "qnlab/libsvm.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

namespace qnlab {

LibsvmParseError::LibsvmParseError(std::size_t line, const std::string& msg)
    : std::runtime_error("libsvm line " + std::to_string(line) + ": " + msg), line_(line) {}

namespace {

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace

LibsvmData parse_libsvm(std::istream& in, std::optional<Index> expected_dim) {
  LibsvmData data;
  std::string raw;
  std::size_t lineno = 0;
  Index max_index = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;

    SparseSample sample;
    double label = 0.0;
    if (!parse_number(tokens[0], label)) {
      throw LibsvmParseError(lineno, "malformed label '" + std::string(tokens[0]) + "'");
    }
    if (label == 1.0) {
      sample.label = 1;
    } else if (label == -1.0 || label == 0.0) {
      sample.label = -1;
    } else {
      throw LibsvmParseError(lineno, "unsupported label '" + std::string(tokens[0]) + "'");
    }

    Index prev = 0;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const std::string_view tok = tokens[t];
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) {
        throw LibsvmParseError(lineno, "expected index:value, got '" + std::string(tok) + "'");
      }
      const std::string_view key = tok.substr(0, colon);
      if (key == "qid") throw LibsvmParseError(lineno, "qid fields are not supported");
      long long index = 0;
      double value = 0.0;
      if (!parse_number(key, index) || index < 1) {
        throw LibsvmParseError(lineno, "malformed index in '" + std::string(tok) + "'");
      }
      if (!parse_number(tok.substr(colon + 1), value)) {
        throw LibsvmParseError(lineno, "malformed value in '" + std::string(tok) + "'");
      }
      if (index <= prev) throw LibsvmParseError(lineno, "feature indices must be strictly increasing");
      if (expected_dim && index > *expected_dim) {
        throw LibsvmParseError(lineno, "feature index exceeds expected dimension");
      }
      prev = static_cast<Index>(index);
      sample.features.emplace_back(prev, value);
    }
    max_index = std::max(max_index, prev);
    data.samples.push_back(std::move(sample));
  }
  data.dim = expected_dim ? *expected_dim : max_index;
  return data;
}

LibsvmData load_libsvm(const std::string& path, std::optional<Index> expected_dim) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset '" + path + "'");
  return parse_libsvm(in, expected_dim);
}

LogisticObjective logistic_from_libsvm(const LibsvmData& data, double gamma,
                                       double self_concordance) {
  const Index n = static_cast<Index>(data.samples.size());
  Matrix x = Matrix::Zero(data.dim, n);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    const SparseSample& s = data.samples[static_cast<std::size_t>(i)];
    y(i) = s.label;
    for (const auto& [idx, val] : s.features) x(idx - 1, i) = val;
  }
  return LogisticObjective(std::move(x), std::move(y), gamma, self_concordance);
}

}  // namespace qnlab
