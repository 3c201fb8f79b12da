#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qnlab/directions.hpp"
#include "qnlab/envelopes.hpp"
#include "qnlab/solvers.hpp"
#include "qnlab/trace_io.hpp"
#include "qnlab/updates.hpp"

namespace qnlab {

enum class Experiment { MatrixApprox, Quadratic, LogSumExp, Logistic };
std::optional<Experiment> parse_experiment(std::string_view name);
std::string to_string(Experiment e);

enum class InitialApprox { LI, A };

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One experiment: a problem instance (fixed by data_seed) solved by one
/// method once per seed. Seeds drive random directions and initial points.
struct RunConfig {
  Experiment experiment = Experiment::MatrixApprox;
  Index d = 10;
  /// Log-sum-exp terms or synthetic logistic samples; 0 picks d and 10·d.
  Index m = 0;
  double gamma = 1.0;
  /// Condition number of the synthetic A (matrix_approx, quadratic).
  double kappa = 100.0;
  UpdateRule rule = UpdateRule::bfgs();
  /// Accelerated gradient baseline instead of a quasi-Newton method.
  bool agd = false;
  DirectionStrategy direction;
  std::vector<std::uint64_t> seeds{0};
  std::uint64_t data_seed = 0;
  /// Correction constant; defaults to 2 for log-sum-exp and 0 otherwise.
  std::optional<double> m_const;
  int warm_start_steps = 0;
  /// Matrix approximation defaults to d steps for SR1 and 3d otherwise.
  std::optional<int> max_iters;
  double grad_tol = 0.0;
  double lambda_tol = 1e-12;
  std::string dataset;
  std::string output = "qnbench_out";
  std::optional<bool> dense;
  InitialApprox g0 = InitialApprox::LI;
  std::optional<EnvelopeKind> envelope;
  double delta = 0.1;
  bool timing = false;
  int jobs = 0;

  /// File stem shared by the per-seed traces and the summary.
  std::string method_name() const;
};

/// Recognized configuration keys, in documentation order.
const std::vector<std::string>& config_keys();

/// "key = value" lines; '#' starts a comment. Unknown keys are an error.
std::map<std::string, std::string> parse_config_text(const std::string& text);

/// Builds and validates a configuration. Throws ConfigError.
RunConfig make_config(const std::map<std::string, std::string>& kv);

/// Echo of the configuration as metadata pairs.
TraceMeta config_meta(const RunConfig& cfg);

/// Envelope used when the configuration names none.
EnvelopeKind default_envelope(const RunConfig& cfg);

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::string path;
  TraceFile trace;
  Termination termination = Termination::MaxIters;
  std::string diagnostic;
};

struct RunReport {
  std::vector<SeedOutcome> runs;
  std::string summary_path;
  /// 0 on success, 3 when any run hit an invariant breach.
  int exit_code = 0;
};

/// Executes every seed (concurrently when jobs != 1), writes one trace per
/// seed and a summary of per-step means. output_dir overrides cfg.output.
RunReport run_experiment(const RunConfig& cfg, std::ostream& log,
                         const std::optional<std::string>& output_dir = std::nullopt);

/// Single-seed run without file output.
SeedOutcome run_seed(const RunConfig& cfg, std::uint64_t seed);

class CompareError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CompareRow {
  Index k = 0;
  Index count = 0;
  double measured = 0.0;
  double envelope = 0.0;
  bool violated = false;
};

struct CompareReport {
  EnvelopeKind kind = EnvelopeKind::None;
  bool random = false;
  std::vector<CompareRow> rows;
  Index violations = 0;
};

/// Relative slack for greedy (deterministic) bounds, taken relative to the
/// measured value at k = 0.
inline constexpr double kDeterministicSlack = 1e-9;
/// Multiplicative slack for Monte-Carlo means of random traces.
inline constexpr double kMonteCarloSlack = 1.15;

/// Envelope parameters recorded in a trace's metadata and first row.
EnvelopeParams envelope_params(const TraceFile& trace);

/// Greedy traces are checked one by one; random traces are averaged per
/// step and checked against slack × mean envelope. kind defaults to the
/// envelope named in the metadata.
CompareReport compare_traces(const std::vector<TraceFile>& traces,
                             std::optional<EnvelopeKind> kind = std::nullopt,
                             double mc_slack = kMonteCarloSlack);

void write_compare(std::ostream& os, const CompareReport& report);

}  // namespace qnlab
