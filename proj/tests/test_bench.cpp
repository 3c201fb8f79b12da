#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qnlab/bench.hpp"
#include "qnlab/trace_io.hpp"

using namespace qnlab;
namespace fs = std::filesystem;

namespace {

RunConfig config(const std::string& text) { return make_config(parse_config_text(text)); }

std::vector<TraceFile> traces_of(const RunConfig& cfg) {
  std::vector<TraceFile> out;
  for (auto seed : cfg.seeds) out.push_back(run_seed(cfg, seed).trace);
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qnlab_" + name);
  fs::remove_all(p);
  return p;
}

std::string data_rows(const std::string& path) {
  std::ifstream in(path);
  std::string line, out;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') out += line + '\n';
  }
  return out;
}

}  // namespace

TEST(Config, ParsesKeysAndDefaults) {
  const RunConfig c = config(
      "# comment\nexperiment = quadratic\nd = 7\nrule = broyden\ntau = 0.25\n"
      "direction = greedy_broyden\nseeds = 3..5\nmax_iters = 12  # inline\n");
  EXPECT_EQ(c.experiment, Experiment::Quadratic);
  EXPECT_EQ(c.d, 7);
  EXPECT_EQ(c.rule.kind, UpdateKind::Broyden);
  EXPECT_EQ(c.rule.tau, 0.25);
  EXPECT_EQ(c.direction.kind, DirectionKind::GreedyBroyden);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{3, 4, 5}));
  EXPECT_EQ(*c.max_iters, 12);
  EXPECT_EQ(c.method_name(), "broyden0.25_greedy_broyden");

  const RunConfig d = config("");
  EXPECT_EQ(d.direction.kind, DirectionKind::RandomSphere);
  EXPECT_EQ(d.experiment, Experiment::MatrixApprox);
  EXPECT_EQ(config("seeds = 1, 9,4").seeds, (std::vector<std::uint64_t>{1, 9, 4}));
  EXPECT_TRUE(config("rule = agd\nexperiment = logsumexp").agd);
}

TEST(Config, Errors) {
  EXPECT_THROW(config("experiment = bogus"), ConfigError);
  EXPECT_THROW(config("colour = red"), ConfigError);
  EXPECT_THROW(config("d = 0"), ConfigError);
  EXPECT_THROW(config("d = x"), ConfigError);
  EXPECT_THROW(config("rule = broyden\ntau = 2"), ConfigError);
  EXPECT_THROW(config("seeds = 5..2"), ConfigError);
  EXPECT_THROW(config("direction = greedy_bfgs"), ConfigError);
  EXPECT_THROW(config("rule = sr1\nscaled = true"), ConfigError);
  EXPECT_THROW(config("rule = agd"), ConfigError);
  EXPECT_THROW(config("experiment = logsumexp\ng0 = A"), ConfigError);
  EXPECT_THROW(config("dataset = x.txt"), ConfigError);
  EXPECT_THROW(config("no equals sign"), ConfigError);
  EXPECT_NO_THROW(config("direction = greedy_bfgs\nallow_expensive = true"));
}

TEST(Run, MatrixApproxGreedySR1) {
  const RunConfig c = config("rule = sr1\ndirection = greedy_sr1\nd = 4");
  const SeedOutcome o = run_seed(c, 0);
  ASSERT_EQ(o.trace.rows.size(), 5u);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(o.trace.rows[k].rec.k, static_cast<Index>(k));
  EXPECT_LE(*o.trace.rows.back().rec.tau, 1e-10);
  EXPECT_EQ(o.trace.meta_value("envelope"), "sr1_matrix");
  EXPECT_EQ(*o.trace.rows[0].envelope, *o.trace.rows[0].rec.tau);
}

TEST(Run, QuadraticWithExactStart) {
  const RunConfig c = config("experiment = quadratic\ng0 = A\nd = 6\nrule = bfgs");
  const SeedOutcome o = run_seed(c, 0);
  ASSERT_EQ(o.trace.rows.size(), 2u);
  EXPECT_EQ(o.termination, Termination::Converged);
  EXPECT_LE(*o.trace.rows[1].rec.lambda, 1e-12 * *o.trace.rows[0].rec.lambda);
}

TEST(Run, GeneralExperimentsProduceTraces) {
  for (const char* text : {"experiment = logsumexp\nd = 6\nm = 8\nrule = sr1\nwarm_start_steps = 3\nmax_iters = 20",
                           "experiment = logistic\nd = 5\nrule = bfgs\nscaled = true\nmax_iters = 15",
                           "experiment = logsumexp\nd = 6\nrule = agd\nmax_iters = 30"}) {
    const SeedOutcome o = run_seed(config(text), 1);
    EXPECT_TRUE(o.termination == Termination::Converged || o.termination == Termination::MaxIters)
        << text << ": " << o.diagnostic;
    EXPECT_GE(o.trace.rows.size(), 2u);
    EXPECT_TRUE(o.trace.rows[0].rec.grad_norm.has_value());
  }
}

TEST(Trace, RoundTrip) {
  TraceFile t;
  t.meta = {{"a", "1"}, {"rule", "sr1"}};
  IterationRecord r0;
  r0.k = 0;
  r0.grad_norm = 0.1;
  r0.tau = 1.0 / 3.0;
  r0.elapsed_s = 0.5;
  IterationRecord r1;
  r1.k = 1;
  r1.sigma = 1e-300;
  t.rows = {{r0, 2.0}, {r1, std::nullopt}};
  std::stringstream ss;
  write_trace(ss, t, true);
  const TraceFile back = read_trace(ss);
  EXPECT_EQ(back.meta, t.meta);
  ASSERT_EQ(back.rows.size(), 2u);
  EXPECT_EQ(*back.rows[0].rec.tau, 1.0 / 3.0);
  EXPECT_EQ(*back.rows[0].envelope, 2.0);
  EXPECT_EQ(back.rows[0].rec.elapsed_s, 0.5);
  EXPECT_FALSE(back.rows[0].rec.lambda);
  EXPECT_EQ(*back.rows[1].rec.sigma, 1e-300);
  EXPECT_FALSE(back.rows[1].envelope);

  std::stringstream no_timing;
  write_trace(no_timing, t, false);
  EXPECT_EQ(no_timing.str().find("0.5"), std::string::npos);

  std::stringstream bad("k,grad_norm\n0,1\n");
  EXPECT_THROW(read_trace(bad), TraceFormatError);
  std::stringstream ragged(std::string(kTraceHeader) + "\n0,1\n");
  EXPECT_THROW(read_trace(ragged), TraceFormatError);
}

TEST(Trace, SummaryMeansMatchRecomputation) {
  const RunConfig c = config("rule = bfgs\nd = 5\nseeds = 0..9\njobs = 3");
  const fs::path dir = scratch("summary");
  std::ostringstream log;
  const RunReport rep = run_experiment(c, log, dir.string());
  EXPECT_EQ(rep.exit_code, 0);
  std::vector<TraceFile> files;
  for (const auto& run : rep.runs) files.push_back(load_trace(run.path));


  std::ifstream in(rep.summary_path);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("k,", 0) == 0) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  ASSERT_EQ(rows.size(), files[0].rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    double sum = 0.0;
    for (const auto& f : files) sum += *f.rows[k].rec.sigma;
    const double mean = sum / files.size();
    EXPECT_EQ(rows[k][1], "10");
    EXPECT_NEAR(std::stod(rows[k][4]), mean, 1e-12 * std::max(1.0, mean));
  }
  fs::remove_all(dir);
}

TEST(Run, DeterministicRows) {
  const RunConfig c = config("rule = bfgs\nd = 6\nseeds = 0..3\nscaled = true");
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  std::ostringstream log;
  const RunReport ra = run_experiment(c, log, a.string());
  const RunReport rb = run_experiment(c, log, b.string());
  for (std::size_t i = 0; i < ra.runs.size(); ++i) {
    const std::string rows = data_rows(ra.runs[i].path);
    EXPECT_FALSE(rows.empty());
    EXPECT_EQ(rows, data_rows(rb.runs[i].path));
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Compare, GreedySR1HasNoViolations) {
  const auto traces = traces_of(config("rule = sr1\ndirection = greedy_sr1\nd = 8\nkappa = 200"));
  const CompareReport rep = compare_traces(traces, EnvelopeKind::SR1Matrix);
  EXPECT_FALSE(rep.random);
  EXPECT_EQ(rep.violations, 0);
  EXPECT_EQ(rep.rows.size(), 9u);
}

TEST(Compare, FlagsDeterministicViolations) {
  auto traces = traces_of(config("rule = sr1\ndirection = greedy_sr1\nd = 4"));
  traces[0].rows[2].rec.tau = *traces[0].rows[0].rec.tau;
  const CompareReport rep = compare_traces(traces, EnvelopeKind::SR1Matrix);
  EXPECT_EQ(rep.violations, 1);
  EXPECT_TRUE(rep.rows[2].violated);
  std::ostringstream os;
  write_compare(os, rep);
  EXPECT_NE(os.str().find("violations"), std::string::npos);
}

TEST(Compare, Errors) {
  EXPECT_THROW(compare_traces({}), CompareError);
  auto greedy = traces_of(config("rule = sr1\ndirection = greedy_sr1\nd = 4"));
  auto random = traces_of(config("rule = sr1\nd = 4"));
  EXPECT_THROW(compare_traces({greedy[0], random[0]}), CompareError);
  greedy[0].rows.erase(greedy[0].rows.begin() + 1);
  EXPECT_THROW(compare_traces(greedy), CompareError);
}

TEST(Compare, RandomBFGSMeanOverSeeds) {
  const auto traces = traces_of(config("rule = bfgs\nscaled = true\nd = 10\nkappa = 50\nseeds = 0..199"));
  const CompareReport rep = compare_traces(traces, EnvelopeKind::BFGSMatrix);
  EXPECT_TRUE(rep.random);
  EXPECT_EQ(rep.violations, 0);
  EXPECT_EQ(rep.rows.size(), 31u);
  EXPECT_EQ(rep.rows[0].count, 200);
}
