// qnbench: run quasi-Newton experiments and compare traces with bounds.
//
//   qnbench run --config exp.cfg --set seeds=0..199 --d 20
//   qnbench compare --envelope sr1_matrix out/*_seed*.csv
//
// Exit status: 0 success, 1 bound violations (compare), 2 usage or
// configuration error, 3 solver invariant breach (partial traces kept).

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qnlab/bench.hpp"

namespace {

constexpr int kUsageError = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qnlab::ConfigError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int do_run(const std::string& config_path, const std::vector<std::string>& sets,
           const std::map<std::string, std::string>& flags, const std::string& usage) {
  try {
    std::map<std::string, std::string> kv;
    if (!config_path.empty()) kv = qnlab::parse_config_text(read_file(config_path));
    for (const auto& [k, v] : flags) kv[k] = v;
    for (const std::string& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw qnlab::ConfigError("--set expects key=value, got '" + s + "'");
      const auto parsed = qnlab::parse_config_text(s.substr(0, eq) + "=" + s.substr(eq + 1));
      for (const auto& [k, v] : parsed) kv[k] = v;
    }
    const qnlab::RunConfig cfg = qnlab::make_config(kv);

    std::optional<std::string> out_dir;
    if (const char* env = std::getenv("QNBENCH_OUTPUT_DIR"); env && *env) out_dir = env;
    const qnlab::RunReport rep = qnlab::run_experiment(cfg, std::cout, out_dir);
    return rep.exit_code;
  } catch (const qnlab::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << usage;
    return kUsageError;
  }
}

int do_compare(const std::vector<std::string>& files, const std::string& envelope, double slack) {
  try {
    std::optional<qnlab::EnvelopeKind> kind;
    if (!envelope.empty()) {
      kind = qnlab::parse_envelope_kind(envelope);
      if (!kind) throw qnlab::CompareError("unknown envelope '" + envelope + "'");
    }
    std::vector<qnlab::TraceFile> traces;
    for (const auto& f : files) traces.push_back(qnlab::load_trace(f));
    const qnlab::CompareReport rep = qnlab::compare_traces(traces, kind, slack);
    qnlab::write_compare(std::cout, rep);
    return rep.violations == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Greedy and randomized quasi-Newton experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment and write CSV traces");
  std::string config_path;
  std::vector<std::string> sets;
  run->add_option("-c,--config", config_path, "key = value configuration file");
  run->add_option("--set", sets, "Override a configuration key (key=value)");
  std::map<std::string, std::string> flags;
  for (const std::string& key : qnlab::config_keys()) {
    run->add_option_function<std::string>(
        "--" + key, [&flags, key](const std::string& v) { flags[key] = v; },
        "Configuration key '" + key + "'");
  }

  auto* cmp = app.add_subcommand("compare", "Compare traces against a bound envelope");
  std::vector<std::string> files;
  std::string envelope;
  double slack = qnlab::kMonteCarloSlack;
  cmp->add_option("files", files, "Trace CSV files");
  cmp->add_option("-e,--envelope", envelope, "Envelope kind (default: from trace metadata)");
  cmp->add_option("--slack", slack, "Multiplicative slack for random-trace means");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  if (run->parsed()) return do_run(config_path, sets, flags, run->help());
  if (files.empty()) {
    std::cerr << "error: no trace files given\n\n" << cmp->help();
    return kUsageError;
  }
  return do_compare(files, envelope, slack);
}
