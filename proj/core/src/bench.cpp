#include "qnlab/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

#include "qnlab/libsvm.hpp"
#include "qnlab/objectives.hpp"
#include "qnlab/rng.hpp"

#ifndef QNLAB_VERSION
#define QNLAB_VERSION "unknown"
#endif

namespace qnlab {

namespace fs = std::filesystem;

std::optional<Experiment> parse_experiment(std::string_view name) {
  if (name == "matrix_approx") return Experiment::MatrixApprox;
  if (name == "quadratic") return Experiment::Quadratic;
  if (name == "logsumexp") return Experiment::LogSumExp;
  if (name == "logistic") return Experiment::Logistic;
  return std::nullopt;
}

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::MatrixApprox: return "matrix_approx";
    case Experiment::Quadratic: return "quadratic";
    case Experiment::LogSumExp: return "logsumexp";
    case Experiment::Logistic: return "logistic";
  }
  return "unknown";
}

std::string RunConfig::method_name() const {
  if (agd) return "agd";
  std::string r = rule.name();
  r.erase(std::remove_if(r.begin(), r.end(), [](char c) { return c == '(' || c == ')'; }), r.end());
  return r + "_" + direction.name();
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "experiment", "d",          "m",          "gamma",     "kappa",         "rule",
      "tau",        "direction",  "scaled",     "seeds",     "data_seed",     "m_const",
      "warm_start_steps",         "max_iters",  "grad_tol",  "lambda_tol",    "dataset",
      "output",     "allow_expensive",          "dense",     "g0",            "envelope",
      "delta",      "timing",     "jobs"};
  return keys;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool known_key(const std::string& key) {
  const auto& keys = config_keys();
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

template <typename T>
T parse_num(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  if (!value.empty() && value[0] == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (value.empty() || ec != std::errc() || ptr != last) {
    throw ConfigError("invalid value for '" + key + "': '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw ConfigError("invalid boolean for '" + key + "': '" + value + "'");
}

// "3", "0,4,7" or an inclusive range "0..199".
std::vector<std::uint64_t> parse_seeds(const std::string& value) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto dots = item.find("..");
    if (dots != std::string::npos) {
      const auto lo = parse_num<std::uint64_t>("seeds", trim(item.substr(0, dots)));
      const auto hi = parse_num<std::uint64_t>("seeds", trim(item.substr(dots + 2)));
      if (hi < lo) throw ConfigError("empty seed range '" + item + "'");
      if (hi - lo >= 1000000) throw ConfigError("seed range too large '" + item + "'");
      for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
    } else {
      out.push_back(parse_num<std::uint64_t>("seeds", item));
    }
  }
  if (out.empty()) throw ConfigError("seeds must not be empty");
  return out;
}

std::string seeds_text(const std::vector<std::uint64_t>& seeds) {
  // Contiguous lists are echoed as ranges.
  bool contiguous = seeds.size() > 2;
  for (std::size_t i = 1; contiguous && i < seeds.size(); ++i)
    contiguous = seeds[i] == seeds[i - 1] + 1;
  if (contiguous) return std::to_string(seeds.front()) + ".." + std::to_string(seeds.back());
  std::string out;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(seeds[i]);
  }
  return out;
}

bool is_sr1_rule(const UpdateRule& rule) {
  return rule.kind == UpdateKind::SR1 || (rule.kind == UpdateKind::Broyden && rule.tau == 0.0);
}

MethodFamily family_of(const RunConfig& cfg) {
  const bool random = cfg.direction.is_random();
  if (is_sr1_rule(cfg.rule)) return random ? MethodFamily::RandomSR1 : MethodFamily::GreedySR1;
  if (cfg.rule.kind == UpdateKind::BFGS && cfg.direction.uses_factor()) {
    return random ? MethodFamily::RandomBFGS : MethodFamily::GreedyBFGS;
  }
  return random ? MethodFamily::RandomBroyden : MethodFamily::GreedyBroyden;
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (!known_key(key)) {
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

RunConfig make_config(const std::map<std::string, std::string>& kv) {
  RunConfig cfg;
  for (const auto& [key, _] : kv) {
    if (!known_key(key)) throw ConfigError("unknown key '" + key + "'");
  }
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };

  if (auto v = get("experiment")) {
    const auto e = parse_experiment(*v);
    if (!e) throw ConfigError("unknown experiment '" + *v + "'");
    cfg.experiment = *e;
  }
  if (auto v = get("d")) cfg.d = parse_num<long long>("d", *v);
  if (auto v = get("m")) cfg.m = parse_num<long long>("m", *v);
  if (auto v = get("gamma")) cfg.gamma = parse_num<double>("gamma", *v);
  if (auto v = get("kappa")) cfg.kappa = parse_num<double>("kappa", *v);

  const double tau = get("tau") ? parse_num<double>("tau", *get("tau")) : 0.0;
  if (auto v = get("rule")) {
    if (*v == "agd") {
      cfg.agd = true;
    } else {
      const auto r = parse_update_rule(*v, tau);
      if (!r) throw ConfigError("unknown rule '" + *v + "' (or tau outside [0, 1])");
      cfg.rule = *r;
    }
  }

  if (auto v = get("direction")) {
    const auto k = parse_direction_kind(*v);
    if (!k) throw ConfigError("unknown direction '" + *v + "'");
    cfg.direction.kind = *k;
  } else {
    cfg.direction.kind = DirectionKind::RandomSphere;
  }
  if (auto v = get("scaled")) cfg.direction.scaled = parse_bool("scaled", *v);
  if (auto v = get("allow_expensive")) cfg.direction.allow_expensive = parse_bool("allow_expensive", *v);
  if (auto v = get("seeds")) cfg.seeds = parse_seeds(*v);
  if (auto v = get("data_seed")) cfg.data_seed = parse_num<std::uint64_t>("data_seed", *v);
  if (auto v = get("m_const")) cfg.m_const = parse_num<double>("m_const", *v);
  if (auto v = get("warm_start_steps")) cfg.warm_start_steps = parse_num<int>("warm_start_steps", *v);
  if (auto v = get("max_iters")) cfg.max_iters = parse_num<int>("max_iters", *v);
  if (auto v = get("grad_tol")) cfg.grad_tol = parse_num<double>("grad_tol", *v);
  if (auto v = get("lambda_tol")) cfg.lambda_tol = parse_num<double>("lambda_tol", *v);
  if (auto v = get("dataset")) cfg.dataset = *v;
  if (auto v = get("output")) cfg.output = *v;
  if (auto v = get("dense")) cfg.dense = parse_bool("dense", *v);
  if (auto v = get("g0")) {
    if (*v == "LI") {
      cfg.g0 = InitialApprox::LI;
    } else if (*v == "A") {
      cfg.g0 = InitialApprox::A;
    } else {
      throw ConfigError("g0 must be LI or A");
    }
  }
  if (auto v = get("envelope")) {
    const auto k = parse_envelope_kind(*v);
    if (!k) throw ConfigError("unknown envelope '" + *v + "'");
    cfg.envelope = *k;
  }
  if (auto v = get("delta")) cfg.delta = parse_num<double>("delta", *v);
  if (auto v = get("timing")) cfg.timing = parse_bool("timing", *v);
  if (auto v = get("jobs")) cfg.jobs = parse_num<int>("jobs", *v);

  // Validation.
  const bool external = cfg.experiment == Experiment::Logistic && !cfg.dataset.empty();
  if (!external && cfg.d < 1) throw ConfigError("d must be >= 1");
  if (cfg.m < 0) throw ConfigError("m must be >= 0");
  if (!(cfg.gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (!(cfg.kappa >= 1.0)) throw ConfigError("kappa must be >= 1");
  if (cfg.m_const && !(*cfg.m_const >= 0.0)) throw ConfigError("m_const must be >= 0");
  if (cfg.warm_start_steps < 0) throw ConfigError("warm_start_steps must be >= 0");
  if (cfg.max_iters && *cfg.max_iters < 0) throw ConfigError("max_iters must be >= 0");
  if (!(cfg.grad_tol >= 0.0) || !(cfg.lambda_tol >= 0.0)) throw ConfigError("tolerances must be >= 0");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw ConfigError("delta must be in (0, 1)");
  if (cfg.jobs < 0) throw ConfigError("jobs must be >= 0");
  if (cfg.output.empty()) throw ConfigError("output must not be empty");
  if (!cfg.dataset.empty() && cfg.experiment != Experiment::Logistic) {
    throw ConfigError("dataset is only used by the logistic experiment");
  }
  if (cfg.g0 == InitialApprox::A && cfg.experiment != Experiment::Quadratic &&
      cfg.experiment != Experiment::MatrixApprox) {
    throw ConfigError("g0 = A is only available for matrix_approx and quadratic");
  }
  if (cfg.agd) {
    if (cfg.experiment == Experiment::MatrixApprox) {
      throw ConfigError("rule agd needs an objective; not valid for matrix_approx");
    }
  } else {
    try {
      validate_direction(cfg.direction, cfg.rule);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (cfg.dense && *cfg.dense && cfg.d > kMaxDenseHessianDim) {
    throw ConfigError("dense instrumentation is limited to d <= 1024");
  }
  return cfg;
}

TraceMeta config_meta(const RunConfig& cfg) {
  TraceMeta m;
  m.emplace_back("qnlab_version", QNLAB_VERSION);
  m.emplace_back("experiment", to_string(cfg.experiment));
  m.emplace_back("d", std::to_string(cfg.d));
  m.emplace_back("m", std::to_string(cfg.m));
  m.emplace_back("gamma", format_double(cfg.gamma));
  m.emplace_back("kappa_config", format_double(cfg.kappa));
  m.emplace_back("rule", cfg.agd ? "agd" : cfg.rule.name());
  m.emplace_back("direction", cfg.agd ? "none" : to_string(cfg.direction.kind));
  m.emplace_back("scaled", cfg.direction.scaled ? "true" : "false");
  m.emplace_back("allow_expensive", cfg.direction.allow_expensive ? "true" : "false");
  m.emplace_back("seeds", seeds_text(cfg.seeds));
  m.emplace_back("data_seed", std::to_string(cfg.data_seed));
  m.emplace_back("m_const", cfg.m_const ? format_double(*cfg.m_const) : "default");
  m.emplace_back("warm_start_steps", std::to_string(cfg.warm_start_steps));
  m.emplace_back("max_iters", cfg.max_iters ? std::to_string(*cfg.max_iters) : "default");
  m.emplace_back("grad_tol", format_double(cfg.grad_tol));
  m.emplace_back("lambda_tol", format_double(cfg.lambda_tol));
  m.emplace_back("dataset", cfg.dataset);
  m.emplace_back("dense", cfg.dense ? (*cfg.dense ? "true" : "false") : "default");
  m.emplace_back("g0", cfg.g0 == InitialApprox::A ? "A" : "LI");
  m.emplace_back("envelope", to_string(cfg.envelope.value_or(default_envelope(cfg))));
  m.emplace_back("delta", format_double(cfg.delta));
  return m;
}

EnvelopeKind default_envelope(const RunConfig& cfg) {
  if (cfg.agd) return EnvelopeKind::None;
  const bool sr1 = is_sr1_rule(cfg.rule);
  const bool sr1_dir = cfg.direction.kind == DirectionKind::GreedySR1 || cfg.direction.is_random();
  const bool bfgs_scaled = cfg.rule.kind == UpdateKind::BFGS && cfg.direction.uses_factor();
  switch (cfg.experiment) {
    case Experiment::MatrixApprox:
      if (sr1 && sr1_dir) return EnvelopeKind::SR1Matrix;
      if (bfgs_scaled) return EnvelopeKind::BFGSMatrix;
      return EnvelopeKind::BroydenMatrix;
    case Experiment::Quadratic:
      if (sr1 && sr1_dir) return EnvelopeKind::SR1Lambda;
      if (bfgs_scaled) return EnvelopeKind::BFGSLambda;
      return EnvelopeKind::BroydenLambda;
    case Experiment::LogSumExp:
    case Experiment::Logistic:
      switch (family_of(cfg)) {
        case MethodFamily::GreedyBroyden: return EnvelopeKind::GreedyBroydenTwoPhase;
        case MethodFamily::RandomBroyden: return EnvelopeKind::RandomBroydenTwoPhase;
        case MethodFamily::GreedyBFGS:
        case MethodFamily::GreedySR1: return EnvelopeKind::GreedyTwoPhase;
        case MethodFamily::RandomBFGS:
        case MethodFamily::RandomSR1: return EnvelopeKind::RandomTwoPhase;
      }
  }
  return EnvelopeKind::None;
}

namespace {

struct Instance {
  std::optional<SymMatrix> a;
  std::unique_ptr<QuadraticObjective> quad;
  std::unique_ptr<Objective> general;
  Vector center;
  Index d = 0;
  double mu = 1.0;
  double kappa = 1.0;
};

Instance make_instance(const RunConfig& cfg) {
  Instance inst;
  switch (cfg.experiment) {
    case Experiment::MatrixApprox:
    case Experiment::Quadratic: {
      inst.a = random_spd(cfg.d, 1.0, cfg.kappa, cfg.data_seed);
      inst.d = cfg.d;
      inst.kappa = cfg.kappa;
      if (cfg.experiment == Experiment::Quadratic) {
        Rng rng(cfg.data_seed, 6);
        inst.center = rng.gaussian(cfg.d);
        inst.quad = std::make_unique<QuadraticObjective>(*inst.a, *inst.a * inst.center);
      }
      break;
    }
    case Experiment::LogSumExp: {
      const Index m = cfg.m > 0 ? cfg.m : cfg.d;
      auto obj = std::make_unique<LogSumExpObjective>(
          make_logsumexp_synthetic(cfg.d, m, cfg.gamma, cfg.data_seed));
      inst.d = cfg.d;
      inst.center = Vector::Zero(cfg.d);
      inst.general = std::move(obj);
      break;
    }
    case Experiment::Logistic: {
      const double mc = cfg.m_const.value_or(0.0);
      std::unique_ptr<LogisticObjective> obj;
      if (!cfg.dataset.empty()) {
        try {
          obj = std::make_unique<LogisticObjective>(
              logistic_from_libsvm(load_libsvm(cfg.dataset), cfg.gamma, mc));
        } catch (const std::runtime_error& e) {
          throw ConfigError(e.what());
        }
      } else {
        const Index n = cfg.m > 0 ? cfg.m : 10 * cfg.d;
        obj = std::make_unique<LogisticObjective>(
            make_logistic_synthetic(cfg.d, n, cfg.gamma, cfg.data_seed, mc));
      }
      inst.d = obj->dim();
      inst.center = Vector::Zero(inst.d);
      inst.general = std::move(obj);
      break;
    }
  }
  if (inst.general) {
    inst.mu = inst.general->constants().mu;
    inst.kappa = inst.general->constants().kappa();
  }
  return inst;
}

double default_m_const(const RunConfig& cfg) {
  if (cfg.m_const) return *cfg.m_const;
  return cfg.experiment == Experiment::LogSumExp ? 2.0 : 0.0;
}

std::optional<double> metric_value(EnvelopeMetric metric, const std::vector<TraceRow>& rows,
                                   std::size_t i) {
  const IterationRecord& r = rows[i].rec;
  switch (metric) {
    case EnvelopeMetric::None: return std::nullopt;
    case EnvelopeMetric::Sigma: return r.sigma;
    case EnvelopeMetric::Tau: return r.tau;
    case EnvelopeMetric::Lambda: return r.lambda;
    case EnvelopeMetric::LambdaRatio: {
      if (i + 1 >= rows.size()) return std::nullopt;
      const auto& cur = r.lambda;
      const auto& next = rows[i + 1].rec.lambda;
      if (!cur || !next || !(*cur > 0.0)) return std::nullopt;
      return *next / *cur;
    }
  }
  return std::nullopt;
}

bool envelope_ready(EnvelopeKind kind, const EnvelopeParams& p, const IterationRecord& first) {
  switch (envelope_metric(kind)) {
    case EnvelopeMetric::None: return false;
    case EnvelopeMetric::Sigma: return first.sigma.has_value();
    case EnvelopeMetric::Tau: return first.tau.has_value();
    case EnvelopeMetric::LambdaRatio:
      return kind == EnvelopeKind::SR1Ratio ? first.tau.has_value() : first.sigma.has_value();
    case EnvelopeMetric::Lambda:
      if (!first.lambda) return false;
      if (kind == EnvelopeKind::SR1Lambda) return first.tau.has_value();
      if (kind == EnvelopeKind::BroydenLambda || kind == EnvelopeKind::BFGSLambda) {
        return first.sigma.has_value();
      }
      return p.d >= 1;
  }
  return false;
}

SeedOutcome run_on(const RunConfig& cfg, const Instance& inst, std::uint64_t seed) {
  SeedOutcome out;
  out.seed = seed;
  DirectionStrategy dir = cfg.direction;
  dir.seed = seed;
  const UpdateRule& rule = cfg.rule;

  SolverOptions opts;
  opts.dense = cfg.dense;
  opts.stop.grad_tol = cfg.grad_tol;
  opts.stop.lambda_tol = cfg.lambda_tol;
  opts.stop.max_iters = cfg.max_iters.value_or(100);

  std::vector<IterationRecord> records;
  Index k0 = 0;
  switch (cfg.experiment) {
    case Experiment::MatrixApprox: {
      const Index steps = cfg.max_iters ? *cfg.max_iters : (is_sr1_rule(rule) ? cfg.d : 3 * cfg.d);
      const SymMatrix g0 = cfg.g0 == InitialApprox::A ? *inst.a : SymMatrix::identity(cfg.d, cfg.kappa);
      MatrixRunResult res = approx_matrix(*inst.a, g0, rule, dir, steps, opts);
      records = std::move(res.records);
      out.termination = res.termination;
      out.diagnostic = res.diagnostic;
      break;
    }
    case Experiment::Quadratic:
    case Experiment::LogSumExp:
    case Experiment::Logistic: {
      const Objective& obj =
          inst.quad ? static_cast<const Objective&>(*inst.quad) : *inst.general;
      Vector x0 = cfg.experiment == Experiment::Logistic
                      ? Vector(Vector::Zero(inst.d))
                      : initial_point_on_sphere(
                            inst.center,
                            cfg.experiment == Experiment::Quadratic ? 1.0 : 1.0 / static_cast<double>(inst.d),
                            seed);
      x0 = newton_warm_start(obj, x0, cfg.warm_start_steps);
      if (cfg.agd) {
        const AgdResult agd = agd_baseline(obj, x0, opts.stop.max_iters);
        for (std::size_t i = 0; i < agd.grad_norms.size(); ++i) {
          IterationRecord rec;
          rec.k = static_cast<Index>(i);
          rec.grad_norm = agd.grad_norms[i];
          rec.elapsed_s = agd.elapsed_s[i];
          records.push_back(rec);
          if (agd.grad_norms[i] <= cfg.grad_tol) break;
        }
        out.termination = Termination::MaxIters;
      } else if (inst.quad) {
        const SymMatrix g0 = cfg.g0 == InitialApprox::A
                                 ? *inst.a
                                 : SymMatrix::identity(inst.d, inst.quad->constants().lip);
        RunResult res = solve_quadratic(*inst.quad, x0, g0, rule, dir, opts);
        records = std::move(res.records);
        out.termination = res.termination;
        out.diagnostic = res.diagnostic;
      } else {
        RunResult res = solve_general(obj, x0, rule, dir, default_m_const(cfg), opts);
        records = std::move(res.records);
        out.termination = res.termination;
        out.diagnostic = res.diagnostic;
        k0 = two_phase_k0(family_of(cfg), inst.d, std::max(1.0, inst.kappa), cfg.delta);
      }
      break;
    }
  }

  out.trace.meta = config_meta(cfg);
  out.trace.meta.emplace_back("seed", std::to_string(seed));
  out.trace.meta.emplace_back("dim", std::to_string(inst.d));
  out.trace.meta.emplace_back("mu", format_double(inst.mu));
  out.trace.meta.emplace_back("kappa", format_double(inst.kappa));
  out.trace.meta.emplace_back("k0", std::to_string(k0));
  out.trace.meta.emplace_back("termination", to_string(out.termination));
  if (!out.diagnostic.empty()) out.trace.meta.emplace_back("diagnostic", out.diagnostic);

  for (const IterationRecord& r : records) out.trace.rows.push_back({r, std::nullopt});
  const EnvelopeKind kind = cfg.envelope.value_or(default_envelope(cfg));
  if (!out.trace.rows.empty()) {
    const EnvelopeParams p = envelope_params(out.trace);
    if (envelope_ready(kind, p, out.trace.rows.front().rec)) {
      for (TraceRow& row : out.trace.rows) row.envelope = envelope_value(kind, p, row.rec.k);
    }
  }
  return out;
}

}  // namespace

SeedOutcome run_seed(const RunConfig& cfg, std::uint64_t seed) {
  const Instance inst = make_instance(cfg);
  return run_on(cfg, inst, seed);
}

RunReport run_experiment(const RunConfig& cfg, std::ostream& log,
                         const std::optional<std::string>& output_dir) {
  const fs::path dir = output_dir.value_or(cfg.output);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "'");

  const Instance inst = make_instance(cfg);
  const std::string stem = cfg.method_name();

  RunReport report;
  report.runs.resize(cfg.seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.seeds.size(); i = next++) {
      SeedOutcome o = run_on(cfg, inst, cfg.seeds[i]);
      o.path = (dir / (stem + "_seed" + std::to_string(o.seed) + ".csv")).string();
      std::ofstream f(o.path);
      write_trace(f, o.trace, cfg.timing);
      report.runs[i] = std::move(o);
    }
  };
  unsigned jobs = cfg.jobs > 0 ? static_cast<unsigned>(cfg.jobs)
                               : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(cfg.seeds.size()));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<TraceFile> traces;
  for (const SeedOutcome& o : report.runs) {
    traces.push_back(o.trace);
    log << "seed " << o.seed << ": " << to_string(o.termination) << ", " << o.trace.rows.size()
        << " rows -> " << o.path;
    if (!o.diagnostic.empty()) log << " (" << o.diagnostic << ")";
    log << '\n';
    if (o.termination == Termination::InvariantBreach || o.termination == Termination::NotPD) {
      report.exit_code = 3;
    }
  }
  TraceMeta meta = config_meta(cfg);
  meta.emplace_back("summary_of", std::to_string(cfg.seeds.size()));
  report.summary_path = (dir / (stem + "_summary.csv")).string();
  std::ofstream f(report.summary_path);
  write_summary(f, meta, summarize(traces));
  log << "summary -> " << report.summary_path << '\n';
  return report;
}

EnvelopeParams envelope_params(const TraceFile& trace) {
  EnvelopeParams p;
  auto num = [&](const char* key, double fallback) {
    const auto v = trace.meta_value(key);
    if (!v || v->empty()) return fallback;
    double out = fallback;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || ptr != v->data() + v->size()) {
      throw CompareError(std::string("bad metadata value for ") + key);
    }
    return out;
  };
  p.d = static_cast<Index>(num("dim", num("d", 1.0)));
  p.kappa = std::max(1.0, num("kappa", 1.0));
  p.mu = num("mu", 1.0);
  p.delta = num("delta", 0.1);
  p.k0 = static_cast<Index>(num("k0", 0.0));
  if (!trace.rows.empty()) {
    const IterationRecord& r = trace.rows.front().rec;
    p.sigma0 = r.sigma.value_or(0.0);
    p.tau0 = r.tau.value_or(0.0);
    p.lambda0 = r.lambda.value_or(0.0);
  }
  return p;
}

CompareReport compare_traces(const std::vector<TraceFile>& traces, std::optional<EnvelopeKind> kind,
                             double mc_slack) {
  if (traces.empty()) throw CompareError("no trace files given");
  CompareReport rep;
  if (kind) {
    rep.kind = *kind;
  } else {
    const auto name = traces.front().meta_value("envelope");
    const auto k = name ? parse_envelope_kind(*name) : std::nullopt;
    if (!k) throw CompareError("trace names no envelope; pass one explicitly");
    rep.kind = *k;
  }
  const EnvelopeMetric metric = envelope_metric(rep.kind);
  if (metric == EnvelopeMetric::None) throw CompareError("envelope 'none' cannot be compared");

  auto is_random = [](const TraceFile& t) {
    const auto d = t.meta_value("direction");
    const auto k = d ? parse_direction_kind(*d) : std::nullopt;
    return k && (*k == DirectionKind::RandomSphere || *k == DirectionKind::RandomGaussian);
  };
  rep.random = is_random(traces.front());
  for (const TraceFile& t : traces) {
    if (is_random(t) != rep.random) throw CompareError("cannot mix greedy and random traces");
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      if (t.rows[i].rec.k != static_cast<Index>(i)) {
        throw CompareError("mismatched grids: step indices must run 0, 1, 2, ...");
      }
    }
  }

  if (!rep.random) {
    for (const TraceFile& t : traces) {
      const EnvelopeParams p = envelope_params(t);
      std::optional<double> base;
      for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto v = metric_value(metric, t.rows, i);
        if (!v) continue;
        if (!base) base = std::abs(*v);
        CompareRow row;
        row.k = static_cast<Index>(i);
        row.count = 1;
        row.measured = *v;
        row.envelope = envelope_value(rep.kind, p, row.k);
        row.violated = row.measured > row.envelope + kDeterministicSlack * *base;
        rep.violations += row.violated;
        rep.rows.push_back(row);
      }
    }
    return rep;
  }

  std::size_t longest = 0;
  std::vector<EnvelopeParams> params;
  for (const TraceFile& t : traces) {
    longest = std::max(longest, t.rows.size());
    params.push_back(envelope_params(t));
  }
  std::optional<double> base;
  for (std::size_t i = 0; i < longest; ++i) {
    double sum = 0.0, env = 0.0;
    Index n = 0;
    for (std::size_t t = 0; t < traces.size(); ++t) {
      if (i >= traces[t].rows.size()) continue;
      const auto v = metric_value(metric, traces[t].rows, i);
      if (!v) continue;
      sum += *v;
      env += envelope_value(rep.kind, params[t], static_cast<Index>(i));
      ++n;
    }
    if (n == 0) continue;
    CompareRow row;
    row.k = static_cast<Index>(i);
    row.count = n;
    row.measured = sum / static_cast<double>(n);
    row.envelope = env / static_cast<double>(n);
    if (!base) base = std::abs(row.measured);
    row.violated = row.measured > mc_slack * row.envelope + kDeterministicSlack * *base;
    rep.violations += row.violated;
    rep.rows.push_back(row);
  }
  return rep;
}

void write_compare(std::ostream& os, const CompareReport& report) {
  os << "# envelope=" << to_string(report.kind) << '\n';
  os << "# mode=" << (report.random ? "mean" : "per_trace") << '\n';
  os << "k,count,measured,envelope,ratio,violation\n";
  for (const CompareRow& r : report.rows) {
    os << r.k << ',' << r.count << ',' << format_double(r.measured) << ','
       << format_double(r.envelope) << ',';
    if (r.envelope != 0.0) os << format_double(r.measured / r.envelope);
    os << ',' << (r.violated ? 1 : 0) << '\n';
  }
  os << "# violations=" << report.violations << '\n';
}

}  // namespace qnlab
