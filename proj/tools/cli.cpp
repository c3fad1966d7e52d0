#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "boltshare/boltshare.hpp"

namespace boltshare::cli {
namespace {

namespace fs = std::filesystem;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Files and hashes

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw IoError("cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  if (!os) throw IoError("cannot write '" + p.string() + "'");
  os << text;
  if (!os) throw IoError("write failed for '" + p.string() + "'");
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

std::string sha256_file(const fs::path& p) { return sha256_hex(read_file(p)); }

json read_json(const fs::path& p) {
  const auto text = read_file(p);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("'" + p.string() + "' is not valid JSON: " + e.what());
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Run manifest

struct Manifest {
  std::string subcommand;
  std::vector<std::string> argv;
  std::map<std::string, std::string> configs;
  std::map<std::string, std::uint64_t> seeds;
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  std::map<std::string, double> timings;
  json extra = json::object();

  json to_json() const {
    json in = json::object(), out = json::object();
    for (const auto& p : inputs) in[p.string()] = sha256_file(p);
    for (const auto& p : outputs)
      if (fs::is_regular_file(p)) out[p.string()] = sha256_file(p);
    json cfg = json::object();
    for (const auto& [k, v] : configs) cfg[k] = fs::absolute(v).lexically_normal().string();
    return {{"subcommand", subcommand}, {"argv", argv},    {"configs", cfg},
            {"seeds", seeds},           {"inputs", in},    {"outputs", out},
            {"timings_s", timings},     {"details", extra}};
  }

  /// Written next to `primary` when there is one, otherwise logged.
  void emit(const std::optional<fs::path>& primary) const {
    const auto j = to_json();
    if (primary) {
      fs::path p = *primary;
      p += ".manifest.json";
      write_file(p, dump(j));
      spdlog::info("manifest written to {}", p.string());
    } else {
      spdlog::info("manifest: {}", j.dump());
    }
  }
};

// ---------------------------------------------------------------------------
// Shared argument handling

JointConfig load_config(const std::string& path, Manifest& m) {
  if (path.empty()) return JointConfig{};
  m.configs["joint"] = path;
  m.inputs.emplace_back(path);
  return joint_config_from_json(read_json(path));
}

BoltParams bolt_params(const std::vector<double>& bhc, const std::vector<double>& torque,
                       const JointConfig& cfg) {
  const auto n = static_cast<std::size_t>(cfg.geometry.n_bolts);
  if (bhc.size() != n || torque.size() != n)
    throw UsageError("--bhc and --torque need " + std::to_string(n) + " comma-separated values");
  return {bhc, torque};
}

struct RampArgs {
  double increment = 0.005;
  double total = 3.0;
  std::string mode = "substep";

  void add(CLI::App* app) {
    app->add_option("--increment", increment, "End-displacement increment [mm]")
        ->capture_default_str();
    app->add_option("--total", total, "Total end displacement [mm]")->capture_default_str();
    app->add_option("--mode", mode, "Knee handling: substep or fixed")
        ->check(CLI::IsMember({"substep", "fixed"}))
        ->capture_default_str();
  }

  RampConfig ramp() const {
    RampConfig r;
    r.increment_mm = increment;
    r.total_mm = total;
    r.mode = mode == "fixed" ? EventMode::fixed : EventMode::substep;
    return r;
  }
};

GridAxis parse_axis(const std::string& text) {
  // start:step:count
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string s; std::getline(ss, s, ':');) parts.push_back(s);
  if (parts.size() != 3) throw UsageError("grid axis must be start:step:count, got '" + text + "'");
  try {
    const double start = csv::parse_number(parts[0]);
    const double step = csv::parse_number(parts[1]);
    const double count = csv::parse_number(parts[2]);
    if (!(count >= 1) || count != std::floor(count) || !(step > 0))
      throw UsageError("grid axis '" + text + "' needs a positive step and integer count");
    return {start, step, static_cast<std::size_t>(count)};
  } catch (const std::invalid_argument&) {
    throw UsageError("grid axis '" + text + "' is not numeric");
  }
}

struct GridArgs {
  std::string clearance = "0.2:0.2:10";
  std::string torque = "0.5:0.5:30";
  std::string db_dir;
  std::uint64_t chunk_rows = 1'000'000;

  void add(CLI::App* app) {
    app->add_option("--clearance-grid", clearance, "Clearance levels start:step:count [mm]")
        ->capture_default_str();
    app->add_option("--torque-grid", torque, "Torque levels start:step:count [N*m]")
        ->capture_default_str();
    app->add_option("--db-dir", db_dir, "Stream every evaluated pattern to chunked CSV here");
    app->add_option("--chunk-rows", chunk_rows, "Rows per database chunk")->capture_default_str();
  }

  DesignSpace space() const {
    DesignSpace s;
    const auto c = parse_axis(clearance), t = parse_axis(torque);
    for (std::size_t k = 0; k < 3; ++k) s.grid[k] = c;
    for (std::size_t k = 3; k < 6; ++k) s.grid[k] = t;
    for (std::size_t k = 0; k < kDesignDim; ++k) {
      const auto& a = s.grid[k];
      if (a.value(0) < s.lower[k] || a.value(a.count - 1) > s.upper[k])
        throw std::domain_error("grid levels leave the design space");
    }
    return s;
  }
};

json vector_json(const DesignVector& x) {
  return {{"bhc_mm", {x[0], x[1], x[2]}}, {"torque_Nm", {x[3], x[4], x[5]}}};
}

json exact_check(const DesignVector& x, const JointConfig& cfg, double target) {
  try {
    const auto d = verify_candidate(x, cfg, target);
    return {{"reached", true}, {"u", d.unevenness}, {"ratios", d.ratios},
            {"bolt_loads_N", d.bolt_loads_N}};
  } catch (const TargetLoadNotReached& e) {
    return {{"reached", false}, {"u", nullptr}, {"max_load_N", e.reached_N}};
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Subcommands

struct Context {
  std::ostream& out;
  Manifest manifest;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

struct SimulateArgs {
  std::string config, out, summary;
  std::vector<double> bhc, torque;
  double target = kDefaultTargetLoadN;
  RampArgs ramp;
};

void run_simulate(const SimulateArgs& a, Context& ctx) {
  const auto cfg = load_config(a.config, ctx.manifest);
  const auto params = bolt_params(a.bhc, a.torque, cfg);
  params.validate(cfg.geometry.n_bolts);
  const auto history = run(cfg, params, a.ramp.ramp());
  spdlog::info("simulated {} history records, max load {:.1f} N", history.records.size(),
               history.max_load());
  json summary = {{"target_load_N", a.target}, {"max_load_N", history.max_load()}};
  try {
    const auto d = distribution_at_load(history, a.target);
    summary["reached"] = true;
    summary["distribution"] = distribution_to_json(d);
  } catch (const TargetLoadNotReached&) {
    summary["reached"] = false;
    spdlog::warn("target load {} N not reached", a.target);
  }
  std::optional<fs::path> primary;
  if (!a.out.empty()) {
    std::ostringstream ss;
    write_history_csv(ss, history);
    write_file(a.out, ss.str());
    ctx.manifest.outputs.emplace_back(a.out);
    primary = a.out;
  }
  if (!a.summary.empty()) {
    write_file(a.summary, dump(summary));
    ctx.manifest.outputs.emplace_back(a.summary);
    if (!primary) primary = a.summary;
  }
  ctx.out << dump(summary);
  ctx.manifest.timings["total"] = seconds_since(ctx.start);
  ctx.manifest.emit(primary);
}

struct GenDataArgs {
  std::string config, out;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  int jobs = 1;
  double target = kDefaultTargetLoadN;
};

void run_gen_data(const GenDataArgs& a, Context& ctx) {
  const auto cfg = load_config(a.config, ctx.manifest);
  ctx.manifest.seeds["dataset"] = a.seed;
  GenerateOptions opt;
  opt.jobs = a.jobs;
  opt.target_N = a.target;
  const auto ds = generate_dataset(cfg, a.n, a.seed, opt);
  spdlog::info("generated {} samples ({} draws re-drawn for not reaching {} N)", ds.samples.size(),
               ds.redrawn.size(), a.target);
  std::ostringstream ss;
  write_dataset_csv(ss, ds.samples);
  write_file(a.out, ss.str());
  ctx.manifest.outputs.emplace_back(a.out);
  ctx.manifest.extra["redrawn"] = ds.redrawn.size();
  ctx.manifest.timings["total"] = seconds_since(ctx.start);
  ctx.manifest.emit(fs::path(a.out));
}

struct TrainArgs {
  std::string data, out, metrics;
  std::uint64_t seed = 0;
  std::size_t max_epochs = 2000, patience = 20, batch = 32;
  double lr = 1e-3;
  std::string loss = "weighted";
};

void run_train(const TrainArgs& a, Context& ctx) {
  ctx.manifest.inputs.emplace_back(a.data);
  std::istringstream is(read_file(a.data));
  auto ds = read_dataset_csv(is);
  split_dataset(ds, a.seed);
  TrainConfig tc;
  tc.max_epochs = a.max_epochs;
  tc.patience = a.patience;
  tc.batch_size = a.batch;
  tc.adam.learning_rate = a.lr;
  tc.loss = a.loss == "mse" ? LossKind::mse : LossKind::weighted_mse;
  ctx.manifest.seeds["split"] = a.seed;
  ctx.manifest.seeds["init"] = a.seed;
  ctx.manifest.seeds["shuffle"] = a.seed;
  const auto res = train(ds, tc, a.seed);
  const auto m = evaluate(res.model, ds);
  spdlog::info("trained {} epochs, best epoch {}, test R2 {:.4f}", res.history.back().epoch,
               res.best_epoch, m.test.r2);

  write_file(a.out, dump(model_to_json(res.model)));
  ctx.manifest.outputs.emplace_back(a.out);
  if (!a.metrics.empty()) {
    std::ostringstream ss;
    write_training_csv(ss, res.history);
    write_file(a.metrics, ss.str());
    ctx.manifest.outputs.emplace_back(a.metrics);
  }
  auto metrics_json = [](const Metrics& x) {
    return json{{"mse", x.mse}, {"weighted_mse", x.weighted_mse}, {"r2", x.r2}};
  };
  json summary = {{"epochs", res.history.back().epoch},
                  {"best_epoch", res.best_epoch},
                  {"early_stopped", res.early_stopped},
                  {"train_loss_rule_epoch",
                   res.train_rule_epoch ? json(*res.train_rule_epoch) : json(nullptr)},
                  {"initial_train_loss", res.history.front().train_loss},
                  {"final_train_loss", res.history.back().train_loss},
                  {"train", metrics_json(m.train)},
                  {"validation", metrics_json(m.validation)},
                  {"test", metrics_json(m.test)}};
  ctx.out << dump(summary);
  ctx.manifest.extra = summary;
  ctx.manifest.timings["total"] = seconds_since(ctx.start);
  ctx.manifest.emit(fs::path(a.out));
}

struct BackendArgs {
  std::string backend = "surrogate";
  std::string model;
  double target = kDefaultTargetLoadN;
};

FitnessBackend make_backend(const BackendArgs& b, const JointConfig& cfg, Context& ctx) {
  if (b.backend == "solver") return FitnessBackend::exact(cfg, b.target);
  if (b.model.empty()) throw UsageError("--model is required with the surrogate backend");
  ctx.manifest.inputs.emplace_back(b.model);
  ctx.manifest.configs["model"] = b.model;
  return FitnessBackend::surrogate(model_from_json(read_json(b.model)));
}

struct SearchArgs {
  std::string config, best;
  BackendArgs backend;
  GridArgs grid;
  int jobs = 1;
};

json run_grid(const SearchArgs& a, const JointConfig& cfg, Context& ctx) {
  const auto space = a.grid.space();
  const auto backend = make_backend(a.backend, cfg, ctx);
  GridOptions opt;
  opt.jobs = a.jobs;
  opt.chunk_rows = a.grid.chunk_rows;
  if (!a.grid.db_dir.empty()) opt.database_dir = fs::path(a.grid.db_dir);
  spdlog::info("enumerating {} grid patterns with the {} backend", space.pattern_count(),
               to_string(backend.kind()));
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = grid_search(space, backend, opt);
  ctx.manifest.timings["search"] = seconds_since(t0);
  for (auto idx : r.skipped) spdlog::warn("pattern {} skipped: backend failed", idx);
  for (const auto& f : r.database_files) ctx.manifest.outputs.push_back(f);
  json best = vector_json(r.best_x);
  best["method"] = "grid";
  best["backend"] = to_string(backend.kind());
  best["u_backend"] = r.best_u;
  best["u_exact"] = exact_check(r.best_x, cfg, a.backend.target);
  best["patterns"] = space.pattern_count();
  best["evaluated"] = r.evaluated;
  best["skipped"] = r.skipped.size();
  best["backend_calls"] = backend.calls();
  json files = json::array();
  for (const auto& f : r.database_files) files.push_back(f.string());
  best["database_files"] = files;
  return best;
}

void run_search(const SearchArgs& a, Context& ctx) {
  const auto cfg = load_config(a.config, ctx.manifest);
  const auto best = run_grid(a, cfg, ctx);
  std::optional<fs::path> primary;
  if (!a.best.empty()) {
    write_file(a.best, dump(best));
    ctx.manifest.outputs.emplace_back(a.best);
    primary = a.best;
  } else if (!a.grid.db_dir.empty()) {
    primary = fs::path(a.grid.db_dir) / "database";
  }
  ctx.out << dump(best);
  ctx.manifest.timings["total"] = seconds_since(ctx.start);
  ctx.manifest.emit(primary);
}

struct OptimizeArgs {
  std::string method = "pso";
  std::string config, out, best;
  std::uint64_t seed = 0;
  BackendArgs backend;
  GridArgs grid;
  int jobs = 1;
  std::size_t max_iter = 200;
};

void run_optimize(const OptimizeArgs& a, Context& ctx) {
  const auto cfg = load_config(a.config, ctx.manifest);
  if (cfg.geometry.n_bolts != 3) throw UsageError("optimization needs a three-bolt joint");
  json best;
  if (a.method == "grid") {
    best = run_grid({a.config, a.best, a.backend, a.grid, a.jobs}, cfg, ctx);
  } else {
    const auto backend = make_backend(a.backend, cfg, ctx);
    OptimizerConfig oc;
    oc.seed = a.seed;
    oc.jobs = a.jobs;
    oc.stop.max_iterations = a.max_iter;
    ctx.manifest.seeds[a.method] = a.seed;
    const auto t0 = std::chrono::steady_clock::now();
    const DesignSpace space;
    const auto trace = a.method == "ga" ? ga_optimize(space, backend, oc) : pso_optimize(space, backend, oc);
    ctx.manifest.timings["search"] = seconds_since(t0);
    spdlog::info("{} finished after {} iterations, best u {:.5f}", a.method,
                 trace.iterations.back().iter, trace.best_u);
    if (!a.out.empty()) {
      std::ostringstream ss;
      write_trace_csv(ss, trace);
      write_file(a.out, ss.str());
      ctx.manifest.outputs.emplace_back(a.out);
    }
    best = vector_json(trace.best_x);
    best["method"] = a.method;
    best["backend"] = to_string(backend.kind());
    best["u_backend"] = trace.best_u;
    best["u_exact"] = exact_check(trace.best_x, cfg, a.backend.target);
    best["iterations"] = trace.iterations.back().iter;
    best["converged"] = trace.converged;
    best["backend_calls"] = trace.backend_calls;
  }
  std::optional<fs::path> primary;
  if (!a.out.empty()) primary = a.out;
  if (!a.best.empty()) {
    write_file(a.best, dump(best));
    ctx.manifest.outputs.emplace_back(a.best);
    if (!primary) primary = a.best;
  }
  ctx.out << dump(best);
  ctx.manifest.timings["total"] = seconds_since(ctx.start);
  ctx.manifest.emit(primary);
}

struct VerifyArgs {
  std::string config, candidate, out;
  std::vector<double> bhc, torque;
  double target = kDefaultTargetLoadN;
};

void run_verify(const VerifyArgs& a, Context& ctx) {
  const auto cfg = load_config(a.config, ctx.manifest);
  std::vector<double> bhc = a.bhc, torque = a.torque;
  if (!a.candidate.empty()) {
    ctx.manifest.inputs.emplace_back(a.candidate);
    const auto j = read_json(a.candidate);
    try {
      bhc = j.at("bhc_mm").get<std::vector<double>>();
      torque = j.at("torque_Nm").get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw SchemaError("candidate file: " + std::string(e.what()));
    }
  } else if (bhc.empty() || torque.empty()) {
    throw UsageError("give --bhc and --torque, or --candidate");
  }
  const auto params = bolt_params(bhc, torque, cfg);
  const auto d = solve_distribution(cfg, params, a.target);
  json result = distribution_to_json(d);
  result["bhc_mm"] = bhc;
  result["torque_Nm"] = torque;
  std::optional<fs::path> primary;
  if (!a.out.empty()) {
    write_file(a.out, dump(result));
    ctx.manifest.outputs.emplace_back(a.out);
    primary = a.out;
  }
  ctx.out << dump(result);
  ctx.manifest.timings["total"] = seconds_since(ctx.start);
  ctx.manifest.emit(primary);
}

struct GaugeArgs {
  std::vector<double> sigma;
  std::string csv_in, out;
};

void run_gauge(const GaugeArgs& a, Context& ctx) {
  if (a.csv_in.empty()) {
    if (a.sigma.size() != 4) throw UsageError("--sigma needs four comma-separated stresses");
    const auto r = load_ratios({{a.sigma[0], a.sigma[1], a.sigma[2], a.sigma[3]}});
    const json j = {{"ratios", r}};
    if (!a.out.empty()) {
      write_file(a.out, dump(j));
      ctx.manifest.outputs.emplace_back(a.out);
    }
    ctx.out << j.dump() << "\n";
    ctx.manifest.emit(a.out.empty() ? std::nullopt : std::optional<fs::path>(a.out));
    return;
  }
  // batch mode: rows of four stresses, optional header
  ctx.manifest.inputs.emplace_back(a.csv_in);
  std::istringstream is(read_file(a.csv_in));
  std::string line, buf = "ratio1,ratio2,ratio3\n";
  std::size_t row = 0;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto f = csv::split(line);
    if (f.size() != 4) throw SchemaError("gauge row " + std::to_string(row) + " needs 4 values");
    GaugeReadings g{};
    try {
      for (std::size_t k = 0; k < 4; ++k) g.sigma[k] = csv::parse_number(f[k]);
    } catch (const std::invalid_argument&) {
      if (row == 1) continue;  // header
      throw SchemaError("gauge row " + std::to_string(row) + " is not numeric");
    }
    const auto r = load_ratios(g);
    for (std::size_t k = 0; k < 3; ++k) {
      if (k) buf.push_back(',');
      csv::append_number(buf, r[k]);
    }
    buf.push_back('\n');
  }
  if (a.out.empty()) {
    ctx.out << buf;
  } else {
    write_file(a.out, buf);
    ctx.manifest.outputs.emplace_back(a.out);
  }
  ctx.manifest.emit(a.out.empty() ? std::nullopt : std::optional<fs::path>(a.out));
}

// ---------------------------------------------------------------------------

void configure_logging(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("boltshare", sink);
  logger->set_pattern("[%l] %v");
  const char* env = std::getenv("BOLTSHARE_LOG");
  const std::string level = env ? env : "info";
  if (level == "error") logger->set_level(spdlog::level::err);
  else if (level == "debug") logger->set_level(spdlog::level::debug);
  else logger->set_level(spdlog::level::info);
  spdlog::set_default_logger(logger);
  if (env && level != "error" && level != "info" && level != "debug")
    spdlog::warn("BOLTSHARE_LOG='{}' not recognized, using info", level);
}

int report(std::ostream& err, int code, const std::string& kind, const std::string& message) {
  err << json{{"error", {{"kind", kind}, {"exit_code", code}, {"message", message}}}}.dump()
      << "\n";
  return code;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  configure_logging(err);

  CLI::App app{"Bolt-load distribution in multi-bolt composite joints: spring-network solver, "
               "surrogate training and inverse design."};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Ramp the joint and record the load history");
  s->add_option("--config", sim.config, "Joint config JSON")->required();
  s->add_option("--bhc", sim.bhc, "Bolt-hole clearances [mm], comma-separated")
      ->delimiter(',')->required();
  s->add_option("--torque", sim.torque, "Tightening torques [N*m], comma-separated")
      ->delimiter(',')->required();
  s->add_option("--target", sim.target, "Load at which ratios are reported [N]")
      ->capture_default_str();
  s->add_option("--out", sim.out, "History CSV");
  s->add_option("--summary", sim.summary, "Summary JSON (also printed to stdout)");
  sim.ramp.add(s);

  GenDataArgs gen;
  auto* g = app.add_subcommand("gen-data", "Label uniform random designs with the solver");
  g->add_option("--config", gen.config, "Joint config JSON (default: built-in reference joint)");
  g->add_option("--n", gen.n, "Number of samples")->capture_default_str();
  g->add_option("--seed", gen.seed, "Seed")->capture_default_str();
  g->add_option("--out", gen.out, "Dataset CSV")->required();
  g->add_option("--jobs", gen.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  g->add_option("--target", gen.target, "Target load [N]")->capture_default_str();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train the surrogate network on a dataset");
  t->add_option("--data", tr.data, "Dataset CSV")->required();
  t->add_option("--out", tr.out, "Model JSON")->required();
  t->add_option("--metrics", tr.metrics, "Per-epoch loss CSV");
  t->add_option("--seed", tr.seed, "Seed for split, initialization and shuffling")->capture_default_str();
  t->add_option("--max-epochs", tr.max_epochs, "Epoch cap")->capture_default_str();
  t->add_option("--patience", tr.patience, "Early-stopping patience [epochs]")->capture_default_str();
  t->add_option("--batch-size", tr.batch, "Mini-batch size")->capture_default_str();
  t->add_option("--lr", tr.lr, "Learning rate")->capture_default_str();
  t->add_option("--loss", tr.loss, "weighted or mse")
      ->check(CLI::IsMember({"weighted", "mse"}))->capture_default_str();

  SearchArgs se;
  auto* sr = app.add_subcommand("search", "Exhaustive grid search, optionally streaming the database");
  sr->add_option("--config", se.config, "Joint config JSON (default: built-in reference joint)");
  sr->add_option("--backend", se.backend.backend, "solver or surrogate")
      ->check(CLI::IsMember({"solver", "surrogate"}))->capture_default_str();
  sr->add_option("--model", se.backend.model, "Model JSON for the surrogate backend");
  sr->add_option("--best", se.best, "Best-candidate JSON");
  sr->add_option("--jobs", se.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  sr->add_option("--target", se.backend.target, "Target load [N]")->capture_default_str();
  se.grid.add(sr);

  OptimizeArgs op;
  auto* o = app.add_subcommand("optimize", "Minimize unevenness by grid, GA or PSO");
  o->add_option("--method", op.method, "grid, ga or pso")
      ->check(CLI::IsMember({"grid", "ga", "pso"}))->capture_default_str();
  o->add_option("--backend", op.backend.backend, "solver or surrogate")
      ->check(CLI::IsMember({"solver", "surrogate"}))->capture_default_str();
  o->add_option("--config", op.config, "Joint config JSON")->required();
  o->add_option("--model", op.backend.model, "Model JSON for the surrogate backend");
  o->add_option("--seed", op.seed, "Seed")->capture_default_str();
  o->add_option("--out", op.out, "Trace CSV");
  o->add_option("--best", op.best, "Best-candidate JSON");
  o->add_option("--jobs", op.jobs, "Worker threads for fitness evaluation")
      ->capture_default_str()->check(CLI::PositiveNumber);
  o->add_option("--max-iter", op.max_iter, "Iteration cap")->capture_default_str();
  o->add_option("--target", op.backend.target, "Target load [N]")->capture_default_str();
  op.grid.add(o);

  VerifyArgs ve;
  auto* v = app.add_subcommand("verify", "Re-evaluate a candidate with the exact solver");
  v->add_option("--config", ve.config, "Joint config JSON")->required();
  v->add_option("--bhc", ve.bhc, "Clearances [mm]")->delimiter(',');
  v->add_option("--torque", ve.torque, "Torques [N*m]")->delimiter(',');
  v->add_option("--candidate", ve.candidate, "Best-candidate JSON from search or optimize");
  v->add_option("--target", ve.target, "Target load [N]")->capture_default_str();
  v->add_option("--out", ve.out, "Result JSON");

  GaugeArgs ga;
  auto* gg = app.add_subcommand("gauge", "Bolt-load ratios from four gauge stresses");
  gg->add_option("--sigma", ga.sigma, "Four stresses [MPa] from the loaded end")->delimiter(',');
  gg->add_option("--csv", ga.csv_in, "Batch mode: CSV rows of four stresses");
  gg->add_option("--out", ga.out, "Output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return report(err, kUsage, "usage", e.what());
  }

  Context ctx{out, {}};
  const auto* sub = app.get_subcommands().front();
  ctx.manifest.subcommand = sub->get_name();
  for (int i = 1; i < argc; ++i) ctx.manifest.argv.emplace_back(argv[i]);

  try {
    const auto& name = sub->get_name();
    if (name == "simulate") run_simulate(sim, ctx);
    else if (name == "gen-data") run_gen_data(gen, ctx);
    else if (name == "train") run_train(tr, ctx);
    else if (name == "search") run_search(se, ctx);
    else if (name == "optimize") run_optimize(op, ctx);
    else if (name == "verify") run_verify(ve, ctx);
    else if (name == "gauge") run_gauge(ga, ctx);
    return kOk;
  } catch (const UsageError& e) {
    return report(err, kUsage, "usage", e.what());
  } catch (const IoError& e) {
    return report(err, kIo, "io", e.what());
  } catch (const fs::filesystem_error& e) {
    return report(err, kIo, "io", e.what());
  } catch (const SchemaError& e) {
    return report(err, kSchema, "schema", e.what());
  } catch (const TargetLoadNotReached& e) {
    return report(err, kDomain, "domain", e.what());
  } catch (const std::domain_error& e) {
    return report(err, kDomain, "domain", e.what());
  } catch (const std::invalid_argument& e) {
    return report(err, kDomain, "domain", e.what());
  } catch (const std::exception& e) {
    return report(err, kInternal, "internal", e.what());
  }
}

}  // namespace boltshare::cli
