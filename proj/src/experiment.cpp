#include "bdris/experiment.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "bdris/errors.hpp"

namespace bdris {

using nlohmann::json;

OutputFormat parse_format(std::string_view text) {
  if (text == "csv") return OutputFormat::Csv;
  if (text == "json") return OutputFormat::Json;
  throw ConfigError("experiment.format", "expected csv or json, got '" + std::string(text) + "'");
}

namespace {

// Reads the keys of one JSON object and rejects whatever was not read.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  std::string at(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  const json* find(const std::string& key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  bool number(const std::string& key, double& out) {
    const json* v = find(key);
    if (!v) return false;
    if (!v->is_number()) throw ConfigError(at(key), "expected a number");
    out = v->get<double>();
    return true;
  }

  bool integer(const std::string& key, int& out) {
    const json* v = find(key);
    if (!v) return false;
    if (!v->is_number_integer()) throw ConfigError(at(key), "expected an integer");
    const auto x = v->get<std::int64_t>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
      throw ConfigError(at(key), "integer out of range");
    out = static_cast<int>(x);
    return true;
  }

  bool string(const std::string& key, std::string& out) {
    const json* v = find(key);
    if (!v) return false;
    if (!v->is_string()) throw ConfigError(at(key), "expected a string");
    out = v->get<std::string>();
    return true;
  }

  std::vector<double> numbers(const json& v, const std::string& where) const {
    if (!v.is_array()) throw ConfigError(where, "expected an array of numbers");
    std::vector<double> out;
    for (const json& e : v) {
      if (!e.is_number()) throw ConfigError(where, "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  /// Linear key or its dB-suffixed variant, never both.
  bool linear_or_db(const std::string& key, const std::string& db_key, double (*to_linear)(double),
                    double& out) {
    double lin = 0.0;
    double db = 0.0;
    const bool has_lin = number(key, lin);
    const bool has_db = number(db_key, db);
    if (has_lin && has_db) throw ConfigError(at(db_key), "conflicts with " + at(key));
    if (has_lin) out = lin;
    if (has_db) out = to_linear(db);
    return has_lin || has_db;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.contains(it.key())) throw ConfigError(at(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

double dbw_to_watts(double dbw) { return db_to_linear(dbw); }

void parse_position(Section& parent, const std::string& key, Position& pos) {
  const json* v = parent.find(key);
  if (!v) return;
  Section s(*v, parent.at(key));
  s.number("x", pos.x);
  s.number("y", pos.y);
  s.finish();
}

void parse_system(const json& j, SystemConfig& cfg) {
  Section s(j, "system");
  s.integer("n_t", cfg.n_t);
  s.integer("n_b", cfg.n_b);
  s.integer("n_e", cfg.n_e);
  s.integer("n_s", cfg.n_s);
  s.integer("m", cfg.m);
  s.integer("g", cfg.g);
  double power_dbm = 0.0;
  const bool has_power = s.linear_or_db("power", "power_dbw", dbw_to_watts, cfg.power);
  if (s.number("power_dbm", power_dbm)) {
    if (has_power) throw ConfigError("system.power_dbm", "conflicts with another power key");
    cfg.power = dbm_to_watts(power_dbm);
  }
  double noise_dbm = 0.0;
  const bool has_noise = s.number("noise_dbm", noise_dbm);
  const bool has_b = s.linear_or_db("sigma_b2", "sigma_b2_dbm", dbm_to_watts, cfg.sigma_b2);
  const bool has_e = s.linear_or_db("sigma_e2", "sigma_e2_dbm", dbm_to_watts, cfg.sigma_e2);
  if (has_noise) {
    if (has_b || has_e) throw ConfigError("system.noise_dbm", "conflicts with a per-receiver noise key");
    cfg.sigma_b2 = cfg.sigma_e2 = dbm_to_watts(noise_dbm);
  }
  parse_position(s, "alice", cfg.alice);
  parse_position(s, "ris", cfg.ris);
  parse_position(s, "bob", cfg.bob);
  parse_position(s, "eve", cfg.eve);
  if (const json* z = s.find("zeta")) {
    Section zs(*z, "system.zeta");
    zs.number("ai", cfg.zeta.ai);
    zs.number("ib", cfg.zeta.ib);
    zs.number("ie", cfg.zeta.ie);
    zs.number("ab", cfg.zeta.ab);
    zs.number("ae", cfg.zeta.ae);
    zs.finish();
  }
  s.linear_or_db("c0", "c0_db", db_to_linear, cfg.c0);
  s.number("d0", cfg.d0);
  s.linear_or_db("kappa", "kappa_db", db_to_linear, cfg.kappa);
  s.finish();
}

void parse_solver(const json& j, SolverParams& p) {
  Section s(j, "solver");
  s.number("rho0", p.rho0);
  s.number("epsilon0", p.epsilon0);
  s.number("gamma1", p.gamma1);
  s.number("gamma2", p.gamma2);
  s.number("gamma3", p.gamma3);
  s.number("eta_min", p.eta_min);
  s.number("epsilon_min", p.epsilon_min);
  s.number("sigma1", p.sigma1);
  s.number("sigma2", p.sigma2);
  s.number("alpha_init", p.alpha_init);
  s.number("backtrack", p.backtrack);
  s.integer("max_inner", p.max_inner);
  s.integer("max_outer", p.max_outer);
  s.integer("max_linesearch", p.max_linesearch);
  s.finish();
}

void parse_run(const json& j, ExperimentSpec& spec) {
  Section s(j, "experiment");
  if (const json* v = s.find("schemes")) {
    if (!v->is_array()) throw ConfigError("experiment.schemes", "expected an array of names");
    spec.schemes.clear();
    for (const json& e : *v) {
      if (!e.is_string()) throw ConfigError("experiment.schemes", "expected an array of names");
      try {
        spec.schemes.push_back(SchemeId::parse(e.get<std::string>()));
      } catch (const ConfigError& err) {
        throw ConfigError("experiment.schemes", err.what());
      }
    }
  }
  if (const json* v = s.find("sweep")) {
    Section sw(*v, "experiment.sweep");
    SweepAxis axis;
    if (!sw.string("name", axis.name)) throw ConfigError("experiment.sweep.name", "missing");
    const json* values = sw.find("values");
    if (!values) throw ConfigError("experiment.sweep.values", "missing");
    axis.values = sw.numbers(*values, "experiment.sweep.values");
    sw.finish();
    spec.sweep = std::move(axis);
  }
  s.integer("trials", spec.trials);
  if (const json* v = s.find("seed")) {
    if (!v->is_number_unsigned()) throw ConfigError("experiment.seed", "expected an unsigned integer");
    spec.seed = v->get<std::uint64_t>();
  }
  std::string csi;
  if (s.string("csi", csi)) {
    if (csi == "perfect") spec.imperfect = false;
    else if (csi == "imperfect") spec.imperfect = true;
    else throw ConfigError("experiment.csi", "expected perfect or imperfect");
  }
  if (const json* v = s.find("delta")) spec.deltas = s.numbers(*v, "experiment.delta");
  s.integer("multistart", spec.multistart);
  s.integer("jobs", spec.jobs);
  s.string("output", spec.output);
  std::string format;
  if (s.string("format", format)) spec.format = parse_format(format);
  s.finish();
}

bool is_integral(double v) { return std::isfinite(v) && v == std::floor(v); }

}  // namespace

ExperimentSpec parse_experiment(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  ExperimentSpec spec;
  Section root(j, "");
  if (const json* v = root.find("system")) parse_system(*v, spec.system);
  if (const json* v = root.find("solver")) parse_solver(*v, spec.solver);
  if (const json* v = root.find("experiment")) parse_run(*v, spec);
  root.finish();
  return spec;
}

ExperimentSpec load_experiment(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment(buf.str());
}

SystemConfig apply_sweep(const SystemConfig& cfg, std::string_view name, double value) {
  SystemConfig out = cfg;
  auto count = [&](int& field) {
    if (!is_integral(value)) throw ConfigError("experiment.sweep.values", "expected integers");
    field = static_cast<int>(value);
  };
  if (name == "none" || name == "delta") return out;
  if (name == "power") out.power = value;
  else if (name == "power_dbw") out.power = db_to_linear(value);
  else if (name == "power_dbm") out.power = dbm_to_watts(value);
  else if (name == "n_t") count(out.n_t);
  else if (name == "n_b") count(out.n_b);
  else if (name == "n_e") count(out.n_e);
  else if (name == "m") count(out.m);
  else if (name == "x_b") out.bob.x = value;
  else throw ConfigError("experiment.sweep.name", "unknown sweep axis '" + std::string(name) + "'");
  return out;
}

SweepAxis ExperimentSpec::effective_sweep() const {
  if (imperfect) return {"delta", deltas};
  if (sweep) return *sweep;
  return {"none", {0.0}};
}

void ExperimentSpec::validate() const {
  if (trials < 1) throw ConfigError("experiment.trials", "must be >= 1");
  if (multistart < 1) throw ConfigError("experiment.multistart", "must be >= 1");
  if (jobs < 1) throw ConfigError("experiment.jobs", "must be >= 1");
  if (schemes.empty()) throw ConfigError("experiment.schemes", "must not be empty");
  try {
    solver.validate();
  } catch (const ConfigError& e) {
    throw ConfigError("solver." + e.path(), e.what());
  }
  if (imperfect) {
    if (sweep && sweep->name != "delta")
      throw ConfigError("experiment.sweep", "imperfect CSI already sweeps delta");
    if (deltas.empty()) throw ConfigError("experiment.delta", "must not be empty");
    for (double d : deltas)
      if (!(d >= 0.0) || !std::isfinite(d)) throw ConfigError("experiment.delta", "must be >= 0");
  } else if (sweep && sweep->name == "delta") {
    throw ConfigError("experiment.sweep.name", "delta requires csi = imperfect");
  }
  if (sweep && sweep->values.empty())
    throw ConfigError("experiment.sweep.values", "must not be empty");

  const SweepAxis axis = effective_sweep();
  for (double v : axis.values) {
    const SystemConfig cfg = apply_sweep(system, axis.name, v);
    try {
      cfg.validate();
    } catch (const ConfigError& e) {
      throw ConfigError("system." + e.path(), e.what());
    }
    for (const SchemeId& s : schemes)
      if (s.kind == SchemeKind::GC && cfg.m % s.groups != 0)
        throw ConfigError("experiment.schemes", s.name() + " requires the group count to divide m");
  }
}

std::uint64_t trial_seed(std::uint64_t master, int trial) {
  return derive_seed(master, {static_cast<std::uint64_t>(trial)});
}

ChannelSet trial_channels(const ExperimentSpec& spec, std::size_t sweep_index, int trial) {
  const SweepAxis axis = spec.effective_sweep();
  const SystemConfig cfg = apply_sweep(spec.system, axis.name, axis.values.at(sweep_index));
  Rng rng(trial_seed(spec.seed, trial));
  return draw_channels(cfg, rng);
}

namespace {

std::uint64_t scheme_code(const SchemeId& s) {
  return static_cast<std::uint64_t>(s.kind) * 1000003ULL + static_cast<std::uint64_t>(s.groups);
}

struct Cell {
  std::size_t sweep_index;
  int trial;
  std::size_t scheme_index;
};

TrialResult run_cell(const ExperimentSpec& spec, const SweepAxis& axis, const Cell& cell,
                     std::uint64_t& digest) {
  const double value = axis.values[cell.sweep_index];
  const SystemConfig cfg = apply_sweep(spec.system, axis.name, value);
  const ChannelSet cs = trial_channels(spec, cell.sweep_index, cell.trial);
  digest = channel_digest(cs);
  const SchemeId& scheme = spec.schemes[cell.scheme_index];
  const CsiMode csi = spec.imperfect ? CsiMode::with_errors(value) : CsiMode::perfect();

  const auto t0 = std::chrono::steady_clock::now();
  std::optional<SchemeResult> best;
  for (int s = 0; s < spec.multistart; ++s) {
    Rng rng(derive_seed(spec.seed, {static_cast<std::uint64_t>(cell.trial),
                                    1 + static_cast<std::uint64_t>(s), scheme_code(scheme)}));
    SchemeResult r = run_scheme(scheme, cs, cfg, spec.solver, csi, rng);
    if (!best || r.sr() > best->sr()) best = std::move(r);
  }
  const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - t0;

  TrialResult row;
  row.scheme = scheme.name();
  row.sweep_name = axis.name;
  row.sweep_value = value;
  row.trial = cell.trial;
  row.seed = trial_seed(spec.seed, cell.trial);
  row.sr_bps_hz = best->sr();
  row.rb_bps_hz = best->rates.rb;
  row.re_bps_hz = best->rates.re;
  row.wall_s = wall.count();
  row.outer_iters = best->outer_iterations;
  row.final_eta = best->eta;
  row.unitarity_residual = best->unitarity_residual;
  row.termination = std::string(termination_name(best->termination));
  return row;
}

}  // namespace

ResultTable run_experiment(const ExperimentSpec& spec, const CellObserver& observer) {
  spec.validate();
  const SweepAxis axis = spec.effective_sweep();
  std::vector<Cell> cells;
  for (std::size_t v = 0; v < axis.values.size(); ++v)
    for (int t = 0; t < spec.trials; ++t)
      for (std::size_t s = 0; s < spec.schemes.size(); ++s) cells.push_back({v, t, s});

  ResultTable table(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= cells.size()) return;
      try {
        std::uint64_t digest = 0;
        TrialResult row = run_cell(spec, axis, cells[k], digest);
        std::lock_guard lock(mu);
        if (observer) observer(row, digest);
        table[k] = std::move(row);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next.store(cells.size());
        return;
      }
    }
  };

  const int n = std::min<int>(spec.jobs, static_cast<int>(cells.size()));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return table;
}

bool is_budget_row(const TrialResult& row) { return row.termination != "converged"; }

double compute_rmse(const std::vector<double>& values) {
  if (values.size() < 2) throw DomainError("compute_rmse: need at least two values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw NumericError("format_double: conversion failed");
  return std::string(buf, ptr);
}

namespace {

json row_to_json(const TrialResult& r) {
  return json{{"scheme", r.scheme},
              {"sweep_name", r.sweep_name},
              {"sweep_value", r.sweep_value},
              {"trial", r.trial},
              {"seed", r.seed},
              {"sr_bps_hz", r.sr_bps_hz},
              {"rb_bps_hz", r.rb_bps_hz},
              {"re_bps_hz", r.re_bps_hz},
              {"wall_s", r.wall_s},
              {"outer_iters", r.outer_iters},
              {"final_eta", r.final_eta},
              {"unitarity_residual", r.unitarity_residual},
              {"termination", r.termination}};
}

TrialResult row_from_json(const json& j) {
  TrialResult r;
  r.scheme = j.at("scheme").get<std::string>();
  r.sweep_name = j.at("sweep_name").get<std::string>();
  r.sweep_value = j.at("sweep_value").get<double>();
  r.trial = j.at("trial").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.sr_bps_hz = j.at("sr_bps_hz").get<double>();
  r.rb_bps_hz = j.at("rb_bps_hz").get<double>();
  r.re_bps_hz = j.at("re_bps_hz").get<double>();
  r.wall_s = j.at("wall_s").get<double>();
  r.outer_iters = j.at("outer_iters").get<int>();
  r.final_eta = j.at("final_eta").get<double>();
  r.unitarity_residual = j.at("unitarity_residual").get<double>();
  r.termination = j.at("termination").get<std::string>();
  return r;
}

template <class T>
T parse_field(std::string_view s, const std::string& path) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw IoError(path, "malformed field '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

}  // namespace

void write_results(const ResultTable& table, std::ostream& out, OutputFormat format) {
  if (table.empty()) throw DomainError("write_results: empty table");
  if (format == OutputFormat::Json) {
    json arr = json::array();
    for (const TrialResult& r : table) arr.push_back(row_to_json(r));
    out << arr.dump(2) << '\n';
    return;
  }
  out << kCsvHeader << '\n';
  for (const TrialResult& r : table) {
    out << r.scheme << ',' << r.sweep_name << ',' << format_double(r.sweep_value) << ','
        << r.trial << ',' << r.seed << ',' << format_double(r.sr_bps_hz) << ','
        << format_double(r.rb_bps_hz) << ',' << format_double(r.re_bps_hz) << ','
        << format_double(r.wall_s) << ',' << r.outer_iters << ','
        << format_double(r.final_eta) << ',' << format_double(r.unitarity_residual) << ','
        << r.termination << '\n';
  }
}

void write_results(const ResultTable& table, const std::string& path, OutputFormat format) {
  if (table.empty()) throw DomainError("write_results: empty table");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  write_results(table, out, format);
  out.flush();
  if (!out) throw IoError(path, "write failed");
}

ResultTable read_results(const std::string& path, OutputFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  ResultTable table;
  if (format == OutputFormat::Json) {
    json arr;
    try {
      arr = json::parse(in);
      for (const json& j : arr) table.push_back(row_from_json(j));
    } catch (const json::exception& e) {
      throw IoError(path, e.what());
    }
    return table;
  }
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw IoError(path, "unexpected CSV header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 13) throw IoError(path, "expected 13 fields");
    TrialResult r;
    r.scheme = std::string(f[0]);
    r.sweep_name = std::string(f[1]);
    r.sweep_value = parse_field<double>(f[2], path);
    r.trial = parse_field<int>(f[3], path);
    r.seed = parse_field<std::uint64_t>(f[4], path);
    r.sr_bps_hz = parse_field<double>(f[5], path);
    r.rb_bps_hz = parse_field<double>(f[6], path);
    r.re_bps_hz = parse_field<double>(f[7], path);
    r.wall_s = parse_field<double>(f[8], path);
    r.outer_iters = parse_field<int>(f[9], path);
    r.final_eta = parse_field<double>(f[10], path);
    r.unitarity_residual = parse_field<double>(f[11], path);
    r.termination = std::string(f[12]);
    table.push_back(std::move(r));
  }
  return table;
}

}  // namespace bdris
