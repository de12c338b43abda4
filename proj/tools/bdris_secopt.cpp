// bdris-secopt: secrecy-rate experiments for BD-RIS assisted MIMO links.

#include <charconv>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bdris/errors.hpp"
#include "bdris/experiment.hpp"

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) return out;
    start = pos + 1;
  }
}

std::vector<double> parse_values(const std::string& s, const std::string& path) {
  std::vector<double> out;
  for (const std::string& item : split(s, ',')) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size())
      throw bdris::ConfigError(path, "malformed number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<std::string> schemes;
  std::optional<std::string> sweep;
  std::optional<std::string> csi;
  std::optional<std::string> delta;
  std::optional<int> multistart;
  std::optional<int> jobs;
};

bdris::ExperimentSpec build_spec(const Overrides& o) {
  bdris::ExperimentSpec spec = bdris::load_experiment(o.config);
  if (o.seed) spec.seed = *o.seed;
  if (o.trials) spec.trials = *o.trials;
  if (o.out) spec.output = *o.out;
  if (o.format) spec.format = bdris::parse_format(*o.format);
  if (o.schemes) {
    spec.schemes.clear();
    for (const std::string& s : split(*o.schemes, ',')) spec.schemes.push_back(bdris::SchemeId::parse(s));
  }
  if (o.sweep) {
    const std::size_t eq = o.sweep->find('=');
    if (eq == std::string::npos) throw bdris::ConfigError("--sweep", "expected name=v1,v2,...");
    spec.sweep = bdris::SweepAxis{o.sweep->substr(0, eq),
                                  parse_values(o.sweep->substr(eq + 1), "--sweep")};
  }
  if (o.csi) {
    if (*o.csi == "perfect") spec.imperfect = false;
    else if (*o.csi == "imperfect") spec.imperfect = true;
    else throw bdris::ConfigError("--csi", "expected perfect or imperfect");
  }
  if (o.delta) spec.deltas = parse_values(*o.delta, "--delta");
  if (o.multistart) spec.multistart = *o.multistart;
  if (o.jobs) spec.jobs = *o.jobs;
  spec.validate();
  return spec;
}

int run(const Overrides& o) {
  const bdris::ExperimentSpec spec = build_spec(o);
  const bdris::ResultTable table = bdris::run_experiment(spec);
  if (spec.output.empty() || spec.output == "-")
    bdris::write_results(table, std::cout, spec.format);
  else
    bdris::write_results(table, spec.output, spec.format);
  for (const bdris::TrialResult& row : table)
    if (bdris::is_budget_row(row)) return 3;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secrecy-rate optimization for BD-RIS assisted MIMO wiretap links"};
  app.require_subcommand(1);

  Overrides o;
  CLI::App* run_cmd = app.add_subcommand("run", "run an experiment and write the result table");
  run_cmd->add_option("--config", o.config, "JSON experiment file")->required();
  run_cmd->add_option("--seed", o.seed, "master seed");
  run_cmd->add_option("--trials", o.trials, "channel realizations");
  run_cmd->add_option("--out", o.out, "output path ('-' for stdout)");
  run_cmd->add_option("--format", o.format, "csv or json");
  run_cmd->add_option("--schemes", o.schemes, "comma list: fc,gc4,dris,random,wo,upper");
  run_cmd->add_option("--sweep", o.sweep, "name=v1,v2,...");
  run_cmd->add_option("--csi", o.csi, "perfect or imperfect");
  run_cmd->add_option("--delta", o.delta, "comma list of CSI error levels");
  run_cmd->add_option("--multistart", o.multistart, "random starts per cell");
  run_cmd->add_option("--jobs", o.jobs, "worker threads");

  std::string validate_path;
  CLI::App* validate_cmd = app.add_subcommand("validate", "check a config file and exit");
  validate_cmd->add_option("--config", validate_path, "JSON experiment file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*validate_cmd) {
      bdris::load_experiment(validate_path).validate();
      std::cout << "ok\n";
      return 0;
    }
    return run(o);
  } catch (const bdris::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
