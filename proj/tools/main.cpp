// irgp: experiment runner and built-in verification suites.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "irgp/config.hpp"
#include "irgp/errors.hpp"
#include "irgp/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitCheck = 4;

struct RunArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  bool overwrite = false;
};

int cmd_run(const RunArgs& args) {
  auto config = irgp::load_config(args.config);
  if (args.seed) config.seed = *args.seed;
  if (args.reps) {
    if (*args.reps < 1) throw irgp::ConfigError("--reps must be >= 1");
    config.reps = *args.reps;
  }
  irgp::ExperimentOptions opts;
  opts.out_dir = args.out.empty() ? irgp::default_output_dir(config, args.config)
                                  : std::filesystem::path(args.out);
  opts.overwrite = args.overwrite;
  opts.log = &std::cerr;
  const auto outcome = irgp::run_experiment(config, opts);
  for (const auto& f : outcome.files) std::cout << f.string() << '\n';
  if (!outcome.checks_passed) {
    std::cerr << "note: at least one embedded bound or check did not hold; see bounds.json\n";
  }
  return kExitOk;
}

int cmd_check(const std::string& name, bool quick) {
  return irgp::run_check(name, quick, std::cout) ? kExitOk : kExitCheck;
}

int cmd_profile(const std::string& path, const std::string& out) {
  const auto config = irgp::load_config(path);
  const auto schedules = irgp::profile_schedules(config);
  if (out.empty()) {
    irgp::emit_confidence_profile(schedules, config.horizon, std::cout);
    return kExitOk;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw irgp::Error("cannot write '" + out + "'");
  irgp::emit_confidence_profile(schedules, config.horizon, f);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian optimisation experiments with randomized confidence parameters"};
  app.set_version_flag("--version", std::string(irgp::software_version()));
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "run an experiment described by a config file");
  run_cmd->add_option("config", run.config, "config file")->required();
  run_cmd->add_option("--out", run.out, "output directory (default: $IRGP_OUTPUT_ROOT/<config>)");
  run_cmd->add_option("--seed", run.seed, "override the base seed");
  run_cmd->add_option("--reps", run.reps, "override the number of replications");
  run_cmd->add_flag("--overwrite", run.overwrite, "replace files in an existing output directory");

  std::string check_name;
  bool quick = false;
  auto* check_cmd = app.add_subcommand("check", "run a built-in verification suite");
  check_cmd->add_option("suite", check_name, "lemma42, counterexample or bounds")
      ->required()
      ->check(CLI::IsMember({"lemma42", "counterexample", "bounds"}));
  check_cmd->add_flag("--quick", quick, "smaller sample sizes");

  std::string profile_config;
  std::string profile_out;
  auto* profile_cmd =
      app.add_subcommand("profile-confidence", "tabulate confidence schedules over t = 1..horizon");
  profile_cmd->add_option("config", profile_config, "config file")->required();
  profile_cmd->add_option("--out", profile_out, "CSV file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*check_cmd) return cmd_check(check_name, quick);
    if (*profile_cmd) return cmd_profile(profile_config, profile_out);
  } catch (const irgp::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const irgp::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const irgp::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const irgp::IngestionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const irgp::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}
