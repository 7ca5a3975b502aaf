#include <CLI11.hpp>

#include "rpde/commands.hpp"
#include "rpde/errors.hpp"

namespace rpde {

namespace {

struct Overrides {
  std::vector<CLI::Option*> seed, threads;
};

void common_flags(CLI::App* cmd, CommandOptions& o, std::uint64_t& seed, int& threads, Overrides& ov) {
  cmd->add_option("--out", o.out, "Output directory (overrides output.dir)");
  ov.seed.push_back(cmd->add_option("--seed", seed, "Seed override for this command"));
  ov.threads.push_back(
      cmd->add_option("--threads", threads, "Worker threads (overrides RPDE_THREADS)")->check(CLI::PositiveNumber));
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deep-network surrogates for PDEs with random coefficients"};
  app.require_subcommand(1);
  CommandOptions o;
  o.log = &err;
  std::uint64_t seed = 0;
  int threads = 0;
  Overrides ov;

  CLI::App* train = app.add_subcommand("train", "Train a surrogate");
  train->add_option("--config", o.config, "Run config file")->required();
  train->add_option("--resume", o.resume, "Checkpoint to continue from");
  common_flags(train, o, seed, threads, ov);

  CLI::App* oracle = app.add_subcommand("oracle", "Run the Monte Carlo finite-difference ensemble");
  oracle->add_option("--config", o.config, "Run config file")->required();
  common_flags(oracle, o, seed, threads, ov);

  CLI::App* evaluate = app.add_subcommand("evaluate", "Evaluate a trained surrogate at the probes");
  evaluate->add_option("--checkpoint", o.checkpoint, "Checkpoint file")->required();
  evaluate->add_option("--config", o.config, "Config supplying probe and evaluation settings");
  common_flags(evaluate, o, seed, threads, ov);

  CLI::App* compare = app.add_subcommand("compare", "Compare surrogate and oracle ensembles");
  compare->add_option("--surrogate", o.surrogate, "Surrogate ensemble CSV")->required();
  compare->add_option("--oracle", o.oracle, "Oracle ensemble CSV")->required();
  compare->add_option("--config", o.config, "Config supplying the tolerances");
  compare->add_option("--out", o.out, "Directory for compare_report.txt");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  for (CLI::Option* opt : ov.seed) {
    if (opt->count()) o.seed = seed;
  }
  for (CLI::Option* opt : ov.threads) {
    if (opt->count()) o.threads = threads;
  }

  try {
    if (train->parsed()) {
      const TrainOutcome r = cmd_train(o);
      out << "trained to iteration " << r.final_iteration;
      if (!r.losses.empty()) out << ", last loss " << format_double(r.losses.back());
      out << "\n";
    } else if (oracle->parsed()) {
      const EnsembleTable t = cmd_oracle(o);
      out << "oracle: " << t.samples.front().size() << " samples at " << t.probes.size() << " probes\n";
    } else if (evaluate->parsed()) {
      const EnsembleTable t = cmd_evaluate(o);
      out << "evaluate: " << t.samples.front().size() << " samples at " << t.probes.size() << " probes\n";
    } else if (compare->parsed()) {
      const EnsembleTable probes = read_ensemble_csv(o.surrogate);
      const CompareReport r = cmd_compare(o);
      out << r.text(probes);
      return r.pass() ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericFault& e) {
    err << "numeric fault: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace rpde
