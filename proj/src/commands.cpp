#include "rpde/commands.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rpde/checkpoint.hpp"
#include "rpde/errors.hpp"
#include "rpde/parallel.hpp"
#include "rpde/rng.hpp"
#include "rpde/trainer.hpp"

namespace fs = std::filesystem;

namespace rpde {

namespace {

int thread_count(const CommandOptions& o) {
  if (o.threads) {
    if (*o.threads < 1) throw UsageError("--threads must be >= 1");
    return *o.threads;
  }
  return default_thread_count();
}

std::string prepare_out(const CommandOptions& o, const RunConfig& c) {
  const std::string dir = o.out.empty() ? c.out_dir : o.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create output directory '" + dir + "': " + ec.message());
  return dir;
}

std::string checkpoint_name(const std::string& dir, std::uint64_t it) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "checkpoint_%08llu.ckpt", static_cast<unsigned long long>(it));
  return (fs::path(dir) / buf).string();
}

// Keeps the header and rows before `upto` so a resumed run continues the
// log of the run it resumes.
void truncate_loss_log(const std::string& path, std::uint64_t upto) {
  std::ifstream in(path);
  std::string kept = "iteration,loss\n", line;
  if (in && std::getline(in, line) && line == "iteration,loss") {
    while (std::getline(in, line)) {
      const auto comma = line.find(',');
      if (comma == std::string::npos) break;
      if (std::stoull(line.substr(0, comma)) >= upto) break;
      kept += line + "\n";
    }
  }
  in.close();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << kept;
}

void say(const CommandOptions& o, const std::string& s) {
  if (o.log) *o.log << s << "\n";
}

}  // namespace

TrainOutcome cmd_train(const CommandOptions& opts) {
  if (opts.config.empty()) throw UsageError("train needs --config");
  RunConfig cfg = load_config(opts.config);
  if (opts.seed) cfg.train_seed = *opts.seed;
  const int threads = thread_count(opts);
  const std::string dir = prepare_out(opts, cfg);

  std::unique_ptr<Trainer> trainer;
  if (opts.resume.empty()) {
    trainer = std::make_unique<Trainer>(cfg, threads);
  } else {
    Checkpoint ck = load_checkpoint(opts.resume);
    if (ck.iteration > static_cast<std::uint64_t>(cfg.iterations)) {
      throw ConfigError("checkpoint is at iteration " + std::to_string(ck.iteration) + ", beyond the budget of " +
                        std::to_string(cfg.iterations));
    }
    trainer = std::make_unique<Trainer>(cfg, std::move(ck), threads);
  }

  TrainOutcome outcome;
  outcome.start_iteration = trainer->iteration();
  const std::string log_path = (fs::path(dir) / "loss.csv").string();
  truncate_loss_log(log_path, outcome.start_iteration);
  std::ofstream log(log_path, std::ios::binary | std::ios::app);
  if (!log) throw UsageError("cannot write '" + log_path + "'");

  const auto save = [&] {
    const std::string path = checkpoint_name(dir, trainer->iteration());
    save_checkpoint(path, trainer->checkpoint());
    outcome.checkpoints.push_back(path);
  };
  if (opts.resume.empty()) save();

  const auto budget = static_cast<std::uint64_t>(cfg.iterations);
  const std::uint64_t report = std::max<std::uint64_t>(1, budget / 20);
  while (trainer->iteration() < budget) {
    const std::uint64_t i = trainer->iteration();
    const double loss = trainer->step();
    outcome.losses.push_back(loss);
    if (i % static_cast<std::uint64_t>(cfg.log_every) == 0) log << i << "," << format_double(loss) << "\n";
    if ((i + 1) % report == 0) {
      say(opts, "iteration " + std::to_string(i + 1) + "/" + std::to_string(budget) + " loss " + format_double(loss));
    }
    const std::uint64_t done = trainer->iteration();
    const bool interval = cfg.checkpoint_every > 0 && done % static_cast<std::uint64_t>(cfg.checkpoint_every) == 0;
    if (interval || done == budget) save();
  }
  outcome.final_iteration = trainer->iteration();
  return outcome;
}

EnsembleTable cmd_oracle(const CommandOptions& opts) {
  if (opts.config.empty()) throw UsageError("oracle needs --config");
  RunConfig cfg = load_config(opts.config);
  if (opts.seed) cfg.oracle_seed = *opts.seed;
  const int threads = thread_count(opts);
  const std::string dir = prepare_out(opts, cfg);
  const ProblemSpec pb = cfg.problem();
  say(opts, "oracle: " + std::to_string(cfg.oracle_samples) + " samples of " + to_string(pb.tag));
  const EnsembleRun run = mc_ensemble(pb, cfg.oracle(threads), cfg.probes);

  EnsembleTable t;
  t.axes = probe_axes(pb.tag);
  t.probes = cfg.probes;
  for (std::size_t q = 0; q < t.probes.size(); ++q) t.samples.push_back(run.probe_values(static_cast<int>(q)));
  write_ensemble_csv((fs::path(dir) / "oracle_ensemble.csv").string(), t);
  if (run.samples >= 2) {
    const SummaryOutput s = summarize(t, cfg.pdf_points);
    write_summary_csv((fs::path(dir) / "oracle_summary.csv").string(), t, s);
    write_pdf_csv((fs::path(dir) / "oracle_pdf.csv").string(), s);
  } else {
    say(opts, "oracle: single sample, summary and pdf files skipped");
  }
  return t;
}

EnsembleTable surrogate_ensemble(const ProblemSpec& pb, const NetworkParams& params, const std::vector<Probe>& probes,
                                 int samples, std::uint64_t seed) {
  check_probes(pb, probes);
  if (samples < 1) throw UsageError("surrogate ensemble needs at least one sample");
  if (params.layout().input_dim != pb.input_dim()) throw UsageError("network does not match the problem dimensions");
  EnsembleTable t;
  t.axes = probe_axes(pb.tag);
  t.probes = probes;
  t.samples.assign(probes.size(), std::vector<double>(static_cast<std::size_t>(samples)));
  const bool hard = pb.constraint == ConstraintMode::hard;
  std::vector<double> input(static_cast<std::size_t>(pb.input_dim()));
  for (int m = 0; m < samples; ++m) {
    RandomStream rng(seed, streams::kEvaluate | static_cast<std::uint64_t>(m));
    const std::vector<double> p = sample_params(1, pb.d, ParamDistribution::uniform01, rng);
    std::copy(p.begin(), p.end(), input.begin() + 2);
    for (std::size_t q = 0; q < probes.size(); ++q) {
      input[0] = probes[q][0];
      input[1] = probes[q][1];
      const double net = forward(params, input);
      t.samples[q][static_cast<std::size_t>(m)] = hard ? hard_wrap_value(*pb.trial, net, probes[q]) : net;
    }
  }
  return t;
}

EnsembleTable cmd_evaluate(const CommandOptions& opts) {
  if (opts.checkpoint.empty()) throw UsageError("evaluate needs --checkpoint");
  const Checkpoint ck = load_checkpoint(opts.checkpoint);
  RunConfig cfg = ck.config;
  if (!opts.config.empty()) {
    const RunConfig given = load_config(opts.config);
    if (given.tag != cfg.tag) {
      throw ConfigError("config problem " + to_string(given.tag) + " does not match checkpoint problem " +
                        to_string(cfg.tag));
    }
    cfg.probes = given.probes;
    cfg.eval_samples = given.eval_samples;
    cfg.eval_seed = given.eval_seed;
    cfg.pdf_points = given.pdf_points;
    cfg.out_dir = given.out_dir;
  }
  if (opts.seed) cfg.eval_seed = *opts.seed;
  const std::string dir = prepare_out(opts, cfg);
  const ProblemSpec pb = cfg.problem();
  const EnsembleTable t = surrogate_ensemble(pb, ck.params, cfg.probes, cfg.eval_samples, cfg.eval_seed);
  write_ensemble_csv((fs::path(dir) / "surrogate_ensemble.csv").string(), t);
  const SummaryOutput s = summarize(t, cfg.pdf_points);
  write_summary_csv((fs::path(dir) / "surrogate_summary.csv").string(), t, s);
  write_pdf_csv((fs::path(dir) / "surrogate_pdf.csv").string(), s);
  return t;
}

std::string CompareReport::text(const EnsembleTable& t) const {
  const auto verdict = [](bool ok) { return ok ? "PASS" : "FAIL"; };
  const auto tol = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return std::string(buf);
  };
  std::ostringstream o;
  o << "mean_rel_l2 " << format_double(metrics.mean_rel_l2) << " tol " << tol(mean_tol) << " "
    << verdict(mean_pass) << "\n";
  o << "std_rel_l2 " << format_double(metrics.std_rel_l2) << " tol " << tol(std_tol) << " "
    << verdict(std_pass) << "\n";
  o << "ks_max " << format_double(metrics.ks_max) << " tol " << tol(ks_tol) << " " << verdict(ks_pass)
    << "\n";
  o << "mean_max_abs " << format_double(metrics.mean_max_abs) << "\n";
  o << "std_max_abs " << format_double(metrics.std_max_abs) << "\n";
  for (std::size_t q = 0; q < metrics.ks.size(); ++q) {
    o << "ks probe " << q << " (" << format_double(t.probes[q][0]) << ", " << format_double(t.probes[q][1]) << ") "
      << format_double(metrics.ks[q]) << "\n";
  }
  o << "overall " << verdict(pass()) << "\n";
  return o.str();
}

CompareReport cmd_compare(const CommandOptions& opts) {
  if (opts.surrogate.empty() || opts.oracle.empty()) throw UsageError("compare needs --surrogate and --oracle");
  RunConfig cfg;
  const bool have_config = !opts.config.empty();
  if (have_config) cfg = load_config(opts.config);
  const EnsembleTable a = read_ensemble_csv(opts.surrogate);
  const EnsembleTable b = read_ensemble_csv(opts.oracle);
  if (a.axes != b.axes) throw ConfigError("compare: files use different probe axes");
  if (a.probes != b.probes) throw ConfigError("compare: probe sets differ");
  if (a.samples[0].size() < 2 || b.samples[0].size() < 2) throw ConfigError("compare: need at least 2 samples per probe");

  CompareReport r;
  r.metrics = compare_fields(StatsField::from_samples(a.probes, a.samples), StatsField::from_samples(b.probes, b.samples));
  r.mean_tol = cfg.mean_tol;
  r.std_tol = cfg.std_tol;
  r.ks_tol = cfg.ks_tol;
  r.mean_pass = r.metrics.mean_rel_l2 <= r.mean_tol;
  r.std_pass = r.metrics.std_rel_l2 <= r.std_tol;
  r.ks_pass = r.metrics.ks_max <= r.ks_tol;
  if (have_config || !opts.out.empty()) {
    const std::string dir = prepare_out(opts, cfg);
    std::ofstream out(fs::path(dir) / "compare_report.txt", std::ios::binary | std::ios::trunc);
    out << r.text(a);
  }
  return r;
}

}  // namespace rpde
