#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rpde/checkpoint.hpp"
#include "rpde/commands.hpp"
#include "rpde/config.hpp"
#include "rpde/errors.hpp"
#include "rpde/trainer.hpp"

using namespace rpde;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rpde_test_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Base run plus `extra` lines; a key in `extra` replaces the base line.
std::string small_config(const std::string& extra = "") {
  std::vector<std::string> lines{"problem.tag = diffusion-smooth",
                                 "problem.d = 3",
                                 "net.layers = 2",
                                 "net.width = 8",
                                 "adam.lr = 1e-3",
                                 "train.batch = 8",
                                 "train.iterations = 20",
                                 "train.log_every = 1",
                                 "oracle.samples = 4",
                                 "oracle.nx = 21",
                                 "oracle.nt = 10",
                                 "eval.samples = 40",
                                 "probe.axis0 = 0,0.5,1",
                                 "probe.axis1 = 0:1:5"};
  std::istringstream in(extra);
  std::string line;
  while (std::getline(in, line)) {
    const std::string key = line.substr(0, line.find(' '));
    auto it = std::find_if(lines.begin(), lines.end(), [&](const std::string& l) { return l.rfind(key + " ", 0) == 0; });
    if (it != lines.end()) {
      *it = line;
    } else {
      lines.push_back(line);
    }
  }
  std::string text;
  for (const auto& l : lines) text += l + "\n";
  return text;
}

std::string write_config(const fs::path& dir, const std::string& text, const std::string& name = "run.cfg") {
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rpde");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace

TEST_CASE("config parsing and canonical text") {
  const RunConfig c = parse_config_text(small_config());
  CHECK(c.tag == ProblemTag::diffusion_smooth);
  CHECK(c.net_width == 8);
  CHECK(c.adam.lr == 1e-3);
  CHECK(c.adam.beta2 == 0.999);
  CHECK(c.probes.size() == 15);
  CHECK(c.probes[6][0] == 0.5);
  CHECK(c.probes[6][1] == 0.25);
  const RunConfig back = parse_config_text(config_text(c));
  CHECK(config_text(back) == config_text(c));
  CHECK(back.probes == c.probes);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config_text(small_config("net.depth = 3\n")), ConfigError);
  CHECK_THROWS_AS(parse_config_text(small_config("train.batch = many\n")), ConfigError);
  CHECK_THROWS_AS(parse_config_text("net.width = 8\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(small_config("problem.tag = heat-square\nproblem.lambda_ic = 2\n")), ConfigError);
  CHECK_THROWS_AS(parse_config_text(small_config() + "net.width = 9\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(small_config("train.batch = 0\n")), ConfigError);
  CHECK_THROWS_AS(parse_config_text(small_config("probe.points = 0.5,0.5\n")), ConfigError);
  CHECK_THROWS_AS(parse_config_text("problem.tag = diffusion-smooth\nprobe.axis0 = 0:1.5:3\nprobe.axis1 = 0.5\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text("problem.tag = heat-square\noracle.h = 0.3\n"), ConfigError);
}

TEST_CASE("default probe sets") {
  CHECK(default_probes(ProblemTag::diffusion_smooth).size() == 42);
  CHECK(default_probes(ProblemTag::heat_square).size() == 81);
  CHECK(default_probes(ProblemTag::heat_hole) == std::vector<Probe>{{-0.6, 0.0}, {-0.6, -0.6}});
}

TEST_CASE("checkpoint round trip and refusal") {
  const fs::path dir = scratch("ckpt");
  const RunConfig c = parse_config_text(small_config());
  Trainer tr(c, 1);
  for (int k = 0; k < 3; ++k) tr.step();
  const std::string path = (dir / "a.ckpt").string();
  save_checkpoint(path, tr.checkpoint());
  const Checkpoint back = load_checkpoint(path);
  CHECK(back.iteration == 3);
  CHECK(back.adam.step == 3);
  CHECK(std::equal(back.params.flat().begin(), back.params.flat().end(), tr.params().flat().begin()));
  CHECK(back.adam.m == tr.adam().m);
  CHECK(back.adam.v == tr.adam().v);
  CHECK(back.loss_tail.size() == 3);

  std::string bytes = slurp(path);
  std::string other = bytes;
  other.replace(0, 17, "RPDE-CHECKPOINT 2");
  std::ofstream(dir / "v2.ckpt", std::ios::binary) << other;
  CHECK_THROWS_WITH_AS(load_checkpoint((dir / "v2.ckpt").string()), doctest::Contains("version 2"), ConfigError);

  std::ofstream(dir / "short.ckpt", std::ios::binary) << bytes.substr(0, bytes.size() - 8);
  CHECK_THROWS_AS(load_checkpoint((dir / "short.ckpt").string()), ConfigError);

  other = bytes;
  other.replace(other.find("param_count"), 11, "param_cnt  ");
  std::ofstream(dir / "bad.ckpt", std::ios::binary) << other;
  CHECK_THROWS_AS(load_checkpoint((dir / "bad.ckpt").string()), ConfigError);
}

TEST_CASE("zero-iteration budget writes only the initial checkpoint") {
  const fs::path dir = scratch("zero");
  CommandOptions o;
  o.config = write_config(dir, small_config("train.iterations = 0\n"));
  o.out = (dir / "out").string();
  const TrainOutcome r = cmd_train(o);
  CHECK(r.final_iteration == 0);
  CHECK(r.losses.empty());
  REQUIRE(r.checkpoints.size() == 1);
  CHECK(fs::path(r.checkpoints[0]).filename() == "checkpoint_00000000.ckpt");
  int ckpts = 0;
  for (const auto& e : fs::directory_iterator(o.out)) ckpts += e.path().extension() == ".ckpt";
  CHECK(ckpts == 1);
}

TEST_CASE("resume reproduces the uninterrupted run") {
  const fs::path dir = scratch("resume");
  CommandOptions full;
  full.config = write_config(dir, small_config("train.checkpoint_every = 7\n"));
  full.out = (dir / "full").string();
  const TrainOutcome a = cmd_train(full);
  REQUIRE(a.losses.size() == 20);

  CommandOptions part = full;
  part.out = (dir / "part").string();
  part.config = write_config(dir, small_config("train.checkpoint_every = 7\ntrain.iterations = 7\n"), "short.cfg");
  cmd_train(part);
  part.config = full.config;
  part.resume = (fs::path(part.out) / "checkpoint_00000007.ckpt").string();
  const TrainOutcome b = cmd_train(part);
  CHECK(b.start_iteration == 7);
  REQUIRE(b.losses.size() == 13);
  for (std::size_t k = 0; k < 13; ++k) CHECK(b.losses[k] == a.losses[k + 7]);
  CHECK(slurp(fs::path(full.out) / "checkpoint_00000020.ckpt") == slurp(fs::path(part.out) / "checkpoint_00000020.ckpt"));
  CHECK(slurp(fs::path(full.out) / "loss.csv") == slurp(fs::path(part.out) / "loss.csv"));
}

TEST_CASE("resume refuses a different network") {
  const fs::path dir = scratch("mismatch");
  CommandOptions o;
  o.config = write_config(dir, small_config("train.iterations = 2\n"));
  o.out = (dir / "a").string();
  cmd_train(o);
  o.resume = (fs::path(o.out) / "checkpoint_00000002.ckpt").string();
  o.config = write_config(dir, small_config("net.width = 9\n"), "wide.cfg");
  CHECK_THROWS_AS(cmd_train(o), ConfigError);
}

TEST_CASE("runs are byte-identical") {
  const fs::path dir = scratch("repeat");
  const std::string cfg = write_config(dir, small_config());
  for (const char* name : {"one", "two"}) {
    CommandOptions o;
    o.config = cfg;
    o.out = (dir / name).string();
    cmd_train(o);
    cmd_oracle(o);
    o.checkpoint = (dir / name / "checkpoint_00000020.ckpt").string();
    cmd_evaluate(o);
  }
  for (const char* f : {"checkpoint_00000000.ckpt", "checkpoint_00000020.ckpt", "loss.csv", "oracle_ensemble.csv",
                        "oracle_summary.csv", "surrogate_ensemble.csv", "surrogate_summary.csv", "surrogate_pdf.csv"}) {
    INFO(f);
    CHECK(slurp(dir / "one" / f) == slurp(dir / "two" / f));
  }
}

TEST_CASE("evaluate respects the hard trial form") {
  const fs::path dir = scratch("eval");
  CommandOptions o;
  o.config = write_config(dir, small_config("train.iterations = 5\n"));
  o.out = (dir / "out").string();
  cmd_train(o);
  o.checkpoint = (fs::path(o.out) / "checkpoint_00000005.ckpt").string();
  const EnsembleTable t = cmd_evaluate(o);
  for (std::size_t q = 0; q < t.probes.size(); ++q) {
    const double tt = t.probes[q][0], x = t.probes[q][1];
    for (double v : t.samples[q]) {
      if (x == 0.0 || x == 1.0) CHECK(v == 0.0);
      if (tt == 0.0) CHECK(v == 10.0 * (x - x * x));
    }
  }
  // Same probe seed, same values; another seed, other draws.
  const EnsembleTable again = cmd_evaluate(o);
  CHECK(again.samples == t.samples);
  o.seed = 99;
  CHECK(cmd_evaluate(o).samples != t.samples);
}

TEST_CASE("evaluate rejects probes outside the domain") {
  const fs::path dir = scratch("outside");
  CommandOptions o;
  o.config = write_config(dir, small_config("train.iterations = 0\n"));
  o.out = (dir / "out").string();
  cmd_train(o);
  const Checkpoint ck = load_checkpoint((fs::path(o.out) / "checkpoint_00000000.ckpt").string());
  const ProblemSpec pb = ck.config.problem();
  CHECK_THROWS_WITH_AS(surrogate_ensemble(pb, ck.params, {{0.5, 0.5}, {1.5, 0.5}}, 10, 1),
                       doctest::Contains("#1 (1.5, 0.5)"), UsageError);
}

TEST_CASE("oracle with one member emits one value per probe") {
  const fs::path dir = scratch("oracle1");
  CommandOptions o;
  o.config = write_config(dir, small_config("oracle.samples = 1\n"));
  o.out = (dir / "out").string();
  const EnsembleTable t = cmd_oracle(o);
  for (const auto& s : t.samples) CHECK(s.size() == 1);
  const EnsembleTable back = read_ensemble_csv((fs::path(o.out) / "oracle_ensemble.csv").string());
  CHECK(back.probes == t.probes);
  CHECK(back.samples == t.samples);
}

TEST_CASE("compare through the command line") {
  const fs::path dir = scratch("compare");
  CommandOptions o;
  o.config = write_config(dir, small_config());
  o.out = (dir / "out").string();
  cmd_oracle(o);
  const std::string csv = (fs::path(o.out) / "oracle_ensemble.csv").string();

  o.surrogate = csv;
  o.oracle = csv;
  const CompareReport self = cmd_compare(o);
  CHECK(self.pass());
  CHECK(self.metrics.mean_rel_l2 == 0.0);
  CHECK(self.metrics.std_rel_l2 == 0.0);
  CHECK(self.metrics.ks_max == 0.0);
  CHECK(cli({"compare", "--surrogate", csv, "--oracle", csv}) == 0);

  std::string bytes = slurp(csv);
  bytes.replace(0, 5, "prb");
  const std::string broken = (dir / "broken.csv").string();
  std::ofstream(broken, std::ios::binary) << bytes;
  CHECK(cli({"compare", "--surrogate", broken, "--oracle", csv}) == 2);
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("exit");
  CHECK(cli({}) == 2);
  CHECK(cli({"train"}) == 2);
  CHECK(cli({"train", "--config", (dir / "missing.cfg").string()}) == 2);
  CHECK(cli({"train", "--config", write_config(dir, small_config("bogus.key = 1\n"))}) == 2);
  CHECK(cli({"--help"}) == 0);
  const std::string huge = write_config(dir, small_config("adam.lr = 1e300\ntrain.iterations = 50\n"));
  CHECK(cli({"train", "--config", huge, "--out", (dir / "huge").string()}) == 3);
}

TEST_CASE("learning-rate schedule") {
  RunConfig c = parse_config_text(small_config());
  CHECK(c.learning_rate(0) == 1e-3);
  CHECK(c.learning_rate(12345) == 1e-3);
  c = parse_config_text(small_config("adam.lr_final = 1e-5\nadam.decay_iterations = 100\n"));
  CHECK(c.learning_rate(0) == 1e-3);
  CHECK(c.learning_rate(50) == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(c.learning_rate(100) == doctest::Approx(1e-5).epsilon(1e-12));
  CHECK(c.learning_rate(1000) == c.learning_rate(100));
  CHECK_THROWS_AS(parse_config_text(small_config("adam.decay_iterations = -1\n")), ConfigError);
}
