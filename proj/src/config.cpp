#include "rpde/config.hpp"

#include <algorithm>
#include <boost/program_options.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "rpde/errors.hpp"

namespace po = boost::program_options;

namespace rpde {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ConfigError("cannot parse '" + t + "' as a number in " + what);
  }
  if (used != t.size() || !std::isfinite(v)) throw ConfigError("cannot parse '" + t + "' as a number in " + what);
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = n == 1 ? lo : lo + (hi - lo) * k / (n - 1);
  return v;
}

std::vector<Probe> grid(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<Probe> out;
  for (double u : a) for (double w : b) out.push_back({u, w});
  return out;
}

}  // namespace

std::vector<double> parse_axis(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError("empty probe axis");
  if (t.find(':') != std::string::npos) {
    const auto parts = split(t, ':');
    if (parts.size() != 3) throw ConfigError("probe axis range must be lo:hi:count, got '" + t + "'");
    const double count = parse_number(parts[2], "probe axis count");
    if (count < 1 || count != std::floor(count)) throw ConfigError("probe axis count must be a positive integer");
    return linspace(parse_number(parts[0], "probe axis"), parse_number(parts[1], "probe axis"),
                    static_cast<int>(count));
  }
  std::vector<double> v;
  for (const auto& p : split(t, ',')) v.push_back(parse_number(p, "probe axis"));
  return v;
}

std::vector<Probe> parse_probe_points(const std::string& text) {
  std::vector<Probe> out;
  for (const auto& pair : split(text, ';')) {
    if (trim(pair).empty()) continue;
    const auto c = split(pair, ',');
    if (c.size() != 2) throw ConfigError("probe point '" + trim(pair) + "' must have two coordinates");
    out.push_back({parse_number(c[0], "probe.points"), parse_number(c[1], "probe.points")});
  }
  if (out.empty()) throw ConfigError("probe.points is empty");
  return out;
}

std::vector<Probe> default_probes(ProblemTag tag) {
  switch (tag) {
    case ProblemTag::diffusion_smooth:
    case ProblemTag::diffusion_nonsmooth: return grid({0.5, 1.0}, linspace(0.0, 1.0, 21));
    case ProblemTag::heat_square: return grid(linspace(-0.8, 0.8, 9), linspace(-0.8, 0.8, 9));
    case ProblemTag::heat_hole: return {{-0.6, 0.0}, {-0.6, -0.6}};
  }
  return {};
}

std::array<std::string, 2> probe_axes(ProblemTag tag) {
  if (tag == ProblemTag::diffusion_smooth || tag == ProblemTag::diffusion_nonsmooth) return {"t", "x"};
  return {"x", "y"};
}

void check_probes(const ProblemSpec& pb, const std::vector<Probe>& probes) {
  if (probes.empty()) throw UsageError("no probes given");
  std::string bad;
  for (std::size_t q = 0; q < probes.size(); ++q) {
    const Probe& c = probes[q];
    bool ok = true;
    if (pb.transient()) {
      ok = c[0] >= 0.0 && c[0] <= *pb.domain.time_horizon && c[1] >= pb.domain.lo && c[1] <= pb.domain.hi;
    } else {
      ok = pb.domain.contains(c) || pb.domain.on_boundary(c, 1e-12);
    }
    if (!ok) bad += (bad.empty() ? "" : ", ") + std::string("#") + std::to_string(q) + " (" + format_double(c[0]) +
                    ", " + format_double(c[1]) + ")";
  }
  if (!bad.empty()) throw UsageError("probes outside the domain of " + to_string(pb.tag) + ": " + bad);
}

NetworkConfig RunConfig::network(const ProblemSpec& pb) const {
  NetworkConfig nc;
  nc.input_dim = pb.input_dim();
  nc.hidden_width = net_width;
  nc.num_layers = net_layers;
  nc.block_size = net_block;
  nc.activation = activation;
  return nc;
}

OracleConfig RunConfig::oracle(int threads) const {
  OracleConfig oc;
  oc.samples = oracle_samples;
  oc.nx = oracle_nx;
  oc.nt = oracle_nt;
  oc.h = oracle_h;
  oc.seed = oracle_seed;
  oc.threads = threads;
  return oc;
}

double RunConfig::learning_rate(std::uint64_t iteration) const {
  if (decay_iterations <= 0 || lr_final <= 0.0) return adam.lr;
  const double frac = std::min(1.0, static_cast<double>(iteration) / static_cast<double>(decay_iterations));
  return adam.lr * std::pow(lr_final / adam.lr, frac);
}

void RunConfig::validate() const {
  const ProblemSpec pb = problem();
  network(pb).validate();
  adam.validate();
  if (lr_final < 0.0 || !std::isfinite(lr_final)) throw ConfigError("adam.lr_final must be >= 0");
  if (decay_iterations < 0) throw ConfigError("adam.decay_iterations must be >= 0");
  if (batch < 1) throw ConfigError("train.batch must be >= 1");
  if (iterations < 0) throw ConfigError("train.iterations must be >= 0");
  if (checkpoint_every < 0) throw ConfigError("train.checkpoint_every must be >= 0");
  if (log_every < 1) throw ConfigError("train.log_every must be >= 1");
  if (oracle_samples < 1) throw ConfigError("oracle.samples must be >= 1");
  if (oracle_nx < 3 || oracle_nt < 1) throw ConfigError("oracle.nx must be >= 3 and oracle.nt >= 1");
  if (!(oracle_h > 0.0)) throw ConfigError("oracle.h must be positive");
  if (!pb.transient()) {
    Grid2D g;
    g.lo = pb.domain.lo;
    g.hi = pb.domain.hi;
    g.h = oracle_h;
    try {
      g.cells();
    } catch (const UsageError& e) {
      throw ConfigError(std::string("oracle.h: ") + e.what());
    }
  }
  if (eval_samples < 2) throw ConfigError("eval.samples must be >= 2");
  if (pdf_points < 2) throw ConfigError("eval.pdf_points must be >= 2");
  if (!(mean_tol > 0.0) || !(std_tol > 0.0) || !(ks_tol > 0.0)) throw ConfigError("compare tolerances must be positive");
  if (out_dir.empty()) throw ConfigError("output.dir is empty");
  try {
    check_probes(pb, probes);
  } catch (const UsageError& e) {
    throw ConfigError(e.what());
  }
}

namespace {

po::options_description config_options() {
  po::options_description d;
  d.add_options()
      ("problem.tag", po::value<std::string>())
      ("problem.d", po::value<int>())
      ("problem.constraint", po::value<std::string>())
      ("problem.loss", po::value<std::string>())
      ("problem.lambda_ic", po::value<double>())
      ("problem.lambda_bc", po::value<double>())
      ("net.layers", po::value<int>())
      ("net.width", po::value<int>())
      ("net.block", po::value<int>())
      ("net.activation", po::value<std::string>())
      ("adam.lr", po::value<double>())
      ("adam.beta1", po::value<double>())
      ("adam.beta2", po::value<double>())
      ("adam.eps", po::value<double>())
      ("adam.lr_final", po::value<double>())
      ("adam.decay_iterations", po::value<long>())
      ("train.batch", po::value<int>())
      ("train.iterations", po::value<long>())
      ("train.seed", po::value<std::uint64_t>())
      ("train.checkpoint_every", po::value<long>())
      ("train.log_every", po::value<long>())
      ("oracle.samples", po::value<int>())
      ("oracle.nx", po::value<int>())
      ("oracle.nt", po::value<int>())
      ("oracle.h", po::value<double>())
      ("oracle.seed", po::value<std::uint64_t>())
      ("probe.points", po::value<std::string>())
      ("probe.axis0", po::value<std::string>())
      ("probe.axis1", po::value<std::string>())
      ("eval.samples", po::value<int>())
      ("eval.seed", po::value<std::uint64_t>())
      ("eval.pdf_points", po::value<int>())
      ("compare.mean_tol", po::value<double>())
      ("compare.std_tol", po::value<double>())
      ("compare.ks_tol", po::value<double>())
      ("output.dir", po::value<std::string>());
  return d;
}

template <class T>
void take(const po::variables_map& vm, const char* key, T& dst) {
  if (vm.count(key)) dst = vm[key].as<T>();
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  po::variables_map vm;
  try {
    std::istringstream in(text);
    po::store(po::parse_config_file(in, config_options(), false), vm);
    po::notify(vm);
  } catch (const po::error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!vm.count("problem.tag")) throw ConfigError("config: problem.tag is required");

  RunConfig c;
  try {
    c.tag = parse_problem_tag(vm["problem.tag"].as<std::string>());
    if (vm.count("problem.d")) c.overrides.d = vm["problem.d"].as<int>();
    if (vm.count("problem.constraint")) {
      c.overrides.constraint = parse_constraint_mode(vm["problem.constraint"].as<std::string>());
    }
    if (vm.count("problem.loss")) c.overrides.loss = parse_loss_mode(vm["problem.loss"].as<std::string>());
    if (vm.count("problem.lambda_ic")) c.overrides.lambda_ic = vm["problem.lambda_ic"].as<double>();
    if (vm.count("problem.lambda_bc")) c.overrides.lambda_bc = vm["problem.lambda_bc"].as<double>();
    if (vm.count("net.activation") && vm["net.activation"].as<std::string>() != "tanh") {
      throw ConfigError("net.activation: only 'tanh' is supported");
    }
  } catch (const UsageError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  take(vm, "net.layers", c.net_layers);
  take(vm, "net.width", c.net_width);
  take(vm, "net.block", c.net_block);
  take(vm, "adam.lr", c.adam.lr);
  take(vm, "adam.beta1", c.adam.beta1);
  take(vm, "adam.beta2", c.adam.beta2);
  take(vm, "adam.eps", c.adam.eps);
  take(vm, "adam.lr_final", c.lr_final);
  take(vm, "adam.decay_iterations", c.decay_iterations);
  take(vm, "train.batch", c.batch);
  take(vm, "train.iterations", c.iterations);
  take(vm, "train.seed", c.train_seed);
  take(vm, "train.checkpoint_every", c.checkpoint_every);
  take(vm, "train.log_every", c.log_every);
  take(vm, "oracle.samples", c.oracle_samples);
  take(vm, "oracle.nx", c.oracle_nx);
  take(vm, "oracle.nt", c.oracle_nt);
  take(vm, "oracle.h", c.oracle_h);
  take(vm, "oracle.seed", c.oracle_seed);
  take(vm, "eval.samples", c.eval_samples);
  take(vm, "eval.seed", c.eval_seed);
  take(vm, "eval.pdf_points", c.pdf_points);
  take(vm, "compare.mean_tol", c.mean_tol);
  take(vm, "compare.std_tol", c.std_tol);
  take(vm, "compare.ks_tol", c.ks_tol);
  take(vm, "output.dir", c.out_dir);

  const bool points = vm.count("probe.points") > 0;
  const bool axes = vm.count("probe.axis0") + vm.count("probe.axis1") > 0;
  if (points && axes) throw ConfigError("config: give either probe.points or probe.axis0/axis1, not both");
  if (points) {
    c.probes = parse_probe_points(vm["probe.points"].as<std::string>());
  } else if (axes) {
    if (!vm.count("probe.axis0") || !vm.count("probe.axis1")) {
      throw ConfigError("config: probe.axis0 and probe.axis1 must be given together");
    }
    c.probes = grid(parse_axis(vm["probe.axis0"].as<std::string>()), parse_axis(vm["probe.axis1"].as<std::string>()));
  } else {
    c.probes = default_probes(c.tag);
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_text(const RunConfig& c, bool with_output) {
  const ProblemSpec pb = c.problem();
  std::ostringstream o;
  o << "problem.tag = " << to_string(c.tag) << "\n";
  o << "problem.d = " << pb.d << "\n";
  o << "problem.constraint = " << to_string(pb.constraint) << "\n";
  o << "problem.loss = " << to_string(pb.loss) << "\n";
  if (pb.transient()) o << "problem.lambda_ic = " << format_double(pb.weights.lambda_ic) << "\n";
  o << "problem.lambda_bc = " << format_double(pb.weights.lambda_bc) << "\n";
  o << "net.layers = " << c.net_layers << "\n";
  o << "net.width = " << c.net_width << "\n";
  o << "net.block = " << c.net_block << "\n";
  o << "net.activation = tanh\n";
  o << "adam.lr = " << format_double(c.adam.lr) << "\n";
  o << "adam.beta1 = " << format_double(c.adam.beta1) << "\n";
  o << "adam.beta2 = " << format_double(c.adam.beta2) << "\n";
  o << "adam.eps = " << format_double(c.adam.eps) << "\n";
  o << "adam.lr_final = " << format_double(c.lr_final) << "\n";
  o << "adam.decay_iterations = " << c.decay_iterations << "\n";
  o << "train.batch = " << c.batch << "\n";
  o << "train.iterations = " << c.iterations << "\n";
  o << "train.seed = " << c.train_seed << "\n";
  o << "train.checkpoint_every = " << c.checkpoint_every << "\n";
  o << "train.log_every = " << c.log_every << "\n";
  o << "oracle.samples = " << c.oracle_samples << "\n";
  o << "oracle.nx = " << c.oracle_nx << "\n";
  o << "oracle.nt = " << c.oracle_nt << "\n";
  o << "oracle.h = " << format_double(c.oracle_h) << "\n";
  o << "oracle.seed = " << c.oracle_seed << "\n";
  o << "probe.points = ";
  for (std::size_t q = 0; q < c.probes.size(); ++q) {
    o << (q ? "; " : "") << format_double(c.probes[q][0]) << "," << format_double(c.probes[q][1]);
  }
  o << "\n";
  o << "eval.samples = " << c.eval_samples << "\n";
  o << "eval.seed = " << c.eval_seed << "\n";
  o << "eval.pdf_points = " << c.pdf_points << "\n";
  o << "compare.mean_tol = " << format_double(c.mean_tol) << "\n";
  o << "compare.std_tol = " << format_double(c.std_tol) << "\n";
  o << "compare.ks_tol = " << format_double(c.ks_tol) << "\n";
  if (with_output) o << "output.dir = " << c.out_dir << "\n";
  return o.str();
}

}  // namespace rpde
