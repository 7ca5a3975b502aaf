#include "rpde/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "rpde/errors.hpp"

namespace rpde {

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write checkpoint '" + path + "'");
  const std::string cfg = config_text(ckpt.config, false);
  std::size_t lines = 0;
  for (char ch : cfg) lines += ch == '\n';
  out << "RPDE-CHECKPOINT " << kCheckpointVersion << "\n";
  out << "iteration " << ckpt.iteration << "\n";
  out << "param_count " << ckpt.params.size() << "\n";
  out << "train_seed " << ckpt.config.train_seed << "\n";
  out << "loss_tail " << ckpt.loss_tail.size() << "\n";
  for (double l : ckpt.loss_tail) out << format_double(l) << "\n";
  out << "config_lines " << lines << "\n" << cfg << "end_header\n";
  write_f64_block(out, ckpt.params.flat());
  write_adam_state(out, ckpt.adam);
  if (!out) throw UsageError("error while writing checkpoint '" + path + "'");
}

namespace {

[[noreturn]] void corrupt(const std::string& path, const std::string& what) {
  throw ConfigError("checkpoint '" + path + "': " + what);
}

template <class T>
T header_field(std::istream& in, const std::string& path, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) corrupt(path, "header ends before '" + key + "'");
  std::istringstream ls(line);
  std::string name;
  T value{};
  if (!(ls >> name >> value) || name != key) corrupt(path, "expected '" + key + "', got '" + line + "'");
  std::string rest;
  if (ls >> rest) corrupt(path, "trailing text on line '" + line + "'");
  return value;
}

}  // namespace

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
  std::string magic;
  if (!std::getline(in, magic) || magic.rfind("RPDE-CHECKPOINT ", 0) != 0) corrupt(path, "not a checkpoint file");
  const std::string version = magic.substr(16);
  if (version != std::to_string(kCheckpointVersion)) {
    corrupt(path, "format version " + version + " is not supported (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint ck;
  ck.iteration = header_field<std::uint64_t>(in, path, "iteration");
  const auto count = header_field<std::size_t>(in, path, "param_count");
  const auto seed = header_field<std::uint64_t>(in, path, "train_seed");
  const auto tail = header_field<std::size_t>(in, path, "loss_tail");
  if (tail > kLossTail) corrupt(path, "loss tail too long");
  std::string line;
  for (std::size_t k = 0; k < tail; ++k) {
    if (!std::getline(in, line)) corrupt(path, "truncated loss tail");
    try {
      std::size_t used = 0;
      ck.loss_tail.push_back(std::stod(line, &used));
      if (used != line.size()) throw std::invalid_argument(line);
    } catch (const std::exception&) {
      corrupt(path, "bad loss value '" + line + "'");
    }
  }
  const auto lines = header_field<std::size_t>(in, path, "config_lines");
  std::string cfg;
  for (std::size_t k = 0; k < lines; ++k) {
    if (!std::getline(in, line)) corrupt(path, "truncated config echo");
    cfg += line + "\n";
  }
  if (!std::getline(in, line) || line != "end_header") corrupt(path, "missing end_header");
  try {
    ck.config = parse_config_text(cfg);
  } catch (const ConfigError& e) {
    corrupt(path, std::string("config echo: ") + e.what());
  }
  if (ck.config.train_seed != seed) corrupt(path, "train_seed disagrees with the config echo");
  ck.params = NetworkParams(ck.config.network(ck.config.problem()));
  if (ck.params.size() != count) {
    corrupt(path, "param_count " + std::to_string(count) + " does not match the network (" +
                      std::to_string(ck.params.size()) + ")");
  }
  try {
    read_f64_block(in, ck.params.flat());
    ck.adam.config = ck.config.adam;
    read_adam_state(in, ck.adam, count);
  } catch (const std::exception& e) {
    corrupt(path, std::string("payload: ") + e.what());
  }
  if (in.peek() != std::char_traits<char>::eof()) corrupt(path, "trailing bytes after payload");
  return ck;
}

}  // namespace rpde
