#include "bdss/runconfig.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "bdss/errors.hpp"

namespace bdss {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long v = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw config_error("config key '" + key + "': expected an integer, got '" + value + "'");
  }
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw config_error("config key '" + key + "': expected a number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw config_error("config key '" + key + "': expected true/false, got '" + value + "'");
}

std::string format_real(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

RunConfig RunConfig::load(const std::string& path) {
  RunConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw config_error(path + ": cannot open config file");
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw config_error(path + ":" + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw config_error(path + ":" + std::to_string(lineno) + ": empty key or value");
    cfg.set(section.empty() ? key : section + "." + key, value);
  }
  return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "seed") {
    seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "threads") {
    threads = static_cast<int>(parse_int(key, value));
  } else if (key == "speckle.looks") {
    const auto colon = value.find(':');
    if (colon == std::string::npos) {
      looks_min = looks_max = parse_real(key, value);
    } else {
      looks_min = parse_real(key, value.substr(0, colon));
      looks_max = parse_real(key, value.substr(colon + 1));
    }
  } else if (key == "model.scale_factor") {
    scale_factor = static_cast<int>(parse_int(key, value));
  } else if (key == "train.mode") {
    if (value != "self_supervised" && value != "supervised")
      throw config_error("config key 'train.mode': expected self_supervised or supervised, got '" +
                         value + "'");
    mode = value;
  } else if (key == "train.lr0") {
    lr0 = parse_real(key, value);
  } else if (key == "train.halve_every") {
    halve_every = static_cast<int>(parse_int(key, value));
  } else if (key == "train.epochs") {
    epochs = static_cast<int>(parse_int(key, value));
  } else if (key == "train.batch") {
    batch = static_cast<int>(parse_int(key, value));
  } else if (key == "train.patch") {
    patch = static_cast<int>(parse_int(key, value));
  } else if (key == "train.beta1") {
    beta1 = parse_real(key, value);
  } else if (key == "train.beta2") {
    beta2 = parse_real(key, value);
  } else if (key == "train.eps") {
    eps = parse_real(key, value);
  } else if (key == "train.checkpoint_every") {
    checkpoint_every = static_cast<int>(parse_int(key, value));
  } else if (key == "data.stride") {
    stride = static_cast<int>(parse_int(key, value));
  } else if (key == "data.sar_like") {
    sar_like = parse_bool(key, value);
  } else if (key == "data.target_histogram") {
    target_histogram = value;
  } else if (key == "data.fresh_noise") {
    fresh_noise = parse_bool(key, value);
  } else if (key == "despeckle.tile") {
    tile = static_cast<int>(parse_int(key, value));
  } else {
    throw config_error("unknown config key '" + key + "'");
  }
}

void RunConfig::validate() const {
  if (threads < 1) throw config_error("threads must be >= 1");
  if (looks_min < 1.0 || looks_max < looks_min)
    throw config_error("speckle.looks must satisfy 1 <= Lmin <= Lmax");
  if (scale_factor < 1) throw config_error("model.scale_factor must be >= 1");
  if (lr0 <= 0 || halve_every < 1 || epochs < 1 || batch < 1 || patch < 1 || stride < 1 ||
      tile < 1 || beta1 <= 0 || beta2 <= 0 || eps <= 0)
    throw config_error("train/data/despeckle settings must be positive");
}

std::string RunConfig::echo() const {
  std::ostringstream out;
  out << "seed = " << seed << "\n";
  out << "threads = " << threads << "\n";
  out << "\n[data]\n";
  out << "fresh_noise = " << (fresh_noise ? "true" : "false") << "\n";
  out << "sar_like = " << (sar_like ? "true" : "false") << "\n";
  out << "stride = " << stride << "\n";
  if (!target_histogram.empty()) out << "target_histogram = " << target_histogram << "\n";
  out << "\n[despeckle]\n";
  out << "tile = " << tile << "\n";
  out << "\n[model]\n";
  out << "scale_factor = " << scale_factor << "\n";
  out << "\n[speckle]\n";
  if (looks_min == looks_max)
    out << "looks = " << format_real(looks_min) << "\n";
  else
    out << "looks = " << format_real(looks_min) << ":" << format_real(looks_max) << "\n";
  out << "\n[train]\n";
  out << "batch = " << batch << "\n";
  out << "beta1 = " << format_real(beta1) << "\n";
  out << "beta2 = " << format_real(beta2) << "\n";
  out << "checkpoint_every = " << checkpoint_every << "\n";
  out << "epochs = " << epochs << "\n";
  out << "eps = " << format_real(eps) << "\n";
  out << "halve_every = " << halve_every << "\n";
  out << "lr0 = " << format_real(lr0) << "\n";
  out << "mode = " << mode << "\n";
  out << "patch = " << patch << "\n";
  return out.str();
}

void RunConfig::echo_to(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  const std::string text = echo();
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error(path + ": write failed");
}

SpeckleSpec RunConfig::speckle_spec() const {
  return looks_min == looks_max ? SpeckleSpec::fixed(looks_min, seed)
                                : SpeckleSpec::interval(looks_min, looks_max, seed);
}

ModelConfig RunConfig::model_config() const { return ModelConfig::desk_scale(scale_factor); }

PairMode RunConfig::pair_mode() const {
  return mode == "supervised" ? PairMode::supervised : PairMode::self_supervised;
}

TrainConfig<float> RunConfig::train_config() const {
  TrainConfig<float> t;
  t.lr0 = static_cast<float>(lr0);
  t.halve_every = halve_every;
  t.epochs = epochs;
  t.batch_size = batch;
  t.patch = patch;
  t.beta1 = static_cast<float>(beta1);
  t.beta2 = static_cast<float>(beta2);
  t.eps = static_cast<float>(eps);
  t.mode = pair_mode();
  t.seed = seed;
  t.checkpoint_every = checkpoint_every;
  return t;
}

}  // namespace bdss
