#include "cif/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cif/errors.hpp"

namespace cif {

namespace {

const std::map<std::string, std::string>& default_values() {
  static const std::map<std::string, std::string> defaults = {
      {"preprocess.resample.target_fs", "250"},
      {"preprocess.baseline.channels", "auto"},
      {"preprocess.normalize.window", "500"},
      {"preprocess.profile", "none"},  // none | challenge
      {"dataset.stride", "101"},
      {"dataset.augment", "true"},
      {"dataset.seed", "1"},
      {"dataset.ann_fs", "0"},
      {"train.learning_rate", "0.05"},
      {"train.epochs", "30"},
      {"train.batch_size", "32"},
      {"train.seed", "1"},
      {"train.init_scale", "0.1"},
      {"train.conv_bias", "true"},
      {"train.filters", "2"},
      {"train.filter_len", "20"},
      {"train.hidden", "0"},
      {"detect.threshold", "0.5"},
      {"detect.min_gap", "3"},
      {"detect.min_pulse", "50"},
      {"detect.emit_plot_data", "false"},
      {"score.fs", "250"},
      {"score.tol_ms", "150"},
      {"score.format", "tsv"},
      {"synth.count", "20"},
      {"synth.duration_s", "300"},
      {"synth.fs", "250"},
      {"synth.rr_mean_ms", "800"},
      {"synth.rr_jitter_ms", "80"},
      {"synth.noise_std", "0.02"},
      {"synth.bp_lag_ms", "200"},
      {"synth.drift_amp", "0.3"},
      {"synth.drift_period_s", "4"},
      {"synth.dropout", ""},  // "CHANNEL:start_s:end_s;..."
      {"synth.seed", "1"},
      {"cv.k", "5"},
      {"cv.seed", "1"},
      {"cv.grid.filters", "2"},
      {"cv.grid.filter_len", "20"},
      {"cv.grid.hidden", "0"},
  };
  return defaults;
}

bool known_key(const std::string& key) {
  if (default_values().count(key)) return true;
  // open prefix for per-channel lags, e.g. preprocess.lag.BP_ms
  return key.rfind("preprocess.lag.", 0) == 0 && key.size() > 18 &&
         key.rfind("_ms") == key.size() - 3;
}

std::string trim(std::string s) {
  const auto notspace = [](unsigned char c) { return !std::isspace(c); };
  while (!s.empty() && !notspace(static_cast<unsigned char>(s.front())))
    s.erase(s.begin());
  while (!s.empty() && !notspace(static_cast<unsigned char>(s.back())))
    s.pop_back();
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

Config::Config() : values_(default_values()) {}

void Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(errc::bad_config, "cannot open config: " + path);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      raise(errc::bad_config,
            path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void Config::set(const std::string& key, const std::string& value) {
  if (!known_key(key)) raise(errc::bad_config, "unknown config key: " + key);
  values_[key] = value;
}

void Config::apply_env_seed() {
  const char* env = std::getenv("CIF_SEED");
  if (!env) return;
  const std::string seed = trim(env);
  if (seed.empty()) return;
  for (auto& [key, value] : values_)
    if (key.size() > 5 && key.rfind(".seed") == key.size() - 5) value = seed;
}

const std::string& Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) raise(errc::bad_config, "unknown config key: " + key);
  return it->second;
}

int64_t Config::get_int(const std::string& key) const {
  try {
    return std::stoll(get(key));
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    raise(errc::bad_config, key + ": expected integer, got '" + get(key) + "'");
  }
}

double Config::get_double(const std::string& key) const {
  try {
    return std::stod(get(key));
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    raise(errc::bad_config, key + ": expected number, got '" + get(key) + "'");
  }
}

bool Config::get_bool(const std::string& key) const {
  const auto& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  raise(errc::bad_config, key + ": expected boolean, got '" + v + "'");
}

std::string Config::dump() const {
  std::string out;
  for (const auto& [key, value] : values_)
    out += key + " = " + value + "\n";
  return out;
}

void Config::write(const std::string& path) const {
  std::ofstream out(path);
  out << dump();
  if (!out) raise(errc::bad_config, "cannot write config: " + path);
}

PreprocessConfig Config::preprocess() const {
  PreprocessConfig cfg;
  cfg.target_fs = static_cast<int>(get_int("preprocess.resample.target_fs"));
  cfg.baseline_channels = get("preprocess.baseline.channels");
  cfg.normalize_window = static_cast<int>(get_int("preprocess.normalize.window"));
  cfg.profile = get("preprocess.profile");
  for (const auto& [key, value] : values_) {
    if (key.rfind("preprocess.lag.", 0) != 0) continue;
    const auto name = key.substr(15, key.size() - 15 - 3);
    cfg.lag_ms[name] = std::stod(value);
  }
  return cfg;
}

DatasetConfig Config::dataset() const {
  DatasetConfig cfg;
  cfg.stride = static_cast<int>(get_int("dataset.stride"));
  cfg.augment = get_bool("dataset.augment");
  cfg.seed = static_cast<uint64_t>(get_int("dataset.seed"));
  return cfg;
}

int Config::dataset_ann_fs() const {
  return static_cast<int>(get_int("dataset.ann_fs"));
}

CifArchitecture Config::arch() const {
  CifArchitecture arch;
  arch.filters = static_cast<int>(get_int("train.filters"));
  arch.filter_len = static_cast<int>(get_int("train.filter_len"));
  arch.hidden = static_cast<int>(get_int("train.hidden"));
  return arch;
}

TrainConfig Config::train() const {
  TrainConfig cfg;
  cfg.learning_rate = get_double("train.learning_rate");
  cfg.epochs = static_cast<int>(get_int("train.epochs"));
  cfg.batch_size = static_cast<int>(get_int("train.batch_size"));
  cfg.seed = static_cast<uint64_t>(get_int("train.seed"));
  cfg.init_scale = get_double("train.init_scale");
  cfg.conv_bias = get_bool("train.conv_bias");
  return cfg;
}

DetectConfig Config::detect() const {
  DetectConfig cfg;
  cfg.threshold = get_double("detect.threshold");
  cfg.min_gap = static_cast<int>(get_int("detect.min_gap"));
  cfg.min_pulse = static_cast<int>(get_int("detect.min_pulse"));
  return cfg;
}

SynthConfig Config::synth() const {
  SynthConfig cfg;
  cfg.duration_s = get_double("synth.duration_s");
  cfg.fs = static_cast<int>(get_int("synth.fs"));
  cfg.rr_mean_ms = get_double("synth.rr_mean_ms");
  cfg.rr_jitter_ms = get_double("synth.rr_jitter_ms");
  cfg.bp_lag_ms = get_double("synth.bp_lag_ms");
  cfg.drift_amp = get_double("synth.drift_amp");
  cfg.drift_period_s = get_double("synth.drift_period_s");
  cfg.seed = static_cast<uint64_t>(get_int("synth.seed"));
  const double noise = get_double("synth.noise_std");
  for (auto& ch : cfg.channels) ch.noise_std = noise;

  for (const auto& item : split(get("synth.dropout"), ';')) {
    const auto parts = split(item, ':');
    if (parts.size() != 3)
      raise(errc::bad_config, "synth.dropout: expected CHANNEL:start_s:end_s");
    DropoutEpisode d;
    d.channel = -1;
    for (size_t k = 0; k < cfg.channels.size(); ++k)
      if (cfg.channels[k].name == parts[0]) d.channel = static_cast<int>(k);
    if (d.channel < 0)
      raise(errc::bad_config, "synth.dropout: unknown channel " + parts[0]);
    d.start_s = std::stod(parts[1]);
    d.end_s = std::stod(parts[2]);
    cfg.dropout.push_back(d);
  }
  return cfg;
}

int Config::synth_count() const {
  return static_cast<int>(get_int("synth.count"));
}

CvConfig Config::cv() const {
  CvConfig cfg;
  cfg.k = static_cast<int>(get_int("cv.k"));
  cfg.seed = static_cast<uint64_t>(get_int("cv.seed"));
  cfg.dataset = dataset();
  cfg.train = train();
  cfg.detect = detect();
  cfg.score_tol_ms = score_tol_ms();
  return cfg;
}

std::vector<CifArchitecture> Config::cv_grid() const {
  const auto ps = split(get("cv.grid.filters"), ',');
  const auto ls = split(get("cv.grid.filter_len"), ',');
  const auto hs = split(get("cv.grid.hidden"), ',');
  std::vector<CifArchitecture> grid;
  for (const auto& p : ps)
    for (const auto& l : ls)
      for (const auto& h : hs) {
        CifArchitecture arch;
        arch.filters = std::stoi(p);
        arch.filter_len = std::stoi(l);
        arch.hidden = std::stoi(h);
        arch.validate();
        grid.push_back(arch);
      }
  return grid;
}

int Config::score_fs() const { return static_cast<int>(get_int("score.fs")); }

int Config::score_tol_ms() const {
  return static_cast<int>(get_int("score.tol_ms"));
}

std::string Config::score_format() const { return get("score.format"); }

}  // namespace cif
