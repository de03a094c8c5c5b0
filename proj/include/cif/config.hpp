#ifndef CIF_CONFIG_HPP
#define CIF_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cif/crossval.hpp"
#include "cif/dataset.hpp"
#include "cif/detector.hpp"
#include "cif/model.hpp"
#include "cif/preprocess.hpp"
#include "cif/synth.hpp"

namespace cif {

/// Flat "section.key = value" plain-text configuration. Every key has a
/// documented default; unknown keys are rejected (the per-channel
/// "preprocess.lag.<NAME>_ms" family is the one open prefix). The CIF_SEED
/// environment variable, when set, overrides every *.seed key.
class Config {
public:
  Config();  // defaults

  void load_file(const std::string& path);
  void set(const std::string& key, const std::string& value);
  void apply_env_seed();

  const std::string& get(const std::string& key) const;
  int64_t get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  /// Full "key = value" dump in sorted key order.
  std::string dump() const;
  void write(const std::string& path) const;

  // typed views
  PreprocessConfig preprocess() const;
  DatasetConfig dataset() const;
  int dataset_ann_fs() const;  // 0 = annotations already at 250 Hz
  CifArchitecture arch() const;
  TrainConfig train() const;
  DetectConfig detect() const;
  SynthConfig synth() const;
  int synth_count() const;
  CvConfig cv() const;
  std::vector<CifArchitecture> cv_grid() const;
  int score_fs() const;
  int score_tol_ms() const;
  std::string score_format() const;

private:
  std::map<std::string, std::string> values_;
};

}  // namespace cif

#endif
