#ifndef CIF_SYNTH_HPP
#define CIF_SYNTH_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cif/record.hpp"

namespace cif {

/// Deterministic generator of multimodal records with known beat locations.
/// Templates are fixed closed-form shapes, no physiological realism claimed:
/// the spike channel gets a Ricker wavelet (apex on the beat sample) plus a
/// slow drift sinusoid, the pressure channel a raised-cosine pulse delayed
/// by bp_lag_ms.

enum class ChannelShape { qrs_spike, bp_pulse };

struct SynthChannel {
  std::string name = "ECG";
  ChannelShape shape = ChannelShape::qrs_spike;
  double noise_std = 0.02;
};

struct DropoutEpisode {
  double start_s = 0.0;
  double end_s = 0.0;
  int channel = 0;
};

struct SynthConfig {
  double duration_s = 300.0;
  int fs = 250;
  double rr_mean_ms = 800.0;
  double rr_jitter_ms = 80.0;
  std::vector<SynthChannel> channels = {
      {"ECG", ChannelShape::qrs_spike, 0.02},
      {"BP", ChannelShape::bp_pulse, 0.02}};
  std::vector<DropoutEpisode> dropout;
  double bp_lag_ms = 200.0;
  double drift_amp = 0.3;      // spike-channel baseline wander
  double drift_period_s = 4.0;
  uint64_t seed = 1;

  void validate() const;
};

std::pair<Record, AnnotationSet> generate(const SynthConfig& cfg);

/// Writes `count` records (seed mixed per record) as header+payload files
/// plus annotation text (units: seconds) into out_dir.
void write_corpus(const SynthConfig& base, int count,
                  const std::string& out_dir);

}  // namespace cif

#endif
