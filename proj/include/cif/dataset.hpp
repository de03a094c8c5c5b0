#ifndef CIF_DATASET_HPP
#define CIF_DATASET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cif/preprocess.hpp"
#include "cif/record.hpp"

namespace cif {

inline constexpr int kSnippetLen = 251;     // 1.004 s at 250 Hz
inline constexpr int kPulseHalfWidth = 37;  // 75-sample location pulse
inline constexpr int kTrainStride = 101;    // 251 - 150 overlap

/// Binary per-sample sequence; 1 inside any location pulse.
using PulseTrack = std::vector<uint8_t>;

struct LabeledSnippet {
  uint32_t record = 0;  // index into TrainingSet::record_ids
  int64_t start = 0;
  uint8_t label = 0;
  std::vector<uint8_t> mask;   // per-channel kept flag
  std::vector<float> window;   // K x 251 row-major
};

struct TrainingSet {
  int channels = 0;
  int window_len = kSnippetLen;
  uint64_t seed = 0;  // balancing seed actually used
  std::vector<std::string> record_ids;
  std::vector<LabeledSnippet> snippets;

  size_t count_label(uint8_t label) const;
};

struct DatasetConfig {
  int stride = kTrainStride;
  bool augment = true;
  uint64_t seed = 1;
};

/// Marks [tau - 37, tau + 37] per beat (clipped to the record), so each
/// isolated pulse spans 75 samples; nearby pulses merge.
PulseTrack build_pulse_track(const AnnotationSet& ann, size_t length);

/// Fixed windows starting at 0, `stride` apart; label is the track value at
/// the window's middle sample (0-based index 125 of 251).
std::vector<LabeledSnippet> extract_snippets(const CanonicalRecord& rec,
                                             const PulseTrack& track,
                                             int stride = kTrainStride,
                                             uint32_t record_index = 0);

/// After each snippet, appends K copies with all but one channel zeroed.
void augment_channel_dropout(std::vector<LabeledSnippet>& snippets,
                             int channels);

/// Removes seeded-random label-0 snippets until n0 <= n1; survivors keep
/// their original order.
TrainingSet balance_classes(TrainingSet set, uint64_t seed);

/// build_pulse_track + extract + (augment) + balance over a record corpus.
/// Annotations must already be at 250 Hz and inside each record.
TrainingSet build_training_set(const std::vector<CanonicalRecord>& records,
                               const std::vector<AnnotationSet>& annotations,
                               const DatasetConfig& cfg = {});

void save_training_set(const TrainingSet& set, const std::string& path);
TrainingSet load_training_set(const std::string& path);

}  // namespace cif

#endif
