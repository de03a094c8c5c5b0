#ifndef CIF_DETECTOR_HPP
#define CIF_DETECTOR_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cif/model.hpp"
#include "cif/preprocess.hpp"

namespace cif {

struct DetectConfig {
  double threshold = 0.5;
  int min_gap = 3;     // inverted pulses shorter than this are filled
  int min_pulse = 50;  // pulses shorter than this are dropped
};

struct DetectionResult {
  std::string record_id;
  std::vector<int64_t> beat_samples;  // strictly increasing midpoints
  std::vector<uint8_t> pulse_track;   // cleaned track, kept for plotting
};

/// Stride-1 sliding-window inference: position start+125 gets
/// [forward(window) >= threshold]; the first/last 125 samples stay 0.
/// The parallel version is the production path; the serial one is the
/// reference the tests compare against.
std::vector<uint8_t> infer_track(const CanonicalRecord& rec, const CifModel& m,
                                 double threshold = 0.5);
std::vector<uint8_t> infer_track_serial(const CanonicalRecord& rec,
                                        const CifModel& m,
                                        double threshold = 0.5);

/// Flips interior 0-runs shorter than min_gap to 1. Leading/trailing
/// 0-runs are never filled.
std::vector<uint8_t> fill_short_gaps(std::vector<uint8_t> track,
                                     int min_gap = 3);

/// Flips 1-runs shorter than min_pulse to 0.
std::vector<uint8_t> drop_short_pulses(std::vector<uint8_t> track,
                                       int min_pulse = 50);

/// Midpoint floor((a + b) / 2) of each maximal 1-run [a, b].
std::vector<int64_t> extract_beats(const std::vector<uint8_t>& track);

/// infer_track -> fill_short_gaps -> drop_short_pulses -> extract_beats.
DetectionResult detect(const CanonicalRecord& rec, const CifModel& m,
                       const DetectConfig& cfg = {});

}  // namespace cif

#endif
