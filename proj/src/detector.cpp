#include "cif/detector.hpp"

#include <algorithm>

#include "cif/errors.hpp"

namespace cif {

namespace {

void check_record(const CanonicalRecord& rec, const CifModel& m) {
  if (static_cast<int>(rec.n_channels()) != m.arch.channels)
    raise(errc::shape_mismatch,
          "record " + rec.record_id + " has " +
              std::to_string(rec.n_channels()) + " channels, model expects " +
              std::to_string(m.arch.channels));
  if (static_cast<int>(rec.n_samples()) < m.arch.window)
    raise(errc::record_too_short,
          "record " + rec.record_id + ": " + std::to_string(rec.n_samples()) +
              " samples < window " + std::to_string(m.arch.window));
}

}  // namespace

std::vector<uint8_t> infer_track_serial(const CanonicalRecord& rec,
                                        const CifModel& m, double threshold) {
  check_record(rec, m);
  const int M = m.arch.window;
  const auto n = static_cast<int64_t>(rec.n_samples());
  const int64_t n_windows = n - M + 1;
  std::vector<uint8_t> track(static_cast<size_t>(n), 0);
  std::vector<const double*> base(rec.n_channels());
  for (size_t k = 0; k < rec.n_channels(); ++k) base[k] = rec.signals[k].data();

  Workspace ws(m.arch);
  std::vector<const double*> chans(rec.n_channels());
  for (int64_t s = 0; s < n_windows; ++s) {
    for (size_t k = 0; k < rec.n_channels(); ++k) chans[k] = base[k] + s;
    const double p = forward(chans.data(), m, ws);
    track[static_cast<size_t>(s + M / 2)] = p >= threshold ? 1 : 0;
  }
  return track;
}

std::vector<uint8_t> infer_track(const CanonicalRecord& rec, const CifModel& m,
                                 double threshold) {
  check_record(rec, m);
  const int M = m.arch.window;
  const auto n = static_cast<int64_t>(rec.n_samples());
  const int64_t n_windows = n - M + 1;
  std::vector<uint8_t> track(static_cast<size_t>(n), 0);
  std::vector<const double*> base(rec.n_channels());
  for (size_t k = 0; k < rec.n_channels(); ++k) base[k] = rec.signals[k].data();

#pragma omp parallel
  {
    Workspace ws(m.arch);
    std::vector<const double*> chans(rec.n_channels());
#pragma omp for schedule(static)
    for (int64_t s = 0; s < n_windows; ++s) {
      for (size_t k = 0; k < rec.n_channels(); ++k) chans[k] = base[k] + s;
      const double p = forward(chans.data(), m, ws);
      track[static_cast<size_t>(s + M / 2)] = p >= threshold ? 1 : 0;
    }
  }
  return track;
}

std::vector<uint8_t> fill_short_gaps(std::vector<uint8_t> track, int min_gap) {
  const auto n = static_cast<int64_t>(track.size());
  int64_t i = 0;
  while (i < n && track[static_cast<size_t>(i)] == 0) ++i;  // skip leading 0s
  while (i < n) {
    while (i < n && track[static_cast<size_t>(i)] == 1) ++i;
    const int64_t gap_start = i;
    while (i < n && track[static_cast<size_t>(i)] == 0) ++i;
    if (i < n && i - gap_start < min_gap)  // interior gap, bounded by 1s
      std::fill(track.begin() + gap_start, track.begin() + i, uint8_t{1});
  }
  return track;
}

std::vector<uint8_t> drop_short_pulses(std::vector<uint8_t> track,
                                       int min_pulse) {
  const auto n = static_cast<int64_t>(track.size());
  int64_t i = 0;
  while (i < n) {
    if (track[static_cast<size_t>(i)] == 0) {
      ++i;
      continue;
    }
    const int64_t run_start = i;
    while (i < n && track[static_cast<size_t>(i)] == 1) ++i;
    if (i - run_start < min_pulse)
      std::fill(track.begin() + run_start, track.begin() + i, uint8_t{0});
  }
  return track;
}

std::vector<int64_t> extract_beats(const std::vector<uint8_t>& track) {
  std::vector<int64_t> beats;
  const auto n = static_cast<int64_t>(track.size());
  int64_t i = 0;
  while (i < n) {
    if (track[static_cast<size_t>(i)] == 0) {
      ++i;
      continue;
    }
    const int64_t a = i;
    while (i < n && track[static_cast<size_t>(i)] == 1) ++i;
    beats.push_back((a + (i - 1)) / 2);
  }
  return beats;
}

DetectionResult detect(const CanonicalRecord& rec, const CifModel& m,
                       const DetectConfig& cfg) {
  DetectionResult res;
  res.record_id = rec.record_id;
  auto track = infer_track(rec, m, cfg.threshold);
  track = fill_short_gaps(std::move(track), cfg.min_gap);
  track = drop_short_pulses(std::move(track), cfg.min_pulse);
  res.beat_samples = extract_beats(track);
  res.pulse_track = std::move(track);
  return res;
}

}  // namespace cif
