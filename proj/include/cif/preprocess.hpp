#ifndef CIF_PREPROCESS_HPP
#define CIF_PREPROCESS_HPP

#include <map>
#include <string>
#include <vector>

#include "cif/record.hpp"

namespace cif {

inline constexpr int kCanonicalFs = 250;

/// Detector-ready form of a record: 250 Hz, baseline-free on ECG-like
/// channels, per-window range-normalized to [-1, 1], channels time-aligned.
struct CanonicalRecord {
  std::string record_id;
  int fs = kCanonicalFs;
  std::vector<ChannelMeta> channels;
  std::vector<std::vector<double>> signals;
  std::vector<int> lag_applied;  // per-channel shift in samples

  size_t n_channels() const { return channels.size(); }
  size_t n_samples() const { return signals.empty() ? 0 : signals[0].size(); }
};

struct PreprocessConfig {
  int target_fs = kCanonicalFs;
  // "auto" = channels whose name contains "ecg" (case-insensitive),
  // "none" = skip baseline removal, otherwise comma-separated exact names.
  std::string baseline_channels = "auto";
  int normalize_window = 500;
  std::map<std::string, double> lag_ms;  // channel name -> lag (positive = advance)
  // "challenge" advances channels whose name contains "bp"/"abp" by 200 ms
  // unless an explicit lag_ms entry overrides them.
  std::string profile = "none";
};

/// Length-preserving linear resampling. Output length round(len*fs_out/fs_in);
/// tail positions past the last input sample hold its value.
std::vector<double> resample(const std::vector<double>& x, int fs_in,
                             int fs_out = kCanonicalFs);

/// Running median with replicate padding; even windows average the two
/// middle values. The parallel version is the production path, the serial
/// one is the reference the tests compare against.
std::vector<double> median_filter(const std::vector<double>& x, int window);
std::vector<double> median_filter_serial(const std::vector<double>& x,
                                         int window);

/// Baseline = median cascade (window 50, then 150); returns x - baseline.
std::vector<double> remove_baseline(const std::vector<double>& x);

/// Each non-overlapping block divided by its max |value|; blocks with
/// max below 1e-8 pass through unchanged. Final partial block treated same.
std::vector<double> normalize_windows(std::vector<double> x, int window = 500);

/// Shift each named channel by round(ms*fs/1000) samples (positive lag
/// advances the channel); vacated samples are zero-filled.
CanonicalRecord compensate_lag(CanonicalRecord rec,
                               const std::map<std::string, double>& lag_ms);

/// Full pipeline: resample -> remove_baseline (selected channels) ->
/// normalize_windows (all channels) -> compensate_lag.
CanonicalRecord preprocess_record(const Record& rec,
                                  const PreprocessConfig& cfg = {});

/// Wrap a stored 250 Hz record (e.g. written by preprocessing) without
/// re-running the pipeline. Validates rate and per-channel lengths.
CanonicalRecord as_canonical(const Record& rec,
                             const std::vector<int>& lag_applied = {});

}  // namespace cif

#endif
