#include "cif/preprocess.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "cif/errors.hpp"

namespace cif {

namespace {

// Median of the replicate-padded window [i - w/2, i + w - 1 - w/2] around i.
// Even w: mean of the two middle order statistics.
double window_median(const std::vector<double>& x, int64_t i, int window,
                     std::vector<double>& scratch) {
  const int64_t n = static_cast<int64_t>(x.size());
  const int64_t lo = i - window / 2;
  scratch.clear();
  for (int64_t d = 0; d < window; ++d) {
    const int64_t j = std::clamp<int64_t>(lo + d, 0, n - 1);
    scratch.push_back(x[static_cast<size_t>(j)]);
  }
  const auto mid = scratch.begin() + window / 2;
  std::nth_element(scratch.begin(), mid, scratch.end());
  if (window % 2) return *mid;
  const double hi = *mid;
  const double lo_val = *std::max_element(scratch.begin(), mid);
  return 0.5 * (lo_val + hi);
}

bool name_matches(const std::string& name, const std::string& needle) {
  auto lower = [](std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  };
  return lower(name).find(lower(needle)) != std::string::npos;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    while (!item.empty() && item.front() == ' ') item.erase(item.begin());
    while (!item.empty() && item.back() == ' ') item.pop_back();
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

std::vector<double> resample(const std::vector<double>& x, int fs_in,
                             int fs_out) {
  if (x.empty()) raise(errc::empty_signal, "resample: empty signal");
  if (fs_in <= 0 || fs_out <= 0)
    raise(errc::bad_config, "resample: rates must be positive");
  if (fs_in == fs_out) return x;

  const int64_t len = static_cast<int64_t>(x.size());
  // round-half-up(len * fs_out / fs_in) in exact integer arithmetic
  const int64_t n_out = (2 * len * fs_out + fs_in) / (2 * fs_in);
  std::vector<double> y(static_cast<size_t>(n_out));
  for (int64_t i = 0; i < n_out; ++i) {
    const double src = static_cast<double>(i) * fs_in / fs_out;
    const auto i0 = static_cast<int64_t>(std::floor(src));
    if (i0 >= len - 1) {
      y[static_cast<size_t>(i)] = x.back();  // edge hold at tail
      continue;
    }
    const double frac = src - static_cast<double>(i0);
    y[static_cast<size_t>(i)] =
        x[static_cast<size_t>(i0)] * (1.0 - frac) +
        x[static_cast<size_t>(i0) + 1] * frac;
  }
  return y;
}

std::vector<double> median_filter_serial(const std::vector<double>& x,
                                         int window) {
  if (window <= 0) raise(errc::bad_config, "median_filter: window must be positive");
  const int64_t n = static_cast<int64_t>(x.size());
  std::vector<double> y(x.size());
  std::vector<double> scratch;
  scratch.reserve(static_cast<size_t>(window));
  for (int64_t i = 0; i < n; ++i)
    y[static_cast<size_t>(i)] = window_median(x, i, window, scratch);
  return y;
}

std::vector<double> median_filter(const std::vector<double>& x, int window) {
  if (window <= 0) raise(errc::bad_config, "median_filter: window must be positive");
  const int64_t n = static_cast<int64_t>(x.size());
  std::vector<double> y(x.size());
#pragma omp parallel
  {
    std::vector<double> scratch;
    scratch.reserve(static_cast<size_t>(window));
#pragma omp for schedule(static)
    for (int64_t i = 0; i < n; ++i)
      y[static_cast<size_t>(i)] = window_median(x, i, window, scratch);
  }
  return y;
}

std::vector<double> remove_baseline(const std::vector<double>& x) {
  if (x.size() < 150)
    raise(errc::too_short, "remove_baseline: need >= 150 samples, have " +
                               std::to_string(x.size()));
  const auto baseline = median_filter(median_filter(x, 50), 150);
  std::vector<double> y(x.size());
  for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] - baseline[i];
  return y;
}

std::vector<double> normalize_windows(std::vector<double> x, int window) {
  if (window <= 0) raise(errc::bad_config, "normalize_windows: window must be positive");
  constexpr double eps = 1e-8;
  for (size_t start = 0; start < x.size(); start += static_cast<size_t>(window)) {
    const size_t stop = std::min(x.size(), start + static_cast<size_t>(window));
    double peak = 0.0;
    for (size_t i = start; i < stop; ++i) peak = std::max(peak, std::fabs(x[i]));
    if (peak < eps) continue;
    for (size_t i = start; i < stop; ++i) x[i] /= peak;
  }
  return x;
}

CanonicalRecord compensate_lag(CanonicalRecord rec,
                               const std::map<std::string, double>& lag_ms) {
  rec.lag_applied.assign(rec.n_channels(), 0);
  const int64_t n = static_cast<int64_t>(rec.n_samples());
  for (size_t k = 0; k < rec.n_channels(); ++k) {
    const auto it = lag_ms.find(rec.channels[k].name);
    if (it == lag_ms.end()) continue;
    const auto shift =
        static_cast<int64_t>(std::llround(it->second * rec.fs / 1000.0));
    if (shift == 0) continue;
    if (std::llabs(shift) >= n)
      raise(errc::shift_too_large,
            "compensate_lag: " + rec.channels[k].name + " shift " +
                std::to_string(shift) + " >= record length " + std::to_string(n));
    auto& sig = rec.signals[k];
    std::vector<double> shifted(sig.size(), 0.0);
    if (shift > 0) {  // channel lags behind: advance it
      for (int64_t i = 0; i + shift < n; ++i)
        shifted[static_cast<size_t>(i)] = sig[static_cast<size_t>(i + shift)];
    } else {
      for (int64_t i = -shift; i < n; ++i)
        shifted[static_cast<size_t>(i)] = sig[static_cast<size_t>(i + shift)];
    }
    sig = std::move(shifted);
    rec.lag_applied[k] = static_cast<int>(shift);
  }
  return rec;
}

CanonicalRecord preprocess_record(const Record& rec,
                                  const PreprocessConfig& cfg) {
  if (rec.fs <= 0) raise(errc::bad_header, "preprocess: fs must be positive");
  if (rec.channels.empty()) raise(errc::bad_header, "preprocess: no channels");

  CanonicalRecord out;
  out.record_id = rec.record_id;
  out.fs = cfg.target_fs;
  out.channels = rec.channels;
  out.signals.reserve(rec.n_channels());

  const auto explicit_names = split_csv(cfg.baseline_channels);
  auto wants_baseline = [&](const std::string& name) {
    if (cfg.baseline_channels == "none") return false;
    if (cfg.baseline_channels == "auto") return name_matches(name, "ecg");
    return std::find(explicit_names.begin(), explicit_names.end(), name) !=
           explicit_names.end();
  };

  for (size_t k = 0; k < rec.n_channels(); ++k) {
    auto sig = resample(rec.signals[k], rec.fs, cfg.target_fs);
    if (wants_baseline(rec.channels[k].name)) sig = remove_baseline(sig);
    out.signals.push_back(normalize_windows(std::move(sig), cfg.normalize_window));
  }

  auto lags = cfg.lag_ms;
  if (cfg.profile == "challenge")
    for (const auto& ch : rec.channels)
      if (!lags.count(ch.name) &&
          (name_matches(ch.name, "bp") || name_matches(ch.name, "abp")))
        lags[ch.name] = 200.0;
  return compensate_lag(std::move(out), lags);
}

CanonicalRecord as_canonical(const Record& rec,
                             const std::vector<int>& lag_applied) {
  if (rec.fs != kCanonicalFs)
    raise(errc::bad_header, "record " + rec.record_id + " is at " +
                                std::to_string(rec.fs) + " Hz, expected " +
                                std::to_string(kCanonicalFs));
  CanonicalRecord out;
  out.record_id = rec.record_id;
  out.fs = rec.fs;
  out.channels = rec.channels;
  out.signals = rec.signals;
  out.lag_applied = lag_applied;
  if (out.lag_applied.empty()) out.lag_applied.assign(rec.n_channels(), 0);
  for (size_t k = 1; k < out.signals.size(); ++k)
    if (out.signals[k].size() != out.signals[0].size())
      raise(errc::length_mismatch, "record " + rec.record_id +
                                       ": unequal channel lengths");
  return out;
}

}  // namespace cif
