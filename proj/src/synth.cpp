#include "cif/synth.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "cif/errors.hpp"
#include "cif/rng.hpp"

namespace fs = std::filesystem;

namespace cif {

void SynthConfig::validate() const {
  if (fs <= 0) raise(errc::bad_config, "synth: fs must be positive");
  if (channels.empty()) raise(errc::bad_config, "synth: need channels");
  if (rr_mean_ms <= 300.0)
    raise(errc::bad_config, "synth: rr_mean_ms must exceed 300 ms");
  if (rr_jitter_ms < 0.0 || rr_mean_ms - rr_jitter_ms <= 300.0)
    raise(errc::bad_config, "synth: jitter leaves gaps under 300 ms");
  if (duration_s * 1000.0 < 10.0 * rr_mean_ms)
    raise(errc::bad_config, "synth: duration too short for 10 beats");
  for (const auto& d : dropout)
    if (d.channel < 0 || d.channel >= static_cast<int>(channels.size()) ||
        d.end_s < d.start_s)
      raise(errc::bad_config, "synth: bad dropout episode");
}

namespace {

// Ricker wavelet: unit apex at t = 0, sign lobes either side.
double ricker(double t_s, double sigma_s) {
  const double q = t_s / sigma_s;
  return (1.0 - q * q) * std::exp(-0.5 * q * q);
}

// Raised cosine over [-width/2, width/2], unit apex at t = 0.
double raised_cosine(double t_s, double width_s) {
  if (t_s < -width_s / 2 || t_s > width_s / 2) return 0.0;
  constexpr double two_pi = 6.283185307179586476925286766559;
  return 0.5 * (1.0 + std::cos(two_pi * t_s / width_s));
}

}  // namespace

std::pair<Record, AnnotationSet> generate(const SynthConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<int64_t>(std::llround(cfg.duration_s * cfg.fs));
  const size_t K = cfg.channels.size();

  Rng rng(cfg.seed);

  // Beat sample indices from a jittered RR process, margins at both ends.
  std::vector<int64_t> beats;
  const double margin_ms = 500.0;
  int64_t tau = static_cast<int64_t>(
      std::llround((margin_ms + rng.uniform(0.0, cfg.rr_mean_ms)) / 1000.0 * cfg.fs));
  const int64_t last_ok =
      n - 1 - static_cast<int64_t>(std::llround(margin_ms / 1000.0 * cfg.fs));
  while (tau <= last_ok) {
    beats.push_back(tau);
    const double rr_ms =
        cfg.rr_mean_ms + rng.uniform(-cfg.rr_jitter_ms, cfg.rr_jitter_ms);
    tau += static_cast<int64_t>(std::llround(rr_ms / 1000.0 * cfg.fs));
  }

  Record rec;
  rec.record_id = "synth";
  rec.fs = cfg.fs;
  rec.signals.assign(K, std::vector<double>(static_cast<size_t>(n), 0.0));

  constexpr double spike_sigma_s = 0.010;  // ~20-sample motif at 250 Hz
  constexpr double spike_support_s = 0.045;
  constexpr double bp_width_s = 0.300;

  for (size_t k = 0; k < K; ++k) {
    const auto& ch = cfg.channels[k];
    ChannelMeta meta;
    meta.name = ch.name;
    meta.unit = ch.shape == ChannelShape::qrs_spike ? "mV" : "mmHg";
    rec.channels.push_back(meta);
    auto& sig = rec.signals[k];

    const double delay_s =
        ch.shape == ChannelShape::bp_pulse ? cfg.bp_lag_ms / 1000.0 : 0.0;
    const double half_s =
        ch.shape == ChannelShape::qrs_spike ? spike_support_s : bp_width_s / 2;
    const auto half = static_cast<int64_t>(std::llround(half_s * cfg.fs));

    for (int64_t beat : beats) {
      const int64_t center =
          beat + static_cast<int64_t>(std::llround(delay_s * cfg.fs));
      for (int64_t i = std::max<int64_t>(0, center - half);
           i <= std::min<int64_t>(n - 1, center + half); ++i) {
        const double t = static_cast<double>(i - center) / cfg.fs;
        sig[static_cast<size_t>(i)] +=
            ch.shape == ChannelShape::qrs_spike ? ricker(t, spike_sigma_s)
                                                : raised_cosine(t, bp_width_s);
      }
    }

    if (ch.shape == ChannelShape::qrs_spike && cfg.drift_amp != 0.0) {
      const double phase = rng.uniform(0.0, 6.283185307179586);
      for (int64_t i = 0; i < n; ++i)
        sig[static_cast<size_t>(i)] +=
            cfg.drift_amp *
            std::sin(6.283185307179586 * i / (cfg.drift_period_s * cfg.fs) +
                     phase);
    }

    if (ch.noise_std > 0.0)
      for (int64_t i = 0; i < n; ++i)
        sig[static_cast<size_t>(i)] += ch.noise_std * rng.normal();
  }

  for (const auto& d : cfg.dropout) {
    auto& sig = rec.signals[static_cast<size_t>(d.channel)];
    const auto lo = std::max<int64_t>(
        0, static_cast<int64_t>(std::llround(d.start_s * cfg.fs)));
    const auto hi = std::min<int64_t>(
        n, static_cast<int64_t>(std::llround(d.end_s * cfg.fs)));
    for (int64_t i = lo; i < hi; ++i) sig[static_cast<size_t>(i)] = 0.0;
  }

  AnnotationSet ann;
  ann.record_id = rec.record_id;
  ann.beat_samples = std::move(beats);
  return {std::move(rec), std::move(ann)};
}

void write_corpus(const SynthConfig& base, int count,
                  const std::string& out_dir) {
  if (count < 1) raise(errc::bad_config, "synth: count must be >= 1");
  fs::create_directories(out_dir);
  for (int r = 0; r < count; ++r) {
    SynthConfig cfg = base;
    cfg.seed = mix_seed(base.seed, static_cast<uint64_t>(r));
    auto [rec, ann] = generate(cfg);
    char name[32];
    std::snprintf(name, sizeof name, "rec%03d", r);
    rec.record_id = name;
    ann.record_id = name;
    const auto header = fs::path(out_dir) / (std::string(name) + ".json");
    save_record(rec, header.string(), "f32le");
    const auto ann_path = fs::path(out_dir) / (std::string(name) + ".ann");
    save_annotations(ann, ann_path.string(), "seconds", cfg.fs);
  }
}

}  // namespace cif
