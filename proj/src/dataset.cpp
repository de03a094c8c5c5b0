#include "cif/dataset.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "cif/errors.hpp"
#include "cif/rng.hpp"

namespace cif {

size_t TrainingSet::count_label(uint8_t label) const {
  size_t n = 0;
  for (const auto& s : snippets) n += (s.label == label);
  return n;
}

PulseTrack build_pulse_track(const AnnotationSet& ann, size_t length) {
  PulseTrack track(length, 0);
  const auto len = static_cast<int64_t>(length);
  for (int64_t tau : ann.beat_samples) {
    if (tau < 0 || tau >= len)
      raise(errc::length_mismatch,
            "annotation " + std::to_string(tau) + " outside record of length " +
                std::to_string(length));
    const int64_t lo = std::max<int64_t>(0, tau - kPulseHalfWidth);
    const int64_t hi = std::min<int64_t>(len - 1, tau + kPulseHalfWidth);
    std::fill(track.begin() + lo, track.begin() + hi + 1, uint8_t{1});
  }
  return track;
}

std::vector<LabeledSnippet> extract_snippets(const CanonicalRecord& rec,
                                             const PulseTrack& track,
                                             int stride,
                                             uint32_t record_index) {
  const int M = kSnippetLen;
  const auto n = static_cast<int64_t>(rec.n_samples());
  if (n < M)
    raise(errc::record_too_short,
          "record " + rec.record_id + ": " + std::to_string(n) +
              " samples, snippets need " + std::to_string(M));
  if (track.size() != rec.n_samples())
    raise(errc::length_mismatch, "pulse track length != record length");
  if (stride <= 0) raise(errc::bad_config, "snippet stride must be positive");

  const size_t K = rec.n_channels();
  std::vector<LabeledSnippet> out;
  out.reserve(static_cast<size_t>((n - M) / stride + 1));
  for (int64_t start = 0; start + M <= n; start += stride) {
    LabeledSnippet s;
    s.record = record_index;
    s.start = start;
    s.label = track[static_cast<size_t>(start + M / 2)];
    s.mask.assign(K, 1);
    s.window.resize(K * static_cast<size_t>(M));
    for (size_t k = 0; k < K; ++k)
      for (int i = 0; i < M; ++i)
        s.window[k * M + i] =
            static_cast<float>(rec.signals[k][static_cast<size_t>(start) + i]);
    out.push_back(std::move(s));
  }
  return out;
}

void augment_channel_dropout(std::vector<LabeledSnippet>& snippets,
                             int channels) {
  if (channels < 2) return;  // nothing to fuse
  const size_t K = static_cast<size_t>(channels);
  std::vector<LabeledSnippet> out;
  out.reserve(snippets.size() * (K + 1));
  for (auto& s : snippets) {
    const size_t M = s.window.size() / K;
    out.push_back(s);
    for (size_t keep = 0; keep < K; ++keep) {
      LabeledSnippet copy = s;
      for (size_t k = 0; k < K; ++k) {
        if (k == keep) continue;
        copy.mask[k] = 0;
        std::fill(copy.window.begin() + k * M,
                  copy.window.begin() + (k + 1) * M, 0.0f);
      }
      out.push_back(std::move(copy));
    }
  }
  snippets = std::move(out);
}

TrainingSet balance_classes(TrainingSet set, uint64_t seed) {
  size_t n0 = 0, n1 = 0;
  for (const auto& s : set.snippets) (s.label ? n1 : n0)++;
  if (n1 == 0) raise(errc::no_positives, "balance_classes: no label-1 snippets");
  set.seed = seed;
  if (n0 <= n1) return set;

  std::vector<uint32_t> zero_idx;
  zero_idx.reserve(n0);
  for (uint32_t i = 0; i < set.snippets.size(); ++i)
    if (set.snippets[i].label == 0) zero_idx.push_back(i);

  Rng rng(seed);
  rng.shuffle(zero_idx);
  std::vector<uint8_t> drop(set.snippets.size(), 0);
  for (size_t i = 0; i < n0 - n1; ++i) drop[zero_idx[i]] = 1;

  std::vector<LabeledSnippet> kept;
  kept.reserve(set.snippets.size() - (n0 - n1));
  for (size_t i = 0; i < set.snippets.size(); ++i)
    if (!drop[i]) kept.push_back(std::move(set.snippets[i]));
  set.snippets = std::move(kept);
  return set;
}

TrainingSet build_training_set(const std::vector<CanonicalRecord>& records,
                               const std::vector<AnnotationSet>& annotations,
                               const DatasetConfig& cfg) {
  if (records.empty()) raise(errc::empty_input, "build_training_set: no records");
  if (records.size() != annotations.size())
    raise(errc::length_mismatch, "records and annotations differ in count");

  TrainingSet set;
  set.channels = static_cast<int>(records[0].n_channels());
  for (size_t r = 0; r < records.size(); ++r) {
    if (static_cast<int>(records[r].n_channels()) != set.channels)
      raise(errc::shape_mismatch, "record " + records[r].record_id +
                                      ": channel count differs across corpus");
    set.record_ids.push_back(records[r].record_id);
    const auto track = build_pulse_track(annotations[r], records[r].n_samples());
    auto snips = extract_snippets(records[r], track, cfg.stride,
                                  static_cast<uint32_t>(r));
    if (cfg.augment) augment_channel_dropout(snips, set.channels);
    set.snippets.insert(set.snippets.end(),
                        std::make_move_iterator(snips.begin()),
                        std::make_move_iterator(snips.end()));
  }
  return balance_classes(std::move(set), cfg.seed);
}

// ---------------------------------------------------------------------------
// Serialization: magic "CIFD", version, K, M, count, seed, record-id table,
// per-snippet origins, then row-major float32 windows + labels + masks.
// ---------------------------------------------------------------------------

namespace {

constexpr char kDatasetMagic[4] = {'C', 'I', 'F', 'D'};
constexpr uint32_t kDatasetVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
void get(std::ifstream& in, T& v, const std::string& path) {
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) raise(errc::truncated_payload, path + ": unexpected end of file");
}

}  // namespace

void save_training_set(const TrainingSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(errc::missing_payload, "cannot write: " + path);
  out.write(kDatasetMagic, 4);
  put(out, kDatasetVersion);
  put(out, static_cast<uint32_t>(set.channels));
  put(out, static_cast<uint32_t>(set.window_len));
  put(out, static_cast<uint64_t>(set.snippets.size()));
  put(out, set.seed);
  put(out, static_cast<uint32_t>(set.record_ids.size()));
  for (const auto& id : set.record_ids) {
    put(out, static_cast<uint16_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
  }
  for (const auto& s : set.snippets) {
    put(out, s.record);
    put(out, s.start);
  }
  for (const auto& s : set.snippets)
    out.write(reinterpret_cast<const char*>(s.window.data()),
              static_cast<std::streamsize>(s.window.size() * sizeof(float)));
  for (const auto& s : set.snippets) put(out, s.label);
  for (const auto& s : set.snippets)
    out.write(reinterpret_cast<const char*>(s.mask.data()),
              static_cast<std::streamsize>(s.mask.size()));
  if (!out) raise(errc::missing_payload, "write failed: " + path);
}

TrainingSet load_training_set(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(errc::missing_payload, "cannot open: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kDatasetMagic, 4) != 0)
    raise(errc::bad_magic, path + ": not a training-set file");
  uint32_t version;
  get(in, version, path);
  if (version != kDatasetVersion)
    raise(errc::version_mismatch,
          path + ": version " + std::to_string(version));

  TrainingSet set;
  uint32_t channels, window_len, n_records;
  uint64_t count;
  get(in, channels, path);
  get(in, window_len, path);
  get(in, count, path);
  get(in, set.seed, path);
  get(in, n_records, path);
  set.channels = static_cast<int>(channels);
  set.window_len = static_cast<int>(window_len);
  set.record_ids.resize(n_records);
  for (auto& id : set.record_ids) {
    uint16_t len;
    get(in, len, path);
    id.resize(len);
    in.read(id.data(), len);
    if (!in) raise(errc::truncated_payload, path + ": unexpected end of file");
  }
  set.snippets.resize(count);
  for (auto& s : set.snippets) {
    get(in, s.record, path);
    get(in, s.start, path);
  }
  const size_t win = static_cast<size_t>(channels) * window_len;
  for (auto& s : set.snippets) {
    s.window.resize(win);
    in.read(reinterpret_cast<char*>(s.window.data()),
            static_cast<std::streamsize>(win * sizeof(float)));
    if (!in) raise(errc::truncated_payload, path + ": unexpected end of file");
  }
  for (auto& s : set.snippets) get(in, s.label, path);
  for (auto& s : set.snippets) {
    s.mask.resize(channels);
    in.read(reinterpret_cast<char*>(s.mask.data()), channels);
    if (!in) raise(errc::truncated_payload, path + ": unexpected end of file");
  }
  return set;
}

}  // namespace cif
