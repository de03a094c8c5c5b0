#ifndef CIF_RECORD_HPP
#define CIF_RECORD_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace cif {

struct ChannelMeta {
  std::string name;
  std::string unit;
  double gain = 1.0;    // raw-to-physical multiplier, must be nonzero
  int baseline = 0;     // raw integer offset
};

/// Multichannel record. All channel signals have equal length; values are
/// physical units, i.e. (raw - baseline) / gain has already been applied.
struct Record {
  std::string record_id;
  int fs = 0;
  std::vector<ChannelMeta> channels;
  std::vector<std::vector<double>> signals;

  size_t n_channels() const { return channels.size(); }
  size_t n_samples() const { return signals.empty() ? 0 : signals[0].size(); }
};

/// Reference heartbeat locations for one record, as sample indices at the
/// record's native sampling rate. Strictly increasing after load.
struct AnnotationSet {
  std::string record_id;
  std::vector<int64_t> beat_samples;

  size_t count() const { return beat_samples.size(); }
};

// ---------------------------------------------------------------------------
// Record files. Header is JSON:
//   {"record_id": str, "fs": int,
//    "channels": [{"name": str, "unit": str, "gain": num, "baseline": int}],
//    "payload": {"format": "csv"|"i16le"|"f32le"|"wfdb212",
//                "path": str, "n_samples": int}}
// "payload" may also be an array with one entry per channel. Payload paths
// are resolved relative to the header file's directory.
// ---------------------------------------------------------------------------

Record load_record(const std::string& header_path);

/// Writes header JSON plus payload file(s) next to it. Formats as above;
/// integer formats store round(v * gain + baseline).
void save_record(const Record& rec, const std::string& header_path,
                 const std::string& payload_format = "f32le",
                 const std::vector<int>& lag_applied = {});

/// Optional per-channel shift stamped by preprocessing, if present in header.
std::vector<int> load_lag_applied(const std::string& header_path);

// ---------------------------------------------------------------------------
// Format 212: two 12-bit two's-complement samples packed into 3 bytes.
// Per group [b0,b1,b2]: s1 = sext12(((b1 & 0x0F) << 8) | b0),
//                       s2 = sext12(((b1 & 0xF0) << 4) | b2).
// Samples alternate channel A, channel B; n_samples counts both streams.
// ---------------------------------------------------------------------------

std::pair<std::vector<int32_t>, std::vector<int32_t>> decode_fmt212(
    const std::vector<uint8_t>& bytes, size_t n_samples);

std::vector<uint8_t> encode_fmt212(const std::vector<int32_t>& chan_a,
                                   const std::vector<int32_t>& chan_b);

// ---------------------------------------------------------------------------
// Annotation text files. First non-comment line declares units:
//   units: samples | units: seconds
// then one value per line; '#' starts a comment. Seconds are converted by
// round-half-up(value * fs). Duplicates are removed, output sorted.
// ---------------------------------------------------------------------------

AnnotationSet load_annotations(const std::string& path, int fs);

void save_annotations(const AnnotationSet& ann, const std::string& path,
                      const std::string& units = "samples", int fs = 250);

/// Rescale beat indices between sampling rates (round-half-up), dedup-sorted.
AnnotationSet rescale_annotations(const AnnotationSet& ann, int fs_from,
                                  int fs_to);

}  // namespace cif

#endif
