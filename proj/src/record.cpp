#include "cif/record.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cif/errors.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace cif {

const char* errc_name(errc code) {
  switch (code) {
    case errc::bad_header: return "BadHeader";
    case errc::missing_payload: return "MissingPayload";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::truncated_payload: return "TruncatedPayload";
    case errc::non_numeric_line: return "NonNumericLine";
    case errc::empty_signal: return "EmptySignal";
    case errc::too_short: return "TooShort";
    case errc::shift_too_large: return "ShiftTooLarge";
    case errc::record_too_short: return "RecordTooShort";
    case errc::no_positives: return "NoPositives";
    case errc::shape_mismatch: return "ShapeMismatch";
    case errc::diverged_loss: return "DivergedLoss";
    case errc::too_few_records: return "TooFewRecords";
    case errc::bad_magic: return "BadMagic";
    case errc::version_mismatch: return "VersionMismatch";
    case errc::empty_input: return "EmptyInput";
    case errc::unknown_format: return "UnknownFormat";
    case errc::bad_config: return "BadConfig";
  }
  return "Unknown";
}

namespace {

int32_t sext12(uint32_t v) {
  return v >= 2048 ? static_cast<int32_t>(v) - 4096 : static_cast<int32_t>(v);
}

std::vector<uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(errc::missing_payload, "cannot open payload: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return bytes;
}

// One CSV row per sample frame, one comma-separated column per channel.
std::vector<std::vector<double>> parse_csv(const std::string& path,
                                           size_t n_channels) {
  std::ifstream in(path);
  if (!in) raise(errc::missing_payload, "cannot open payload: " + path);
  std::vector<std::vector<double>> cols(n_channels);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      if (col >= n_channels)
        raise(errc::length_mismatch,
              path + ":" + std::to_string(lineno) + ": too many columns");
      try {
        size_t used = 0;
        double v = std::stod(cell, &used);
        cols[col].push_back(v);
      } catch (const std::exception&) {
        raise(errc::non_numeric_line,
              path + ":" + std::to_string(lineno) + ": '" + cell + "'");
      }
      ++col;
    }
    if (col != n_channels)
      raise(errc::length_mismatch,
            path + ":" + std::to_string(lineno) + ": expected " +
                std::to_string(n_channels) + " columns, got " +
                std::to_string(col));
  }
  return cols;
}

struct PayloadSpec {
  std::string format;
  std::string path;
  size_t n_samples = 0;
};

PayloadSpec parse_payload(const json& j, const fs::path& base) {
  PayloadSpec p;
  if (!j.contains("format") || !j.contains("path"))
    raise(errc::bad_header, "payload needs 'format' and 'path'");
  p.format = j["format"].get<std::string>();
  p.path = (base / j["path"].get<std::string>()).string();
  if (j.contains("n_samples")) p.n_samples = j["n_samples"].get<size_t>();
  if (p.format != "csv" && p.format != "i16le" && p.format != "f32le" &&
      p.format != "wfdb212")
    raise(errc::bad_header, "unknown payload format: " + p.format);
  if (p.format != "csv" && p.n_samples == 0)
    raise(errc::bad_header, "binary payload needs n_samples");
  return p;
}

double to_physical(double raw, const ChannelMeta& ch) {
  return (raw - ch.baseline) / ch.gain;
}

// Decodes one payload holding all channels (interleaved frames).
std::vector<std::vector<double>> load_single_payload(
    const PayloadSpec& p, const std::vector<ChannelMeta>& chans) {
  const size_t K = chans.size();
  std::vector<std::vector<double>> out(K);
  if (p.format == "csv") {
    auto cols = parse_csv(p.path, K);
    if (p.n_samples && cols[0].size() != p.n_samples)
      raise(errc::length_mismatch,
            p.path + ": header says " + std::to_string(p.n_samples) +
                " samples, file has " + std::to_string(cols[0].size()));
    for (size_t k = 0; k < K; ++k) {
      out[k].resize(cols[k].size());
      for (size_t i = 0; i < cols[k].size(); ++i)
        out[k][i] = to_physical(cols[k][i], chans[k]);
    }
    return out;
  }
  const auto bytes = read_bytes(p.path);
  if (p.format == "wfdb212") {
    if (K != 2)
      raise(errc::bad_header, "wfdb212 payload requires exactly 2 channels");
    auto [a, b] = decode_fmt212(bytes, 2 * p.n_samples);
    out[0].resize(a.size());
    out[1].resize(b.size());
    for (size_t i = 0; i < a.size(); ++i) out[0][i] = to_physical(a[i], chans[0]);
    for (size_t i = 0; i < b.size(); ++i) out[1][i] = to_physical(b[i], chans[1]);
    return out;
  }
  const size_t elem = p.format == "i16le" ? 2 : 4;
  const size_t need = p.n_samples * K * elem;
  if (bytes.size() < need)
    raise(errc::truncated_payload,
          p.path + ": need " + std::to_string(need) + " bytes, have " +
              std::to_string(bytes.size()));
  for (size_t k = 0; k < K; ++k) out[k].resize(p.n_samples);
  for (size_t i = 0; i < p.n_samples; ++i) {
    for (size_t k = 0; k < K; ++k) {
      const uint8_t* q = bytes.data() + (i * K + k) * elem;
      double raw;
      if (p.format == "i16le") {
        raw = static_cast<int16_t>(q[0] | (q[1] << 8));
      } else {
        uint32_t u = q[0] | (q[1] << 8) | (q[2] << 16) |
                     (static_cast<uint32_t>(q[3]) << 24);
        float f;
        std::memcpy(&f, &u, 4);
        raw = f;
      }
      out[k][i] = to_physical(raw, chans[k]);
    }
  }
  return out;
}

// One payload per channel: csv is a single column, binaries are contiguous.
std::vector<double> load_channel_payload(const PayloadSpec& p,
                                         const ChannelMeta& ch) {
  if (p.format == "wfdb212")
    raise(errc::bad_header, "wfdb212 is only valid as a single 2-channel payload");
  std::vector<ChannelMeta> one{ch};
  return load_single_payload(p, one)[0];
}

void write_bytes(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) raise(errc::missing_payload, "cannot write: " + path);
}

int64_t round_half_up(double x) {
  return static_cast<int64_t>(std::floor(x + 0.5));
}

}  // namespace

std::pair<std::vector<int32_t>, std::vector<int32_t>> decode_fmt212(
    const std::vector<uint8_t>& bytes, size_t n_samples) {
  const size_t need = (3 * n_samples + 1) / 2;
  if (bytes.size() < need)
    raise(errc::truncated_payload,
          "fmt212: need " + std::to_string(need) + " bytes for " +
              std::to_string(n_samples) + " samples, have " +
              std::to_string(bytes.size()));
  std::vector<int32_t> a, b;
  a.reserve((n_samples + 1) / 2);
  b.reserve(n_samples / 2);
  size_t off = 0;
  for (size_t i = 0; i + 1 < n_samples; i += 2, off += 3) {
    const uint32_t b0 = bytes[off], b1 = bytes[off + 1], b2 = bytes[off + 2];
    a.push_back(sext12(((b1 & 0x0Fu) << 8) | b0));
    b.push_back(sext12(((b1 & 0xF0u) << 4) | b2));
  }
  if (n_samples % 2) {
    const uint32_t b0 = bytes[off], b1 = bytes[off + 1];
    a.push_back(sext12(((b1 & 0x0Fu) << 8) | b0));
  }
  return {std::move(a), std::move(b)};
}

std::vector<uint8_t> encode_fmt212(const std::vector<int32_t>& chan_a,
                                   const std::vector<int32_t>& chan_b) {
  if (chan_a.size() != chan_b.size() && chan_a.size() != chan_b.size() + 1)
    raise(errc::length_mismatch, "fmt212: channel A must hold the extra sample");
  auto pack12 = [](int32_t v) -> uint32_t {
    if (v < -2048 || v > 2047)
      raise(errc::length_mismatch,
            "fmt212: sample " + std::to_string(v) + " outside 12-bit range");
    return static_cast<uint32_t>(v & 0xFFF);
  };
  std::vector<uint8_t> bytes;
  bytes.reserve((3 * (chan_a.size() + chan_b.size()) + 1) / 2);
  for (size_t i = 0; i < chan_a.size(); ++i) {
    const uint32_t s1 = pack12(chan_a[i]);
    bytes.push_back(static_cast<uint8_t>(s1 & 0xFF));
    if (i < chan_b.size()) {
      const uint32_t s2 = pack12(chan_b[i]);
      bytes.push_back(
          static_cast<uint8_t>(((s1 >> 8) & 0x0F) | ((s2 >> 8) << 4)));
      bytes.push_back(static_cast<uint8_t>(s2 & 0xFF));
    } else {
      bytes.push_back(static_cast<uint8_t>((s1 >> 8) & 0x0F));
    }
  }
  return bytes;
}

Record load_record(const std::string& header_path) {
  std::ifstream in(header_path);
  if (!in) raise(errc::bad_header, "cannot open header: " + header_path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    raise(errc::bad_header, header_path + ": " + e.what());
  }

  Record rec;
  try {
    rec.record_id = j.at("record_id").get<std::string>();
    rec.fs = j.at("fs").get<int>();
    for (const auto& jc : j.at("channels")) {
      ChannelMeta ch;
      ch.name = jc.at("name").get<std::string>();
      if (jc.contains("unit")) ch.unit = jc["unit"].get<std::string>();
      if (jc.contains("gain")) ch.gain = jc["gain"].get<double>();
      if (jc.contains("baseline")) ch.baseline = jc["baseline"].get<int>();
      rec.channels.push_back(ch);
    }
  } catch (const json::exception& e) {
    raise(errc::bad_header, header_path + ": " + e.what());
  }
  if (rec.fs <= 0) raise(errc::bad_header, header_path + ": fs must be > 0");
  if (rec.channels.empty())
    raise(errc::bad_header, header_path + ": need at least one channel");
  for (const auto& ch : rec.channels)
    if (ch.gain == 0.0)
      raise(errc::bad_header, header_path + ": gain must be nonzero");

  if (!j.contains("payload"))
    raise(errc::bad_header, header_path + ": missing payload");
  const fs::path base = fs::path(header_path).parent_path();

  if (j["payload"].is_array()) {
    const auto& arr = j["payload"];
    if (arr.size() != rec.channels.size())
      raise(errc::bad_header, header_path + ": payload count != channel count");
    for (size_t k = 0; k < rec.channels.size(); ++k)
      rec.signals.push_back(
          load_channel_payload(parse_payload(arr[k], base), rec.channels[k]));
  } else {
    rec.signals =
        load_single_payload(parse_payload(j["payload"], base), rec.channels);
  }

  for (size_t k = 1; k < rec.signals.size(); ++k)
    if (rec.signals[k].size() != rec.signals[0].size())
      raise(errc::length_mismatch,
            header_path + ": channel " + std::to_string(k) + " has " +
                std::to_string(rec.signals[k].size()) + " samples, channel 0 has " +
                std::to_string(rec.signals[0].size()));
  return rec;
}

void save_record(const Record& rec, const std::string& header_path,
                 const std::string& payload_format,
                 const std::vector<int>& lag_applied) {
  const size_t K = rec.channels.size();
  const size_t n = rec.n_samples();
  const fs::path hp(header_path);
  const std::string stem = hp.stem().string();
  std::string ext;
  if (payload_format == "csv") ext = ".csv";
  else if (payload_format == "i16le") ext = ".i16";
  else if (payload_format == "f32le") ext = ".f32";
  else if (payload_format == "wfdb212") ext = ".212";
  else raise(errc::unknown_format, "save_record: " + payload_format);

  const fs::path payload_path = hp.parent_path() / (stem + ext);

  auto to_raw = [&](double v, const ChannelMeta& ch) {
    return round_half_up(v * ch.gain + ch.baseline);
  };

  if (payload_format == "csv") {
    std::ofstream out(payload_path);
    char buf[64];
    for (size_t i = 0; i < n; ++i) {
      std::string line;
      for (size_t k = 0; k < K; ++k) {
        std::snprintf(buf, sizeof buf, "%.17g",
                      rec.signals[k][i] * rec.channels[k].gain +
                          rec.channels[k].baseline);
        if (k) line += ',';
        line += buf;
      }
      out << line << '\n';
    }
    if (!out) raise(errc::missing_payload, "cannot write: " + payload_path.string());
  } else if (payload_format == "wfdb212") {
    if (K != 2) raise(errc::bad_header, "wfdb212 requires exactly 2 channels");
    std::vector<int32_t> a(n), b(n);
    for (size_t i = 0; i < n; ++i) {
      a[i] = static_cast<int32_t>(to_raw(rec.signals[0][i], rec.channels[0]));
      b[i] = static_cast<int32_t>(to_raw(rec.signals[1][i], rec.channels[1]));
    }
    write_bytes(payload_path.string(), encode_fmt212(a, b));
  } else {
    const size_t elem = payload_format == "i16le" ? 2 : 4;
    std::vector<uint8_t> bytes(n * K * elem);
    for (size_t i = 0; i < n; ++i) {
      for (size_t k = 0; k < K; ++k) {
        uint8_t* q = bytes.data() + (i * K + k) * elem;
        if (payload_format == "i16le") {
          const int64_t raw = to_raw(rec.signals[k][i], rec.channels[k]);
          if (raw < INT16_MIN || raw > INT16_MAX)
            raise(errc::length_mismatch, "i16le: sample out of range");
          const auto s = static_cast<int16_t>(raw);
          q[0] = static_cast<uint8_t>(s & 0xFF);
          q[1] = static_cast<uint8_t>((s >> 8) & 0xFF);
        } else {
          const auto f = static_cast<float>(rec.signals[k][i] *
                                                rec.channels[k].gain +
                                            rec.channels[k].baseline);
          uint32_t u;
          std::memcpy(&u, &f, 4);
          q[0] = static_cast<uint8_t>(u & 0xFF);
          q[1] = static_cast<uint8_t>((u >> 8) & 0xFF);
          q[2] = static_cast<uint8_t>((u >> 16) & 0xFF);
          q[3] = static_cast<uint8_t>((u >> 24) & 0xFF);
        }
      }
    }
    write_bytes(payload_path.string(), bytes);
  }

  json j;
  j["record_id"] = rec.record_id;
  j["fs"] = rec.fs;
  j["channels"] = json::array();
  for (const auto& ch : rec.channels)
    j["channels"].push_back({{"name", ch.name},
                             {"unit", ch.unit},
                             {"gain", ch.gain},
                             {"baseline", ch.baseline}});
  j["payload"] = {{"format", payload_format},
                  {"path", payload_path.filename().string()},
                  {"n_samples", n}};
  if (!lag_applied.empty()) j["lag_applied"] = lag_applied;

  std::ofstream out(header_path);
  out << j.dump(2) << '\n';
  if (!out) raise(errc::bad_header, "cannot write: " + header_path);
}

std::vector<int> load_lag_applied(const std::string& header_path) {
  std::ifstream in(header_path);
  if (!in) raise(errc::bad_header, "cannot open header: " + header_path);
  json j;
  in >> j;
  if (!j.contains("lag_applied")) return {};
  return j["lag_applied"].get<std::vector<int>>();
}

AnnotationSet load_annotations(const std::string& path, int fs) {
  std::ifstream in(path);
  if (!in) raise(errc::missing_payload, "cannot open annotations: " + path);
  std::string line;
  bool have_units = false, seconds = false;
  std::vector<int64_t> beats;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t'))
      line.pop_back();
    size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    line.erase(0, start);
    if (!have_units) {
      if (line == "units: samples") seconds = false;
      else if (line == "units: seconds") seconds = true;
      else
        raise(errc::bad_header,
              path + ": first line must declare 'units: samples' or 'units: seconds'");
      have_units = true;
      continue;
    }
    try {
      size_t used = 0;
      if (seconds) {
        const double t = std::stod(line, &used);
        if (used != line.size()) throw std::invalid_argument(line);
        beats.push_back(round_half_up(t * fs));
      } else {
        const long long s = std::stoll(line, &used);
        if (used != line.size()) throw std::invalid_argument(line);
        beats.push_back(s);
      }
    } catch (const std::exception&) {
      raise(errc::non_numeric_line,
            path + ":" + std::to_string(lineno) + ": '" + line + "'");
    }
    if (beats.back() < 0)
      raise(errc::non_numeric_line,
            path + ":" + std::to_string(lineno) + ": negative beat location");
  }
  if (!have_units)
    raise(errc::bad_header, path + ": missing units declaration");
  std::sort(beats.begin(), beats.end());
  beats.erase(std::unique(beats.begin(), beats.end()), beats.end());
  AnnotationSet ann;
  ann.record_id = fs::path(path).stem().string();
  ann.beat_samples = std::move(beats);
  return ann;
}

void save_annotations(const AnnotationSet& ann, const std::string& path,
                      const std::string& units, int fs) {
  if (units != "samples" && units != "seconds")
    raise(errc::unknown_format, "annotation units: " + units);
  std::ofstream out(path);
  out << "units: " << units << '\n';
  char buf[64];
  for (int64_t s : ann.beat_samples) {
    if (units == "samples") {
      out << s << '\n';
    } else {
      std::snprintf(buf, sizeof buf, "%.9f", static_cast<double>(s) / fs);
      out << buf << '\n';
    }
  }
  if (!out) raise(errc::missing_payload, "cannot write: " + path);
}

AnnotationSet rescale_annotations(const AnnotationSet& ann, int fs_from,
                                  int fs_to) {
  AnnotationSet out;
  out.record_id = ann.record_id;
  if (fs_from == fs_to) {
    out.beat_samples = ann.beat_samples;
    return out;
  }
  out.beat_samples.reserve(ann.count());
  for (int64_t s : ann.beat_samples)
    out.beat_samples.push_back(
        round_half_up(static_cast<double>(s) * fs_to / fs_from));
  std::sort(out.beat_samples.begin(), out.beat_samples.end());
  out.beat_samples.erase(
      std::unique(out.beat_samples.begin(), out.beat_samples.end()),
      out.beat_samples.end());
  return out;
}

}  // namespace cif
