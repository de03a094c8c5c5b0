#ifndef CIF_TEST_UTIL_HPP
#define CIF_TEST_UTIL_HPP

// Test-side oracles, written independently of the library code paths they
// check, plus small filesystem helpers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace test_util {

class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("cif_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

inline void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// --- fmt212 oracle: independent arithmetic-style packer -------------------

inline std::vector<uint8_t> pack212_oracle(const std::vector<int32_t>& a,
                                           const std::vector<int32_t>& b) {
  std::vector<uint8_t> out;
  for (size_t i = 0; i < a.size(); ++i) {
    const uint32_t ua = static_cast<uint32_t>(a[i] < 0 ? a[i] + 4096 : a[i]);
    out.push_back(static_cast<uint8_t>(ua % 256));
    if (i < b.size()) {
      const uint32_t ub = static_cast<uint32_t>(b[i] < 0 ? b[i] + 4096 : b[i]);
      out.push_back(static_cast<uint8_t>(ua / 256 + (ub / 256) * 16));
      out.push_back(static_cast<uint8_t>(ub % 256));
    } else {
      out.push_back(static_cast<uint8_t>(ua / 256));
    }
  }
  return out;
}

// --- median cascade oracle: full sort per window ---------------------------

inline std::vector<double> median_filter_oracle(const std::vector<double>& x,
                                                int window) {
  const auto n = static_cast<int64_t>(x.size());
  std::vector<double> y(x.size());
  for (int64_t i = 0; i < n; ++i) {
    std::vector<double> vals;
    for (int64_t d = -(window / 2); d < window - window / 2; ++d) {
      int64_t j = i + d;
      if (j < 0) j = 0;
      if (j >= n) j = n - 1;
      vals.push_back(x[static_cast<size_t>(j)]);
    }
    std::sort(vals.begin(), vals.end());
    y[static_cast<size_t>(i)] =
        window % 2 ? vals[static_cast<size_t>(window / 2)]
                   : 0.5 * (vals[static_cast<size_t>(window / 2 - 1)] +
                            vals[static_cast<size_t>(window / 2)]);
  }
  return y;
}

inline std::vector<double> baseline_cascade_oracle(const std::vector<double>& x) {
  const auto baseline = median_filter_oracle(median_filter_oracle(x, 50), 150);
  std::vector<double> y(x.size());
  for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] - baseline[i];
  return y;
}

// --- interval-union oracle for pulse tracks --------------------------------

inline std::vector<uint8_t> pulse_track_oracle(const std::vector<int64_t>& beats,
                                               size_t length, int half_width) {
  std::vector<uint8_t> track(length, 0);
  for (int64_t tau : beats)
    for (int64_t i = tau - half_width; i <= tau + half_width; ++i)
      if (i >= 0 && i < static_cast<int64_t>(length))
        track[static_cast<size_t>(i)] = 1;
  return track;
}

// --- run-length postprocessing oracle ---------------------------------------

struct Run {
  uint8_t value;
  int64_t length;
};

inline std::vector<Run> to_runs(const std::vector<uint8_t>& track) {
  std::vector<Run> runs;
  for (uint8_t v : track) {
    if (!runs.empty() && runs.back().value == v) ++runs.back().length;
    else runs.push_back({v, 1});
  }
  return runs;
}

inline std::vector<uint8_t> from_runs(const std::vector<Run>& runs) {
  std::vector<uint8_t> track;
  for (const auto& r : runs)
    track.insert(track.end(), static_cast<size_t>(r.length), r.value);
  return track;
}

inline std::vector<uint8_t> fill_gaps_oracle(const std::vector<uint8_t>& track,
                                             int min_gap) {
  auto runs = to_runs(track);
  for (size_t i = 0; i < runs.size(); ++i)
    if (runs[i].value == 0 && runs[i].length < min_gap && i > 0 &&
        i + 1 < runs.size())
      runs[i].value = 1;  // interior short gap (neighbours are 1-runs)
  return from_runs(runs);
}

inline std::vector<uint8_t> drop_pulses_oracle(const std::vector<uint8_t>& track,
                                               int min_pulse) {
  auto runs = to_runs(track);
  for (auto& r : runs)
    if (r.value == 1 && r.length < min_pulse) r.value = 0;
  return from_runs(runs);
}

// --- naive multichannel valid convolution -----------------------------------

// window[k][m], taps[k][j][l]; returns filter-major pre-activation outputs
// for n = L-1 .. M-1 computed with plain nested loops.
inline std::vector<double> conv_oracle(
    const std::vector<std::vector<double>>& window,
    const std::vector<std::vector<std::vector<double>>>& taps,
    const std::vector<double>& bias) {
  const size_t K = window.size();
  const size_t M = window[0].size();
  const size_t P = taps[0].size();
  const size_t L = taps[0][0].size();
  std::vector<double> out;
  for (size_t j = 0; j < P; ++j) {
    for (size_t n = L - 1; n < M; ++n) {
      double acc = bias[j];
      for (size_t k = 0; k < K; ++k)
        for (size_t l = 0; l < L; ++l)
          acc += window[k][n - l] * taps[k][j][l];
      out.push_back(acc);
    }
  }
  return out;
}

// --- optimal one-to-one matching (bitmask DP over estimates) ----------------

inline int optimal_match_oracle(const std::vector<int64_t>& ref,
                                const std::vector<int64_t>& est, int64_t tol) {
  const size_t n_est = est.size();
  std::vector<int> best(1u << n_est, -1);
  best[0] = 0;
  int result = 0;
  // process refs one at a time over all masks of used estimates
  std::vector<int> cur(1u << n_est, -1), next;
  cur[0] = 0;
  for (int64_t r : ref) {
    next.assign(1u << n_est, -1);
    for (uint32_t mask = 0; mask < (1u << n_est); ++mask) {
      if (cur[mask] < 0) continue;
      next[mask] = std::max(next[mask], cur[mask]);  // leave r unmatched
      for (size_t e = 0; e < n_est; ++e) {
        if (mask & (1u << e)) continue;
        if (std::llabs(est[e] - r) <= tol)
          next[mask | (1u << e)] =
              std::max(next[mask | (1u << e)], cur[mask] + 1);
      }
    }
    cur.swap(next);
  }
  for (int v : cur) result = std::max(result, v);
  return result;
}

}  // namespace test_util

#endif
