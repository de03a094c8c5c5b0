// Benchmark comparing the serial reference kernels against the OpenMP
// production kernels: median filtering, sliding-window inference, and the
// batch gradient. Also verifies the two paths agree bit-for-bit.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cif/detector.hpp"
#include "cif/model.hpp"
#include "cif/preprocess.hpp"
#include "cif/synth.hpp"

using clock_type = std::chrono::steady_clock;

namespace {

double ms_since(clock_type::time_point t0) {
  return std::chrono::duration<double, std::milli>(clock_type::now() - t0)
      .count();
}

template <typename F>
double time_best_of(int repeats, F&& f) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = clock_type::now();
    f();
    best = std::min(best, ms_since(t0));
  }
  return best;
}

void report(const char* name, double serial_ms, double parallel_ms,
            bool identical) {
  std::printf("%-22s %10.2f ms %10.2f ms %7.2fx   %s\n", name, serial_ms,
              parallel_ms, serial_ms / parallel_ms,
              identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  double duration_s = 120.0;
  int repeats = 3;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--duration" && i + 1 < argc) duration_s = std::stod(argv[++i]);
    else if (arg == "--repeat" && i + 1 < argc) repeats = std::stoi(argv[++i]);
    else if (arg == "--threads" && i + 1 < argc) {
#ifdef _OPENMP
      omp_set_num_threads(std::stoi(argv[++i]));
#else
      ++i;
#endif
    } else {
      std::fprintf(stderr,
                   "usage: cif_bench [--duration SECONDS] [--repeat N] "
                   "[--threads N]\n");
      return 1;
    }
  }

#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (built without OpenMP)\n");
#endif

  cif::SynthConfig synth_cfg;
  synth_cfg.duration_s = duration_s;
  auto [rec, ann] = cif::generate(synth_cfg);
  const auto canon = cif::preprocess_record(rec, {});
  std::printf("record: %zu samples x %zu channels, %zu beats\n\n",
              canon.n_samples(), canon.n_channels(), ann.count());

  std::printf("%-22s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

  {
    const auto& x = canon.signals[0];
    std::vector<double> a, b;
    const double ts = time_best_of(repeats, [&] { a = cif::median_filter_serial(x, 150); });
    const double tp = time_best_of(repeats, [&] { b = cif::median_filter(x, 150); });
    report("median_filter(150)", ts, tp,
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
  }

  cif::TrainConfig train_cfg;
  train_cfg.epochs = 1;
  const auto model = cif::init_model(
      {static_cast<int>(canon.n_channels()), cif::kSnippetLen, 2, 20, 0},
      train_cfg);

  {
    std::vector<uint8_t> a, b;
    const double ts =
        time_best_of(repeats, [&] { a = cif::infer_track_serial(canon, model); });
    const double tp = time_best_of(repeats, [&] { b = cif::infer_track(canon, model); });
    report("infer_track", ts, tp, a == b);
  }

  {
    const auto track = cif::build_pulse_track(ann, canon.n_samples());
    auto snippets = cif::extract_snippets(canon, track);
    cif::TrainingSet set;
    set.channels = static_cast<int>(canon.n_channels());
    set.record_ids = {canon.record_id};
    set.snippets = std::move(snippets);
    std::vector<uint32_t> batch(set.snippets.size());
    for (uint32_t i = 0; i < batch.size(); ++i) batch[i] = i;

    std::vector<double> ga, gb;
    const double ts = time_best_of(
        repeats, [&] { cif::batch_gradient_serial(set, batch, model, ga); });
    const double tp =
        time_best_of(repeats, [&] { cif::batch_gradient(set, batch, model, gb); });
    char label[48];
    std::snprintf(label, sizeof label, "batch_gradient(%zu)", batch.size());
    report(label, ts, tp,
           std::memcmp(ga.data(), gb.data(), ga.size() * sizeof(double)) == 0);
  }

  return 0;
}
