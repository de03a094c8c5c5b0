#include "cif/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cif/detector.hpp"
#include "cif/errors.hpp"
#include "cif/scorer.hpp"

namespace fs = std::filesystem;

namespace cif::pipeline {

std::vector<std::string> list_files(const std::string& dir,
                                    const std::string& extension) {
  if (!fs::is_directory(dir))
    raise(errc::missing_payload, "not a directory: " + dir);
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == extension)
      out.push_back(entry.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

void write_text_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    out << text;
    if (!out) raise(errc::missing_payload, "cannot write: " + tmp);
  }
  fs::rename(tmp, path);
}

namespace {

void echo_config(const Config& cfg, const std::string& out_dir,
                 const std::string& command) {
  fs::create_directories(out_dir);
  const auto path = fs::path(out_dir) / "effective_config.txt";
  write_text_atomic(path.string(), "# command: " + command + "\n" + cfg.dump());
}

struct CanonicalPair {
  CanonicalRecord record;
  std::string header_path;
};

std::vector<CanonicalPair> load_canonical_dir(const std::string& dir) {
  std::vector<CanonicalPair> out;
  for (const auto& header : list_files(dir, ".json")) {
    auto rec = load_record(header);
    out.push_back({as_canonical(rec, load_lag_applied(header)), header});
  }
  if (out.empty()) raise(errc::empty_input, "no record headers in " + dir);
  return out;
}

AnnotationSet load_record_annotations(const std::string& ann_dir,
                                      const std::string& record_id, int fs,
                                      int ann_fs) {
  const auto path = fs::path(ann_dir) / (record_id + ".ann");
  if (!fs::exists(path))
    raise(errc::missing_payload, "no annotations for record " + record_id +
                                     " in " + ann_dir);
  auto ann = load_annotations(path.string(), fs);
  if (ann_fs > 0 && ann_fs != fs) ann = rescale_annotations(ann, ann_fs, fs);
  ann.record_id = record_id;
  return ann;
}

}  // namespace

void cmd_synth(const Config& cfg, const std::string& out_dir) {
  write_corpus(cfg.synth(), cfg.synth_count(), out_dir);
  echo_config(cfg, out_dir, "synth");
}

void cmd_preprocess(const std::string& in_dir, const std::string& out_dir,
                    const Config& cfg) {
  const auto headers = list_files(in_dir, ".json");
  if (headers.empty()) raise(errc::empty_input, "no record headers in " + in_dir);
  fs::create_directories(out_dir);
  const auto pre = cfg.preprocess();
  for (const auto& header : headers) {
    const auto rec = load_record(header);
    const auto canon = preprocess_record(rec, pre);
    Record out;
    out.record_id = canon.record_id;
    out.fs = canon.fs;
    out.channels = canon.channels;
    out.signals = canon.signals;
    const auto out_header = fs::path(out_dir) / (canon.record_id + ".json");
    save_record(out, out_header.string(), "f32le", canon.lag_applied);
  }
  for (const auto& ann : list_files(in_dir, ".ann"))
    fs::copy_file(ann, fs::path(out_dir) / fs::path(ann).filename(),
                  fs::copy_options::overwrite_existing);
  echo_config(cfg, out_dir, "preprocess");
}

void cmd_dataset(const std::string& records_dir, const std::string& ann_dir,
                 const std::string& out_file, const Config& cfg) {
  const auto canon = load_canonical_dir(records_dir);
  std::vector<CanonicalRecord> records;
  std::vector<AnnotationSet> annotations;
  for (const auto& cp : canon) {
    records.push_back(cp.record);
    annotations.push_back(load_record_annotations(
        ann_dir, cp.record.record_id, kCanonicalFs, cfg.dataset_ann_fs()));
  }
  const auto set = build_training_set(records, annotations, cfg.dataset());
  save_training_set(set, out_file);
  echo_config(cfg, fs::path(out_file).parent_path().string(), "dataset");
}

void cmd_train(const std::string& dataset_path, const std::string& out_model,
               const Config& cfg, const std::string& log_path) {
  const auto set = load_training_set(dataset_path);
  auto arch = cfg.arch();
  arch.channels = set.channels;
  arch.window = set.window_len;
  std::vector<double> losses;
  const auto model = train(set, arch, cfg.train(), &losses);
  save_model(model, out_model);
  if (!log_path.empty()) {
    std::string log = "epoch\tloss\n";
    for (size_t e = 0; e < losses.size(); ++e) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%zu\t%.9f\n", e, losses[e]);
      log += buf;
    }
    write_text_atomic(log_path, log);
  }
  echo_config(cfg, fs::path(out_model).parent_path().string(), "train");
}

void cmd_detect(const std::string& records_dir, const std::string& model_path,
                const std::string& out_dir, const Config& cfg) {
  const auto model = load_model(model_path);
  const auto canon = load_canonical_dir(records_dir);
  fs::create_directories(out_dir);
  const auto det = cfg.detect();
  const bool emit_plot = cfg.get_bool("detect.emit_plot_data");
  for (const auto& cp : canon) {
    const auto res = detect(cp.record, model, det);
    AnnotationSet ann;
    ann.record_id = res.record_id;
    ann.beat_samples = res.beat_samples;
    const auto out_path = fs::path(out_dir) / (res.record_id + ".ann");
    save_annotations(ann, out_path.string(), "samples", kCanonicalFs);
    if (emit_plot) {
      std::string csv = "sample,pulse\n";
      for (size_t i = 0; i < res.pulse_track.size(); ++i)
        csv += std::to_string(i) + ',' +
               std::to_string(static_cast<int>(res.pulse_track[i])) + '\n';
      const auto trace = fs::path(out_dir) / (res.record_id + ".trace.csv");
      write_text_atomic(trace.string(), csv);
    }
  }
  echo_config(cfg, out_dir, "detect");
}

std::string cmd_score(const std::string& ref_dir, const std::string& est_dir,
                      const Config& cfg) {
  const int sample_rate = cfg.score_fs();
  std::vector<std::pair<AnnotationSet, DetectionResult>> pairs;
  for (const auto& ref_path : list_files(ref_dir, ".ann")) {
    const auto name = fs::path(ref_path).filename();
    const auto est_path = fs::path(est_dir) / name;
    if (!fs::exists(est_path)) continue;
    auto ref = load_annotations(ref_path, sample_rate);
    const auto est = load_annotations(est_path.string(), sample_rate);
    DetectionResult det;
    det.record_id = est.record_id;
    det.beat_samples = est.beat_samples;
    pairs.emplace_back(std::move(ref), std::move(det));
  }
  if (pairs.empty())
    raise(errc::empty_input,
          "no matching annotation files between " + ref_dir + " and " + est_dir);
  const auto report = score_records(pairs, sample_rate, cfg.score_tol_ms());
  return render_report(report, cfg.score_format());
}

std::string cmd_cv(const std::string& records_dir, const std::string& ann_dir,
                   const Config& cfg) {
  const auto canon = load_canonical_dir(records_dir);
  std::vector<CanonicalRecord> records;
  std::vector<AnnotationSet> annotations;
  for (const auto& cp : canon) {
    records.push_back(cp.record);
    annotations.push_back(load_record_annotations(
        ann_dir, cp.record.record_id, kCanonicalFs, cfg.dataset_ann_fs()));
  }
  std::vector<CifArchitecture> grid = cfg.cv_grid();
  for (auto& arch : grid) arch.channels = static_cast<int>(records[0].n_channels());
  return render_grid(grid_search(records, annotations, grid, cfg.cv()));
}

}  // namespace cif::pipeline
