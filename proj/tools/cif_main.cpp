// cif — multimodal heartbeat detector pipeline.
//
// Subcommands: synth, preprocess, dataset, train, detect, score, cv.
// Options come from built-in defaults, then --config FILE, then repeated
// --set key=value; CIF_SEED overrides every *.seed key.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "cif/errors.hpp"
#include "cif/pipeline.hpp"

namespace {

cif::Config build_config(const std::string& config_file,
                         const std::vector<std::string>& overrides) {
  cif::Config cfg;
  if (!config_file.empty()) cfg.load_file(config_file);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      cif::raise(cif::errc::bad_config, "--set expects key=value, got " + kv);
    auto trim = [](std::string s) {
      while (!s.empty() && s.front() == ' ') s.erase(s.begin());
      while (!s.empty() && s.back() == ' ') s.pop_back();
      return s;
    };
    cfg.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }
  cfg.apply_env_seed();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CNN information-fusion heartbeat detector"};
  app.require_subcommand(1);

  std::string config_file;
  std::vector<std::string> overrides;
  int jobs = 0;
  app.add_option("--config", config_file, "plain-text config file");
  app.add_option("--set", overrides, "override a config key (key=value)");
  app.add_option("--jobs", jobs, "max worker threads (0 = library default)");

  std::string in_dir, out_dir, records_dir, ann_dir, ref_dir, est_dir;
  std::string dataset_path, model_path, out_file, log_path, out_text;

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("--out", out_dir, "output directory")->required();

  auto* preprocess =
      app.add_subcommand("preprocess", "resample/clean records to 250 Hz");
  preprocess->add_option("--in", in_dir, "directory of record headers")->required();
  preprocess->add_option("--out", out_dir, "output directory")->required();

  auto* dataset =
      app.add_subcommand("dataset", "build a balanced training set");
  dataset->add_option("--records", records_dir, "canonical record directory")->required();
  dataset->add_option("--ann", ann_dir, "annotation directory")->required();
  dataset->add_option("--out", out_file, "output dataset file")->required();

  auto* trainc = app.add_subcommand("train", "train a detector model");
  trainc->add_option("--dataset", dataset_path, "training-set file")->required();
  trainc->add_option("--out", model_path, "output model file")->required();
  trainc->add_option("--log", log_path, "per-epoch loss log (TSV)");

  auto* detectc = app.add_subcommand("detect", "detect beats in records");
  detectc->add_option("--records", records_dir, "canonical record directory")->required();
  detectc->add_option("--model", model_path, "model file")->required();
  detectc->add_option("--out", out_dir, "output annotation directory")->required();
  detectc->add_flag_callback(
      "--emit-plot-data", [&] { overrides.push_back("detect.emit_plot_data=true"); },
      "also write per-record pulse traces as CSV");

  auto* score = app.add_subcommand("score", "score detections against references");
  score->add_option("--ref", ref_dir, "reference annotation directory")->required();
  score->add_option("--est", est_dir, "estimated annotation directory")->required();
  score->add_option("--out", out_text, "write report here instead of stdout");

  auto* cv = app.add_subcommand("cv", "cross-validated architecture grid search");
  cv->add_option("--records", records_dir, "canonical record directory")->required();
  cv->add_option("--ann", ann_dir, "annotation directory")->required();
  cv->add_option("--out", out_text, "write table here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = build_config(config_file, overrides);
#ifdef _OPENMP
    if (jobs > 0) omp_set_num_threads(jobs);
#endif
    if (synth->parsed()) {
      cif::pipeline::cmd_synth(cfg, out_dir);
    } else if (preprocess->parsed()) {
      cif::pipeline::cmd_preprocess(in_dir, out_dir, cfg);
    } else if (dataset->parsed()) {
      cif::pipeline::cmd_dataset(records_dir, ann_dir, out_file, cfg);
    } else if (trainc->parsed()) {
      cif::pipeline::cmd_train(dataset_path, model_path, cfg, log_path);
    } else if (detectc->parsed()) {
      cif::pipeline::cmd_detect(records_dir, model_path, out_dir, cfg);
    } else if (score->parsed()) {
      const auto report = cif::pipeline::cmd_score(ref_dir, est_dir, cfg);
      if (out_text.empty()) std::cout << report;
      else cif::pipeline::write_text_atomic(out_text, report);
    } else if (cv->parsed()) {
      const auto table = cif::pipeline::cmd_cv(records_dir, ann_dir, cfg);
      if (out_text.empty()) std::cout << table;
      else cif::pipeline::write_text_atomic(out_text, table);
    }
  } catch (const cif::Error& e) {
    std::cerr << "error: " << cif::errc_name(e.code()) << ": " << e.what()
              << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
