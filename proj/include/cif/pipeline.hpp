#ifndef CIF_PIPELINE_HPP
#define CIF_PIPELINE_HPP

#include <string>
#include <vector>

#include "cif/config.hpp"

namespace cif::pipeline {

/// Generates synth.count records with annotation files (units: seconds).
void cmd_synth(const Config& cfg, const std::string& out_dir);

/// Preprocesses every *.json record in in_dir to 250 Hz canonical files in
/// out_dir; annotation files (*.ann) are copied through untouched.
void cmd_preprocess(const std::string& in_dir, const std::string& out_dir,
                    const Config& cfg);

/// Builds a balanced training set from canonical records in records_dir and
/// matching <record_id>.ann files in ann_dir.
void cmd_dataset(const std::string& records_dir, const std::string& ann_dir,
                 const std::string& out_file, const Config& cfg);

/// Trains on a serialized dataset; writes the model file and, when log_path
/// is nonempty, a per-epoch loss log.
void cmd_train(const std::string& dataset_path, const std::string& out_model,
               const Config& cfg, const std::string& log_path = "");

/// Runs detection on every canonical record in records_dir, writing one
/// annotation file per record (units: samples at 250 Hz) to out_dir.
void cmd_detect(const std::string& records_dir, const std::string& model_path,
                const std::string& out_dir, const Config& cfg);

/// Scores est_dir/*.ann against ref_dir/*.ann (paired by file name) and
/// returns the rendered report.
std::string cmd_score(const std::string& ref_dir, const std::string& est_dir,
                      const Config& cfg);

/// Grid-search cross validation over canonical records; returns the ranked
/// table.
std::string cmd_cv(const std::string& records_dir, const std::string& ann_dir,
                   const Config& cfg);

// helpers shared with tests
std::vector<std::string> list_files(const std::string& dir,
                                    const std::string& extension);
void write_text_atomic(const std::string& path, const std::string& text);

}  // namespace cif::pipeline

#endif
