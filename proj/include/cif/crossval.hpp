#ifndef CIF_CROSSVAL_HPP
#define CIF_CROSSVAL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cif/dataset.hpp"
#include "cif/detector.hpp"
#include "cif/model.hpp"
#include "cif/preprocess.hpp"
#include "cif/record.hpp"

namespace cif {

struct CvConfig {
  int k = 5;
  uint64_t seed = 1;  // fold assignment
  DatasetConfig dataset;
  TrainConfig train;
  DetectConfig detect;
  int score_tol_ms = 150;
};

/// Seeded record-level fold assignment: indices shuffled, dealt round-robin
/// into k folds.
std::vector<std::vector<size_t>> assign_folds(size_t n_records, int k,
                                              uint64_t seed);

/// k-fold randomized cross validation at record granularity: per fold, train
/// on the other folds' snippets, run full detect+score on the held-out
/// records; returns the mean overall score across folds.
double cross_validate(const std::vector<CanonicalRecord>& records,
                      const std::vector<AnnotationSet>& annotations,
                      const CifArchitecture& arch, const CvConfig& cfg,
                      std::vector<double>* fold_scores = nullptr);

struct GridEntry {
  CifArchitecture arch;
  double score = 0.0;
};

/// Cross-validates every candidate and ranks by score (ties toward fewer
/// filters, then shorter filters, then fewer hidden nodes).
std::vector<GridEntry> grid_search(
    const std::vector<CanonicalRecord>& records,
    const std::vector<AnnotationSet>& annotations,
    const std::vector<CifArchitecture>& candidates, const CvConfig& cfg);

std::string render_grid(const std::vector<GridEntry>& grid);

}  // namespace cif

#endif
