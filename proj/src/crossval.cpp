#include "cif/crossval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "cif/errors.hpp"
#include "cif/rng.hpp"
#include "cif/scorer.hpp"

namespace cif {

std::vector<std::vector<size_t>> assign_folds(size_t n_records, int k,
                                              uint64_t seed) {
  std::vector<size_t> order(n_records);
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::vector<size_t>> folds(static_cast<size_t>(k));
  for (size_t i = 0; i < order.size(); ++i)
    folds[i % static_cast<size_t>(k)].push_back(order[i]);
  return folds;
}

double cross_validate(const std::vector<CanonicalRecord>& records,
                      const std::vector<AnnotationSet>& annotations,
                      const CifArchitecture& arch, const CvConfig& cfg,
                      std::vector<double>* fold_scores) {
  if (cfg.k < 2) raise(errc::too_few_records, "cross_validate: k must be >= 2");
  if (records.size() < static_cast<size_t>(cfg.k))
    raise(errc::too_few_records,
          "cross_validate: " + std::to_string(records.size()) +
              " records for k=" + std::to_string(cfg.k));
  if (records.size() != annotations.size())
    raise(errc::length_mismatch, "records and annotations differ in count");

  const auto folds = assign_folds(records.size(), cfg.k, cfg.seed);
  double score_sum = 0.0;
  for (const auto& held_out : folds) {
    std::vector<uint8_t> in_fold(records.size(), 0);
    for (size_t r : held_out) in_fold[r] = 1;

    std::vector<CanonicalRecord> train_recs;
    std::vector<AnnotationSet> train_anns;
    for (size_t r = 0; r < records.size(); ++r) {
      if (in_fold[r]) continue;
      train_recs.push_back(records[r]);
      train_anns.push_back(annotations[r]);
    }
    const auto set = build_training_set(train_recs, train_anns, cfg.dataset);
    const auto model = train(set, arch, cfg.train);

    std::vector<std::pair<AnnotationSet, DetectionResult>> pairs;
    for (size_t r : held_out)
      pairs.emplace_back(annotations[r], detect(records[r], model, cfg.detect));
    const auto report = score_records(pairs, kCanonicalFs, cfg.score_tol_ms);
    score_sum += report.score;
    if (fold_scores) fold_scores->push_back(report.score);
  }
  return score_sum / cfg.k;
}

std::vector<GridEntry> grid_search(
    const std::vector<CanonicalRecord>& records,
    const std::vector<AnnotationSet>& annotations,
    const std::vector<CifArchitecture>& candidates, const CvConfig& cfg) {
  if (candidates.empty()) raise(errc::empty_input, "grid_search: no candidates");
  std::vector<GridEntry> grid;
  grid.reserve(candidates.size());
  for (const auto& arch : candidates)
    grid.push_back({arch, cross_validate(records, annotations, arch, cfg)});
  std::stable_sort(grid.begin(), grid.end(),
                   [](const GridEntry& a, const GridEntry& b) {
                     if (a.score != b.score) return a.score > b.score;
                     if (a.arch.filters != b.arch.filters)
                       return a.arch.filters < b.arch.filters;
                     if (a.arch.filter_len != b.arch.filter_len)
                       return a.arch.filter_len < b.arch.filter_len;
                     return a.arch.hidden < b.arch.hidden;
                   });
  return grid;
}

std::string render_grid(const std::vector<GridEntry>& grid) {
  std::string out = "filters\tfilter_len\thidden\tscore\n";
  for (const auto& e : grid) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%d\t%d\t%d\t%.2f\n", e.arch.filters,
                  e.arch.filter_len, e.arch.hidden, e.score);
    out += buf;
  }
  return out;
}

}  // namespace cif
