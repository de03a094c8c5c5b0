#ifndef CIF_SCORER_HPP
#define CIF_SCORER_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cif/detector.hpp"
#include "cif/record.hpp"

namespace cif {

struct MatchCounts {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;
};

struct RecordScore {
  std::string record_id;
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;
  double se = 0.0;   // percent
  double ppv = 0.0;  // percent

  int64_t peaks() const { return tp + fn; }
};

struct ScoreReport {
  std::vector<RecordScore> records;
  int64_t tp = 0, fp = 0, fn = 0;  // gross counts
  double se_avg = 0.0;
  double ppv_avg = 0.0;
  double se_gross = 0.0;
  double ppv_gross = 0.0;
  double score = 0.0;  // (se_avg + ppv_avg + se_gross + ppv_gross) / 4
};

/// Greedy one-to-one matching in time order: a reference and estimated beat
/// pair up when they are within floor(tol_ms*fs/1000) samples (37 at the
/// defaults) and neither is already used. Optimal for sorted inputs.
MatchCounts match_beats(const std::vector<int64_t>& ref,
                        const std::vector<int64_t>& est, int fs = 250,
                        int tol_ms = 150);

/// Percentage with the zero-denominator convention: an empty denominator
/// scores 100 when the opposing error count is also zero, else 0.
double ratio_pct(int64_t numerator, int64_t denominator, int64_t opposing);

RecordScore make_record_score(const std::string& record_id, int64_t tp,
                              int64_t fp, int64_t fn);

/// Aggregates per-record counts: recordwise averages, gross ratios from
/// summed counts, and the 4-way overall score.
ScoreReport aggregate_scores(std::vector<RecordScore> records);

inline double overall_score(double se_avg, double ppv_avg, double se_gross,
                            double ppv_gross) {
  return (se_avg + ppv_avg + se_gross + ppv_gross) / 4.0;
}

/// match_beats per record, then aggregate.
ScoreReport score_records(
    const std::vector<std::pair<AnnotationSet, DetectionResult>>& pairs,
    int fs = 250, int tol_ms = 150);

/// "tsv" (per-record table + summary block, 2 d.p.) or "json"
/// (full precision, round-trips via score_report_from_json).
std::string render_report(const ScoreReport& report, const std::string& format);

ScoreReport score_report_from_json(const std::string& text);

/// Display rounding used by the TSV table (two decimals).
std::string format_pct(double pct);

}  // namespace cif

#endif
