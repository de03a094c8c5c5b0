#include "cif/scorer.hpp"

#include <cmath>
#include <cstdio>

#include "cif/errors.hpp"
#include "json.hpp"

using json = nlohmann::json;

namespace cif {

MatchCounts match_beats(const std::vector<int64_t>& ref,
                        const std::vector<int64_t>& est, int fs, int tol_ms) {
  const int64_t tol = static_cast<int64_t>(tol_ms) * fs / 1000;  // floor
  MatchCounts c;
  size_t i = 0, j = 0;
  while (i < ref.size() && j < est.size()) {
    const int64_t d = est[j] - ref[i];
    if (std::llabs(d) <= tol) {
      ++c.tp;
      ++i;
      ++j;
    } else if (d < 0) {
      ++c.fp;  // estimate too early to match anything remaining
      ++j;
    } else {
      ++c.fn;  // reference left behind
      ++i;
    }
  }
  c.fn += static_cast<int64_t>(ref.size() - i);
  c.fp += static_cast<int64_t>(est.size() - j);
  return c;
}

double ratio_pct(int64_t numerator, int64_t denominator, int64_t opposing) {
  if (denominator == 0) return opposing == 0 ? 100.0 : 0.0;
  return 100.0 * static_cast<double>(numerator) /
         static_cast<double>(denominator);
}

RecordScore make_record_score(const std::string& record_id, int64_t tp,
                              int64_t fp, int64_t fn) {
  RecordScore r;
  r.record_id = record_id;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.se = ratio_pct(tp, tp + fn, fp);
  r.ppv = ratio_pct(tp, tp + fp, fn);
  return r;
}

ScoreReport aggregate_scores(std::vector<RecordScore> records) {
  if (records.empty()) raise(errc::empty_input, "aggregate_scores: no records");
  ScoreReport rep;
  rep.records = std::move(records);
  double se_sum = 0.0, ppv_sum = 0.0;
  for (const auto& r : rep.records) {
    rep.tp += r.tp;
    rep.fp += r.fp;
    rep.fn += r.fn;
    se_sum += r.se;
    ppv_sum += r.ppv;
  }
  const auto n = static_cast<double>(rep.records.size());
  rep.se_avg = se_sum / n;
  rep.ppv_avg = ppv_sum / n;
  rep.se_gross = ratio_pct(rep.tp, rep.tp + rep.fn, rep.fp);
  rep.ppv_gross = ratio_pct(rep.tp, rep.tp + rep.fp, rep.fn);
  rep.score = overall_score(rep.se_avg, rep.ppv_avg, rep.se_gross, rep.ppv_gross);
  return rep;
}

ScoreReport score_records(
    const std::vector<std::pair<AnnotationSet, DetectionResult>>& pairs,
    int fs, int tol_ms) {
  if (pairs.empty()) raise(errc::empty_input, "score_records: no record pairs");
  std::vector<RecordScore> records;
  records.reserve(pairs.size());
  for (const auto& [ref, est] : pairs) {
    const auto c = match_beats(ref.beat_samples, est.beat_samples, fs, tol_ms);
    records.push_back(make_record_score(ref.record_id, c.tp, c.fp, c.fn));
  }
  return aggregate_scores(std::move(records));
}

std::string format_pct(double pct) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", pct);
  return buf;
}

std::string render_report(const ScoreReport& report, const std::string& format) {
  if (format == "tsv") {
    std::string out = "rec\tpeaks\tFP\tFN\tSe\tPPV\n";
    for (const auto& r : report.records) {
      out += r.record_id + '\t' + std::to_string(r.peaks()) + '\t' +
             std::to_string(r.fp) + '\t' + std::to_string(r.fn) + '\t' +
             format_pct(r.se) + '\t' + format_pct(r.ppv) + '\n';
    }
    out += "# records with an empty denominator score 100 when the opposing "
           "count is also zero, else 0\n";
    out += "Se_avg\tPPV_avg\tSe_gross\tPPV_gross\tscore\n";
    out += format_pct(report.se_avg) + '\t' + format_pct(report.ppv_avg) +
           '\t' + format_pct(report.se_gross) + '\t' +
           format_pct(report.ppv_gross) + '\t' + format_pct(report.score) +
           '\n';
    return out;
  }
  if (format == "json") {
    json j;
    j["records"] = json::array();
    for (const auto& r : report.records)
      j["records"].push_back({{"rec", r.record_id},
                              {"TP", r.tp},
                              {"FP", r.fp},
                              {"FN", r.fn},
                              {"Se", r.se},
                              {"PPV", r.ppv}});
    j["TP"] = report.tp;
    j["FP"] = report.fp;
    j["FN"] = report.fn;
    j["Se_avg"] = report.se_avg;
    j["PPV_avg"] = report.ppv_avg;
    j["Se_gross"] = report.se_gross;
    j["PPV_gross"] = report.ppv_gross;
    j["score"] = report.score;
    return j.dump(2) + "\n";
  }
  raise(errc::unknown_format, "render_report: " + format);
}

ScoreReport score_report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    raise(errc::bad_header, std::string("score report JSON: ") + e.what());
  }
  ScoreReport rep;
  for (const auto& jr : j.at("records")) {
    RecordScore r;
    r.record_id = jr.at("rec").get<std::string>();
    r.tp = jr.at("TP").get<int64_t>();
    r.fp = jr.at("FP").get<int64_t>();
    r.fn = jr.at("FN").get<int64_t>();
    r.se = jr.at("Se").get<double>();
    r.ppv = jr.at("PPV").get<double>();
    rep.records.push_back(std::move(r));
  }
  rep.tp = j.at("TP").get<int64_t>();
  rep.fp = j.at("FP").get<int64_t>();
  rep.fn = j.at("FN").get<int64_t>();
  rep.se_avg = j.at("Se_avg").get<double>();
  rep.ppv_avg = j.at("PPV_avg").get<double>();
  rep.se_gross = j.at("Se_gross").get<double>();
  rep.ppv_gross = j.at("PPV_gross").get<double>();
  rep.score = j.at("score").get<double>();
  return rep;
}

}  // namespace cif
