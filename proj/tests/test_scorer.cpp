#include <random>

#include "cif/errors.hpp"
#include "cif/scorer.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cif;

TEST_CASE("match_beats boundary: 37 samples in, 38 samples out") {
  const auto in = match_beats({1000}, {1037});
  CHECK(in.tp == 1);
  CHECK(in.fp == 0);
  CHECK(in.fn == 0);

  const auto out = match_beats({1000}, {1038});
  CHECK(out.tp == 0);
  CHECK(out.fp == 1);
  CHECK(out.fn == 1);
}

TEST_CASE("match_beats on identical sequences is all true positives") {
  const std::vector<int64_t> ref{100, 350, 600, 850};
  const auto c = match_beats(ref, ref);
  CHECK(c.tp == 4);
  CHECK(c.fp == 0);
  CHECK(c.fn == 0);
}

TEST_CASE("greedy matching equals exhaustive optimal matching") {
  std::mt19937_64 gen(37);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int64_t> ref, est;
    const size_t n_ref = gen() % 13, n_est = gen() % 13;
    int64_t t = 0;
    for (size_t i = 0; i < n_ref; ++i) ref.push_back(t += 5 + gen() % 120);
    t = 0;
    for (size_t i = 0; i < n_est; ++i) est.push_back(t += 5 + gen() % 120);

    const auto c = match_beats(ref, est);
    CHECK(c.tp == test_util::optimal_match_oracle(ref, est, 37));
    CHECK(c.tp + c.fn == static_cast<int64_t>(ref.size()));
    CHECK(c.tp + c.fp == static_cast<int64_t>(est.size()));
  }
}

TEST_CASE("matching is invariant under a uniform time shift") {
  std::mt19937_64 gen(41);
  std::vector<int64_t> ref, est;
  int64_t t = 0;
  for (int i = 0; i < 30; ++i) ref.push_back(t += 40 + gen() % 150);
  t = 12;
  for (int i = 0; i < 28; ++i) est.push_back(t += 45 + gen() % 150);
  const auto base = match_beats(ref, est);
  for (int64_t shift : {100, 5000}) {
    auto ref_s = ref, est_s = est;
    for (auto& v : ref_s) v += shift;
    for (auto& v : est_s) v += shift;
    const auto c = match_beats(ref_s, est_s);
    CHECK(c.tp == base.tp);
    CHECK(c.fp == base.fp);
    CHECK(c.fn == base.fn);
  }
}

TEST_CASE("gross fixture: TP=109422, FP=103, FN=72") {
  const auto rep =
      aggregate_scores({make_record_score("all", 109422, 103, 72)});
  CHECK(rep.tp + rep.fn == 109494);
  CHECK(format_pct(rep.se_gross) == "99.93");
  CHECK(format_pct(rep.ppv_gross) == "99.91");
}

TEST_CASE("overall score fixture: four components average to 94.00") {
  CHECK(format_pct(overall_score(92.85, 94.29, 93.41, 95.47)) == "94.00");
}

TEST_CASE("per-record fixture: 2572 peaks, FP=11, FN=12") {
  const auto r = make_record_score("105", 2572 - 12, 11, 12);
  CHECK(r.peaks() == 2572);
  CHECK(format_pct(r.se) == "99.53");
  CHECK(format_pct(r.ppv) == "99.57");
}

TEST_CASE("zero-denominator conventions") {
  // empty record, no detections: both sides perfect
  const auto clean = make_record_score("empty", 0, 0, 0);
  CHECK(clean.se == 100.0);
  CHECK(clean.ppv == 100.0);

  // no reference beats but detections exist: sensitivity forfeits
  const auto spurious = make_record_score("spurious", 0, 3, 0);
  CHECK(spurious.se == 0.0);
  CHECK(spurious.ppv == 0.0);  // 0/3

  // beats exist but nothing detected: PPV forfeits
  const auto silent = make_record_score("silent", 0, 0, 5);
  CHECK(silent.se == 0.0);  // 0/5
  CHECK(silent.ppv == 0.0);
}

TEST_CASE("score_records aggregates per-record and gross values differently") {
  // rec a: 1 of 2 matched; rec b: 8 of 8 matched
  std::vector<std::pair<AnnotationSet, DetectionResult>> pairs(2);
  pairs[0].first.record_id = "a";
  pairs[0].first.beat_samples = {100, 400};
  pairs[0].second.record_id = "a";
  pairs[0].second.beat_samples = {110};
  pairs[1].first.record_id = "b";
  pairs[1].second.record_id = "b";
  for (int i = 0; i < 8; ++i) {
    pairs[1].first.beat_samples.push_back(200 * (i + 1));
    pairs[1].second.beat_samples.push_back(200 * (i + 1) + 20);
  }
  const auto rep = score_records(pairs);
  CHECK(rep.records[0].se == doctest::Approx(50.0));
  CHECK(rep.records[0].ppv == doctest::Approx(100.0));
  CHECK(rep.se_avg == doctest::Approx(75.0));         // (50 + 100) / 2
  CHECK(rep.se_gross == doctest::Approx(90.0));       // 9 / 10
  CHECK(rep.ppv_gross == doctest::Approx(100.0));
  CHECK(rep.score == doctest::Approx((75.0 + 100.0 + 90.0 + 100.0) / 4));
}

TEST_CASE("a perfect run renders as straight 100.00s") {
  const auto rep = aggregate_scores({make_record_score("a", 10, 0, 0),
                                     make_record_score("b", 25, 0, 0)});
  CHECK(format_pct(rep.score) == "100.00");
  const auto tsv = render_report(rep, "tsv");
  CHECK(tsv.find("rec\tpeaks\tFP\tFN\tSe\tPPV") == 0);
  CHECK(tsv.find("a\t10\t0\t0\t100.00\t100.00") != std::string::npos);
  CHECK(tsv.find("100.00\t100.00\t100.00\t100.00\t100.00") != std::string::npos);
}

TEST_CASE("JSON report round-trips to an identical ScoreReport") {
  const auto rep = aggregate_scores({make_record_score("a", 2560, 11, 12),
                                     make_record_score("b", 2273, 0, 1)});
  const auto back = score_report_from_json(render_report(rep, "json"));
  CHECK(back.records.size() == rep.records.size());
  for (size_t i = 0; i < rep.records.size(); ++i) {
    CHECK(back.records[i].record_id == rep.records[i].record_id);
    CHECK(back.records[i].tp == rep.records[i].tp);
    CHECK(back.records[i].fp == rep.records[i].fp);
    CHECK(back.records[i].fn == rep.records[i].fn);
    CHECK(back.records[i].se == rep.records[i].se);    // full precision
    CHECK(back.records[i].ppv == rep.records[i].ppv);
  }
  CHECK(back.tp == rep.tp);
  CHECK(back.se_avg == rep.se_avg);
  CHECK(back.ppv_avg == rep.ppv_avg);
  CHECK(back.se_gross == rep.se_gross);
  CHECK(back.ppv_gross == rep.ppv_gross);
  CHECK(back.score == rep.score);
}

TEST_CASE("unknown report format raises") {
  const auto rep = aggregate_scores({make_record_score("a", 1, 0, 0)});
  try {
    render_report(rep, "xml");
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == errc::unknown_format);
  }
}

TEST_CASE("empty input raises") {
  CHECK_THROWS_AS(score_records({}), Error);
  CHECK_THROWS_AS(aggregate_scores({}), Error);
}
