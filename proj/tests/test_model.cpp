#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "cif/errors.hpp"
#include "cif/model.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cif;

namespace {

double sigmoid_ref(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<float> random_window(const CifArchitecture& arch, uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<float> w(static_cast<size_t>(arch.channels) * arch.window);
  for (auto& v : w) v = static_cast<float>(dist(gen));
  return w;
}

CifModel random_model(const CifArchitecture& arch, uint64_t seed,
                      double scale = 0.5) {
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.init_scale = scale;
  auto m = init_model(arch, cfg);
  // biases too, so gradient checks exercise them from nonzero values
  std::mt19937_64 gen(seed + 1);
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (double& p : m.params) if (p == 0.0) p = dist(gen);
  return m;
}

// loss as a function of one scalar parameter, for finite differences
double loss_at(const CifModel& base, size_t param, double value,
               const std::vector<float>& window, uint8_t label) {
  CifModel m = base;
  m.params[param] = value;
  Workspace ws(m.arch);
  return loss(forward(window, m, ws), label);
}

}  // namespace

TEST_CASE("feature length follows p(M - L + 1) across the sweep grid") {
  CifArchitecture headline{2, 251, 2, 20, 0};
  CHECK(headline.feature_len() == 464);  // 2 * 232

  for (int p : {1, 2, 3}) {
    int prev = 0;
    for (int L : {250, 150, 20, 1}) {  // decreasing L
      CifArchitecture arch{2, 251, p, L, 0};
      CHECK(arch.feature_len() == p * (251 - L + 1));
      CHECK(arch.feature_len() > prev);  // shorter filters emit more outputs
      prev = arch.feature_len();
      const auto m = make_model(arch);
      Workspace ws(arch);
      CHECK(ws.features.size() == static_cast<size_t>(arch.feature_len()));
      CHECK(m.param_count() ==
            static_cast<size_t>(2 * p * L) + p + arch.feature_len() + 1);
    }
  }
}

TEST_CASE("architecture validation rejects bad shapes") {
  CHECK_THROWS_AS(make_model({2, 251, 0, 20, 0}), Error);
  CHECK_THROWS_AS(make_model({2, 251, 1, 252, 0}), Error);
  CHECK_THROWS_AS(make_model({0, 251, 1, 20, 0}), Error);
}

TEST_CASE("a unit tap on channel 0 reproduces sigmoid of the input") {
  CifArchitecture arch{2, 10, 1, 1, 0};
  auto m = make_model(arch);
  m.conv_w(0, 0, 0) = 1.0;  // identity filter, zero bias
  const auto window = random_window(arch, 3);
  std::vector<double> features(arch.feature_len());
  const float* chans[2] = {window.data(), window.data() + 10};
  conv_forward(chans, m, features.data());
  for (int i = 0; i < 10; ++i)
    CHECK(features[i] ==
          doctest::Approx(sigmoid_ref(window[i])).epsilon(1e-12));
}

TEST_CASE("conv_forward matches the nested-loop oracle") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int K = 2, M = 5 + static_cast<int>(gen() % 8);
    const int P = 1 + static_cast<int>(gen() % 3);
    const int L = 1 + static_cast<int>(gen() % M);
    CifArchitecture arch{K, M, P, L, 0};
    auto m = random_model(arch, 100 + trial);

    std::vector<std::vector<double>> window(K, std::vector<double>(M));
    for (auto& ch : window)
      for (auto& v : ch) v = dist(gen);
    std::vector<std::vector<std::vector<double>>> taps(
        K, std::vector<std::vector<double>>(P, std::vector<double>(L)));
    std::vector<double> bias(P);
    for (int k = 0; k < K; ++k)
      for (int j = 0; j < P; ++j)
        for (int l = 0; l < L; ++l) taps[k][j][l] = m.conv_w(k, j, l);
    for (int j = 0; j < P; ++j) bias[j] = m.params[m.conv_b_off() + j];

    const auto want = test_util::conv_oracle(window, taps, bias);

    std::vector<const double*> chans(K);
    for (int k = 0; k < K; ++k) chans[k] = window[k].data();
    std::vector<double> got(arch.feature_len());
    conv_forward(chans.data(), m, got.data());
    REQUIRE(got.size() == want.size());
    for (size_t i = 0; i < got.size(); ++i)
      CHECK(got[i] == doctest::Approx(sigmoid_ref(want[i])).epsilon(1e-12));
  }
}

TEST_CASE("forward with all-zero weights outputs 0.5") {
  for (int hidden : {0, 4}) {
    CifArchitecture arch{2, 30, 2, 5, hidden};
    const auto m = make_model(arch);
    Workspace ws(arch);
    CHECK(forward(random_window(arch, 5), m, ws) == 0.5);
  }
}

TEST_CASE("forward output lies strictly inside (0,1)") {
  CifArchitecture arch{2, 30, 2, 5, 0};
  for (uint64_t seed = 0; seed < 20; ++seed) {
    auto m = random_model(arch, seed, seed < 10 ? 0.5 : 50.0);  // incl. saturated
    Workspace ws(arch);
    const double p = forward(random_window(arch, seed * 7 + 1), m, ws);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }
}

TEST_CASE("forward on a channel-zeroed snippet equals the K=1 restriction") {
  CifArchitecture arch{2, 40, 2, 7, 0};
  const auto m = random_model(arch, 21);
  auto window = random_window(arch, 22);
  std::fill(window.begin() + 40, window.end(), 0.0f);  // zero channel 1

  Workspace ws(arch);
  const double got = forward(window, m, ws);

  // brute-force: only channel-0 taps contribute
  std::vector<double> logits;
  for (int j = 0; j < 2; ++j)
    for (int n = 6; n < 40; ++n) {
      double acc = m.params[m.conv_b_off() + j];
      for (int l = 0; l < 7; ++l)
        acc += static_cast<double>(window[n - l]) * m.conv_w(0, j, l);
      logits.push_back(acc);
    }
  const double* fc = m.params.data() + m.fc_off();
  double z = fc[logits.size()];
  for (size_t q = 0; q < logits.size(); ++q)
    z += fc[q] * sigmoid_ref(logits[q]);
  CHECK(got == doctest::Approx(sigmoid_ref(z)).epsilon(1e-12));
}

TEST_CASE("cross-entropy loss values and logit gradient") {
  CHECK(loss(0.5, 0) == doctest::Approx(std::log(2.0)));
  CHECK(loss(0.5, 1) == doctest::Approx(std::log(2.0)));
  CHECK(loss(1.0 - 1e-13, 1) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(loss(1e-13, 0) == doctest::Approx(0.0).epsilon(1e-9));

  // d(loss)/d(logit) = prob - label, by central difference on the logit
  for (double logit : {-2.0, -0.3, 0.0, 0.7, 3.1}) {
    for (uint8_t label : {0, 1}) {
      const double h = 1e-6;
      const double fd = (loss(sigmoid_ref(logit + h), label) -
                         loss(sigmoid_ref(logit - h), label)) /
                        (2 * h);
      CHECK(fd == doctest::Approx(sigmoid_ref(logit) - label).epsilon(1e-6));
    }
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  for (int hidden : {0, 4}) {
    for (uint64_t seed = 0; seed < 4; ++seed) {
      CifArchitecture arch{2, 12, 2, 3, hidden};
      const auto m = random_model(arch, 300 + seed);
      const auto window = random_window(arch, 400 + seed);
      const uint8_t label = seed % 2;

      std::vector<double> grad(m.param_count(), 0.0);
      Workspace ws(arch);
      const float* chans[2] = {window.data(), window.data() + 12};
      backward(chans, label, m, ws, grad.data());

      const double h = 1e-5;
      for (size_t q = 0; q < m.param_count(); ++q) {
        const double p0 = m.params[q];
        const double fd = (loss_at(m, q, p0 + h, window, label) -
                           loss_at(m, q, p0 - h, window, label)) /
                          (2 * h);
        const double denom = std::max({1.0, std::fabs(fd), std::fabs(grad[q])});
        CHECK(std::fabs(fd - grad[q]) / denom < 1e-5);
      }
    }
  }
}

TEST_CASE("a zero window sends gradients only through the conv biases") {
  CifArchitecture arch{2, 12, 2, 3, 0};
  const auto m = random_model(arch, 31);
  std::vector<float> window(24, 0.0f);
  std::vector<double> grad(m.param_count(), 0.0);
  Workspace ws(arch);
  const float* chans[2] = {window.data(), window.data() + 12};
  backward(chans, 1, m, ws, grad.data());
  for (size_t q = 0; q < m.conv_w_len(); ++q) CHECK(grad[q] == 0.0);
  for (int j = 0; j < 2; ++j) CHECK(grad[m.conv_b_off() + j] != 0.0);
}

TEST_CASE("backward accumulation is linear: twice the call, twice the grad") {
  CifArchitecture arch{2, 12, 1, 3, 0};
  const auto m = random_model(arch, 41);
  const auto window = random_window(arch, 42);
  const float* chans[2] = {window.data(), window.data() + 12};
  Workspace ws(arch);
  std::vector<double> once(m.param_count(), 0.0), twice(m.param_count(), 0.0);
  backward(chans, 1, m, ws, once.data());
  backward(chans, 1, m, ws, twice.data());
  backward(chans, 1, m, ws, twice.data());
  for (size_t q = 0; q < once.size(); ++q)
    CHECK(twice[q] == doctest::Approx(2.0 * once[q]).epsilon(1e-12));
}

namespace {

// positives: a centered spike; negatives: flat noise
TrainingSet separable_set(size_t per_class, uint64_t seed) {
  CifArchitecture arch{1, 61, 1, 9, 0};
  TrainingSet set;
  set.channels = 1;
  set.window_len = 61;
  set.record_ids = {"synthetic"};
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> noise(-0.05, 0.05);
  for (size_t i = 0; i < 2 * per_class; ++i) {
    LabeledSnippet s;
    s.record = 0;
    s.start = static_cast<int64_t>(i);
    s.label = i < per_class ? 1 : 0;
    s.mask = {1};
    s.window.resize(61);
    for (auto& v : s.window) v = static_cast<float>(noise(gen));
    if (s.label) {
      s.window[30] += 1.0f;
      s.window[29] -= 0.4f;
      s.window[31] -= 0.4f;
    }
    set.snippets.push_back(std::move(s));
  }
  return set;
}

}  // namespace

TEST_CASE("training separates an easy synthetic set to 99% accuracy") {
  const auto set = separable_set(120, 51);
  TrainConfig cfg;
  cfg.seed = 7;
  const auto m = train(set, {1, 61, 1, 9, 0}, cfg);
  CHECK(training_accuracy(set, m) >= 0.99);
  CHECK(m.final_loss < 0.35);
}

TEST_CASE("training is deterministic under a fixed seed") {
  const auto set = separable_set(40, 52);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 99;
  const auto a = train(set, {1, 61, 1, 9, 0}, cfg);
  const auto b = train(set, {1, 61, 1, 9, 0}, cfg);
  REQUIRE(a.params.size() == b.params.size());
  CHECK(std::memcmp(a.params.data(), b.params.data(),
                    a.params.size() * sizeof(double)) == 0);
}

TEST_CASE("zero learning rate leaves the seeded init untouched") {
  const auto set = separable_set(20, 53);
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.epochs = 3;
  cfg.seed = 5;
  const auto trained = train(set, {1, 61, 1, 9, 0}, cfg);
  const auto fresh = init_model({1, 61, 1, 9, 0}, cfg);
  CHECK(trained.params == fresh.params);
}

TEST_CASE("disabling conv bias freezes it at zero through training") {
  const auto set = separable_set(30, 54);
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.conv_bias = false;
  const auto m = train(set, {1, 61, 1, 9, 0}, cfg);
  CHECK(m.params[m.conv_b_off()] == 0.0);
}

TEST_CASE("training reports divergence instead of emitting NaN weights") {
  // a corrupted (NaN) sample makes the epoch loss non-finite
  TrainingSet set;
  set.channels = 1;
  set.window_len = 8;
  set.record_ids = {"r"};
  for (int i = 0; i < 8; ++i) {
    LabeledSnippet s;
    s.record = 0;
    s.label = static_cast<uint8_t>(i % 2);
    s.mask = {1};
    s.window.assign(8, 0.1f);
    set.snippets.push_back(std::move(s));
  }
  set.snippets[3].window[5] = std::numeric_limits<float>::quiet_NaN();
  TrainConfig cfg;
  cfg.epochs = 2;
  try {
    train(set, {1, 8, 1, 2, 0}, cfg);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == errc::diverged_loss);
  }
}

TEST_CASE("model save/load round-trips bitwise") {
  test_util::TempDir dir("model");
  for (int hidden : {0, 3}) {
    CifArchitecture arch{2, 31, 2, 6, hidden};
    auto m = random_model(arch, 61 + hidden);
    m.epochs = 12;
    m.learning_rate = 0.025;
    m.final_loss = 0.125;
    const auto path = dir.file("m" + std::to_string(hidden) + ".cif");
    save_model(m, path);
    const auto back = load_model(path);
    CHECK(back.arch == m.arch);
    CHECK(back.conv_bias == m.conv_bias);
    CHECK(back.seed == m.seed);
    CHECK(back.epochs == m.epochs);
    CHECK(back.learning_rate == m.learning_rate);
    CHECK(back.final_loss == m.final_loss);
    REQUIRE(back.params.size() == m.params.size());
    CHECK(std::memcmp(back.params.data(), m.params.data(),
                      m.params.size() * sizeof(double)) == 0);

    Workspace ws(arch);
    const auto window = random_window(arch, 70);
    CHECK(forward(window, m, ws) == forward(window, back, ws));
  }
}

TEST_CASE("model loader rejects foreign and truncated files") {
  test_util::TempDir dir("model_bad");
  test_util::spit(dir.file("bad.cif"), "BOGUS FILE CONTENT");
  try {
    load_model(dir.file("bad.cif"));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == errc::bad_magic);
  }

  auto m = random_model({1, 21, 1, 4, 0}, 77);
  save_model(m, dir.file("ok.cif"));
  const auto bytes = test_util::slurp(dir.file("ok.cif"));
  test_util::spit(dir.file("cut.cif"), bytes.substr(0, bytes.size() / 2));
  try {
    load_model(dir.file("cut.cif"));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == errc::truncated_payload);
  }

  // same magic, wrong version
  std::string v = bytes;
  v[4] = 9;
  test_util::spit(dir.file("v9.cif"), v);
  try {
    load_model(dir.file("v9.cif"));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == errc::version_mismatch);
  }
}
