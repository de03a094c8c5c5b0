#include "cif/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "cif/errors.hpp"
#include "cif/rng.hpp"

namespace cif {

namespace {

constexpr double kProbEps = 1e-12;

double sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double clamp_prob(double p) {
  if (std::isnan(p)) return p;  // keep divergence visible to the loss check
  return std::min(1.0 - kProbEps, std::max(kProbEps, p));
}

}  // namespace

void CifArchitecture::validate() const {
  if (channels < 1 || filters < 1 || window < 1 || hidden < 0 ||
      filter_len < 1 || filter_len > window)
    raise(errc::shape_mismatch,
          "architecture: need K >= 1, p >= 1, 1 <= L <= M, hidden >= 0");
}

size_t CifModel::param_count() const {
  const auto F = static_cast<size_t>(arch.feature_len());
  size_t n = conv_w_len() + arch.filters;
  if (arch.hidden > 0)
    n += static_cast<size_t>(arch.hidden) * F + arch.hidden + arch.hidden + 1;
  else
    n += F + 1;
  return n;
}

CifModel make_model(const CifArchitecture& arch, bool conv_bias) {
  arch.validate();
  CifModel m;
  m.arch = arch;
  m.conv_bias = conv_bias;
  m.params.assign(m.param_count(), 0.0);
  return m;
}

CifModel init_model(const CifArchitecture& arch, const TrainConfig& cfg) {
  CifModel m = make_model(arch, cfg.conv_bias);
  Rng rng(cfg.seed);
  // weights uniform in +-init_scale, biases left at zero
  for (size_t i = 0; i < m.conv_w_len(); ++i)
    m.params[i] = rng.uniform(-cfg.init_scale, cfg.init_scale);
  const auto F = static_cast<size_t>(arch.feature_len());
  double* fc = m.params.data() + m.fc_off();
  if (arch.hidden > 0) {
    const auto H = static_cast<size_t>(arch.hidden);
    for (size_t i = 0; i < H * F; ++i)
      fc[i] = rng.uniform(-cfg.init_scale, cfg.init_scale);
    for (size_t i = 0; i < H; ++i)
      fc[H * F + H + i] = rng.uniform(-cfg.init_scale, cfg.init_scale);
  } else {
    for (size_t i = 0; i < F; ++i)
      fc[i] = rng.uniform(-cfg.init_scale, cfg.init_scale);
  }
  m.seed = cfg.seed;
  return m;
}

template <typename T>
void conv_forward(const T* const* chans, const CifModel& m, double* features) {
  const int K = m.arch.channels;
  const int L = m.arch.filter_len;
  const int P = m.arch.filters;
  const int T_out = m.arch.conv_out();
  const double* h = m.params.data();  // [k][j][l]
  const double* b = m.params.data() + m.conv_b_off();
  for (int j = 0; j < P; ++j) {
    double* fj = features + static_cast<size_t>(j) * T_out;
    for (int i = 0; i < T_out; ++i) fj[i] = b[j];
    for (int k = 0; k < K; ++k) {
      const T* x = chans[k];
      const double* hk = h + (static_cast<size_t>(k) * P + j) * L;
      for (int i = 0; i < T_out; ++i) {
        // y_n = sum_l x[n - l] * h[l], n = i + L - 1
        const T* xn = x + i + L - 1;
        double acc = 0.0;
        for (int l = 0; l < L; ++l) acc += static_cast<double>(xn[-l]) * hk[l];
        fj[i] += acc;
      }
    }
    for (int i = 0; i < T_out; ++i) fj[i] = sigmoid(fj[i]);
  }
}

template <typename T>
double forward(const T* const* chans, const CifModel& m, Workspace& ws) {
  const auto F = static_cast<size_t>(m.arch.feature_len());
  conv_forward(chans, m, ws.features.data());
  const double* fc = m.params.data() + m.fc_off();
  double logit;
  if (m.arch.hidden > 0) {
    const auto H = static_cast<size_t>(m.arch.hidden);
    const double* w1 = fc;              // H x F
    const double* b1 = fc + H * F;      // H
    const double* w2 = b1 + H;          // H
    const double b2 = w2[H];
    for (size_t hn = 0; hn < H; ++hn) {
      double acc = b1[hn];
      const double* row = w1 + hn * F;
      for (size_t q = 0; q < F; ++q) acc += row[q] * ws.features[q];
      ws.hidden[hn] = sigmoid(acc);
    }
    logit = b2;
    for (size_t hn = 0; hn < H; ++hn) logit += w2[hn] * ws.hidden[hn];
  } else {
    logit = fc[F];
    for (size_t q = 0; q < F; ++q) logit += fc[q] * ws.features[q];
  }
  return clamp_prob(sigmoid(logit));
}

double forward(const std::vector<float>& window, const CifModel& m,
               Workspace& ws) {
  const size_t M = static_cast<size_t>(m.arch.window);
  if (window.size() != M * m.arch.channels)
    raise(errc::shape_mismatch, "window size does not match architecture");
  std::vector<const float*> chans(m.arch.channels);
  for (int k = 0; k < m.arch.channels; ++k) chans[k] = window.data() + k * M;
  return forward(chans.data(), m, ws);
}

double loss(double prob, uint8_t label) {
  const double p = clamp_prob(prob);
  return label ? -std::log(p) : -std::log(1.0 - p);
}

template <typename T>
double backward(const T* const* chans, uint8_t label, const CifModel& m,
                Workspace& ws, double* grad) {
  const int K = m.arch.channels;
  const int L = m.arch.filter_len;
  const int P = m.arch.filters;
  const int T_out = m.arch.conv_out();
  const auto F = static_cast<size_t>(m.arch.feature_len());

  const double prob = forward(chans, m, ws);
  const double d_logit = prob - static_cast<double>(label);

  const double* fc = m.params.data() + m.fc_off();
  double* g_fc = grad + m.fc_off();

  if (m.arch.hidden > 0) {
    const auto H = static_cast<size_t>(m.arch.hidden);
    const double* w1 = fc;
    const double* w2 = fc + H * F + H;
    double* g_w1 = g_fc;
    double* g_b1 = g_fc + H * F;
    double* g_w2 = g_b1 + H;
    double* g_b2 = g_w2 + H;
    std::fill(ws.d_features.begin(), ws.d_features.end(), 0.0);
    for (size_t hn = 0; hn < H; ++hn) {
      const double a = ws.hidden[hn];
      g_w2[hn] += d_logit * a;
      const double dz = d_logit * w2[hn] * a * (1.0 - a);
      g_b1[hn] += dz;
      double* g_row = g_w1 + hn * F;
      const double* row = w1 + hn * F;
      for (size_t q = 0; q < F; ++q) {
        g_row[q] += dz * ws.features[q];
        ws.d_features[q] += dz * row[q];
      }
    }
    *g_b2 += d_logit;
  } else {
    for (size_t q = 0; q < F; ++q) {
      g_fc[q] += d_logit * ws.features[q];
      ws.d_features[q] = d_logit * fc[q];
    }
    g_fc[F] += d_logit;
  }

  // through the feature sigmoid into conv weights and biases
  double* g_h = grad;
  double* g_b = grad + m.conv_b_off();
  for (int j = 0; j < P; ++j) {
    const double* fj = ws.features.data() + static_cast<size_t>(j) * T_out;
    const double* dj = ws.d_features.data() + static_cast<size_t>(j) * T_out;
    for (int i = 0; i < T_out; ++i) {
      const double dz = dj[i] * fj[i] * (1.0 - fj[i]);
      g_b[j] += dz;
      for (int k = 0; k < K; ++k) {
        const T* xn = chans[k] + i + L - 1;
        double* gk = g_h + (static_cast<size_t>(k) * P + j) * L;
        for (int l = 0; l < L; ++l) gk[l] += dz * static_cast<double>(xn[-l]);
      }
    }
  }
  return loss(prob, label);
}

template void conv_forward<float>(const float* const*, const CifModel&, double*);
template void conv_forward<double>(const double* const*, const CifModel&, double*);
template double forward<float>(const float* const*, const CifModel&, Workspace&);
template double forward<double>(const double* const*, const CifModel&, Workspace&);
template double backward<float>(const float* const*, uint8_t, const CifModel&,
                                Workspace&, double*);
template double backward<double>(const double* const*, uint8_t, const CifModel&,
                                 Workspace&, double*);

namespace {

void check_set_shape(const TrainingSet& set, const CifModel& m) {
  if (set.channels != m.arch.channels || set.window_len != m.arch.window)
    raise(errc::shape_mismatch,
          "training set is " + std::to_string(set.channels) + "x" +
              std::to_string(set.window_len) + ", model expects " +
              std::to_string(m.arch.channels) + "x" +
              std::to_string(m.arch.window));
}

double snippet_backward(const LabeledSnippet& s, const CifModel& m,
                        Workspace& ws, double* grad) {
  const size_t M = static_cast<size_t>(m.arch.window);
  const float* base = s.window.data();
  const float* chans[64];
  std::vector<const float*> big;
  const float** cp = chans;
  if (m.arch.channels > 64) {
    big.resize(m.arch.channels);
    cp = big.data();
  }
  for (int k = 0; k < m.arch.channels; ++k) cp[k] = base + k * M;
  return backward(cp, s.label, m, ws, grad);
}

}  // namespace

double batch_gradient_serial(const TrainingSet& set,
                             const std::vector<uint32_t>& batch,
                             const CifModel& m, std::vector<double>& grad) {
  check_set_shape(set, m);
  const size_t P = m.param_count();
  grad.assign(P, 0.0);
  if (batch.empty()) return 0.0;
  Workspace ws(m.arch);
  std::vector<double> snippet_grad(P);
  double loss_sum = 0.0;
  for (uint32_t idx : batch) {
    std::fill(snippet_grad.begin(), snippet_grad.end(), 0.0);
    loss_sum += snippet_backward(set.snippets[idx], m, ws, snippet_grad.data());
    for (size_t q = 0; q < P; ++q) grad[q] += snippet_grad[q];
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (auto& g : grad) g *= inv;
  return loss_sum * inv;
}

double batch_gradient(const TrainingSet& set,
                      const std::vector<uint32_t>& batch, const CifModel& m,
                      std::vector<double>& grad) {
  check_set_shape(set, m);
  const size_t P = m.param_count();
  grad.assign(P, 0.0);
  if (batch.empty()) return 0.0;
  const auto B = static_cast<int64_t>(batch.size());

  // One gradient slot per snippet, reduced in index order below: the result
  // does not depend on the number of threads.
  std::vector<double> slots(static_cast<size_t>(B) * P, 0.0);
  std::vector<double> losses(static_cast<size_t>(B), 0.0);
#pragma omp parallel
  {
    Workspace ws(m.arch);
#pragma omp for schedule(static)
    for (int64_t i = 0; i < B; ++i)
      losses[static_cast<size_t>(i)] =
          snippet_backward(set.snippets[batch[static_cast<size_t>(i)]], m, ws,
                           slots.data() + static_cast<size_t>(i) * P);
  }
  double loss_sum = 0.0;
  for (int64_t i = 0; i < B; ++i) {
    loss_sum += losses[static_cast<size_t>(i)];
    const double* src = slots.data() + static_cast<size_t>(i) * P;
    for (size_t q = 0; q < P; ++q) grad[q] += src[q];
  }
  const double inv = 1.0 / static_cast<double>(B);
  for (auto& g : grad) g *= inv;
  return loss_sum * inv;
}

CifModel train(const TrainingSet& set, const CifArchitecture& arch,
               const TrainConfig& cfg, std::vector<double>* epoch_losses) {
  if (set.snippets.empty()) raise(errc::empty_input, "train: empty training set");
  if (cfg.learning_rate < 0.0 || cfg.epochs < 1 || cfg.batch_size < 1)
    raise(errc::bad_config, "train: bad learning_rate/epochs/batch_size");

  CifModel m = init_model(arch, cfg);
  check_set_shape(set, m);
  m.epochs = cfg.epochs;
  m.learning_rate = cfg.learning_rate;

  std::vector<uint32_t> order(set.snippets.size());
  for (uint32_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng shuffle_rng(mix_seed(cfg.seed, 1));

  std::vector<double> grad;
  std::vector<uint32_t> batch;
  const size_t conv_b_lo = m.conv_b_off();
  const size_t conv_b_hi = conv_b_lo + arch.filters;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    size_t seen = 0;
    for (size_t pos = 0; pos < order.size(); pos += cfg.batch_size) {
      const size_t stop = std::min(order.size(), pos + cfg.batch_size);
      batch.assign(order.begin() + pos, order.begin() + stop);
      const double batch_loss = batch_gradient(set, batch, m, grad);
      loss_sum += batch_loss * static_cast<double>(batch.size());
      seen += batch.size();
      if (!m.conv_bias)
        std::fill(grad.begin() + conv_b_lo, grad.begin() + conv_b_hi, 0.0);
      for (size_t q = 0; q < grad.size(); ++q)
        m.params[q] -= cfg.learning_rate * grad[q];
    }
    const double epoch_loss = loss_sum / static_cast<double>(seen);
    if (!std::isfinite(epoch_loss))
      raise(errc::diverged_loss,
            "train: loss became non-finite at epoch " + std::to_string(epoch));
    if (epoch_losses) epoch_losses->push_back(epoch_loss);
    m.final_loss = epoch_loss;
  }
  return m;
}

double training_accuracy(const TrainingSet& set, const CifModel& m,
                         double threshold) {
  if (set.snippets.empty()) return 0.0;
  check_set_shape(set, m);
  const auto n = static_cast<int64_t>(set.snippets.size());
  std::vector<uint8_t> hit(static_cast<size_t>(n), 0);
#pragma omp parallel
  {
    Workspace ws(m.arch);
#pragma omp for schedule(static)
    for (int64_t i = 0; i < n; ++i) {
      const auto& s = set.snippets[static_cast<size_t>(i)];
      const double p = forward(s.window, m, ws);
      hit[static_cast<size_t>(i)] = ((p >= threshold ? 1 : 0) == s.label);
    }
  }
  size_t ok = 0;
  for (auto h : hit) ok += h;
  return static_cast<double>(ok) / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Model files
// ---------------------------------------------------------------------------

namespace {

constexpr char kModelMagic[4] = {'C', 'I', 'F', '1'};
constexpr uint32_t kModelVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
void get(std::ifstream& in, T& v, const std::string& path) {
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) raise(errc::truncated_payload, path + ": unexpected end of file");
}

}  // namespace

void save_model(const CifModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(errc::missing_payload, "cannot write: " + path);
  out.write(kModelMagic, 4);
  put(out, kModelVersion);
  put(out, static_cast<uint32_t>(m.arch.channels));
  put(out, static_cast<uint32_t>(m.arch.window));
  put(out, static_cast<uint32_t>(m.arch.filters));
  put(out, static_cast<uint32_t>(m.arch.filter_len));
  put(out, static_cast<uint32_t>(m.arch.hidden));
  put(out, static_cast<uint32_t>(m.conv_bias ? 1 : 0));
  put(out, m.seed);
  put(out, static_cast<uint32_t>(m.epochs));
  put(out, m.learning_rate);
  put(out, m.final_loss);
  out.write(reinterpret_cast<const char*>(m.params.data()),
            static_cast<std::streamsize>(m.params.size() * sizeof(double)));
  if (!out) raise(errc::missing_payload, "write failed: " + path);
}

CifModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(errc::missing_payload, "cannot open: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kModelMagic, 4) != 0)
    raise(errc::bad_magic, path + ": not a model file");
  uint32_t version;
  get(in, version, path);
  if (version != kModelVersion)
    raise(errc::version_mismatch, path + ": version " + std::to_string(version));

  CifModel m;
  uint32_t channels, window, filters, filter_len, hidden, flags, epochs;
  get(in, channels, path);
  get(in, window, path);
  get(in, filters, path);
  get(in, filter_len, path);
  get(in, hidden, path);
  get(in, flags, path);
  get(in, m.seed, path);
  get(in, epochs, path);
  get(in, m.learning_rate, path);
  get(in, m.final_loss, path);
  m.arch.channels = static_cast<int>(channels);
  m.arch.window = static_cast<int>(window);
  m.arch.filters = static_cast<int>(filters);
  m.arch.filter_len = static_cast<int>(filter_len);
  m.arch.hidden = static_cast<int>(hidden);
  m.arch.validate();
  m.conv_bias = flags & 1;
  m.epochs = static_cast<int>(epochs);
  m.params.resize(m.param_count());
  in.read(reinterpret_cast<char*>(m.params.data()),
          static_cast<std::streamsize>(m.params.size() * sizeof(double)));
  if (!in) raise(errc::truncated_payload, path + ": unexpected end of file");
  return m;
}

}  // namespace cif
