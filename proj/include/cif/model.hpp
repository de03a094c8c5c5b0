#ifndef CIF_MODEL_HPP
#define CIF_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cif/dataset.hpp"

namespace cif {

/// Shallow fusion network: one convolution layer of `filters` filters, each
/// built from `channels` component 1-D filters of common length `filter_len`
/// whose outputs are summed, sigmoid feature nonlinearity, then a fully
/// connected head (optional single hidden layer) to one output unit.
struct CifArchitecture {
  int channels = 2;
  int window = kSnippetLen;
  int filters = 2;
  int filter_len = 20;
  int hidden = 0;  // 0 = no hidden layer

  /// Outputs per filter; no zero-padding, so shorter filters emit more.
  int conv_out() const { return window - filter_len + 1; }
  int feature_len() const { return filters * conv_out(); }
  void validate() const;

  bool operator==(const CifArchitecture&) const = default;
};

struct TrainConfig {
  double learning_rate = 0.05;
  int epochs = 30;
  int batch_size = 32;
  uint64_t seed = 1;
  double init_scale = 0.1;
  bool conv_bias = true;  // off = strict filter-equation mode
};

/// Parameters live in one flat vector, in file order:
///   conv weights h[k][j][l] (k-major), conv biases b[j],
///   then either W (F) + b, or W1 (hidden x F row-major) + b1 (hidden)
///   + W2 (hidden) + b2.
struct CifModel {
  CifArchitecture arch;
  bool conv_bias = true;
  std::vector<double> params;

  // training metadata
  uint64_t seed = 0;
  int epochs = 0;
  double learning_rate = 0.0;
  double final_loss = 0.0;

  size_t conv_w_off() const { return 0; }
  size_t conv_w_len() const {
    return static_cast<size_t>(arch.channels) * arch.filters * arch.filter_len;
  }
  size_t conv_b_off() const { return conv_w_len(); }
  size_t fc_off() const { return conv_b_off() + arch.filters; }
  size_t param_count() const;

  double& conv_w(int k, int j, int l) {
    return params[(static_cast<size_t>(k) * arch.filters + j) * arch.filter_len + l];
  }
  double conv_w(int k, int j, int l) const {
    return params[(static_cast<size_t>(k) * arch.filters + j) * arch.filter_len + l];
  }
};

/// Scratch buffers reused across forward/backward calls (one per thread).
struct Workspace {
  std::vector<double> features;      // F, post-sigmoid
  std::vector<double> hidden;        // hidden nodes, post-sigmoid
  std::vector<double> d_features;    // backward scratch
  explicit Workspace(const CifArchitecture& arch)
      : features(static_cast<size_t>(arch.feature_len())),
        hidden(static_cast<size_t>(arch.hidden)),
        d_features(static_cast<size_t>(arch.feature_len())) {}
};

/// Zero-weight model with the given architecture.
CifModel make_model(const CifArchitecture& arch, bool conv_bias = true);

/// Seeded uniform(+-init_scale) weight init; biases start at zero.
CifModel init_model(const CifArchitecture& arch, const TrainConfig& cfg);

// ---------------------------------------------------------------------------
// Forward / backward. Windows are given as per-channel pointers, each to
// `window` contiguous samples; float for stored snippets, double for record
// slices. Feature vector layout: filter-major, position within filter.
// ---------------------------------------------------------------------------

template <typename T>
void conv_forward(const T* const* chans, const CifModel& m, double* features);

template <typename T>
double forward(const T* const* chans, const CifModel& m, Workspace& ws);

/// Convenience overload for a K x M row-major snippet window.
double forward(const std::vector<float>& window, const CifModel& m,
               Workspace& ws);

/// Cross-entropy with probability clamped to [1e-12, 1 - 1e-12].
double loss(double prob, uint8_t label);

/// Accumulates d(loss)/d(params) into `grad` (same layout as params);
/// returns the loss.
template <typename T>
double backward(const T* const* chans, uint8_t label, const CifModel& m,
                Workspace& ws, double* grad);

// ---------------------------------------------------------------------------
// Training. batch_gradient computes the batch-mean loss and gradient; the
// parallel version computes per-snippet gradients concurrently and reduces
// them in index order, so results are bit-identical to the serial reference
// at any thread count.
// ---------------------------------------------------------------------------

double batch_gradient(const TrainingSet& set,
                      const std::vector<uint32_t>& batch, const CifModel& m,
                      std::vector<double>& grad);
double batch_gradient_serial(const TrainingSet& set,
                             const std::vector<uint32_t>& batch,
                             const CifModel& m, std::vector<double>& grad);

/// Seeded mini-batch SGD under cross-entropy. Deterministic: fixed init,
/// fixed shuffle sequence, sequential updates.
CifModel train(const TrainingSet& set, const CifArchitecture& arch,
               const TrainConfig& cfg, std::vector<double>* epoch_losses = nullptr);

/// Fraction of snippets whose thresholded prediction matches the label.
double training_accuracy(const TrainingSet& set, const CifModel& m,
                         double threshold = 0.5);

// ---------------------------------------------------------------------------
// Model files: magic "CIF1", version, arch, flags, training metadata, then
// float64 params in the layout documented above.
// ---------------------------------------------------------------------------

void save_model(const CifModel& m, const std::string& path);
CifModel load_model(const std::string& path);

}  // namespace cif

#endif
