#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "specmatch/descriptors.hpp"

namespace specmatch {

inline constexpr int kEmbeddingDim = 15;

// Hidden widths used when none are requested: (78, 32) for the 100-d
// heat/wave inputs, (20, 18) for the 25-d GPS input.
void default_hidden_dims(DescriptorKind kind, int& h1, int& h2);

// One Siamese branch: standardize -> FC+ReLU -> FC+ReLU -> FC (linear).
// Both branches share this single parameter store, so weight sharing is
// structural rather than enforced by synchronization.
struct MlpParams {
  DescriptorKind input_kind = DescriptorKind::Hks;
  std::vector<int> layer_dims;          // {d_in, h1, h2, d_out}
  std::vector<Eigen::MatrixXd> weights; // weights[l]: dims[l+1] x dims[l]
  std::vector<Eigen::VectorXd> biases;  // biases[l]: dims[l+1]
  Eigen::VectorXd input_mean;           // standardization; identity when mean=0, scale=1
  Eigen::VectorXd input_scale;

  int input_dim() const { return layer_dims.front(); }
  int output_dim() const { return layer_dims.back(); }
  int layer_count() const { return static_cast<int>(weights.size()); }
};

// Gradient (and Adam moment) storage with the same shape as MlpParams.
struct MlpGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static MlpGradients zeros_like(const MlpParams& params);
  void set_zero();
};

// He-scaled Gaussian weights (variance 2/fan_in), zero biases; bit-identical
// for a given seed. Standardization starts as identity.
MlpParams init_params(DescriptorKind kind, int d_in, int h1, int h2, int d_out, std::uint64_t seed);

Eigen::VectorXd forward(const MlpParams& params, const Eigen::VectorXd& input);

// Row-wise batch forward; exactly equivalent to stacking per-row results.
Eigen::MatrixXd forward_batch(const MlpParams& params, const Eigen::MatrixXd& inputs);

// y * d2 + (1-y) * max(0, margin - d2) with d2 the squared embedding distance.
double contrastive_loss(const Eigen::VectorXd& embedding_f, const Eigen::VectorXd& embedding_g, double label,
                        double margin);

// Mean contrastive loss over rows of (embedded_f, embedded_g).
double batch_loss_from_embeddings(const Eigen::MatrixXd& embedded_f, const Eigen::MatrixXd& embedded_g,
                                  const Eigen::VectorXd& labels, double margin);

// Exact gradient of the mean batch loss through both shared-weight branches.
// The hinge takes subgradient 0 at its kink. Returns the batch loss.
double batch_gradients(const MlpParams& params, const Eigen::MatrixXd& rows_f, const Eigen::MatrixXd& rows_g,
                       const Eigen::VectorXd& labels, double margin, MlpGradients& out);

struct AdamState {
  MlpGradients first_moment;
  MlpGradients second_moment;
  long step = 0;

  static AdamState zeros_like(const MlpParams& params);
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Standard bias-corrected Adam update; the caller supplies the decayed
// learning rate for this step.
void adam_step(MlpParams& params, AdamState& state, const MlpGradients& grads, double learning_rate,
               const AdamConfig& config = {});

// SMN1 model file: magic, version byte, kind tag, layer dims, then
// standardization and the weight/bias blocks in layer order, float64 LE.
void save_model(const MlpParams& params, const std::filesystem::path& path);
MlpParams load_model(const std::filesystem::path& path);

}  // namespace specmatch
