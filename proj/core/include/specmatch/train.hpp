#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specmatch/corpus.hpp"
#include "specmatch/mlp.hpp"

namespace specmatch {

struct TrainConfig {
  double margin = 5.0;
  int batch_size = 512;
  int iterations = 10000;
  double lr0 = 0.015;
  double lr_decay = 0.9999;  // multiplicative, per step
  AdamConfig adam;
  double soft_label_max = 0.2;
  std::uint64_t seed = 1;
  int hidden1 = 0;  // 0 selects the per-kind default (78/32 or 20/18)
  int hidden2 = 0;
  int embedding_dim = kEmbeddingDim;
  bool standardize_inputs = true;
  int eval_cadence = 250;  // held-out metric period in iterations; 0 disables
  int eval_pairs = 2048;

  void validate() const;
};

// lr0 * decay^step
double learning_rate_at(const TrainConfig& config, long step);

struct EvalPoint {
  int iteration = 0;
  double loss = 0.0, tnr = 0.0, fpr = 0.0, err = 0.0;
};

struct TrainHistory {
  std::vector<double> train_loss;  // one entry per iteration
  std::vector<EvalPoint> eval_points;
};

struct TrainResult {
  MlpParams params;
  TrainHistory history;
};

// Full training loop: per-dimension input standardization over the corpus,
// He init, then `iterations` steps of (sample batch, backprop, Adam with the
// decayed rate). Bit-reproducible for a fixed seed and corpus.
TrainResult train(const Corpus& corpus, DescriptorKind kind, const TrainConfig& config);

// CSV: iteration,loss,lr plus val_loss,val_tnr,val_fpr,val_err on cadence rows.
std::string history_csv(const TrainHistory& history, const TrainConfig& config);

}  // namespace specmatch
