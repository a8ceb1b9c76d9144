#include "specmatch/train.hpp"

#include <cmath>
#include <cstdio>

#include "specmatch/error.hpp"
#include "specmatch/matching.hpp"

namespace specmatch {

void TrainConfig::validate() const {
  require(margin > 0.0, ErrorCode::InvalidArgument, "margin must be positive");
  require(batch_size >= 2 && batch_size % 2 == 0, ErrorCode::InvalidArgument, "batch size must be even");
  require(iterations >= 0, ErrorCode::InvalidArgument, "iterations must be nonnegative");
  require(lr0 > 0.0, ErrorCode::InvalidArgument, "learning rate must be positive");
  require(lr_decay > 0.0 && lr_decay <= 1.0, ErrorCode::InvalidArgument, "decay must be in (0, 1]");
  require(soft_label_max >= 0.0 && soft_label_max < 1.0, ErrorCode::InvalidArgument,
          "soft label ceiling must be in [0, 1)");
  require(embedding_dim >= 1, ErrorCode::InvalidArgument, "embedding dimension must be positive");
  require(eval_cadence >= 0, ErrorCode::InvalidArgument, "eval cadence must be nonnegative");
  require(eval_pairs >= 2, ErrorCode::InvalidArgument, "need at least 2 evaluation pairs");
}

double learning_rate_at(const TrainConfig& config, long step) {
  return config.lr0 * std::pow(config.lr_decay, static_cast<double>(step));
}

namespace {

// Per-dimension mean and standard deviation over every vertex of every model.
void standardization_stats(const Corpus& corpus, DescriptorKind kind, Eigen::VectorXd& mean,
                           Eigen::VectorXd& scale) {
  const int d = corpus.descriptors(0, kind).dimension();
  mean = Eigen::VectorXd::Zero(d);
  double count = 0.0;
  for (int m = 0; m < corpus.model_count(); ++m) {
    const auto& values = corpus.descriptors(m, kind).values;
    mean += values.colwise().sum().transpose();
    count += static_cast<double>(values.rows());
  }
  mean /= count;
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(d);
  for (int m = 0; m < corpus.model_count(); ++m) {
    const auto& values = corpus.descriptors(m, kind).values;
    sq += (values.rowwise() - mean.transpose()).array().square().colwise().sum().matrix().transpose();
  }
  scale = (sq / count).cwiseSqrt().cwiseMax(1e-12);
}

}  // namespace

TrainResult train(const Corpus& corpus, DescriptorKind kind, const TrainConfig& config) {
  config.validate();
  require(corpus.model_count() >= 2, ErrorCode::EmptyCorpus, "training needs at least two models");
  for (int m = 0; m < corpus.model_count(); ++m) {
    require(corpus.models[m].descriptors.count(kind) > 0, ErrorCode::DescriptorMissing,
            corpus.models[m].name + " lacks " + descriptor_kind_name(kind) + " descriptors");
  }

  const int d_in = corpus.descriptors(0, kind).dimension();
  int h1 = config.hidden1, h2 = config.hidden2;
  if (h1 == 0 || h2 == 0) {
    int dh1, dh2;
    default_hidden_dims(kind, dh1, dh2);
    if (h1 == 0) h1 = dh1;
    if (h2 == 0) h2 = dh2;
  }

  Rng master(config.seed);
  const std::uint64_t init_seed = master.next_u64();
  Rng batch_rng(master.next_u64());
  Rng val_rng(master.next_u64());

  TrainResult result;
  result.params = init_params(kind, d_in, h1, h2, config.embedding_dim, init_seed);
  if (config.standardize_inputs) {
    standardization_stats(corpus, kind, result.params.input_mean, result.params.input_scale);
  }

  // Fixed validation set drawn from several model pairs up front.
  PairBatch validation;
  const bool track_eval = config.eval_cadence > 0;
  if (track_eval) {
    std::vector<PairBatch> chunks;
    const int chunk_count = 4;
    int per_chunk = config.eval_pairs / chunk_count;
    if (per_chunk % 2 != 0) ++per_chunk;
    per_chunk = std::max(2, per_chunk);
    for (int c = 0; c < chunk_count; ++c) {
      chunks.push_back(sample_batch(corpus, kind, per_chunk, val_rng, config.soft_label_max));
    }
    validation = PairBatch::concatenate(chunks);
  }

  auto record_eval = [&](int iteration) {
    const Metrics metrics = classification_metrics(result.params, validation, config.margin);
    result.history.eval_points.push_back({iteration, metrics.loss, metrics.tnr, metrics.fpr, metrics.err});
  };

  if (track_eval) record_eval(0);

  AdamState adam = AdamState::zeros_like(result.params);
  MlpGradients grads = MlpGradients::zeros_like(result.params);
  result.history.train_loss.reserve(static_cast<std::size_t>(config.iterations));

  for (int it = 0; it < config.iterations; ++it) {
    const PairBatch batch = sample_batch(corpus, kind, config.batch_size, batch_rng, config.soft_label_max);
    const double loss =
        batch_gradients(result.params, batch.rows_f, batch.rows_g, batch.labels, config.margin, grads);
    adam_step(result.params, adam, grads, learning_rate_at(config, it), config.adam);
    result.history.train_loss.push_back(loss);
    if (track_eval && (it + 1) % config.eval_cadence == 0) record_eval(it + 1);
  }
  return result;
}

std::string history_csv(const TrainHistory& history, const TrainConfig& config) {
  std::string csv = "iteration,loss,lr,val_loss,val_tnr,val_fpr,val_err\n";
  char buf[192];
  std::size_t eval_at = 0;
  // iteration-0 evaluation row (before the first update)
  if (!history.eval_points.empty() && history.eval_points[0].iteration == 0) {
    const auto& e = history.eval_points[0];
    std::snprintf(buf, sizeof buf, "0,,,%.9g,%.9g,%.9g,%.9g\n", e.loss, e.tnr, e.fpr, e.err);
    csv += buf;
    eval_at = 1;
  }
  for (std::size_t it = 0; it < history.train_loss.size(); ++it) {
    const long step = static_cast<long>(it);
    std::snprintf(buf, sizeof buf, "%ld,%.9g,%.9g", step + 1, history.train_loss[it],
                  learning_rate_at(config, step));
    csv += buf;
    if (eval_at < history.eval_points.size() &&
        history.eval_points[eval_at].iteration == static_cast<int>(it) + 1) {
      const auto& e = history.eval_points[eval_at];
      std::snprintf(buf, sizeof buf, ",%.9g,%.9g,%.9g,%.9g", e.loss, e.tnr, e.fpr, e.err);
      csv += buf;
      ++eval_at;
    } else {
      csv += ",,,,";
    }
    csv += "\n";
  }
  return csv;
}

}  // namespace specmatch
