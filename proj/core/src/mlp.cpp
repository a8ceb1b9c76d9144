#include "specmatch/mlp.hpp"

#include <cmath>
#include <string>

#include "binio.hpp"
#include "specmatch/error.hpp"
#include "specmatch/rng.hpp"

namespace specmatch {

namespace {

Eigen::MatrixXd standardize_rows(const MlpParams& params, const Eigen::MatrixXd& inputs) {
  require(inputs.cols() == params.input_dim(), ErrorCode::DimensionMismatch,
          "input dimension " + std::to_string(inputs.cols()) + " != " + std::to_string(params.input_dim()));
  Eigen::MatrixXd out = inputs;
  out.rowwise() -= params.input_mean.transpose();
  out.array().rowwise() /= params.input_scale.transpose().array();
  return out;
}

struct BranchTrace {
  Eigen::MatrixXd standardized;
  Eigen::MatrixXd pre1, act1;
  Eigen::MatrixXd pre2, act2;
  Eigen::MatrixXd embedding;
};

// Row-at-a-time with contiguous temporaries: every row takes the identical
// arithmetic path whatever the batch size, so batched and per-vertex
// evaluation agree to the bit.
BranchTrace forward_trace(const MlpParams& params, const Eigen::MatrixXd& inputs) {
  BranchTrace trace;
  trace.standardized = standardize_rows(params, inputs);
  const auto rows = inputs.rows();
  trace.pre1.resize(rows, params.layer_dims[1]);
  trace.pre2.resize(rows, params.layer_dims[2]);
  trace.embedding.resize(rows, params.layer_dims[3]);
  Eigen::VectorXd x(params.layer_dims[0]), z1(params.layer_dims[1]), z2(params.layer_dims[2]);
  for (Eigen::Index r = 0; r < rows; ++r) {
    x = trace.standardized.row(r);
    z1.noalias() = params.weights[0] * x;
    z1 += params.biases[0];
    trace.pre1.row(r) = z1;
    z2.noalias() = params.weights[1] * z1.cwiseMax(0.0);
    z2 += params.biases[1];
    trace.pre2.row(r) = z2;
    trace.embedding.row(r) = params.weights[2] * z2.cwiseMax(0.0) + params.biases[2];
  }
  trace.act1 = trace.pre1.cwiseMax(0.0);
  trace.act2 = trace.pre2.cwiseMax(0.0);
  return trace;
}

// Accumulates parameter gradients for one branch given dLoss/dEmbedding.
void backward_branch(const MlpParams& params, const BranchTrace& trace, const Eigen::MatrixXd& grad_embedding,
                     MlpGradients& out) {
  out.weights[2].noalias() += grad_embedding.transpose() * trace.act2;
  out.biases[2].noalias() += grad_embedding.colwise().sum().transpose();

  Eigen::MatrixXd grad_act2 = grad_embedding * params.weights[2];
  // ReLU subgradient 0 at the kink: strictly-positive mask
  grad_act2.array() *= (trace.pre2.array() > 0.0).cast<double>();

  out.weights[1].noalias() += grad_act2.transpose() * trace.act1;
  out.biases[1].noalias() += grad_act2.colwise().sum().transpose();

  Eigen::MatrixXd grad_act1 = grad_act2 * params.weights[1];
  grad_act1.array() *= (trace.pre1.array() > 0.0).cast<double>();

  out.weights[0].noalias() += grad_act1.transpose() * trace.standardized;
  out.biases[0].noalias() += grad_act1.colwise().sum().transpose();
}

}  // namespace

void default_hidden_dims(DescriptorKind kind, int& h1, int& h2) {
  if (kind == DescriptorKind::Gps) {
    h1 = 20;
    h2 = 18;
  } else {
    h1 = 78;
    h2 = 32;
  }
}

MlpGradients MlpGradients::zeros_like(const MlpParams& params) {
  MlpGradients g;
  g.weights.reserve(params.weights.size());
  g.biases.reserve(params.biases.size());
  for (const auto& w : params.weights) g.weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  for (const auto& b : params.biases) g.biases.push_back(Eigen::VectorXd::Zero(b.size()));
  return g;
}

void MlpGradients::set_zero() {
  for (auto& w : weights) w.setZero();
  for (auto& b : biases) b.setZero();
}

MlpParams init_params(DescriptorKind kind, int d_in, int h1, int h2, int d_out, std::uint64_t seed) {
  require(d_in >= 1 && h1 >= 1 && h2 >= 1 && d_out >= 1, ErrorCode::InvalidArgument,
          "layer dimensions must be positive");
  require(h1 >= h2, ErrorCode::InvalidArgument,
          "narrowing architecture required: h1 >= h2 (got " + std::to_string(h1) + " < " + std::to_string(h2) + ")");

  MlpParams params;
  params.input_kind = kind;
  params.layer_dims = {d_in, h1, h2, d_out};
  params.input_mean = Eigen::VectorXd::Zero(d_in);
  params.input_scale = Eigen::VectorXd::Ones(d_in);

  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < params.layer_dims.size(); ++l) {
    const int fan_in = params.layer_dims[l];
    const int fan_out = params.layer_dims[l + 1];
    const double stddev = std::sqrt(2.0 / fan_in);
    Eigen::MatrixXd w(fan_out, fan_in);
    for (int i = 0; i < fan_out; ++i) {
      for (int j = 0; j < fan_in; ++j) w(i, j) = stddev * rng.next_normal();
    }
    params.weights.push_back(std::move(w));
    params.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return params;
}

Eigen::MatrixXd forward_batch(const MlpParams& params, const Eigen::MatrixXd& inputs) {
  return forward_trace(params, inputs).embedding;
}

Eigen::VectorXd forward(const MlpParams& params, const Eigen::VectorXd& input) {
  return forward_batch(params, input.transpose()).row(0).transpose();
}

double contrastive_loss(const Eigen::VectorXd& embedding_f, const Eigen::VectorXd& embedding_g, double label,
                        double margin) {
  require(margin > 0.0, ErrorCode::InvalidArgument, "margin must be positive");
  require(embedding_f.size() == embedding_g.size(), ErrorCode::DimensionMismatch,
          "embedding dimensions differ");
  const double d2 = (embedding_f - embedding_g).squaredNorm();
  return label * d2 + (1.0 - label) * std::max(0.0, margin - d2);
}

double batch_loss_from_embeddings(const Eigen::MatrixXd& embedded_f, const Eigen::MatrixXd& embedded_g,
                                  const Eigen::VectorXd& labels, double margin) {
  const auto batch = embedded_f.rows();
  require(batch > 0, ErrorCode::InvalidArgument, "empty batch");
  require(embedded_g.rows() == batch && labels.size() == batch, ErrorCode::DimensionMismatch,
          "batch sides and labels must agree");
  double total = 0.0;
  for (Eigen::Index k = 0; k < batch; ++k) {
    const double d2 = (embedded_f.row(k) - embedded_g.row(k)).squaredNorm();
    total += labels[k] * d2 + (1.0 - labels[k]) * std::max(0.0, margin - d2);
  }
  return total / static_cast<double>(batch);
}

double batch_gradients(const MlpParams& params, const Eigen::MatrixXd& rows_f, const Eigen::MatrixXd& rows_g,
                       const Eigen::VectorXd& labels, double margin, MlpGradients& out) {
  const auto batch = rows_f.rows();
  require(batch > 0, ErrorCode::InvalidArgument, "empty batch");
  require(rows_g.rows() == batch && labels.size() == batch, ErrorCode::DimensionMismatch,
          "batch sides and labels must agree");
  require(margin > 0.0, ErrorCode::InvalidArgument, "margin must be positive");

  const BranchTrace trace_f = forward_trace(params, rows_f);
  const BranchTrace trace_g = forward_trace(params, rows_g);

  double total_loss = 0.0;
  Eigen::MatrixXd grad_f(batch, params.output_dim());
  for (Eigen::Index k = 0; k < batch; ++k) {
    const Eigen::RowVectorXd diff = trace_f.embedding.row(k) - trace_g.embedding.row(k);
    const double d2 = diff.squaredNorm();
    const double y = labels[k];
    const double hinge = margin - d2;
    total_loss += y * d2 + (1.0 - y) * std::max(0.0, hinge);
    // dLoss/dd2; the hinge contributes only while strictly inside the margin
    const double scale = y - ((hinge > 0.0) ? (1.0 - y) : 0.0);
    grad_f.row(k) = (2.0 * scale / static_cast<double>(batch)) * diff;
  }

  out.set_zero();
  backward_branch(params, trace_f, grad_f, out);
  backward_branch(params, trace_g, -grad_f, out);
  return total_loss / static_cast<double>(batch);
}

AdamState AdamState::zeros_like(const MlpParams& params) {
  AdamState state;
  state.first_moment = MlpGradients::zeros_like(params);
  state.second_moment = MlpGradients::zeros_like(params);
  state.step = 0;
  return state;
}

void adam_step(MlpParams& params, AdamState& state, const MlpGradients& grads, double learning_rate,
               const AdamConfig& config) {
  require(grads.weights.size() == params.weights.size(), ErrorCode::DimensionMismatch,
          "gradient/parameter layer count mismatch");
  state.step += 1;
  const double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));

  auto update = [&](auto& value, auto& m, auto& v, const auto& g) {
    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = config.beta2 * v + (1.0 - config.beta2) * g.cwiseProduct(g);
    value.array() -= learning_rate * (m.array() / bias1) / ((v.array() / bias2).sqrt() + config.epsilon);
  };
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    update(params.weights[l], state.first_moment.weights[l], state.second_moment.weights[l], grads.weights[l]);
    update(params.biases[l], state.first_moment.biases[l], state.second_moment.biases[l], grads.biases[l]);
  }
}

void save_model(const MlpParams& params, const std::filesystem::path& path) {
  binio::Writer out(path);
  out.magic("SMN1");
  out.u8(1);  // format version
  out.u8(static_cast<std::uint8_t>(params.input_kind));
  out.u64(params.layer_dims.size());
  for (const int d : params.layer_dims) out.u64(static_cast<std::uint64_t>(d));
  out.f64_array(params.input_mean.data(), static_cast<std::size_t>(params.input_mean.size()));
  out.f64_array(params.input_scale.data(), static_cast<std::size_t>(params.input_scale.size()));
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w = params.weights[l];
    out.f64_array(w.data(), static_cast<std::size_t>(w.size()));
    out.f64_array(params.biases[l].data(), static_cast<std::size_t>(params.biases[l].size()));
  }
  out.close();
}

MlpParams load_model(const std::filesystem::path& path) {
  binio::Reader in(path);
  in.expect_magic("SMN1");
  const auto version = in.u8();
  require(version == 1, ErrorCode::ParseError, path.string() + ": unsupported model version");
  MlpParams params;
  params.input_kind = static_cast<DescriptorKind>(in.u8());
  const auto n_dims = in.u64();
  require(n_dims >= 2 && n_dims <= 16, ErrorCode::ParseError, path.string() + ": implausible layer count");
  params.layer_dims.resize(n_dims);
  for (auto& d : params.layer_dims) {
    d = static_cast<int>(in.u64());
    require(d >= 1, ErrorCode::ParseError, path.string() + ": nonpositive layer dimension");
  }
  params.input_mean.resize(params.layer_dims.front());
  params.input_scale.resize(params.layer_dims.front());
  in.f64_array(params.input_mean.data(), static_cast<std::size_t>(params.input_mean.size()));
  in.f64_array(params.input_scale.data(), static_cast<std::size_t>(params.input_scale.size()));
  for (std::size_t l = 0; l + 1 < params.layer_dims.size(); ++l) {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w(params.layer_dims[l + 1],
                                                                             params.layer_dims[l]);
    in.f64_array(w.data(), static_cast<std::size_t>(w.size()));
    params.weights.emplace_back(w);
    Eigen::VectorXd b(params.layer_dims[l + 1]);
    in.f64_array(b.data(), static_cast<std::size_t>(b.size()));
    params.biases.push_back(std::move(b));
  }
  return params;
}

}  // namespace specmatch
