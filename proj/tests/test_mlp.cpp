#include <doctest.h>

#include <cmath>

#include "specmatch/error.hpp"
#include "specmatch/mlp.hpp"
#include "specmatch/rng.hpp"
#include "specmatch/train.hpp"
#include "test_util.hpp"

using namespace specmatch;

namespace {

MlpParams random_params(DescriptorKind kind, int d_in, int h1, int h2, int d_out, std::uint64_t seed) {
  return init_params(kind, d_in, h1, h2, d_out, seed);
}

Eigen::MatrixXd random_rows(int rows, int cols, Rng& rng, double scale = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = scale * rng.next_normal();
  }
  return m;
}

double loss_of(const MlpParams& params, const Eigen::MatrixXd& f, const Eigen::MatrixXd& g,
               const Eigen::VectorXd& y, double margin) {
  return batch_loss_from_embeddings(forward_batch(params, f), forward_batch(params, g), y, margin);
}

}  // namespace

TEST_SUITE_BEGIN("mlp");

TEST_CASE("init produces the documented shape chain deterministically") {
  const MlpParams params = init_params(DescriptorKind::Hks, 100, 78, 32, 15, 1);
  REQUIRE(params.layer_count() == 3);
  CHECK(params.weights[0].rows() == 78);
  CHECK(params.weights[0].cols() == 100);
  CHECK(params.weights[1].rows() == 32);
  CHECK(params.weights[1].cols() == 78);
  CHECK(params.weights[2].rows() == 15);
  CHECK(params.weights[2].cols() == 32);
  for (const auto& b : params.biases) CHECK(b.cwiseAbs().maxCoeff() == 0.0);

  const MlpParams again = init_params(DescriptorKind::Hks, 100, 78, 32, 15, 1);
  for (int l = 0; l < 3; ++l) CHECK(params.weights[l] == again.weights[l]);

  const MlpParams other_seed = init_params(DescriptorKind::Hks, 100, 78, 32, 15, 2);
  CHECK(params.weights[0] != other_seed.weights[0]);

  // GPS defaults
  int h1 = 0, h2 = 0;
  default_hidden_dims(DescriptorKind::Gps, h1, h2);
  CHECK(h1 == 20);
  CHECK(h2 == 18);
  default_hidden_dims(DescriptorKind::Wks, h1, h2);
  CHECK(h1 == 78);
  CHECK(h2 == 32);
  const MlpParams gps_params = init_params(DescriptorKind::Gps, 25, 20, 18, 15, 3);
  CHECK(gps_params.weights[0].rows() == 20);
  CHECK(gps_params.weights[2].rows() == 15);
}

TEST_CASE("widening architectures are rejected") {
  try {
    init_params(DescriptorKind::Hks, 100, 32, 78, 15, 1);
    FAIL("expected InvalidArgument");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("zero parameters map everything to the origin") {
  MlpParams params = init_params(DescriptorKind::Hks, 8, 6, 5, 4, 1);
  for (auto& w : params.weights) w.setZero();
  Rng rng(9);
  const Eigen::VectorXd x = random_rows(1, 8, rng).row(0).transpose();
  CHECK(forward(params, x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("a hand-wired single path copies one input coordinate") {
  MlpParams params = init_params(DescriptorKind::Hks, 4, 3, 3, 2, 1);
  for (auto& w : params.weights) w.setZero();
  params.weights[0](0, 0) = 1.0;
  params.weights[1](0, 0) = 1.0;
  params.weights[2](0, 0) = 1.0;
  Eigen::VectorXd x(4);
  x << 0.7, -1.0, 2.0, 3.0;
  const Eigen::VectorXd e = forward(params, x);
  CHECK(e[0] == doctest::Approx(0.7));
  CHECK(e[1] == 0.0);
}

TEST_CASE("batch forward equals stacked single-row forwards bit-exactly") {
  const MlpParams params = random_params(DescriptorKind::Hks, 12, 9, 7, 5, 21);
  Rng rng(22);
  const Eigen::MatrixXd rows = random_rows(6, 12, rng);
  const Eigen::MatrixXd batched = forward_batch(params, rows);
  for (int i = 0; i < 6; ++i) {
    const Eigen::VectorXd single = forward(params, rows.row(i).transpose());
    CHECK((batched.row(i).transpose() - single).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("contrastive loss identities") {
  Eigen::VectorXd e(15);
  e.setConstant(0.3);
  CHECK(contrastive_loss(e, e, 1.0, 5.0) == 0.0);
  CHECK(contrastive_loss(e, e, 0.0, 5.0) == 5.0);

  Eigen::VectorXd f = e;
  f[0] += std::sqrt(7.0);  // squared distance 7 > margin 5
  CHECK(contrastive_loss(e, f, 0.0, 5.0) == 0.0);

  Eigen::VectorXd g = e;
  g[0] += 1.0;  // squared distance exactly 1
  CHECK(contrastive_loss(e, g, 0.2, 5.0) == doctest::Approx(3.4).epsilon(1e-12));
}

TEST_CASE("loss is nonnegative and the embedding metric is symmetric") {
  Rng rng(77);
  for (int probe = 0; probe < 200; ++probe) {
    const Eigen::VectorXd a = random_rows(1, 15, rng, 2.0).row(0).transpose();
    const Eigen::VectorXd b = random_rows(1, 15, rng, 2.0).row(0).transpose();
    const double y = rng.next_double();
    CHECK(contrastive_loss(a, b, y, 5.0) >= 0.0);
    CHECK((a - b).norm() == (b - a).norm());
    CHECK(contrastive_loss(a, b, y, 5.0) == contrastive_loss(b, a, y, 5.0));
  }
}

TEST_CASE("analytic batch gradients match central finite differences") {
  const double margin = 5.0;
  const double step = 1e-5;
  Rng rng(31337);
  int checked_probes = 0;

  while (checked_probes < 50) {
    MlpParams params = random_params(DescriptorKind::Hks, 7, 6, 5, 4, rng.next_u64());
    // nonzero biases so their gradients are exercised away from zero
    for (auto& b : params.biases) {
      for (int i = 0; i < b.size(); ++i) b[i] = 0.1 * rng.next_normal();
    }
    const int batch = 3;
    const Eigen::MatrixXd f = random_rows(batch, 7, rng);
    const Eigen::MatrixXd g = random_rows(batch, 7, rng);
    Eigen::VectorXd y(batch);
    for (int k = 0; k < batch; ++k) y[k] = rng.next_double();

    // stay away from the hinge kink where the subgradient choice matters
    bool near_kink = false;
    const Eigen::MatrixXd ef = forward_batch(params, f), eg = forward_batch(params, g);
    for (int k = 0; k < batch; ++k) {
      if (std::abs(margin - (ef.row(k) - eg.row(k)).squaredNorm()) < 1e-3) near_kink = true;
    }
    if (near_kink) continue;

    MlpGradients grads = MlpGradients::zeros_like(params);
    batch_gradients(params, f, g, y, margin, grads);

    auto check_coord = [&](double& value, double analytic) {
      const double saved = value;
      value = saved + step;
      const double up = loss_of(params, f, g, y, margin);
      value = saved - step;
      const double down = loss_of(params, f, g, y, margin);
      value = saved;
      const double numeric = (up - down) / (2.0 * step);
      if (std::abs(analytic) > 1e-8) {
        CHECK(std::abs(numeric - analytic) / std::max(std::abs(numeric), std::abs(analytic)) < 1e-5);
      }
    };

    for (int l = 0; l < params.layer_count(); ++l) {
      // a sample of weight coordinates plus every bias
      for (int probe = 0; probe < 8; ++probe) {
        const int i = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(params.weights[l].rows())));
        const int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(params.weights[l].cols())));
        check_coord(params.weights[l](i, j), grads.weights[l](i, j));
      }
      for (int i = 0; i < params.biases[l].size(); ++i) {
        check_coord(params.biases[l][i], grads.biases[l][i]);
      }
    }
    ++checked_probes;
  }
  CHECK(checked_probes == 50);
}

TEST_CASE("gradients vanish when every pair already satisfies its term") {
  MlpParams params = random_params(DescriptorKind::Hks, 6, 5, 4, 3, 5);
  Rng rng(6);
  // matching pairs with identical inputs: distance 0, y=1 -> loss 0
  Eigen::MatrixXd f = random_rows(4, 6, rng);
  Eigen::MatrixXd g = f;
  Eigen::VectorXd y = Eigen::VectorXd::Ones(4);
  // plus non-matching pairs far beyond the margin
  Eigen::MatrixXd f2 = 50.0 * random_rows(4, 6, rng);
  Eigen::MatrixXd g2 = -50.0 * random_rows(4, 6, rng);
  Eigen::MatrixXd all_f(8, 6), all_g(8, 6);
  all_f << f, f2;
  all_g << g, g2;
  Eigen::VectorXd all_y(8);
  all_y << y, Eigen::VectorXd::Zero(4);

  const Eigen::MatrixXd ef = forward_batch(params, all_f), eg = forward_batch(params, all_g);
  for (int k = 4; k < 8; ++k) REQUIRE((ef.row(k) - eg.row(k)).squaredNorm() > 5.0);

  MlpGradients grads = MlpGradients::zeros_like(params);
  const double loss = batch_gradients(params, all_f, all_g, all_y, 5.0, grads);
  CHECK(loss == 0.0);
  for (const auto& w : grads.weights) CHECK(w.cwiseAbs().maxCoeff() == 0.0);
  for (const auto& b : grads.biases) CHECK(b.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("swapping the branches leaves gradients unchanged") {
  const MlpParams params = random_params(DescriptorKind::Hks, 9, 8, 6, 5, 77);
  Rng rng(78);
  const Eigen::MatrixXd f = random_rows(5, 9, rng);
  const Eigen::MatrixXd g = random_rows(5, 9, rng);
  Eigen::VectorXd y(5);
  for (int k = 0; k < 5; ++k) y[k] = rng.next_double();

  MlpGradients forward_order = MlpGradients::zeros_like(params);
  MlpGradients swapped = MlpGradients::zeros_like(params);
  batch_gradients(params, f, g, y, 5.0, forward_order);
  batch_gradients(params, g, f, y, 5.0, swapped);
  for (int l = 0; l < params.layer_count(); ++l) {
    CHECK(forward_order.weights[l] == swapped.weights[l]);
    CHECK(forward_order.biases[l] == swapped.biases[l]);
  }
}

TEST_CASE("adam leaves parameters alone under zero gradients") {
  MlpParams params = random_params(DescriptorKind::Hks, 5, 4, 3, 2, 9);
  const MlpParams before = params;
  AdamState state = AdamState::zeros_like(params);
  MlpGradients zeros = MlpGradients::zeros_like(params);
  adam_step(params, state, zeros, 0.1);
  for (int l = 0; l < params.layer_count(); ++l) {
    CHECK(params.weights[l] == before.weights[l]);
    CHECK(params.biases[l] == before.biases[l]);
  }
}

TEST_CASE("first adam step moves a scalar by almost exactly the learning rate") {
  MlpParams params = init_params(DescriptorKind::Hks, 1, 1, 1, 1, 1);
  for (auto& w : params.weights) w.setConstant(2.0);
  AdamState state = AdamState::zeros_like(params);
  MlpGradients grads = MlpGradients::zeros_like(params);
  for (auto& w : grads.weights) w.setConstant(1.0);

  adam_step(params, state, grads, 0.015);
  // bias-corrected m_hat = 1, v_hat = 1 -> delta = -lr / (1 + eps)
  CHECK(params.weights[0](0, 0) == doctest::Approx(2.0 - 0.015).epsilon(1e-6));
  CHECK(state.step == 1);
}

TEST_CASE("decayed learning rate at step 10000") {
  TrainConfig config;  // lr0 = 0.015, decay = 0.9999
  CHECK(learning_rate_at(config, 0) == 0.015);
  CHECK(learning_rate_at(config, 10000) == doctest::Approx(0.00551791).epsilon(1e-5));
}

TEST_CASE("SMN1 model files round-trip bit-exactly") {
  MlpParams params = random_params(DescriptorKind::Wks, 10, 8, 6, 15, 1234);
  Rng rng(55);
  for (int i = 0; i < 10; ++i) {
    params.input_mean[i] = rng.next_normal();
    params.input_scale[i] = 1.0 + rng.next_double();
  }
  testutil::TempDir dir("smn");
  const auto path = dir.path() / "model.smn";
  save_model(params, path);
  const MlpParams loaded = load_model(path);
  CHECK(loaded.input_kind == DescriptorKind::Wks);
  CHECK(loaded.layer_dims == params.layer_dims);
  CHECK(loaded.input_mean == params.input_mean);
  CHECK(loaded.input_scale == params.input_scale);
  for (int l = 0; l < 3; ++l) {
    CHECK(loaded.weights[l] == params.weights[l]);
    CHECK(loaded.biases[l] == params.biases[l]);
  }

  // standardization participates in the forward pass
  Rng rng2(56);
  const Eigen::VectorXd x = random_rows(1, 10, rng2).row(0).transpose();
  CHECK(forward(loaded, x) == forward(params, x));
}

TEST_SUITE_END();
