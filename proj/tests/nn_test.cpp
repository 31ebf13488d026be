#include <gtest/gtest.h>

#include <sstream>

#include "actmeas/errors.hpp"
#include "actmeas/nn/dense.hpp"
#include "actmeas/nn/optim.hpp"
#include "actmeas/nn/recurrent.hpp"
#include "actmeas/rng.hpp"
#include "gradient_check.hpp"

using namespace actmeas;
using namespace actmeas::nn;
using actmeas::testing::check_gradients;
using actmeas::testing::weighted_sum;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-scale, scale);
  return m;
}

void zero_all(ParamViews params) {
  for (auto& p : params) std::fill(p.begin(), p.end(), 0.0);
}

}  // namespace

TEST(DenseNet, ZeroParametersGiveZeroOutput) {
  DenseNet net({3, 5, 2}, Activation::kTanh, false, 1);
  zero_all(net.parameters());
  Rng rng(2);
  EXPECT_EQ(net.forward(random_matrix(3, 4, rng)), Matrix::Zero(2, 4));
}

TEST(DenseNet, IdentityLayerPassesInputThrough) {
  DenseNet net({3, 3}, Activation::kTanh, false, 1);
  net.mutable_layers()[0].weight = Matrix::Identity(3, 3);
  net.mutable_layers()[0].bias = Vector::Zero(3);
  Rng rng(3);
  const Matrix x = random_matrix(3, 6, rng);
  EXPECT_EQ(net.forward(x), x);
}

TEST(DenseNet, MatchesHandComputedForwardPass) {
  DenseNet net({4, 8, 2}, Activation::kTanh, false, 11);
  Vector x(4);
  x << 0.3, -1.2, 0.7, 2.0;
  const auto& l = net.layers();
  Vector h(8);
  for (int i = 0; i < 8; ++i) {
    double s = l[0].bias(i);
    for (int j = 0; j < 4; ++j) s += l[0].weight(i, j) * x(j);
    h(i) = std::tanh(s);
  }
  for (int i = 0; i < 2; ++i) {
    double s = l[1].bias(i);
    for (int j = 0; j < 8; ++j) s += l[1].weight(i, j) * h(j);
    EXPECT_NEAR(net.apply(x)(i), s, 1e-12);
  }
}

TEST(DenseNet, ReluHiddenLayerClampsNegatives) {
  DenseNet net({1, 2, 1}, Activation::kRelu, false, 1);
  auto& l = net.mutable_layers();
  l[0].weight << 1.0, -1.0;
  l[0].bias << 0.0, 0.0;
  l[1].weight << 1.0, 1.0;
  l[1].bias << 0.0;
  Vector x(1);
  x << -2.0;
  EXPECT_DOUBLE_EQ(net.apply(x)(0), 2.0);
}

TEST(DenseNet, ZeroOutputGradientGivesZeroTape) {
  DenseNet net({3, 4, 2}, Activation::kTanh, false, 5);
  Rng rng(1);
  DenseNet::Cache cache;
  net.forward(random_matrix(3, 5, rng), &cache);
  const GradientTape tape = net.backward(cache, Matrix::Zero(2, 5));
  EXPECT_DOUBLE_EQ(tape.squared_norm(), 0.0);
  EXPECT_TRUE(tape.input_grads.at(0).isZero());
}

TEST(DenseNet, ScalarTanhGradientIsClosedForm) {
  DenseNet net({1, 1}, Activation::kTanh, true, 1);
  net.mutable_layers()[0].weight << 0.4;
  net.mutable_layers()[0].bias << 0.0;
  const double x = 1.5;
  DenseNet::Cache cache;
  net.forward(Matrix::Constant(1, 1, x), &cache);
  const GradientTape tape = net.backward(cache, Matrix::Ones(1, 1));
  const double t = std::tanh(0.4 * x);
  EXPECT_NEAR(tape.grads[0](0, 0), x * (1.0 - t * t), 1e-14);
}

TEST(DenseNet, GradientsMatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    for (Activation act : {Activation::kTanh, Activation::kRelu}) {
      DenseNet net({4, 7, 5, 3}, act, false, seed);
      Rng rng(seed + 100);
      const Matrix x = random_matrix(4, 6, rng);
      const Matrix w = random_matrix(3, 6, rng);
      DenseNet::Cache cache;
      net.forward(x, &cache);
      const GradientTape tape = net.backward(cache, w);
      const auto result = check_gradients(net.parameters(), tape.views(),
                                          [&] { return weighted_sum(net.forward(x), w); });
      EXPECT_LT(result.max_rel_error, 1e-4) << "seed " << seed << " act " << to_string(act);
      EXPECT_EQ(result.checked, net.num_parameters());
    }
  }
}

TEST(DenseNet, InputGradientMatchesFiniteDifferences) {
  DenseNet net({3, 6, 2}, Activation::kTanh, true, 9);
  Rng rng(4);
  Matrix x = random_matrix(3, 2, rng);
  const Matrix w = random_matrix(2, 2, rng);
  DenseNet::Cache cache;
  net.forward(x, &cache);
  const Matrix analytic = net.backward(cache, w).input_grads.at(0);
  const auto result = check_gradients({view(x)}, {view(analytic)}, [&] { return weighted_sum(net.forward(x), w); });
  EXPECT_LT(result.max_rel_error, 1e-4);
}

TEST(DenseNet, StaleCacheIsRejected) {
  DenseNet net({2, 3, 1}, Activation::kTanh, false, 1);
  DenseNet::Cache cache;
  net.forward(Matrix::Ones(2, 1), &cache);
  net.parameters();
  EXPECT_THROW(net.backward(cache, Matrix::Ones(1, 1)), ContractViolation);
  DenseNet other({2, 3, 1}, Activation::kTanh, false, 1);
  DenseNet::Cache foreign;
  other.forward(Matrix::Ones(2, 1), &foreign);
  net.forward(Matrix::Ones(2, 1), &cache);
  EXPECT_THROW(net.backward(foreign, Matrix::Ones(1, 1)), ContractViolation);
}

TEST(DenseNet, DimensionMismatchThrows) {
  DenseNet net({3, 2}, Activation::kTanh, false, 1);
  EXPECT_THROW(net.forward(Matrix::Ones(4, 1)), ContractViolation);
}

TEST(DenseNet, SnapshotRoundTripIsBitExact) {
  DenseNet net({3, 5, 2}, Activation::kRelu, true, 42);
  std::stringstream ss;
  net.save(ss);
  const DenseNet back = DenseNet::load(ss);
  ASSERT_TRUE(back.same_shape(net));
  EXPECT_EQ(back.activation(), Activation::kRelu);
  EXPECT_TRUE(back.activate_output());
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    EXPECT_EQ(back.layers()[l].weight, net.layers()[l].weight);
    EXPECT_EQ(back.layers()[l].bias, net.layers()[l].bias);
  }
}

TEST(DenseNet, TruncatedSnapshotThrows) {
  DenseNet net({3, 5, 2}, Activation::kTanh, false, 42);
  std::stringstream ss;
  net.save(ss);
  const std::string text = ss.str();
  std::stringstream cut(text.substr(0, text.size() / 2));
  EXPECT_THROW(DenseNet::load(cut), CheckpointError);
  std::stringstream junk("not a snapshot");
  EXPECT_THROW(DenseNet::load(junk), CheckpointError);
}

TEST(RecurrentCell, ZeroWeightsGiveZeroHiddenStates) {
  RecurrentCell cell(3, 4, 1);
  zero_all(cell.parameters());
  Rng rng(2);
  const auto hs = cell.forward({random_matrix(3, 2, rng), random_matrix(3, 2, rng)}, Matrix::Zero(4, 2));
  for (const auto& h : hs) EXPECT_TRUE(h.isZero());
}

TEST(RecurrentCell, SingleStepFromZeroHiddenIsADenseLayer) {
  RecurrentCell cell(3, 4, 7);
  DenseNet dense({3, 4}, Activation::kTanh, true, 0);
  dense.mutable_layers()[0].weight = cell.input_weight();
  dense.mutable_layers()[0].bias = cell.bias();
  Rng rng(5);
  const Matrix x = random_matrix(3, 3, rng);
  EXPECT_TRUE(cell.forward({x}, Matrix::Zero(4, 3)).front().isApprox(dense.forward(x), 1e-14));
}

TEST(RecurrentCell, BpttMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    RecurrentCell cell(3, 5, seed);
    Rng rng(seed + 50);
    std::vector<Matrix> xs;
    std::vector<Matrix> ws;
    for (int t = 0; t < 4; ++t) {
      xs.push_back(random_matrix(3, 2, rng));
      ws.push_back(random_matrix(5, 2, rng));
    }
    Matrix h0 = random_matrix(5, 2, rng, 0.5);
    auto loss = [&] {
      const auto hs = cell.forward(xs, h0);
      double s = 0.0;
      for (std::size_t t = 0; t < hs.size(); ++t) s += weighted_sum(hs[t], ws[t]);
      return s;
    };
    RecurrentCell::Cache cache;
    cell.forward(xs, h0, &cache);
    const GradientTape tape = cell.backward(cache, ws);
    EXPECT_LT(check_gradients(cell.parameters(), tape.views(), loss).max_rel_error, 1e-4) << "seed " << seed;
    EXPECT_LT(check_gradients({view(h0)}, {view(tape.initial_hidden_grad)}, loss).max_rel_error, 1e-4);
    for (std::size_t t = 0; t < xs.size(); ++t)
      EXPECT_LT(check_gradients({view(xs[t])}, {view(tape.input_grads[t])}, loss).max_rel_error, 1e-4);
  }
}

TEST(RecurrentCell, SnapshotRoundTripIsBitExact) {
  RecurrentCell cell(4, 3, 8);
  std::stringstream ss;
  cell.save(ss);
  const RecurrentCell back = RecurrentCell::load(ss);
  EXPECT_EQ(back.input_weight(), cell.input_weight());
  EXPECT_EQ(back.hidden_weight(), cell.hidden_weight());
  EXPECT_EQ(back.bias(), cell.bias());
}

TEST(Adam, ZeroGradientLeavesParametersAndDecaysMoments) {
  Vector w(2);
  w << 1.0, -2.0;
  Vector g(2);
  g << 0.5, 0.5;
  Adam adam;
  adam.step({view(w)}, {view(g)});
  const Vector after_first = w;
  const double m0 = adam.first_moments()[0][0];
  const double v0 = adam.second_moments()[0][0];
  // A zero gradient still moves the parameter via the first moment, so only
  // check the moment decay here and use a fresh optimizer for stillness.
  const Vector zero = Vector::Zero(2);
  adam.step({view(w)}, {view(zero)});
  EXPECT_DOUBLE_EQ(adam.first_moments()[0][0], 0.9 * m0);
  EXPECT_DOUBLE_EQ(adam.second_moments()[0][0], 0.999 * v0);

  Adam fresh;
  Vector still = after_first;
  fresh.step({view(still)}, {view(zero)});
  EXPECT_EQ(still, after_first);
}

TEST(Adam, FirstStepHasMagnitudeLr) {
  Vector w = Vector::Zero(3);
  Vector g(3);
  g << 4.0, -0.01, 100.0;
  Adam adam({0.01});
  adam.step({view(w)}, {view(g)});
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(w(i), -0.01 * (g(i) > 0 ? 1 : -1), 1e-8);
}

TEST(Adam, ConvergesOnScalarQuadratic) {
  Vector w = Vector::Zero(1);
  Adam adam({0.1});
  Vector g(1);
  for (int i = 0; i < 200; ++i) {
    g(0) = 2.0 * (w(0) - 3.0);
    adam.step({view(w)}, {view(g)});
  }
  EXPECT_LT(std::abs(w(0) - 3.0), 1e-2);
}

TEST(Huber, ClosedFormBranches) {
  Vector p(1), t(1);
  p << 1.0;
  t << 1.0;
  EXPECT_DOUBLE_EQ(huber_loss(p, t).loss, 0.0);
  EXPECT_DOUBLE_EQ(huber_loss(p, t).grad(0), 0.0);
  p << 0.5;
  t << 0.0;
  EXPECT_DOUBLE_EQ(huber_loss(p, t).loss, 0.125);
  EXPECT_DOUBLE_EQ(huber_loss(p, t).grad(0), 0.5);
  p << -3.0;
  EXPECT_DOUBLE_EQ(huber_loss(p, t).loss, 2.5);
  EXPECT_DOUBLE_EQ(huber_loss(p, t).grad(0), -1.0);
}

TEST(Huber, MeanReductionAndGradient) {
  Rng rng(3);
  Vector p(5), t(5);
  for (int i = 0; i < 5; ++i) {
    p(i) = rng.uniform(-3, 3);
    t(i) = rng.uniform(-3, 3);
  }
  const HuberResult r = huber_loss(p, t, 1.5);
  Vector pv = p;
  const auto check = check_gradients({view(pv)}, {view(r.grad)}, [&] { return huber_loss(pv, t, 1.5).loss; });
  EXPECT_LT(check.max_rel_error, 1e-6);
  EXPECT_GE(r.loss, 0.0);
}
