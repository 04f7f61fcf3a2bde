#include <koopest/mlp.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace koopest;

namespace {

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

// sum_j up.col(j) . net(x.col(j)), the scalar whose gradient backward returns
double contracted(const Mlp& net, const Matrix& x, const Matrix& up) {
  return (net.forward_batch(x).array() * up.array()).sum();
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1e-6, std::max(std::abs(a), std::abs(b))); }

}  // namespace

TEST(InitMlp, ParameterCount) {
  const Mlp net = init_mlp({4, 64, 64, 64, 3}, OutputActivation::Linear, 1.0, 0);
  EXPECT_EQ(net.parameter_count(), 8835u);
}

TEST(InitMlp, DeterministicWithZeroBiases) {
  const Mlp a = init_mlp({3, 8, 2}, OutputActivation::ScaledTanh, 2.0, 11);
  const Mlp b = init_mlp({3, 8, 2}, OutputActivation::ScaledTanh, 2.0, 11);
  EXPECT_TRUE(a == b);
  for (std::size_t l = 0; l < a.num_layers(); ++l) {
    EXPECT_TRUE(a.bias(l).isZero(0.0));
    EXPECT_LE(a.weight(l).cwiseAbs().maxCoeff(), 1.0 / std::sqrt(a.layer_dims()[l]));
  }
  const Mlp c = init_mlp({3, 8, 2}, OutputActivation::ScaledTanh, 2.0, 12);
  EXPECT_FALSE(a == c);
}

TEST(InitMlp, FinalLayerRange) {
  const Mlp a = init_mlp({3, 8, 2}, OutputActivation::Linear, 1.0, 1, 3e-3);
  EXPECT_LE(a.weight(1).cwiseAbs().maxCoeff(), 3e-3);
  EXPECT_THROW(init_mlp({3}, OutputActivation::Linear, 1.0, 1), InvalidArgument);
}

TEST(Forward, LinearIdentity) {
  Mlp net({2, 2}, OutputActivation::Linear);
  net.weight(0) = Matrix::Identity(2, 2);
  EXPECT_EQ(net.forward(v2(1, -1)), v2(1, -1));
}

TEST(Forward, RectifierClipsNegatives) {
  Mlp net({2, 2, 2}, OutputActivation::Linear);
  net.weight(0) = Matrix::Identity(2, 2);
  net.weight(1) = Matrix::Identity(2, 2);
  EXPECT_EQ(net.forward(v2(1, -1)), v2(1, 0));
}

TEST(Forward, ScaledTanhSaturates) {
  Mlp net({2, 2}, OutputActivation::ScaledTanh, 2.0);
  net.weight(0) = Matrix::Identity(2, 2);
  const Vector y = net.forward(v2(0, 10));
  EXPECT_EQ(y(0), 0.0);
  EXPECT_NEAR(y(1), 2.0, 1e-8);
}

TEST(Forward, DimensionMismatch) {
  const Mlp net = init_mlp({3, 4, 1}, OutputActivation::Linear, 1.0, 0);
  EXPECT_THROW(net.forward(v2(1, 2)), DimensionMismatch);
}

TEST(Forward, BitwiseDeterministicAndBounded) {
  const Mlp net = init_mlp({3, 16, 16, 2}, OutputActivation::ScaledTanh, 0.7, 5);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 10.0);
  for (int i = 0; i < 100; ++i) {
    Vector x(3);
    for (auto& e : x) e = g(rng);
    const Vector a = net.forward(x);
    EXPECT_EQ(a, net.forward(x));
    EXPECT_LE(a.cwiseAbs().maxCoeff(), 0.7);
  }
}

TEST(Backward, LinearInputGradient) {
  Mlp net({3, 2}, OutputActivation::Linear);
  net.weight(0) << 1, 2, 3, 4, 5, 6;
  Mlp::Cache cache;
  net.forward_batch(Vector::Ones(3), cache);
  GradientBundle g = net.zero_gradients();
  const Vector up = v2(0.5, -1);
  const Matrix in_grad = net.backward(cache, up, g);
  EXPECT_TRUE(in_grad.isApprox(net.weight(0).transpose() * up));
}

TEST(Backward, ZeroUpstreamGivesZeroBundle) {
  const Mlp net = init_mlp({3, 5, 5, 2}, OutputActivation::ScaledTanh, 1.5, 2);
  Mlp::Cache cache;
  net.forward_batch(Matrix::Ones(3, 4), cache);
  GradientBundle g = net.zero_gradients();
  net.backward(cache, Matrix::Zero(2, 4), g);
  EXPECT_EQ(g.squared_norm(), 0.0);
}

TEST(Backward, MatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    const OutputActivation act = draw % 2 ? OutputActivation::ScaledTanh : OutputActivation::Linear;
    Mlp net = init_mlp({3, 6, 5, 2}, act, 1.7, static_cast<std::uint64_t>(draw));
    for (std::size_t l = 0; l < net.num_layers(); ++l)
      for (auto& b : net.bias(l)) b = 0.1 * g(rng);
    Matrix x(3, 2), up(2, 2);
    for (auto& e : x.reshaped()) e = g(rng);
    for (auto& e : up.reshaped()) e = g(rng);

    Mlp::Cache cache;
    net.forward_batch(x, cache);
    GradientBundle grads = net.zero_gradients();
    const Matrix in_grad = net.backward(cache, up, grads);

    const double h = 1e-5;
    auto check = [&](double& param, double analytic) {
      const double saved = param;
      param = saved + h;
      const double fp = contracted(net, x, up);
      param = saved - h;
      const double fm = contracted(net, x, up);
      param = saved;
      const double fd = (fp - fm) / (2 * h);
      worst = std::max(worst, rel_err(fd, analytic));
    };
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      for (Eigen::Index i = 0; i < net.weight(l).size(); ++i) check(net.weight(l).data()[i], grads.dW[l].data()[i]);
      for (Eigen::Index i = 0; i < net.bias(l).size(); ++i) check(net.bias(l)(i), grads.db[l](i));
    }
    for (Eigen::Index i = 0; i < x.size(); ++i) check(x.data()[i], in_grad.data()[i]);
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Adam, ZeroGradientsLeaveParameters) {
  Mlp net = init_mlp({2, 4, 1}, OutputActivation::Linear, 1.0, 0);
  const Mlp before = net;
  AdamState opt = make_adam(net, 1e-2);
  adam_step(net, net.zero_gradients(), opt);
  EXPECT_TRUE(net == before);
  EXPECT_EQ(opt.step, 1u);
  adam_step(net, net.zero_gradients(), opt);
  EXPECT_EQ(opt.step, 2u);
}

TEST(Adam, MinimizesScalarQuadratic) {
  Mlp net({1, 1}, OutputActivation::Linear);  // theta is the bias
  AdamState opt = make_adam(net, 0.1);
  for (int i = 0; i < 500; ++i) {
    GradientBundle g = net.zero_gradients();
    g.db[0](0) = 2.0 * (net.bias(0)(0) - 3.0);
    adam_step(net, g, opt);
  }
  EXPECT_NEAR(net.bias(0)(0), 3.0, 1e-2);
}

TEST(CopyWeights, HardCopySemantics) {
  Mlp src = init_mlp({3, 8, 2}, OutputActivation::Linear, 1.0, 1);
  Mlp dst = init_mlp({3, 8, 2}, OutputActivation::Linear, 1.0, 2);
  copy_weights(src, dst);
  const Vector x = Vector::LinSpaced(3, -1, 1);
  EXPECT_EQ(src.forward(x), dst.forward(x));
  src.weight(0)(0, 0) += 1.0;
  EXPECT_NE(src.forward(x), dst.forward(x));
  const Mlp saved = dst;
  copy_weights(dst, dst);
  EXPECT_TRUE(dst == saved);
  Mlp other = init_mlp({3, 4, 2}, OutputActivation::Linear, 1.0, 2);
  EXPECT_THROW(copy_weights(src, other), DimensionMismatch);
}
