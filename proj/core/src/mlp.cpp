#include "koopest/mlp.hpp"

#include <cmath>
#include <random>

namespace koopest {

void GradientBundle::add(const GradientBundle& other, double weight) {
  if (dW.size() != other.dW.size()) throw DimensionMismatch("gradient bundles differ in layer count");
  for (std::size_t l = 0; l < dW.size(); ++l) {
    dW[l] += weight * other.dW[l];
    db[l] += weight * other.db[l];
  }
}

void GradientBundle::scale(double factor) {
  for (std::size_t l = 0; l < dW.size(); ++l) {
    dW[l] *= factor;
    db[l] *= factor;
  }
}

double GradientBundle::squared_norm() const {
  double s = 0.0;
  for (std::size_t l = 0; l < dW.size(); ++l) s += dW[l].squaredNorm() + db[l].squaredNorm();
  return s;
}

double GradientBundle::norm() const { return std::sqrt(squared_norm()); }

bool GradientBundle::all_finite() const {
  for (std::size_t l = 0; l < dW.size(); ++l) {
    if (!dW[l].allFinite() || !db[l].allFinite()) return false;
  }
  return true;
}

Mlp::Mlp(std::vector<int> layer_dims, OutputActivation output, double output_scale)
    : dims_(std::move(layer_dims)), output_(output), output_scale_(output_scale) {
  require(dims_.size() >= 2, "network needs at least input and output dims");
  for (int d : dims_) require(d >= 1, "layer dims must be >= 1");
  require(output_scale_ > 0.0, "output scale must be positive");
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    W_.push_back(Matrix::Zero(dims_[l + 1], dims_[l]));
    b_.push_back(Vector::Zero(dims_[l + 1]));
  }
}

std::size_t Mlp::parameter_count() const {
  std::size_t c = 0;
  for (std::size_t l = 0; l < W_.size(); ++l) c += static_cast<std::size_t>(W_[l].size() + b_[l].size());
  return c;
}

Vector Mlp::forward(const Vector& input) const {
  Matrix out = forward_batch(input);
  return out.col(0);
}

Matrix Mlp::forward_batch(const Matrix& inputs) const {
  require_dims(inputs.rows(), dims_.front(), "network input");
  Matrix h = inputs;
  for (std::size_t l = 0; l < W_.size(); ++l) {
    Matrix z = (W_[l] * h).colwise() + b_[l];
    if (l + 1 < W_.size()) {
      h = z.cwiseMax(0.0);
    } else if (output_ == OutputActivation::ScaledTanh) {
      h = output_scale_ * z.array().tanh();
    } else {
      h = std::move(z);
    }
  }
  return h;
}

Matrix Mlp::forward_batch(const Matrix& inputs, Cache& cache) const {
  require_dims(inputs.rows(), dims_.front(), "network input");
  cache.inputs.assign(W_.size(), Matrix());
  cache.pre.assign(W_.size(), Matrix());
  Matrix h = inputs;
  for (std::size_t l = 0; l < W_.size(); ++l) {
    cache.inputs[l] = h;
    cache.pre[l] = (W_[l] * h).colwise() + b_[l];
    if (l + 1 < W_.size()) {
      h = cache.pre[l].cwiseMax(0.0);
    } else if (output_ == OutputActivation::ScaledTanh) {
      h = output_scale_ * cache.pre[l].array().tanh();
    } else {
      h = cache.pre[l];
    }
  }
  cache.output = h;
  return h;
}

Matrix Mlp::backward(const Cache& cache, const Matrix& upstream, GradientBundle& grads) const {
  require(cache.pre.size() == W_.size(), "backward: cache does not belong to this network");
  require_dims(upstream.rows(), dims_.back(), "upstream gradient rows");
  require_dims(upstream.cols(), cache.output.cols(), "upstream gradient batch");
  if (grads.dW.size() != W_.size()) grads = zero_gradients();

  Matrix delta;
  const std::size_t last = W_.size() - 1;
  if (output_ == OutputActivation::ScaledTanh) {
    const Matrix& y = cache.output;
    delta = upstream.array() * (output_scale_ - y.array().square() / output_scale_);
  } else {
    delta = upstream;
  }
  for (std::size_t l = last + 1; l-- > 0;) {
    grads.dW[l] += delta * cache.inputs[l].transpose();
    grads.db[l] += delta.rowwise().sum();
    Matrix back = W_[l].transpose() * delta;
    if (l == 0) return back;
    delta = back.array() * (cache.pre[l - 1].array() > 0.0).cast<double>();
  }
  return delta;
}

GradientBundle Mlp::zero_gradients() const {
  GradientBundle g;
  for (std::size_t l = 0; l < W_.size(); ++l) {
    g.dW.push_back(Matrix::Zero(W_[l].rows(), W_[l].cols()));
    g.db.push_back(Vector::Zero(b_[l].size()));
  }
  return g;
}

bool Mlp::same_architecture(const Mlp& other) const {
  return dims_ == other.dims_ && output_ == other.output_ && output_scale_ == other.output_scale_;
}

bool Mlp::operator==(const Mlp& other) const {
  if (!same_architecture(other)) return false;
  for (std::size_t l = 0; l < W_.size(); ++l) {
    if (W_[l] != other.W_[l] || b_[l] != other.b_[l]) return false;
  }
  return true;
}

Mlp init_mlp(std::vector<int> layer_dims, OutputActivation output, double output_scale, std::uint64_t seed,
             double final_layer_range) {
  Mlp net(std::move(layer_dims), output, output_scale);
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < net.W_.size(); ++l) {
    double range = 1.0 / std::sqrt(static_cast<double>(net.dims_[l]));
    if (l + 1 == net.W_.size() && final_layer_range > 0.0) range = final_layer_range;
    std::uniform_real_distribution<double> dist(-range, range);
    Matrix& w = net.W_[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = dist(rng);
    }
  }
  return net;
}

AdamState make_adam(const Mlp& net, double lr) {
  require(lr > 0.0, "learning rate must be positive");
  AdamState s;
  s.lr = lr;
  s.m = net.zero_gradients();
  s.v = net.zero_gradients();
  return s;
}

void adam_step(Mlp& net, const GradientBundle& grads, AdamState& opt) {
  if (opt.m.dW.size() != net.num_layers()) {
    opt.m = net.zero_gradients();
    opt.v = net.zero_gradients();
  }
  if (grads.dW.size() != net.num_layers()) throw DimensionMismatch("adam_step: gradient shape mismatch");
  ++opt.step;
  const double t = static_cast<double>(opt.step);
  const double c1 = 1.0 - std::pow(opt.beta1, t);
  const double c2 = 1.0 - std::pow(opt.beta2, t);
  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = opt.beta1 * m + (1.0 - opt.beta1) * g;
    v = opt.beta2 * v + (1.0 - opt.beta2) * g.cwiseProduct(g);
    param.array() -= opt.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + opt.epsilon);
  };
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    require(grads.dW[l].rows() == net.weight(l).rows() && grads.dW[l].cols() == net.weight(l).cols(),
            "adam_step: weight gradient shape mismatch");
    update(net.weight(l), grads.dW[l], opt.m.dW[l], opt.v.dW[l]);
    update(net.bias(l), grads.db[l], opt.m.db[l], opt.v.db[l]);
  }
}

void copy_weights(const Mlp& src, Mlp& dst) {
  if (!src.same_architecture(dst)) throw DimensionMismatch("copy_weights: architecture mismatch");
  if (&src == &dst) return;
  dst = src;
}

}  // namespace koopest
