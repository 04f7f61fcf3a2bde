#pragma once

#include "koopest/types.hpp"

#include <cstdint>
#include <vector>

namespace koopest {

enum class OutputActivation { Linear, ScaledTanh };

struct GradientBundle {
  std::vector<Matrix> dW;
  std::vector<Vector> db;

  void add(const GradientBundle& other, double weight = 1.0);
  void scale(double factor);
  double squared_norm() const;
  double norm() const;
  bool all_finite() const;
};

// Fully connected network with ReLU hidden layers. Batched calls take one
// sample per column.
class Mlp {
 public:
  struct Cache {
    std::vector<Matrix> inputs;  // input to each layer (post-activation of the previous one)
    std::vector<Matrix> pre;     // pre-activation of each layer
    Matrix output;
  };

  Mlp() = default;
  Mlp(std::vector<int> layer_dims, OutputActivation output, double output_scale = 1.0);

  const std::vector<int>& layer_dims() const noexcept { return dims_; }
  std::size_t num_layers() const noexcept { return W_.size(); }
  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  OutputActivation output_activation() const noexcept { return output_; }
  double output_scale() const noexcept { return output_scale_; }
  std::size_t parameter_count() const;

  Matrix& weight(std::size_t l) { return W_.at(l); }
  const Matrix& weight(std::size_t l) const { return W_.at(l); }
  Vector& bias(std::size_t l) { return b_.at(l); }
  const Vector& bias(std::size_t l) const { return b_.at(l); }

  Vector forward(const Vector& input) const;
  Matrix forward_batch(const Matrix& inputs) const;
  Matrix forward_batch(const Matrix& inputs, Cache& cache) const;

  // Reverse pass for the loss sum_j upstream.col(j) . output.col(j).
  // Parameter gradients are summed over the batch; returns the input gradient.
  Matrix backward(const Cache& cache, const Matrix& upstream, GradientBundle& grads) const;

  GradientBundle zero_gradients() const;
  bool same_architecture(const Mlp& other) const;
  bool operator==(const Mlp& other) const;

 private:
  friend Mlp init_mlp(std::vector<int>, OutputActivation, double, std::uint64_t, double);

  std::vector<int> dims_;
  std::vector<Matrix> W_;
  std::vector<Vector> b_;
  OutputActivation output_ = OutputActivation::Linear;
  double output_scale_ = 1.0;
};

// Weights drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero. A
// positive `final_layer_range` overrides the range of the last layer.
Mlp init_mlp(std::vector<int> layer_dims, OutputActivation output, double output_scale, std::uint64_t seed,
             double final_layer_range = 0.0);

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  GradientBundle m;
  GradientBundle v;
};

AdamState make_adam(const Mlp& net, double lr);

// Gradient descent step on `grads` (which should be the gradient of the loss).
void adam_step(Mlp& net, const GradientBundle& grads, AdamState& opt);

void copy_weights(const Mlp& src, Mlp& dst);

}  // namespace koopest
