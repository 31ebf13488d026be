#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "actmeas/nn/tensor.hpp"

namespace actmeas::nn {

// Fully connected network: affine layers with a hidden activation between
// them. The output layer is linear unless activate_output is set (used for
// trunks that feed further heads).
class DenseNet {
 public:
  struct Layer {
    Matrix weight;  // out x in
    Vector bias;
  };

  // Post-activation outputs of every layer, activations[0] being the input.
  struct Cache {
    std::vector<Matrix> activations;
    const DenseNet* owner = nullptr;
    std::uint64_t generation = 0;
  };

  DenseNet() = default;
  // Uniform fan-in initialization, bound 1/sqrt(fan_in), seeded per layer.
  DenseNet(std::vector<int> sizes, Activation hidden, bool activate_output, std::uint64_t seed);

  Matrix forward(const Matrix& input, Cache* cache = nullptr) const;
  Vector apply(const Vector& input) const;

  // Reverse-mode gradients of sum(output .* output_grad) with respect to all
  // parameters and the input. Throws ContractViolation when the cache does not
  // come from a forward pass of this net at its current parameters.
  GradientTape backward(const Cache& cache, const Matrix& output_grad) const;

  // Mutable views invalidate outstanding caches.
  ParamViews parameters();
  ConstParamViews parameters() const;
  std::vector<Layer>& mutable_layers();
  const std::vector<Layer>& layers() const { return layers_; }

  void copy_parameters_from(const DenseNet& other);
  bool same_shape(const DenseNet& other) const;

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  const std::vector<int>& sizes() const { return sizes_; }
  Activation activation() const { return activation_; }
  bool activate_output() const { return activate_output_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t num_parameters() const;

  void save(std::ostream& out) const;
  static DenseNet load(std::istream& in);

 private:
  bool activated(std::size_t layer) const;

  std::vector<int> sizes_;
  Activation activation_ = Activation::kTanh;
  bool activate_output_ = false;
  std::uint64_t seed_ = 0;
  std::vector<Layer> layers_;
  std::uint64_t generation_ = 0;
};

}  // namespace actmeas::nn
