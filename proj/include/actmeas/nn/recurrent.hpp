#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "actmeas/nn/tensor.hpp"

namespace actmeas::nn {

// Elman cell: h_t = tanh(W_x x_t + W_h h_{t-1} + b).
class RecurrentCell {
 public:
  struct Cache {
    std::vector<Matrix> inputs;
    std::vector<Matrix> hidden;  // hidden[0] = h0, hidden[t + 1] = h_t
    const RecurrentCell* owner = nullptr;
    std::uint64_t generation = 0;
  };

  RecurrentCell() = default;
  RecurrentCell(int input_dim, int hidden_dim, std::uint64_t seed);

  Matrix step(const Matrix& input, const Matrix& hidden) const;

  // Returns h_1..h_T for a nonempty sequence of input batches.
  std::vector<Matrix> forward(const std::vector<Matrix>& inputs, const Matrix& h0,
                              Cache* cache = nullptr) const;

  // Backpropagation through time. hidden_grads[t] is dL/dh_{t+1} from
  // whatever consumes the hidden states.
  GradientTape backward(const Cache& cache, const std::vector<Matrix>& hidden_grads) const;

  ParamViews parameters();  // W_x, W_h, b
  ConstParamViews parameters() const;

  Matrix& input_weight() { ++generation_; return w_input_; }
  Matrix& hidden_weight() { ++generation_; return w_hidden_; }
  Vector& bias() { ++generation_; return bias_; }
  const Matrix& input_weight() const { return w_input_; }
  const Matrix& hidden_weight() const { return w_hidden_; }
  const Vector& bias() const { return bias_; }

  void copy_parameters_from(const RecurrentCell& other);
  bool same_shape(const RecurrentCell& other) const;

  int input_dim() const { return static_cast<int>(w_input_.cols()); }
  int hidden_dim() const { return static_cast<int>(w_input_.rows()); }
  std::uint64_t seed() const { return seed_; }

  void save(std::ostream& out) const;
  static RecurrentCell load(std::istream& in);

 private:
  Matrix w_input_;
  Matrix w_hidden_;
  Vector bias_;
  std::uint64_t seed_ = 0;
  std::uint64_t generation_ = 0;
};

}  // namespace actmeas::nn
