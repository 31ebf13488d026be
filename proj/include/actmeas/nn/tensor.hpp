#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace actmeas::nn {

// Batches are column-major: one sample per column.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { kTanh, kRelu };

std::string to_string(Activation act);
Activation parse_activation(std::string_view name);

using ParamViews = std::vector<std::span<double>>;
using ConstParamViews = std::vector<std::span<const double>>;

// Parameter-shaped gradient buffers, ordered exactly like the owning model's
// parameters(). input_grads has one entry per time step (a single entry for
// feedforward nets).
struct GradientTape {
  std::vector<Matrix> grads;
  std::vector<Matrix> input_grads;
  Matrix initial_hidden_grad;  // recurrent models only

  ConstParamViews views() const;
  void set_zero();
  void accumulate(const GradientTape& other);  // elementwise += on grads
  void append(GradientTape&& other);           // concatenate parameter grads
  double squared_norm() const;
};

inline std::span<double> view(Matrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
inline std::span<double> view(Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
inline std::span<const double> view(const Matrix& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
inline std::span<const double> view(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

Matrix from_rows(const std::vector<std::vector<double>>& columns);  // samples -> batch
Matrix column(std::span<const double> values);

}  // namespace actmeas::nn
