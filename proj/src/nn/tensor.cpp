#include "actmeas/nn/tensor.hpp"

#include <string>

#include "actmeas/errors.hpp"

namespace actmeas::nn {

std::string to_string(Activation act) { return act == Activation::kTanh ? "tanh" : "relu"; }

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

ConstParamViews GradientTape::views() const {
  ConstParamViews out;
  out.reserve(grads.size());
  for (const Matrix& g : grads) out.push_back(view(g));
  return out;
}

void GradientTape::set_zero() {
  for (Matrix& g : grads) g.setZero();
  for (Matrix& g : input_grads) g.setZero();
  if (initial_hidden_grad.size() > 0) initial_hidden_grad.setZero();
}

void GradientTape::accumulate(const GradientTape& other) {
  require(other.grads.size() == grads.size(), "GradientTape::accumulate: layout mismatch");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    require(grads[i].rows() == other.grads[i].rows() && grads[i].cols() == other.grads[i].cols(),
            "GradientTape::accumulate: shape mismatch");
    grads[i] += other.grads[i];
  }
}

void GradientTape::append(GradientTape&& other) {
  for (Matrix& g : other.grads) grads.push_back(std::move(g));
}

double GradientTape::squared_norm() const {
  double total = 0.0;
  for (const Matrix& g : grads) total += g.squaredNorm();
  return total;
}

Matrix from_rows(const std::vector<std::vector<double>>& samples) {
  require(!samples.empty(), "from_rows: empty batch");
  const auto dim = static_cast<Eigen::Index>(samples.front().size());
  Matrix out(dim, static_cast<Eigen::Index>(samples.size()));
  for (std::size_t j = 0; j < samples.size(); ++j) {
    require(static_cast<Eigen::Index>(samples[j].size()) == dim, "from_rows: ragged batch");
    for (Eigen::Index i = 0; i < dim; ++i) out(i, static_cast<Eigen::Index>(j)) = samples[j][i];
  }
  return out;
}

Matrix column(std::span<const double> values) {
  Matrix out(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) out(static_cast<Eigen::Index>(i), 0) = values[i];
  return out;
}

}  // namespace actmeas::nn
