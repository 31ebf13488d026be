#include "actmeas/nn/dense.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "actmeas/errors.hpp"
#include "actmeas/rng.hpp"
#include "serialize.hpp"

namespace actmeas::nn {
namespace {

constexpr const char* kDenseMagic = "actmeas-dense";
constexpr int kDenseVersion = 1;

void activate(Matrix& z, Activation act) {
  if (act == Activation::kTanh) {
    z = z.array().tanh().matrix();
  } else {
    z = z.cwiseMax(0.0);
  }
}

// Multiplies `delta` in place by the activation derivative, expressed through
// the activation output `a`.
void scale_by_derivative(Matrix& delta, const Matrix& a, Activation act) {
  if (act == Activation::kTanh) {
    delta.array() *= 1.0 - a.array().square();
  } else {
    delta.array() *= (a.array() > 0.0).cast<double>();
  }
}

}  // namespace

DenseNet::DenseNet(std::vector<int> sizes, Activation hidden, bool activate_output,
                   std::uint64_t seed)
    : sizes_(std::move(sizes)), activation_(hidden), activate_output_(activate_output), seed_(seed) {
  require(sizes_.size() >= 2, "DenseNet: need at least input and output sizes");
  for (int s : sizes_) require(s > 0, "DenseNet: layer sizes must be positive");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    Rng rng(mix_seed(seed, l));
    const int in = sizes_[l], out = sizes_[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    Layer layer{Matrix(out, in), Vector(out)};
    for (Eigen::Index j = 0; j < layer.weight.cols(); ++j)
      for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) layer.weight(i, j) = rng.uniform(-bound, bound);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = rng.uniform(-bound, bound);
    layers_.push_back(std::move(layer));
  }
}

bool DenseNet::activated(std::size_t layer) const {
  return layer + 1 < layers_.size() || activate_output_;
}

Matrix DenseNet::forward(const Matrix& input, Cache* cache) const {
  require(!layers_.empty(), "DenseNet::forward: empty network");
  require(input.rows() == input_dim(), "DenseNet::forward: input has " + std::to_string(input.rows()) +
                                           " rows, expected " + std::to_string(input_dim()));
  if (cache) {
    cache->activations.clear();
    cache->activations.push_back(input);
    cache->owner = this;
    cache->generation = generation_;
  }
  Matrix a = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Matrix z = layers_[l].weight * a;
    z.colwise() += layers_[l].bias;
    if (activated(l)) activate(z, activation_);
    a = std::move(z);
    if (cache) cache->activations.push_back(a);
  }
  return a;
}

Vector DenseNet::apply(const Vector& input) const {
  Matrix in = input;
  return forward(in).col(0);
}

GradientTape DenseNet::backward(const Cache& cache, const Matrix& output_grad) const {
  require(cache.owner == this && cache.generation == generation_,
          "DenseNet::backward: cache is stale or from another network");
  require(cache.activations.size() == layers_.size() + 1, "DenseNet::backward: cache layer count mismatch");
  const Matrix& out = cache.activations.back();
  require(output_grad.rows() == out.rows() && output_grad.cols() == out.cols(),
          "DenseNet::backward: output gradient shape mismatch");

  GradientTape tape;
  tape.grads.resize(2 * layers_.size());
  Matrix delta = output_grad;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    if (activated(l)) scale_by_derivative(delta, cache.activations[l + 1], activation_);
    const Matrix& a_in = cache.activations[l];
    tape.grads[2 * l] = delta * a_in.transpose();
    tape.grads[2 * l + 1] = delta.rowwise().sum();
    delta = layers_[l].weight.transpose() * delta;
  }
  tape.input_grads.push_back(std::move(delta));
  return tape;
}

ParamViews DenseNet::parameters() {
  ++generation_;
  ParamViews out;
  for (Layer& layer : layers_) {
    out.push_back(view(layer.weight));
    out.push_back(view(layer.bias));
  }
  return out;
}

ConstParamViews DenseNet::parameters() const {
  ConstParamViews out;
  for (const Layer& layer : layers_) {
    out.push_back(view(layer.weight));
    out.push_back(view(layer.bias));
  }
  return out;
}

std::vector<DenseNet::Layer>& DenseNet::mutable_layers() {
  ++generation_;
  return layers_;
}

bool DenseNet::same_shape(const DenseNet& other) const {
  return sizes_ == other.sizes_ && activation_ == other.activation_ &&
         activate_output_ == other.activate_output_;
}

void DenseNet::copy_parameters_from(const DenseNet& other) {
  require(same_shape(other), "DenseNet::copy_parameters_from: shape mismatch");
  ++generation_;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l].weight = other.layers_[l].weight;
    layers_[l].bias = other.layers_[l].bias;
  }
}

std::size_t DenseNet::num_parameters() const {
  std::size_t n = 0;
  for (const Layer& layer : layers_) n += layer.weight.size() + layer.bias.size();
  return n;
}

void DenseNet::save(std::ostream& out) const {
  out << kDenseMagic << ' ' << kDenseVersion << '\n';
  out << "sizes " << sizes_.size();
  for (int s : sizes_) out << ' ' << s;
  out << '\n';
  out << "activation " << to_string(activation_) << '\n';
  out << "activate_output " << (activate_output_ ? 1 : 0) << '\n';
  out << "seed " << seed_ << '\n';
  for (const Layer& layer : layers_) {
    detail::write_matrix(out, layer.weight);
    detail::write_values(out, layer.bias.data(), layer.bias.size());
  }
  out << "end-dense\n";
}

DenseNet DenseNet::load(std::istream& in) {
  detail::expect_token(in, kDenseMagic);
  const int version = detail::read_value<int>(in, "dense version");
  if (version != kDenseVersion)
    throw CheckpointError("dense snapshot: unsupported version " + std::to_string(version));
  detail::expect_token(in, "sizes");
  const auto count = detail::read_value<std::size_t>(in, "layer count");
  if (count < 2 || count > 64) throw CheckpointError("dense snapshot: bad layer count");
  std::vector<int> sizes(count);
  for (int& s : sizes) {
    s = detail::read_value<int>(in, "layer size");
    if (s <= 0 || s > 1 << 16) throw CheckpointError("dense snapshot: bad layer size");
  }
  detail::expect_token(in, "activation");
  const auto act_name = detail::read_value<std::string>(in, "activation");
  Activation act;
  try {
    act = parse_activation(act_name);
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("dense snapshot: ") + e.what());
  }
  detail::expect_token(in, "activate_output");
  const bool activate_output = detail::read_value<int>(in, "activate_output") != 0;
  detail::expect_token(in, "seed");
  const auto seed = detail::read_value<std::uint64_t>(in, "seed");

  DenseNet net(sizes, act, activate_output, seed);
  for (Layer& layer : net.layers_) {
    detail::read_matrix(in, layer.weight);
    Matrix bias(layer.bias.size(), 1);
    detail::read_matrix(in, bias);
    layer.bias = bias.col(0);
  }
  detail::expect_token(in, "end-dense");
  return net;
}

}  // namespace actmeas::nn
