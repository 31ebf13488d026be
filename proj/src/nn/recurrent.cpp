#include "actmeas/nn/recurrent.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "actmeas/errors.hpp"
#include "actmeas/rng.hpp"
#include "serialize.hpp"

namespace actmeas::nn {
namespace {

constexpr const char* kCellMagic = "actmeas-elman";
constexpr int kCellVersion = 1;

void fill_uniform(Matrix& m, Rng& rng, double bound) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-bound, bound);
}

}  // namespace

RecurrentCell::RecurrentCell(int input_dim, int hidden_dim, std::uint64_t seed) : seed_(seed) {
  require(input_dim > 0 && hidden_dim > 0, "RecurrentCell: dimensions must be positive");
  Rng rng(mix_seed(seed, 0x5eed));
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  w_input_.resize(hidden_dim, input_dim);
  w_hidden_.resize(hidden_dim, hidden_dim);
  Matrix b(hidden_dim, 1);
  fill_uniform(w_input_, rng, bound);
  fill_uniform(w_hidden_, rng, bound);
  fill_uniform(b, rng, bound);
  bias_ = b.col(0);
}

Matrix RecurrentCell::step(const Matrix& input, const Matrix& hidden) const {
  require(input.rows() == input_dim(), "RecurrentCell::step: input dimension mismatch");
  require(hidden.rows() == hidden_dim() && hidden.cols() == input.cols(),
          "RecurrentCell::step: hidden state shape mismatch");
  Matrix z = w_input_ * input + w_hidden_ * hidden;
  z.colwise() += bias_;
  return z.array().tanh().matrix();
}

std::vector<Matrix> RecurrentCell::forward(const std::vector<Matrix>& inputs, const Matrix& h0,
                                           Cache* cache) const {
  require(!inputs.empty(), "RecurrentCell::forward: empty sequence");
  std::vector<Matrix> hidden;
  hidden.reserve(inputs.size());
  const Matrix* prev = &h0;
  for (const Matrix& x : inputs) {
    hidden.push_back(step(x, *prev));
    prev = &hidden.back();
  }
  if (cache) {
    cache->inputs = inputs;
    cache->hidden.clear();
    cache->hidden.push_back(h0);
    cache->hidden.insert(cache->hidden.end(), hidden.begin(), hidden.end());
    cache->owner = this;
    cache->generation = generation_;
  }
  return hidden;
}

GradientTape RecurrentCell::backward(const Cache& cache, const std::vector<Matrix>& hidden_grads) const {
  require(cache.owner == this && cache.generation == generation_,
          "RecurrentCell::backward: cache is stale or from another cell");
  const std::size_t steps = cache.inputs.size();
  require(hidden_grads.size() == steps && cache.hidden.size() == steps + 1,
          "RecurrentCell::backward: sequence length mismatch");

  GradientTape tape;
  tape.grads = {Matrix::Zero(w_input_.rows(), w_input_.cols()),
                Matrix::Zero(w_hidden_.rows(), w_hidden_.cols()), Matrix::Zero(bias_.size(), 1)};
  tape.input_grads.resize(steps);

  Matrix carry = Matrix::Zero(cache.hidden[0].rows(), cache.hidden[0].cols());
  for (std::size_t t = steps; t-- > 0;) {
    const Matrix& h = cache.hidden[t + 1];
    require(hidden_grads[t].rows() == h.rows() && hidden_grads[t].cols() == h.cols(),
            "RecurrentCell::backward: hidden gradient shape mismatch");
    Matrix dz = hidden_grads[t] + carry;
    dz.array() *= 1.0 - h.array().square();
    tape.grads[0].noalias() += dz * cache.inputs[t].transpose();
    tape.grads[1].noalias() += dz * cache.hidden[t].transpose();
    tape.grads[2] += dz.rowwise().sum();
    tape.input_grads[t] = w_input_.transpose() * dz;
    carry = w_hidden_.transpose() * dz;
  }
  tape.initial_hidden_grad = std::move(carry);
  return tape;
}

ParamViews RecurrentCell::parameters() {
  ++generation_;
  return {view(w_input_), view(w_hidden_), view(bias_)};
}

ConstParamViews RecurrentCell::parameters() const {
  return {view(w_input_), view(w_hidden_), view(bias_)};
}

bool RecurrentCell::same_shape(const RecurrentCell& other) const {
  return input_dim() == other.input_dim() && hidden_dim() == other.hidden_dim();
}

void RecurrentCell::copy_parameters_from(const RecurrentCell& other) {
  require(same_shape(other), "RecurrentCell::copy_parameters_from: shape mismatch");
  ++generation_;
  w_input_ = other.w_input_;
  w_hidden_ = other.w_hidden_;
  bias_ = other.bias_;
}

void RecurrentCell::save(std::ostream& out) const {
  out << kCellMagic << ' ' << kCellVersion << '\n';
  out << "dims " << input_dim() << ' ' << hidden_dim() << '\n';
  out << "seed " << seed_ << '\n';
  detail::write_matrix(out, w_input_);
  detail::write_matrix(out, w_hidden_);
  detail::write_values(out, bias_.data(), bias_.size());
  out << "end-elman\n";
}

RecurrentCell RecurrentCell::load(std::istream& in) {
  detail::expect_token(in, kCellMagic);
  const int version = detail::read_value<int>(in, "cell version");
  if (version != kCellVersion)
    throw CheckpointError("recurrent snapshot: unsupported version " + std::to_string(version));
  detail::expect_token(in, "dims");
  const int input_dim = detail::read_value<int>(in, "input dim");
  const int hidden_dim = detail::read_value<int>(in, "hidden dim");
  if (input_dim <= 0 || hidden_dim <= 0 || input_dim > 1 << 16 || hidden_dim > 1 << 16)
    throw CheckpointError("recurrent snapshot: bad dimensions");
  detail::expect_token(in, "seed");
  const auto seed = detail::read_value<std::uint64_t>(in, "seed");
  RecurrentCell cell(input_dim, hidden_dim, seed);
  detail::read_matrix(in, cell.w_input_);
  detail::read_matrix(in, cell.w_hidden_);
  Matrix b(hidden_dim, 1);
  detail::read_matrix(in, b);
  cell.bias_ = b.col(0);
  detail::expect_token(in, "end-elman");
  return cell;
}

}  // namespace actmeas::nn
