#include "actmeas/agents/networks.hpp"

#include <istream>
#include <ostream>
#include <string>

#include "actmeas/errors.hpp"
#include "actmeas/rng.hpp"

namespace actmeas::agents {

nn::Matrix dueling_combine(const nn::Matrix& head_out) {
  require(head_out.rows() >= 2, "dueling_combine: need a value row and at least one advantage");
  const Eigen::Index n = head_out.rows() - 1;
  const auto adv = head_out.bottomRows(n);
  nn::Matrix q = adv;
  const Eigen::RowVectorXd shift = head_out.row(0) - adv.colwise().mean();
  q.rowwise() += shift;
  return q;
}

nn::Matrix dueling_combine_backward(const nn::Matrix& q_grad) {
  const Eigen::Index n = q_grad.rows();
  nn::Matrix out(n + 1, q_grad.cols());
  const Eigen::RowVectorXd total = q_grad.colwise().sum();
  out.row(0) = total;
  out.bottomRows(n) = q_grad;
  out.bottomRows(n).rowwise() -= total / static_cast<double>(n);
  return out;
}

DuelingNet::DuelingNet(int obs_dim, const std::vector<int>& hidden, int num_actions,
                       nn::Activation act, std::uint64_t seed) {
  require(!hidden.empty(), "DuelingNet: need at least one hidden layer");
  require(num_actions >= 1, "DuelingNet: need at least one action");
  std::vector<int> trunk_sizes{obs_dim};
  trunk_sizes.insert(trunk_sizes.end(), hidden.begin(), hidden.end());
  trunk_ = nn::DenseNet(trunk_sizes, act, true, mix_seed(seed, 1));
  head_ = nn::DenseNet({hidden.back(), num_actions + 1}, act, false, mix_seed(seed, 2));
}

DuelingNet::DuelingNet(nn::DenseNet trunk, nn::DenseNet head) : trunk_(std::move(trunk)), head_(std::move(head)) {
  require(trunk_.activate_output(), "DuelingNet: trunk output must be activated");
  require(!head_.activate_output() && head_.sizes().size() == 2, "DuelingNet: head must be one linear layer");
  require(trunk_.output_dim() == head_.input_dim(), "DuelingNet: trunk/head dimension mismatch");
  require(head_.output_dim() >= 2, "DuelingNet: head needs value and advantage rows");
}

nn::Matrix DuelingNet::q_values(const nn::Matrix& obs, Cache* cache) const {
  nn::Matrix features = trunk_.forward(obs, cache ? &cache->trunk : nullptr);
  return dueling_combine(head_.forward(features, cache ? &cache->head : nullptr));
}

nn::Vector DuelingNet::q_values(const Observation& obs) const {
  return q_values(nn::column(obs)).col(0);
}

nn::Matrix DuelingNet::head_output(const nn::Matrix& obs) const {
  return head_.forward(trunk_.forward(obs));
}

nn::GradientTape DuelingNet::backward(const Cache& cache, const nn::Matrix& q_grad) const {
  nn::GradientTape head_tape = head_.backward(cache.head, dueling_combine_backward(q_grad));
  nn::GradientTape tape = trunk_.backward(cache.trunk, head_tape.input_grads.front());
  tape.append(std::move(head_tape));
  return tape;
}

nn::ParamViews DuelingNet::parameters() {
  nn::ParamViews out = trunk_.parameters();
  for (auto v : head_.parameters()) out.push_back(v);
  return out;
}

nn::ConstParamViews DuelingNet::parameters() const {
  nn::ConstParamViews out = trunk_.parameters();
  for (auto v : head_.parameters()) out.push_back(v);
  return out;
}

void DuelingNet::copy_parameters_from(const DuelingNet& other) {
  require(same_shape(other), "DuelingNet::copy_parameters_from: shape mismatch");
  trunk_.copy_parameters_from(other.trunk_);
  head_.copy_parameters_from(other.head_);
}

bool DuelingNet::same_shape(const DuelingNet& other) const {
  return trunk_.same_shape(other.trunk_) && head_.same_shape(other.head_);
}

void DuelingNet::save(std::ostream& out) const {
  out << "dueling 1\n";
  trunk_.save(out);
  head_.save(out);
}

DuelingNet DuelingNet::load(std::istream& in) {
  std::string tag;
  int version = 0;
  if (!(in >> tag >> version) || tag != "dueling" || version != 1)
    throw CheckpointError("expected a dueling network snapshot (version 1)");
  nn::DenseNet trunk = nn::DenseNet::load(in);
  nn::DenseNet head = nn::DenseNet::load(in);
  try {
    return DuelingNet(std::move(trunk), std::move(head));
  } catch (const ContractViolation& e) {
    throw CheckpointError(std::string("dueling snapshot: ") + e.what());
  }
}

RecurrentQNet::RecurrentQNet(int obs_dim, int hidden_dim, const std::vector<int>& head_hidden,
                             int num_actions, nn::Activation act, std::uint64_t seed)
    : cell_(obs_dim, hidden_dim, mix_seed(seed, 3)),
      head_(hidden_dim, head_hidden, num_actions, act, mix_seed(seed, 4)) {}

RecurrentQNet::RecurrentQNet(nn::RecurrentCell cell, DuelingNet head)
    : cell_(std::move(cell)), head_(std::move(head)) {
  require(cell_.hidden_dim() == head_.obs_dim(), "RecurrentQNet: cell/head dimension mismatch");
}

std::vector<nn::Matrix> RecurrentQNet::q_sequence(const std::vector<nn::Matrix>& obs, const nn::Matrix& h0,
                                                  Cache* cache, nn::Matrix* final_hidden) const {
  std::vector<nn::Matrix> hidden = cell_.forward(obs, h0, cache ? &cache->cell : nullptr);
  if (final_hidden) *final_hidden = hidden.back();
  const Eigen::Index batch = h0.cols();
  const auto steps = static_cast<Eigen::Index>(hidden.size());
  // All steps go through the head as one wide batch.
  nn::Matrix stacked(cell_.hidden_dim(), batch * steps);
  for (Eigen::Index t = 0; t < steps; ++t) stacked.middleCols(t * batch, batch) = hidden[t];
  nn::Matrix q = head_.q_values(stacked, cache ? &cache->head : nullptr);
  if (cache) {
    cache->steps = hidden.size();
    cache->batch = batch;
  }
  std::vector<nn::Matrix> out;
  out.reserve(hidden.size());
  for (Eigen::Index t = 0; t < steps; ++t) out.push_back(q.middleCols(t * batch, batch));
  return out;
}

nn::Vector RecurrentQNet::step(const Observation& obs, nn::Matrix& hidden) const {
  require(hidden.rows() == cell_.hidden_dim() && hidden.cols() == 1, "RecurrentQNet::step: bad hidden state");
  hidden = cell_.step(nn::column(obs), hidden);
  return head_.q_values(hidden).col(0);
}

nn::GradientTape RecurrentQNet::backward(const Cache& cache, const std::vector<nn::Matrix>& q_grads) const {
  require(q_grads.size() == cache.steps, "RecurrentQNet::backward: sequence length mismatch");
  const Eigen::Index batch = cache.batch;
  nn::Matrix stacked(num_actions(), batch * static_cast<Eigen::Index>(cache.steps));
  for (std::size_t t = 0; t < cache.steps; ++t) {
    require(q_grads[t].rows() == num_actions() && q_grads[t].cols() == batch,
            "RecurrentQNet::backward: Q gradient shape mismatch");
    stacked.middleCols(static_cast<Eigen::Index>(t) * batch, batch) = q_grads[t];
  }
  nn::GradientTape head_tape = head_.backward(cache.head, stacked);
  const nn::Matrix& feature_grad = head_tape.input_grads.front();
  std::vector<nn::Matrix> hidden_grads;
  hidden_grads.reserve(cache.steps);
  for (std::size_t t = 0; t < cache.steps; ++t)
    hidden_grads.push_back(feature_grad.middleCols(static_cast<Eigen::Index>(t) * batch, batch));
  nn::GradientTape tape = cell_.backward(cache.cell, hidden_grads);
  tape.append(std::move(head_tape));
  return tape;
}

nn::ParamViews RecurrentQNet::parameters() {
  nn::ParamViews out = cell_.parameters();
  for (auto v : head_.parameters()) out.push_back(v);
  return out;
}

nn::ConstParamViews RecurrentQNet::parameters() const {
  nn::ConstParamViews out = cell_.parameters();
  for (auto v : head_.parameters()) out.push_back(v);
  return out;
}

void RecurrentQNet::copy_parameters_from(const RecurrentQNet& other) {
  require(same_shape(other), "RecurrentQNet::copy_parameters_from: shape mismatch");
  cell_.copy_parameters_from(other.cell_);
  head_.copy_parameters_from(other.head_);
}

bool RecurrentQNet::same_shape(const RecurrentQNet& other) const {
  return cell_.same_shape(other.cell_) && head_.same_shape(other.head_);
}

void RecurrentQNet::save(std::ostream& out) const {
  out << "recurrent-q 1\n";
  cell_.save(out);
  head_.save(out);
}

RecurrentQNet RecurrentQNet::load(std::istream& in) {
  std::string tag;
  int version = 0;
  if (!(in >> tag >> version) || tag != "recurrent-q" || version != 1)
    throw CheckpointError("expected a recurrent Q-network snapshot (version 1)");
  nn::RecurrentCell cell = nn::RecurrentCell::load(in);
  DuelingNet head = DuelingNet::load(in);
  try {
    return RecurrentQNet(std::move(cell), std::move(head));
  } catch (const ContractViolation& e) {
    throw CheckpointError(std::string("recurrent snapshot: ") + e.what());
  }
}

}  // namespace actmeas::agents
