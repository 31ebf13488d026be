#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "actmeas/active_measure.hpp"
#include "actmeas/nn/dense.hpp"
#include "actmeas/nn/recurrent.hpp"

namespace actmeas::agents {

// Recombines a head output laid out as rows [V; A_0 .. A_{n-1}] into
// Q = V + A - mean(A), column by column.
nn::Matrix dueling_combine(const nn::Matrix& head_out);

// Maps dL/dQ back to dL/d[V; A].
nn::Matrix dueling_combine_backward(const nn::Matrix& q_grad);

// Dueling Q-network: an activated dense trunk feeding one linear layer whose
// first row is the state value and the remaining rows the advantages.
class DuelingNet {
 public:
  struct Cache {
    nn::DenseNet::Cache trunk;
    nn::DenseNet::Cache head;
  };

  DuelingNet() = default;
  DuelingNet(int obs_dim, const std::vector<int>& hidden, int num_actions, nn::Activation act,
             std::uint64_t seed);
  DuelingNet(nn::DenseNet trunk, nn::DenseNet head);

  nn::Matrix q_values(const nn::Matrix& obs, Cache* cache = nullptr) const;
  nn::Vector q_values(const Observation& obs) const;
  // Raw [V; A] head output, for inspection.
  nn::Matrix head_output(const nn::Matrix& obs) const;

  // Parameter order: trunk, then head.
  nn::GradientTape backward(const Cache& cache, const nn::Matrix& q_grad) const;
  nn::ParamViews parameters();
  nn::ConstParamViews parameters() const;

  void copy_parameters_from(const DuelingNet& other);
  bool same_shape(const DuelingNet& other) const;

  int obs_dim() const { return trunk_.input_dim(); }
  int num_actions() const { return head_.output_dim() - 1; }
  const nn::DenseNet& trunk() const { return trunk_; }
  const nn::DenseNet& head() const { return head_; }
  nn::DenseNet& mutable_trunk() { return trunk_; }
  nn::DenseNet& mutable_head() { return head_; }

  void save(std::ostream& out) const;
  static DuelingNet load(std::istream& in);

 private:
  nn::DenseNet trunk_;
  nn::DenseNet head_;
};

// Elman cell followed by a dueling head, for recurrent Q-learning.
class RecurrentQNet {
 public:
  struct Cache {
    nn::RecurrentCell::Cache cell;
    DuelingNet::Cache head;
    std::size_t steps = 0;
    Eigen::Index batch = 0;
  };

  RecurrentQNet() = default;
  RecurrentQNet(int obs_dim, int hidden_dim, const std::vector<int>& head_hidden, int num_actions,
                nn::Activation act, std::uint64_t seed);
  RecurrentQNet(nn::RecurrentCell cell, DuelingNet head);

  // Q-values per time step for a batch of sequences (one batch matrix per
  // step). `final_hidden`, when given, receives h_T.
  std::vector<nn::Matrix> q_sequence(const std::vector<nn::Matrix>& obs, const nn::Matrix& h0,
                                     Cache* cache = nullptr, nn::Matrix* final_hidden = nullptr) const;

  // One step for a single observation; returns Q and replaces `hidden`.
  nn::Vector step(const Observation& obs, nn::Matrix& hidden) const;

  // Parameter order: cell, then head. Gradient does not flow into h0.
  nn::GradientTape backward(const Cache& cache, const std::vector<nn::Matrix>& q_grads) const;
  nn::ParamViews parameters();
  nn::ConstParamViews parameters() const;

  void copy_parameters_from(const RecurrentQNet& other);
  bool same_shape(const RecurrentQNet& other) const;

  nn::Matrix zero_hidden(Eigen::Index batch = 1) const {
    return nn::Matrix::Zero(cell_.hidden_dim(), batch);
  }
  int obs_dim() const { return cell_.input_dim(); }
  int hidden_dim() const { return cell_.hidden_dim(); }
  int num_actions() const { return head_.num_actions(); }
  const nn::RecurrentCell& cell() const { return cell_; }
  const DuelingNet& head() const { return head_; }
  nn::RecurrentCell& mutable_cell() { return cell_; }
  DuelingNet& mutable_head() { return head_; }

  void save(std::ostream& out) const;
  static RecurrentQNet load(std::istream& in);

 private:
  nn::RecurrentCell cell_;
  DuelingNet head_;
};

}  // namespace actmeas::agents
