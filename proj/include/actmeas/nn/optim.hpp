#pragma once

#include <cstdint>
#include <vector>

#include "actmeas/nn/tensor.hpp"

namespace actmeas::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam. Moment buffers are sized on the first step and must
// keep matching the parameter layout afterwards.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  void step(const ParamViews& params, const ConstParamViews& grads);

  const AdamConfig& config() const { return config_; }
  AdamConfig& config() { return config_; }
  std::int64_t step_count() const { return steps_; }
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }

 private:
  AdamConfig config_;
  std::int64_t steps_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

struct HuberResult {
  double loss = 0.0;
  Vector grad;  // d loss / d pred
};

// Mean-reduced elementwise Huber loss.
HuberResult huber_loss(const Vector& pred, const Vector& target, double delta = 1.0);

}  // namespace actmeas::nn
