#include "actmeas/nn/optim.hpp"

#include <cmath>

#include "actmeas/errors.hpp"

namespace actmeas::nn {

void Adam::step(const ParamViews& params, const ConstParamViews& grads) {
  require(params.size() == grads.size(), "Adam::step: parameter/gradient count mismatch");
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.size(), 0.0);
      v_.emplace_back(p.size(), 0.0);
    }
  }
  require(m_.size() == params.size(), "Adam::step: parameter layout changed");

  ++steps_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  const double step_size = config_.lr / correction1;
  const double sqrt_c2 = std::sqrt(correction2);

  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& p = params[k];
    const auto& g = grads[k];
    require(p.size() == g.size() && p.size() == m_[k].size(), "Adam::step: shape mismatch");
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      p[i] -= step_size * m[i] / (std::sqrt(v[i]) / sqrt_c2 + config_.eps);
    }
  }
}

HuberResult huber_loss(const Vector& pred, const Vector& target, double delta) {
  require(pred.size() == target.size(), "huber_loss: length mismatch");
  require(pred.size() > 0, "huber_loss: empty input");
  require(delta > 0.0, "huber_loss: delta must be positive");
  const double n = static_cast<double>(pred.size());
  HuberResult out;
  out.grad.resize(pred.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    const double err = pred(i) - target(i);
    const double abs_err = std::abs(err);
    if (abs_err <= delta) {
      total += 0.5 * err * err;
      out.grad(i) = err / n;
    } else {
      total += delta * (abs_err - 0.5 * delta);
      out.grad(i) = (err > 0 ? delta : -delta) / n;
    }
  }
  out.loss = total / n;
  return out;
}

}  // namespace actmeas::nn
