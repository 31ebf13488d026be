#include "actmeas/agents/replay.hpp"

#include <algorithm>

#include "actmeas/errors.hpp"

namespace actmeas::agents {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  require(capacity > 0, "ReplayBuffer: capacity must be positive");
  items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
    return;
  }
  items_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  require(i < items_.size(), "ReplayBuffer::at: index out of range");
  return items_[(head_ + i) % items_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch, Rng& rng) const {
  require(!items_.empty(), "ReplayBuffer::sample_indices: buffer is empty");
  std::vector<std::size_t> out(batch);
  for (auto& i : out) i = rng.index(items_.size());
  return out;
}

EpisodeReplay::EpisodeReplay(std::size_t capacity) : capacity_(capacity) {
  require(capacity > 0, "EpisodeReplay: capacity must be positive");
}

void EpisodeReplay::push(EpisodeSequence episode) {
  if (episode.empty()) return;
  transitions_ += episode.size();
  episodes_.push_back(std::move(episode));
  while (transitions_ > capacity_ && episodes_.size() > 1) {
    transitions_ -= episodes_.front().size();
    episodes_.pop_front();
  }
}

std::size_t EpisodeReplay::count_windows(std::size_t length) const {
  require(length > 0, "EpisodeReplay: window length must be positive");
  std::size_t total = 0;
  for (const auto& ep : episodes_)
    if (ep.size() >= length) total += ep.size() - length + 1;
  return total;
}

std::vector<EpisodeReplay::Window> EpisodeReplay::enumerate_windows(std::size_t length) const {
  require(length > 0, "EpisodeReplay: window length must be positive");
  std::vector<Window> out;
  for (std::size_t e = 0; e < episodes_.size(); ++e) {
    const std::size_t n = episodes_[e].size();
    for (std::size_t s = 0; s + length <= n; ++s) out.push_back({e, s});
  }
  return out;
}

std::vector<EpisodeReplay::Window> EpisodeReplay::sample_windows(std::size_t batch, std::size_t length,
                                                                 Rng& rng) const {
  require(length > 0, "EpisodeReplay: window length must be positive");
  std::vector<std::size_t> cumulative;
  cumulative.reserve(episodes_.size());
  std::size_t total = 0;
  for (const auto& ep : episodes_) {
    if (ep.size() >= length) total += ep.size() - length + 1;
    cumulative.push_back(total);
  }
  if (total == 0) return {};
  std::vector<Window> out(batch);
  for (auto& w : out) {
    const std::size_t k = rng.index(total);
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), k);
    w.episode = static_cast<std::size_t>(it - cumulative.begin());
    const std::size_t before = w.episode == 0 ? 0 : cumulative[w.episode - 1];
    w.start = k - before;
  }
  return out;
}

}  // namespace actmeas::agents
