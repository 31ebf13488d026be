#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include "actmeas/active_measure.hpp"
#include "actmeas/rng.hpp"

namespace actmeas::agents {

struct Transition {
  Observation obs;
  int action = 0;  // flattened agent action index
  double reward = 0.0;  // costed reward as returned by the wrapper
  Observation next_obs;
  bool done = false;  // terminated; time-limit truncation keeps bootstrapping
};

using EpisodeSequence = std::vector<Transition>;

// Fixed-capacity FIFO of transitions, sampled uniformly with replacement.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  // Index 0 is the oldest stored transition.
  const Transition& at(std::size_t i) const;
  std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> items_;
  std::size_t head_ = 0;  // slot of the oldest item once full
};

// Whole episodes for recurrent training. Capacity counts transitions; the
// oldest episodes are evicted first.
class EpisodeReplay {
 public:
  struct Window {
    std::size_t episode = 0;  // index into stored episodes, 0 = oldest
    std::size_t start = 0;

    friend bool operator==(const Window&, const Window&) = default;
  };

  explicit EpisodeReplay(std::size_t capacity);

  void push(EpisodeSequence episode);
  std::size_t num_episodes() const { return episodes_.size(); }
  std::size_t num_transitions() const { return transitions_; }
  std::size_t capacity() const { return capacity_; }
  const EpisodeSequence& episode(std::size_t i) const { return episodes_.at(i); }

  // Every contiguous window of `length` steps lying inside one episode.
  std::vector<Window> enumerate_windows(std::size_t length) const;
  std::size_t count_windows(std::size_t length) const;
  // Uniform over all windows, with replacement. Empty when none exist.
  std::vector<Window> sample_windows(std::size_t batch, std::size_t length, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::deque<EpisodeSequence> episodes_;
  std::size_t transitions_ = 0;
};

}  // namespace actmeas::agents
