#pragma once

#include "biaslab/network.hpp"

#include <cstddef>
#include <random>

namespace biaslab {

struct Transition {
    Vector state;
    Vector action;
    double reward = 0.0;
    Vector next_state;
    bool terminal = false;  // true only for absorbing states; masks bootstrapping
};

/// Column-stacked mini-batch. mask(i) is 0 for absorbing terminals, else 1.
struct Batch {
    Matrix states;
    Matrix actions;
    Vector rewards;
    Matrix next_states;
    Vector mask;

    Eigen::Index size() const noexcept { return rewards.size(); }
};

/// Fixed-capacity ring of transitions with uniform sampling with replacement.
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, Eigen::Index observation_width, Vector action_low, Vector action_high);

    /// Throws std::invalid_argument if widths do not match, the action is
    /// outside the box, or any entry is non-finite.
    void push(const Transition& t);

    /// k independent uniform draws. Throws std::logic_error when empty.
    Batch sample(std::size_t k, std::mt19937_64& rng) const;

    Transition at(std::size_t index) const;

    std::size_t size() const noexcept { return size_; }
    std::size_t capacity() const noexcept { return capacity_; }
    std::size_t cursor() const noexcept { return cursor_; }
    bool empty() const noexcept { return size_ == 0; }

private:
    std::size_t capacity_;
    std::size_t size_ = 0;
    std::size_t cursor_ = 0;
    Vector action_low_;
    Vector action_high_;
    Matrix states_;
    Matrix actions_;
    Vector rewards_;
    Matrix next_states_;
    std::vector<unsigned char> terminal_;
};

}  // namespace biaslab
