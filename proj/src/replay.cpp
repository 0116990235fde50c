#include "biaslab/replay.hpp"

#include <stdexcept>

namespace biaslab {

ReplayBuffer::ReplayBuffer(std::size_t capacity, Eigen::Index observation_width, Vector action_low,
                           Vector action_high)
    : capacity_(capacity), action_low_(std::move(action_low)), action_high_(std::move(action_high)) {
    if (capacity_ == 0) {
        throw std::invalid_argument("replay capacity must be positive");
    }
    if (observation_width <= 0 || action_low_.size() == 0 || action_low_.size() != action_high_.size()) {
        throw std::invalid_argument("replay buffer needs positive widths and matching action bounds");
    }
    const auto cap = static_cast<Eigen::Index>(capacity_);
    states_.resize(observation_width, cap);
    actions_.resize(action_low_.size(), cap);
    rewards_.resize(cap);
    next_states_.resize(observation_width, cap);
    terminal_.assign(capacity_, 0);
}

void ReplayBuffer::push(const Transition& t) {
    if (t.state.size() != states_.rows() || t.next_state.size() != states_.rows()) {
        throw std::invalid_argument("transition state width does not match the buffer");
    }
    if (t.action.size() != actions_.rows()) {
        throw std::invalid_argument("transition action width does not match the buffer");
    }
    if (!t.state.allFinite() || !t.next_state.allFinite() || !t.action.allFinite() || !std::isfinite(t.reward)) {
        throw std::invalid_argument("transition has non-finite entries");
    }
    if ((t.action.array() < action_low_.array()).any() || (t.action.array() > action_high_.array()).any()) {
        throw std::invalid_argument("transition action lies outside the action box");
    }
    const auto col = static_cast<Eigen::Index>(cursor_);
    states_.col(col) = t.state;
    actions_.col(col) = t.action;
    rewards_(col) = t.reward;
    next_states_.col(col) = t.next_state;
    terminal_[cursor_] = t.terminal ? 1 : 0;
    cursor_ = (cursor_ + 1) % capacity_;
    if (size_ < capacity_) {
        ++size_;
    }
}

Batch ReplayBuffer::sample(std::size_t k, std::mt19937_64& rng) const {
    if (size_ == 0) {
        throw std::logic_error("cannot sample from an empty replay buffer");
    }
    const auto kk = static_cast<Eigen::Index>(k);
    Batch b{Matrix(states_.rows(), kk), Matrix(actions_.rows(), kk), Vector(kk), Matrix(states_.rows(), kk),
            Vector(kk)};
    std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
    for (Eigen::Index i = 0; i < kk; ++i) {
        const auto j = static_cast<Eigen::Index>(pick(rng));
        b.states.col(i) = states_.col(j);
        b.actions.col(i) = actions_.col(j);
        b.rewards(i) = rewards_(j);
        b.next_states.col(i) = next_states_.col(j);
        b.mask(i) = terminal_[static_cast<std::size_t>(j)] ? 0.0 : 1.0;
    }
    return b;
}

Transition ReplayBuffer::at(std::size_t index) const {
    if (index >= size_) {
        throw std::out_of_range("replay index out of range");
    }
    const auto j = static_cast<Eigen::Index>(index);
    return Transition{states_.col(j), actions_.col(j), rewards_(j), next_states_.col(j), terminal_[index] != 0};
}

}  // namespace biaslab
