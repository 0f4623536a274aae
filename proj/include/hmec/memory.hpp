#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <vector>

#include "hmec/net.hpp"
#include "hmec/random.hpp"

namespace hmec {

/// Fixed-capacity sample store, oldest-first eviction. Every pushed sample
/// gets a monotonically increasing sequence tag.
class SampleMemory {
public:
    struct Entry {
        Sample sample;
        std::uint64_t seq;
    };

    explicit SampleMemory(std::size_t capacity = 5000) : capacity_(capacity) {
        if (capacity_ == 0) throw std::invalid_argument("SampleMemory: capacity must be >= 1");
    }

    /// Returns the number of evicted samples.
    std::size_t push(Sample s) {
        std::size_t evicted = 0;
        if (entries_.size() == capacity_) {
            entries_.pop_front();
            ++evicted;
        }
        entries_.push_back({std::move(s), next_seq_++});
        replaced_since_refresh_ += evicted;
        return evicted;
    }

    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return entries_.empty(); }
    const std::deque<Entry>& entries() const { return entries_; }
    std::uint64_t next_seq() const { return next_seq_; }

    std::vector<Sample> samples() const {
        std::vector<Sample> out;
        out.reserve(entries_.size());
        for (const auto& e : entries_) out.push_back(e.sample);
        return out;
    }

    /// Uniform minibatch with replacement.
    std::vector<Sample> draw(std::size_t k, Rng& rng) const {
        std::vector<Sample> out;
        if (entries_.empty()) return out;
        out.reserve(k);
        for (std::size_t t = 0; t < k; ++t) out.push_back(entries_[uniform_index(rng, entries_.size())].sample);
        return out;
    }

    /// Evictions since the last refresh mark; used to decide when the
    /// memory has turned over.
    std::size_t replaced_since_refresh() const { return replaced_since_refresh_; }
    void mark_refresh() { replaced_since_refresh_ = 0; }

    void restore(std::deque<Entry> entries, std::uint64_t next_seq) {
        if (entries.size() > capacity_) throw std::invalid_argument("SampleMemory::restore: over capacity");
        entries_ = std::move(entries);
        next_seq_ = next_seq;
    }

private:
    std::size_t capacity_;
    std::deque<Entry> entries_;
    std::uint64_t next_seq_ = 0;
    std::size_t replaced_since_refresh_ = 0;
};

/// (state, refined action) pair stored for policy updates.
struct Transition {
    std::vector<double> state;
    int action = 0;
    double fraction = 1.0;
    double priority = 1.0;
    std::uint64_t seq = 0;

    Sample as_sample() const { return Sample{state, action, fraction}; }
};

/// FIFO replay buffer with proportional prioritized sampling:
/// P(k) = p_k^alpha / sum_j p_j^alpha, drawn with replacement.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity = 10000, double alpha = 0.6) : capacity_(capacity), alpha_(alpha) {
        if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: capacity must be >= 1");
        if (alpha_ < 0) throw std::invalid_argument("ReplayBuffer: alpha must be >= 0");
    }

    void push(Transition t) {
        if (!(t.priority > 0) || !std::isfinite(t.priority))
            throw std::invalid_argument("ReplayBuffer::push: priority must be positive and finite");
        t.seq = next_seq_++;
        if (entries_.size() == capacity_) entries_.pop_front();
        entries_.push_back(std::move(t));
    }

    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    double alpha() const { return alpha_; }
    const std::deque<Transition>& entries() const { return entries_; }
    std::uint64_t next_seq() const { return next_seq_; }

    double probability(std::size_t k) const {
        double total = 0.0;
        for (const auto& e : entries_) total += std::pow(e.priority, alpha_);
        return std::pow(entries_[k].priority, alpha_) / total;
    }

    /// Indices of a prioritized batch of min(batch, size()) draws.
    std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const {
        std::vector<std::size_t> out;
        const std::size_t k = std::min(batch, entries_.size());
        if (k == 0) return out;
        std::vector<double> cdf(entries_.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            acc += std::pow(entries_[i].priority, alpha_);
            cdf[i] = acc;
        }
        out.reserve(k);
        for (std::size_t t = 0; t < k; ++t) {
            const double u = uniform01(rng) * acc;
            auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
            out.push_back(std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), entries_.size() - 1));
        }
        return out;
    }

    std::vector<Sample> sample(std::size_t batch, Rng& rng) const {
        std::vector<Sample> out;
        for (auto i : sample_indices(batch, rng)) out.push_back(entries_[i].as_sample());
        return out;
    }

    void restore(std::deque<Transition> entries, std::uint64_t next_seq) {
        if (entries.size() > capacity_) throw std::invalid_argument("ReplayBuffer::restore: over capacity");
        entries_ = std::move(entries);
        next_seq_ = next_seq;
    }

private:
    std::size_t capacity_;
    double alpha_;
    std::deque<Transition> entries_;
    std::uint64_t next_seq_ = 0;
};

} // namespace hmec
