#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sc2/rng.hpp"

namespace sc2 {

// One stored transition. Observations are kept flattened (the network input
// layout) in float to halve memory; rewards and actions stay double.
struct Experience {
  std::vector<double> s;
  double psi = 0.0;
  double r = 0.0;
  std::vector<double> s2;
  bool terminal = false;
};

// Bounded FIFO with uniform sampling.
class ReplayBuffer {
 public:
  ReplayBuffer(size_t capacity, size_t obs_len) : cap_(capacity), len_(obs_len) {
    s_.reserve(cap_ * len_);
    s2_.reserve(cap_ * len_);
  }

  size_t size() const { return count_; }
  size_t capacity() const { return cap_; }

  void push(const std::vector<double>& s, double psi, double r,
            const std::vector<double>& s2, bool terminal) {
    if (count_ < cap_) {
      s_.resize((count_ + 1) * len_);
      s2_.resize((count_ + 1) * len_);
      write(count_, s, psi, r, s2, terminal, true);
      ++count_;
    } else {
      write(head_, s, psi, r, s2, terminal, false);
      head_ = (head_ + 1) % cap_;
    }
  }

  // Uniform sample with replacement; always returns exactly `n` tuples.
  void sample(Rng& rng, size_t n, std::vector<Experience>& out) const {
    out.resize(n);
    for (size_t k = 0; k < n; ++k) {
      const size_t idx = rng.below(count_);
      Experience& e = out[k];
      e.s.resize(len_);
      e.s2.resize(len_);
      for (size_t i = 0; i < len_; ++i) {
        e.s[i] = s_[idx * len_ + i];
        e.s2[i] = s2_[idx * len_ + i];
      }
      e.psi = psi_[idx];
      e.r = r_[idx];
      e.terminal = term_[idx] != 0;
    }
  }

 private:
  void write(size_t at, const std::vector<double>& s, double psi, double r,
             const std::vector<double>& s2, bool terminal, bool grow) {
    if (grow) {
      psi_.push_back(psi);
      r_.push_back(r);
      term_.push_back(terminal ? 1 : 0);
    } else {
      psi_[at] = psi;
      r_[at] = r;
      term_[at] = terminal ? 1 : 0;
    }
    for (size_t i = 0; i < len_; ++i) {
      s_[at * len_ + i] = static_cast<float>(s[i]);
      s2_[at * len_ + i] = static_cast<float>(s2[i]);
    }
  }

  size_t cap_;
  size_t len_;
  size_t count_ = 0;
  size_t head_ = 0;  // next overwrite position once full
  std::vector<float> s_, s2_;
  std::vector<double> psi_, r_;
  std::vector<uint8_t> term_;
};

}  // namespace sc2
