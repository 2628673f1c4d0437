#pragma once

#include <cstdint>

namespace aicmss {

enum class StreamPurpose : std::uint64_t {
  disturbance = 0x6469737475726231ULL,
  excitation = 0x6578636974617431ULL,
  branch = 0x6272616e63683031ULL,
};

// Counter-based random source. Every draw is a pure function of the key
// (master seed, run index, optional branch path) and the requested step, so
// any draw can be reproduced without replaying the ones before it.
class RandomStreams {
 public:
  RandomStreams(std::uint64_t master_seed, std::uint64_t run_index);

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t run_index() const noexcept { return run_index_; }

  // N(0, sigma^2); zero when the disturbance stream is silenced.
  double disturbance(std::uint64_t step, double sigma) const;
  // Uniform[-half_width, half_width]; zero when the excitation stream is silenced.
  double excitation(std::uint64_t step, double half_width) const;

  // Independent substream for one Monte-Carlo branch off a trajectory prefix.
  RandomStreams branch(std::uint64_t prefix_id, std::uint64_t direction_index,
                       std::uint64_t branch_index) const;

  // Test hooks: replace a stream by the constant 0.
  RandomStreams silenced(bool disturbance, bool excitation) const;
  bool disturbance_silenced() const noexcept { return silent_w_; }
  bool excitation_silenced() const noexcept { return silent_v_; }

  double uniform01(StreamPurpose purpose, std::uint64_t step, std::uint64_t lane) const;
  double standard_normal(StreamPurpose purpose, std::uint64_t step) const;

 private:
  std::uint64_t master_seed_;
  std::uint64_t run_index_;
  std::uint64_t key_;
  bool silent_w_ = false;
  bool silent_v_ = false;
};

std::uint64_t splitmix64(std::uint64_t z) noexcept;
std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) noexcept;

}  // namespace aicmss
