#include "aicmss/random_streams.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "aicmss/errors.hpp"

namespace aicmss {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::domain: return "domain";
    case ErrorKind::empty_dataset: return "empty-dataset";
    case ErrorKind::inapplicable: return "inapplicable";
    case ErrorKind::internal: return "internal";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) noexcept {
  return splitmix64(h ^ splitmix64(v + 0x632be59bd9b4e019ULL));
}

RandomStreams::RandomStreams(std::uint64_t master_seed, std::uint64_t run_index)
    : master_seed_(master_seed),
      run_index_(run_index),
      key_(hash_combine(splitmix64(master_seed), run_index)) {}

double RandomStreams::uniform01(StreamPurpose purpose, std::uint64_t step,
                                std::uint64_t lane) const {
  std::uint64_t h = hash_combine(key_, static_cast<std::uint64_t>(purpose));
  h = hash_combine(h, step);
  h = hash_combine(h, lane);
  // 53 random bits, centred in their cell: strictly inside (0, 1).
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStreams::standard_normal(StreamPurpose purpose, std::uint64_t step) const {
  const double u1 = uniform01(purpose, step, 0);
  const double u2 = uniform01(purpose, step, 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double RandomStreams::disturbance(std::uint64_t step, double sigma) const {
  if (silent_w_) return 0.0;
  return sigma * standard_normal(StreamPurpose::disturbance, step);
}

double RandomStreams::excitation(std::uint64_t step, double half_width) const {
  if (silent_v_) return 0.0;
  const double u = uniform01(StreamPurpose::excitation, step, 0);
  const double v = half_width * (2.0 * u - 1.0);
  return std::clamp(v, -half_width, half_width);
}

RandomStreams RandomStreams::branch(std::uint64_t prefix_id, std::uint64_t direction_index,
                                    std::uint64_t branch_index) const {
  RandomStreams out = *this;
  std::uint64_t h = hash_combine(key_, static_cast<std::uint64_t>(StreamPurpose::branch));
  h = hash_combine(h, prefix_id);
  h = hash_combine(h, direction_index);
  out.key_ = hash_combine(h, branch_index);
  return out;
}

RandomStreams RandomStreams::silenced(bool disturbance, bool excitation) const {
  RandomStreams out = *this;
  out.silent_w_ = disturbance;
  out.silent_v_ = excitation;
  return out;
}

}  // namespace aicmss
