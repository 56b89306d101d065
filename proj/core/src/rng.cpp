#include "tinyrl/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace tinyrl {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::uint64_t z = seed ^ (stream_id * 0xD2B74407B1CE6E93ULL + 0x632BE59BD9B4E019ULL);
  for (auto& s : s_) s = splitmix64(z);
  // All-zero state is invalid for xoshiro; splitmix cannot produce four
  // zeros from distinct increments, but keep the guard explicit.
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::next_below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("next_below: bound must be > 0");
  const std::uint64_t threshold = -bound % bound;
  for (;;) {
    std::uint64_t r = next_u64();
    if (r >= threshold) return r % bound;
  }
}

int RngStream::next_categorical(std::span<const double> probs) {
  double total = 0.0;
  for (double p : probs) total += p;
  double u = next_double() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

std::uint64_t derive_stream_id(std::uint64_t purpose, std::uint64_t iteration,
                               std::uint64_t index) {
  std::uint64_t z = purpose * 0x9E3779B97F4A7C15ULL;
  z ^= splitmix64(iteration);
  std::uint64_t w = index + 0xA24BAED4963EE407ULL;
  z ^= splitmix64(w);
  return z;
}

}  // namespace tinyrl
