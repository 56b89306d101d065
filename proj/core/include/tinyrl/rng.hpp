#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace tinyrl {

// Counter-free splittable RNG: every (seed, stream_id) pair names an
// independent xoshiro256++ stream whose draw sequence is identical across
// runs and thread counts. Workers never share a stream.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64();

  // Uniform in [0, 1), 53 mantissa bits.
  double next_double();

  // Uniform integer in [0, bound), bound > 0. Unbiased via rejection.
  std::uint64_t next_below(std::uint64_t bound);

  // Index drawn from an (unnormalized is fine) probability vector.
  int next_categorical(std::span<const double> probs);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t s_[4];
  std::uint64_t seed_;
  std::uint64_t stream_id_;
};

inline RngStream make_rng(std::uint64_t seed, std::uint64_t stream_id) {
  return RngStream(seed, stream_id);
}

// Stable mixing of (purpose, iteration, index) into a single stream id.
std::uint64_t derive_stream_id(std::uint64_t purpose, std::uint64_t iteration,
                               std::uint64_t index);

// Deterministic in-place Fisher-Yates.
template <typename T>
void shuffle(std::vector<T>& v, RngStream& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = rng.next_below(i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace tinyrl
