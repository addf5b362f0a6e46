#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>

#include <boost/random/normal_distribution.hpp>

namespace nplda::stats {

/// Counter-based random stream (Philox4x32-10).
///
/// The seed is the cipher key and the stream id occupies the upper half of
/// the 128-bit counter, so a (seed, stream_id) pair fully determines the
/// sequence. Monte-Carlo repetition r draws from RngStream(seed, r) and is
/// therefore independent of scheduling and thread count.
///
/// Satisfies UniformRandomBitGenerator. Not thread-safe; never share one
/// stream between threads.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  /// Standard normal draw.
  double normal();
  /// Uniform draw on [0, 1).
  double uniform();
  /// Uniform integer on [0, n). Requires n > 0.
  std::size_t uniform_index(std::size_t n);

  /// Deterministic, statistically independent sub-stream labelled by `key`.
  /// Does not advance this stream.
  RngStream child(std::uint64_t key) const;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = uniform_index(i);
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  boost::random::normal_distribution<double> normal_{0.0, 1.0};
};

/// SplitMix64 finalizer; used to derive child stream ids.
std::uint64_t mix64(std::uint64_t x);

}  // namespace nplda::stats
