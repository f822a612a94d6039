#pragma once

#include <array>
#include <cstdint>

namespace sketchcv {

using Philox4x64Counter = std::array<std::uint64_t, 4>;
using Philox4x64Key = std::array<std::uint64_t, 2>;

/// Philox4x64 with 10 rounds (Salmon et al., "Parallel random numbers: as easy
/// as 1, 2, 3"). Pure function of counter and key.
Philox4x64Counter philox4x64_10(Philox4x64Counter ctr, Philox4x64Key key) noexcept;

/// Order-sensitive 64-bit mix of two words; used to derive stream ids.
std::uint64_t hash64(std::uint64_t a, std::uint64_t b) noexcept;

/// Counter-based generator keyed by (seed, stream). Block n of the stream is
/// philox4x64_10({n, 0, 0, 0}, {seed, stream}), so any stream can be
/// reconstructed independently of how many other streams exist or which
/// thread consumes them.
///
/// Normal variates use the Box-Muller transform on two 53-bit uniforms; both
/// outputs of a transform are consumed in order.
class SeededRng {
 public:
  SeededRng(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  /// Child generator on stream hash64(stream, tag), same seed.
  SeededRng derive(std::uint64_t tag) const noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform integer on [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept;
  double normal() noexcept;
  /// +1 or -1 with equal probability.
  double rademacher() noexcept;

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Philox4x64Counter buffer_{};
  unsigned pos_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sketchcv
