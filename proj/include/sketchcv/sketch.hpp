#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sketchcv/efamily.hpp"
#include "sketchcv/rng.hpp"

namespace sketchcv {

enum class Scheme { FeatureHash, RandomProjection };

const char* to_string(Scheme scheme) noexcept;

/// Bucket and sign hashes for feature hashing. Two modes:
///  - universal: h(t) = ((a t + b) mod P) mod k and phi(t) = +1 if
///    ((a' t + b') mod P) is even, -1 otherwise, with P = 2^61 - 1;
///  - explicit tables, used for hand-checkable examples.
/// Buckets are 0-based.
class HashPair {
 public:
  static constexpr std::uint64_t kPrime = (std::uint64_t{1} << 61) - 1;

  /// Draws (a, b, a', b') with a, a' in [1, P) and b, b' in [0, P).
  static HashPair draw(SeededRng& rng, std::size_t k);
  static HashPair from_coefficients(std::size_t k, std::uint64_t a, std::uint64_t b,
                                    std::uint64_t sign_a, std::uint64_t sign_b);
  static HashPair from_tables(std::size_t k, std::vector<std::size_t> buckets,
                              std::vector<int> signs);

  std::size_t k() const noexcept { return k_; }
  std::size_t bucket(std::size_t col) const;
  double sign(std::size_t col) const;

 private:
  HashPair() = default;

  std::size_t k_ = 1;
  std::uint64_t a_ = 1, b_ = 0, sign_a_ = 1, sign_b_ = 0;
  std::vector<std::size_t> buckets_;
  std::vector<int> signs_;
};

/// v_s = sum over columns t with h(t) = s of phi(t) x_t.
Vector feature_hash(std::span<const double> x, std::size_t k, const HashPair& hashes);

/// p x k matrix of standard normals, drawn column by column, so the first k'
/// columns of a p x k draw equal a p x k' draw from the same generator state.
Matrix draw_projection(SeededRng& rng, Index p, Index k);

/// v_s = <x, R[:, s]>.
Vector random_projection(std::span<const double> x, const Matrix& r);

struct SketchPair {
  Vector vi;
  Vector vj;
  double norm_i_sq = 0.0;
  double norm_j_sq = 0.0;
  Scheme scheme = Scheme::FeatureHash;

  std::size_t k() const noexcept { return static_cast<std::size_t>(vi.size()); }
  void validate() const;
};

/// Sufficient statistics normalised so that E[w1] = |x_i|^2, E[w2] = |x_j|^2
/// and E[w3] = <x_i, x_j>.
struct SuffStats {
  double w1 = 0.0;
  double w2 = 0.0;
  double w3 = 0.0;
  std::size_t k = 0;
};

/// Raw sums for feature hashing; sums divided by k for random projection.
SuffStats suff_stats(const SketchPair& pair);

/// Vectors with |x2|^2 = d, |x1|^2 = r d and angle theta between them.
/// Throws InvalidAngle if theta is outside [0, pi].
std::pair<Vector, Vector> generate_vector_pair(Index d, double r, double theta, SeededRng& rng);

}  // namespace sketchcv
