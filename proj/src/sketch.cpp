#include "sketchcv/sketch.hpp"

#include <cmath>
#include <numbers>

#include "sketchcv/error.hpp"

namespace sketchcv {
namespace {

__extension__ typedef unsigned __int128 u128;

// (a * x + b) mod 2^61 - 1 without overflow.
std::uint64_t mod_mersenne61(u128 v) noexcept {
  constexpr std::uint64_t p = HashPair::kPrime;
  std::uint64_t r = static_cast<std::uint64_t>(v & p) + static_cast<std::uint64_t>(v >> 61);
  r = (r & p) + (r >> 61);
  return r >= p ? r - p : r;
}

std::uint64_t affine_mod(std::uint64_t a, std::uint64_t b, std::uint64_t x) noexcept {
  const std::uint64_t xr = x % HashPair::kPrime;
  return mod_mersenne61(static_cast<u128>(a) * xr + b);
}

}  // namespace

const char* to_string(Scheme scheme) noexcept {
  switch (scheme) {
    case Scheme::FeatureHash: return "fh";
    case Scheme::RandomProjection: return "rp";
  }
  return "unknown";
}

HashPair HashPair::draw(SeededRng& rng, std::size_t k) {
  const std::uint64_t a = 1 + rng.below(kPrime - 1);
  const std::uint64_t b = rng.below(kPrime);
  const std::uint64_t sa = 1 + rng.below(kPrime - 1);
  const std::uint64_t sb = rng.below(kPrime);
  return from_coefficients(k, a, b, sa, sb);
}

HashPair HashPair::from_coefficients(std::size_t k, std::uint64_t a, std::uint64_t b,
                                     std::uint64_t sign_a, std::uint64_t sign_b) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "sketch size must be positive");
  if (a == 0 || a >= kPrime || b >= kPrime || sign_a == 0 || sign_a >= kPrime || sign_b >= kPrime) {
    throw Error(ErrorCode::InvalidArgument, "hash coefficients out of range");
  }
  HashPair h;
  h.k_ = k;
  h.a_ = a;
  h.b_ = b;
  h.sign_a_ = sign_a;
  h.sign_b_ = sign_b;
  return h;
}

HashPair HashPair::from_tables(std::size_t k, std::vector<std::size_t> buckets,
                               std::vector<int> signs) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "sketch size must be positive");
  if (buckets.size() != signs.size()) {
    throw Error(ErrorCode::DimensionMismatch, "bucket and sign tables differ in length");
  }
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    if (buckets[i] >= k) throw Error(ErrorCode::InvalidArgument, "bucket out of range");
    if (signs[i] != 1 && signs[i] != -1) throw Error(ErrorCode::InvalidArgument, "sign must be +1 or -1");
  }
  HashPair h;
  h.k_ = k;
  h.buckets_ = std::move(buckets);
  h.signs_ = std::move(signs);
  return h;
}

std::size_t HashPair::bucket(std::size_t col) const {
  if (!buckets_.empty()) {
    if (col >= buckets_.size()) throw Error(ErrorCode::DimensionMismatch, "column outside hash table");
    return buckets_[col];
  }
  return static_cast<std::size_t>(affine_mod(a_, b_, col) % k_);
}

double HashPair::sign(std::size_t col) const {
  if (!signs_.empty()) {
    if (col >= signs_.size()) throw Error(ErrorCode::DimensionMismatch, "column outside hash table");
    return static_cast<double>(signs_[col]);
  }
  return (affine_mod(sign_a_, sign_b_, col) & 1U) ? -1.0 : 1.0;
}

Vector feature_hash(std::span<const double> x, std::size_t k, const HashPair& hashes) {
  if (k != hashes.k()) throw Error(ErrorCode::DimensionMismatch, "k does not match the hash pair");
  Vector v = Vector::Zero(static_cast<Index>(k));
  for (std::size_t t = 0; t < x.size(); ++t) {
    v(static_cast<Index>(hashes.bucket(t))) += hashes.sign(t) * x[t];
  }
  return v;
}

Matrix draw_projection(SeededRng& rng, Index p, Index k) {
  if (p < 1 || k < 1) throw Error(ErrorCode::InvalidArgument, "projection must be at least 1 x 1");
  Matrix r(p, k);
  for (Index s = 0; s < k; ++s) {
    for (Index i = 0; i < p; ++i) r(i, s) = rng.normal();
  }
  return r;
}

Vector random_projection(std::span<const double> x, const Matrix& r) {
  if (static_cast<Index>(x.size()) != r.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "projection rows must match the vector length");
  }
  const Eigen::Map<const Vector> xv(x.data(), static_cast<Index>(x.size()));
  return r.transpose() * xv;
}

void SketchPair::validate() const {
  if (vi.size() < 1 || vi.size() != vj.size()) {
    throw Error(ErrorCode::DimensionMismatch, "sketches must have equal positive length");
  }
  if (!(norm_i_sq > 0.0) || !(norm_j_sq > 0.0) || !std::isfinite(norm_i_sq) || !std::isfinite(norm_j_sq)) {
    throw Error(ErrorCode::InvalidArgument, "squared norms must be finite and positive");
  }
}

SuffStats suff_stats(const SketchPair& pair) {
  pair.validate();
  SuffStats s;
  s.k = pair.k();
  s.w1 = pair.vi.squaredNorm();
  s.w2 = pair.vj.squaredNorm();
  s.w3 = pair.vi.dot(pair.vj);
  if (pair.scheme == Scheme::RandomProjection) {
    const double k = static_cast<double>(s.k);
    s.w1 /= k;
    s.w2 /= k;
    s.w3 /= k;
  }
  return s;
}

std::pair<Vector, Vector> generate_vector_pair(Index d, double r, double theta, SeededRng& rng) {
  if (d < 2) throw Error(ErrorCode::InvalidArgument, "dimension must be at least 2");
  if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorCode::InvalidArgument, "norm ratio must be positive");
  if (!(theta >= 0.0 && theta <= std::numbers::pi)) {
    throw Error(ErrorCode::InvalidAngle, "angle must lie in [0, pi]");
  }
  Vector u(d), w(d);
  for (Index i = 0; i < d; ++i) u(i) = rng.normal();
  for (Index i = 0; i < d; ++i) w(i) = rng.normal();
  u.normalize();
  // Two passes of Gram-Schmidt keep u_perp orthogonal to machine precision.
  w -= u.dot(w) * u;
  w -= u.dot(w) * u;
  w.normalize();
  const double dd = static_cast<double>(d);
  Vector x2 = std::sqrt(dd) * u;
  Vector x1 = std::sqrt(r * dd) * (std::cos(theta) * u + std::sin(theta) * w);
  return {std::move(x1), std::move(x2)};
}

}  // namespace sketchcv
