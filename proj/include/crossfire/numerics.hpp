#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

#include "crossfire/error.hpp"

namespace crossfire {

using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using Block8 = Eigen::Matrix<double, 8, 8>;

/// Norms at or below this are treated as degenerate by every normalizer.
inline constexpr double kNormEpsilon = 1e-12;
/// Allowed deviation of a NormalizedVector's L2 norm from 1.
inline constexpr double kUnitTolerance = 1e-6;

/// A vector with unit L2 norm. Only constructible through l2_normalize or
/// the checked from_unit factory, so the invariant holds everywhere.
class NormalizedVector {
 public:
  static NormalizedVector from_unit(Vector values);

  const Vector& data() const noexcept { return data_; }
  Index size() const noexcept { return data_.size(); }
  double operator[](Index i) const { return data_(i); }

 private:
  explicit NormalizedVector(Vector values) : data_(std::move(values)) {}

  template <typename Derived>
  friend NormalizedVector l2_normalize(const Eigen::MatrixBase<Derived>& x);

  Vector data_;
};

/// x / ||x||_2. Throws DegenerateNorm when ||x||_2 <= kNormEpsilon.
template <typename Derived>
NormalizedVector l2_normalize(const Eigen::MatrixBase<Derived>& x) {
  const double norm = x.template cast<double>().norm();
  if (!(norm > kNormEpsilon)) {
    throw Error(ErrorCode::DegenerateNorm, "vector norm " + std::to_string(norm) +
                                               " is at or below the degenerate threshold");
  }
  return NormalizedVector(Vector(x.template cast<double>() / norm));
}

/// Inner product of two unit vectors (cosine similarity).
double inner(const NormalizedVector& a, const NormalizedVector& b);

// Orthonormal 2-D type-II DCT on an 8x8 block.
Block8 dct8_forward(const Block8& block);
Block8 dct8_inverse(const Block8& coeffs);
/// The 8x8 orthonormal DCT-II basis matrix C, so that forward(X) = C X C^T.
const Block8& dct8_matrix();

/// How bilinear_sample treats texels outside the image.
enum class Boundary {
  Zero,       // out-of-bounds texels contribute 0
  Symmetric,  // mirror including the edge texel: ... b a | a b c ... c | c b ...
};

/// Maps a possibly out-of-range index into [0, n) by edge-including mirroring.
Index symmetric_index(Index i, Index n);

class MediaTensor;

/// Bilinear interpolation of the four texels around (x, y); texel centers sit
/// at integer coordinates, x runs along width and y along height. Returns one
/// value per channel.
Vector bilinear_sample(const MediaTensor& img, double x, double y,
                       Boundary boundary = Boundary::Zero);

/// SplitMix64 generator. Identical seeds produce identical streams everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller; consumes exactly two uniforms.
  double gaussian() noexcept;
  double gaussian(double mean, double stddev) noexcept { return mean + stddev * gaussian(); }

 private:
  std::uint64_t state_;
};

/// 64-bit FNV-1a over the bytes of s.
std::uint64_t fnv1a(std::string_view s) noexcept;

/// Deterministically combines two seeds into a new, well-mixed seed.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept;

}  // namespace crossfire
