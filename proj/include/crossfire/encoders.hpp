#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "crossfire/media.hpp"

namespace crossfire {

using Matrix = Eigen::MatrixXd;

struct IdentitySpec {
  friend bool operator==(const IdentitySpec&, const IdentitySpec&) = default;
};

/// tanh(W (x - c) + b) over the flattened media, c the value-range midpoint.
struct RandomProjectionSpec {
  Index out_dim = 64;
  friend bool operator==(const RandomProjectionSpec&, const RandomProjectionSpec&) = default;
};

/// Non-overlapping patches (centered at the value-range midpoint) -> affine ->
/// tanh -> mean over patches -> affine.
/// Image patches are patch x patch squares across all channels; audio patches
/// are contiguous segments of `patch` samples.
struct PatchConvSpec {
  Index patch = 4;
  Index hidden = 32;
  Index out_dim = 64;
  friend bool operator==(const PatchConvSpec&, const PatchConvSpec&) = default;
};

using EncoderSpec = std::variant<IdentitySpec, RandomProjectionSpec, PatchConvSpec>;

/// Text form: "identity", "random_projection:<out_dim>", "patch_conv:<patch>:<hidden>:<out_dim>".
EncoderSpec parse_encoder_spec(std::string_view text);
std::string to_string(const EncoderSpec& spec);

/// Frozen parameters of a RandomProjection encoder.
struct ProjectionParams {
  Matrix weight;  // out_dim x in_dim
  Vector bias;
};

/// Frozen parameters of a PatchConv encoder plus the patch gather map.
struct PatchConvParams {
  Matrix w1;  // hidden x patch_len
  Vector b1;
  Matrix w2;  // out_dim x hidden
  Vector b2;
  Index patch_len = 0;
  Index num_patches = 0;
  // gather[k * patch_len + r] is the flat media index of row r of patch k.
  std::vector<Index> gather;
};

/// A frozen differentiable map from media of shape `in_shape()` to an
/// `out_dim()`-dimensional embedding. Immutable and safe to share across threads.
class Encoder {
 public:
  using Params = std::variant<std::monostate, ProjectionParams, PatchConvParams>;

  /// Builds a RandomProjection encoder with explicit parameters.
  static Encoder from_projection(const MediaShape& in_shape, Matrix weight, Vector bias);
  /// Builds a PatchConv encoder with explicit parameters.
  static Encoder from_patch_conv(const MediaShape& in_shape, Index patch, Matrix w1, Vector b1,
                                 Matrix w2, Vector b2);

  const EncoderSpec& spec() const noexcept { return spec_; }
  const MediaShape& in_shape() const noexcept { return in_shape_; }
  Index out_dim() const noexcept { return out_dim_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const Params& params() const noexcept { return params_; }

  /// Midpoint of the input value range, subtracted before the first affine map.
  double input_center() const noexcept { return 0.5 * (in_shape_.lower() + in_shape_.upper()); }

  /// Embedding of a flattened input; values need not be in the media range.
  Vector forward(const Eigen::Ref<const Vector>& flat) const;
  /// J(flat)^T * cotangent.
  Vector vjp(const Eigen::Ref<const Vector>& flat, const Eigen::Ref<const Vector>& cotangent) const;

 private:
  friend Encoder make_encoder(const EncoderSpec& spec, const MediaShape& in_shape,
                              std::uint64_t seed);

  Encoder(EncoderSpec spec, MediaShape in_shape, Index out_dim, std::uint64_t seed, Params params)
      : spec_(spec), in_shape_(in_shape), out_dim_(out_dim), seed_(seed),
        params_(std::move(params)) {}

  void check_input(Index size) const;

  EncoderSpec spec_;
  MediaShape in_shape_;
  Index out_dim_;
  std::uint64_t seed_;
  Params params_;
};

/// Draws weights Gaussian(0, 1/sqrt(fan_in)) from Rng(seed) in row-major
/// order, layer by layer; biases start at zero. Throws BadSpec.
Encoder make_encoder(const EncoderSpec& spec, const MediaShape& in_shape, std::uint64_t seed);

/// Throws ShapeMismatch unless v.shape() == e.in_shape().
Vector embed(const Encoder& e, const MediaTensor& v);
Vector embed_vjp(const Encoder& e, const MediaTensor& v, const Vector& cotangent);

/// Analytic upper bound K on ||embed(x + eta) - embed(x)|| / ||eta||.
double lipschitz_bound(const Encoder& e);

/// Hashing bag-of-words text encoder: tokens are FNV-1a hashed into
/// `vocab_size` buckets, the count vector is projected and squashed by tanh.
class TextEncoder {
 public:
  TextEncoder(Index vocab_size, Index out_dim, std::uint64_t seed);

  Index vocab_size() const noexcept { return projection_.rows(); }
  Index out_dim() const noexcept { return projection_.cols(); }
  const Matrix& projection() const noexcept { return projection_; }

 private:
  Matrix projection_;  // vocab_size x out_dim
};

/// Lowercased whitespace tokens of s.
std::vector<std::string> tokenize(std::string_view s);

/// Throws EmptyText when s has no tokens.
Vector embed_text(const TextEncoder& te, std::string_view s);

}  // namespace crossfire
