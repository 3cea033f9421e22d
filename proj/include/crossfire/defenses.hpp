#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "crossfire/media.hpp"

namespace crossfire {

struct UpsampleX2 {
  friend bool operator==(const UpsampleX2&, const UpsampleX2&) = default;
};
struct DownsampleX2 {
  friend bool operator==(const DownsampleX2&, const DownsampleX2&) = default;
};
/// Angle drawn uniformly from [-180, 180] degrees, once per application.
struct DrawUniform {
  std::uint64_t seed = 0;
  friend bool operator==(const DrawUniform&, const DrawUniform&) = default;
};
struct Rotate {
  std::variant<double, DrawUniform> angle_deg = 0.0;
  friend bool operator==(const Rotate&, const Rotate&) = default;
};
struct JpegLike {
  int quality = 75;
  friend bool operator==(const JpegLike&, const JpegLike&) = default;
};
/// Mean filter; the stand-in for diffusion-based denoisers.
struct SmoothDenoise {
  int window = 3;
  friend bool operator==(const SmoothDenoise&, const SmoothDenoise&) = default;
};

using DefenseStep = std::variant<UpsampleX2, DownsampleX2, Rotate, JpegLike, SmoothDenoise>;

/// An ordered pipeline of defense steps; empty means "no defense".
struct DefenseSpec {
  std::vector<DefenseStep> steps;

  /// Throws InvalidArgument on quality outside [1,100], an even or too small
  /// window, or a fixed angle outside [-180,180].
  void validate() const;
  bool empty() const noexcept { return steps.empty(); }
  friend bool operator==(const DefenseSpec&, const DefenseSpec&) = default;
};

/// Grammar: "none" or steps joined by '+', each one of "upsample_x2",
/// "downsample_x2", "rotate:<deg>", "rotate:uniform:<seed>", "jpeg:<quality>",
/// "denoise:<window>".
DefenseSpec parse_defense_spec(std::string_view text);
std::string to_string(const DefenseSpec& spec);

/// Bilinear resize with symmetric edges; output dims are round(dim * factor).
/// Throws ModalityMismatch for audio, OddDimsForDownsample for factor 0.5 on odd dims.
MediaTensor resize(const MediaTensor& img, double factor);
/// Bilinear resize to an explicit size with texel-center alignment.
MediaTensor resize_to(const MediaTensor& img, Index height, Index width);

/// Rotation about the image center by inverse mapping; uncovered pixels are 0.
/// Positive angles turn the picture counter-clockwise as displayed.
MediaTensor rotate(const MediaTensor& img, double angle_deg);

/// Lossy DCT quantization with the standard luminance table scaled by quality.
MediaTensor jpeg_like(const MediaTensor& img, int quality);
/// Quantization step (in [0,1] value units) of coefficient (u, v) at `quality`.
double jpeg_quant_step(int u, int v, int quality);

/// Mean filter of odd `window` (window x window for images) with symmetric padding.
MediaTensor smooth_denoise(const MediaTensor& media, int window);

struct DefenseOutcome {
  MediaTensor media;
  /// The pipeline as actually applied, drawn angles resolved, e.g. "rotate:-37.5".
  std::string applied;
};

/// Runs the pipeline. Drawn rotation angles come from Rng(mix_seed(seed, sample_seed)).
DefenseOutcome apply_defense(const MediaTensor& media, const DefenseSpec& spec,
                             std::uint64_t sample_seed = 0);

}  // namespace crossfire
