#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "crossfire/numerics.hpp"

namespace crossfire {

enum class MediaKind { Image, Audio };

/// Dimensions of a media tensor. Images are channel-major (C, H, W) with
/// C in {1, 3}; audio is stored as (1, 1, N).
struct MediaShape {
  MediaKind kind = MediaKind::Image;
  Index channels = 0;
  Index height = 0;
  Index width = 0;

  static MediaShape image(Index c, Index h, Index w);
  static MediaShape audio(Index samples);

  Index size() const noexcept { return channels * height * width; }
  Index samples() const noexcept { return width; }
  double lower() const noexcept { return kind == MediaKind::Image ? 0.0 : -1.0; }
  double upper() const noexcept { return 1.0; }

  friend bool operator==(const MediaShape&, const MediaShape&) = default;
};

std::string to_string(const MediaShape& shape);

/// An image or audio clip whose every element lies in the kind's value range
/// ([0,1] for images, [-1,1] for audio). Immutable once built.
class MediaTensor {
 public:
  static constexpr std::uint32_t kDefaultSampleRate = 16000;

  /// Throws ShapeMismatch on a length mismatch and OutOfRange if any element
  /// falls outside the value range (NaN included).
  MediaTensor(MediaShape shape, Vector data, std::uint32_t sample_rate = kDefaultSampleRate);

  const MediaShape& shape() const noexcept { return shape_; }
  MediaKind kind() const noexcept { return shape_.kind; }
  const Vector& data() const noexcept { return data_; }
  std::uint32_t sample_rate() const noexcept { return sample_rate_; }

  double at(Index c, Index y, Index x) const { return data_((c * shape_.height + y) * shape_.width + x); }
  double operator[](Index i) const { return data_(i); }

  /// Same shape and metadata, new values (checked like the constructor).
  MediaTensor with_data(Vector data) const;

  friend bool operator==(const MediaTensor& a, const MediaTensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  MediaShape shape_;
  Vector data_;
  std::uint32_t sample_rate_;
};

/// Projects raw values onto the value range of `shape.kind`.
MediaTensor clamp_to_range(const MediaShape& shape, Vector raw,
                           std::uint32_t sample_rate = MediaTensor::kDefaultSampleRate);
/// Identity on valid tensors; present so the projection reads the same at every call site.
MediaTensor clamp_to_range(const MediaTensor& t);

enum class MediaFormat { PpmP6, WavPcm16Mono };

/// A file path whose format was established from its magic bytes.
struct MediaPath {
  std::filesystem::path path;
  MediaFormat format;

  /// Reads the leading bytes of `path`; extension is ignored.
  static MediaPath probe(const std::filesystem::path& path);
};

MediaFormat detect_format(std::span<const std::uint8_t> bytes);

MediaTensor decode_ppm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_ppm(const MediaTensor& img);
MediaTensor decode_wav(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_wav(const MediaTensor& audio);

MediaTensor load_image(const std::filesystem::path& path);
void save_image(const MediaTensor& img, const std::filesystem::path& path);
MediaTensor load_audio(const std::filesystem::path& path);
void save_audio(const MediaTensor& audio, const std::filesystem::path& path);

/// Loads either format by sniffing magic bytes.
MediaTensor load_media(const MediaPath& path);
/// Writes PPM for images and WAV for audio.
void save_media(const MediaTensor& t, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace crossfire
